#pragma once

#include <taintflow/access_path.h>
#include <taintflow/ir.h>

#include <functional>
#include <stdexcept>
#include <vector>

namespace taintflow {

/// Which transfer rule produced a FlowResult. The numbered cases are the
/// allocation/assignment/source/load/store rules; the rest are extensions.
enum class FlowCase {
  Identity = 0,
  Alloc = 1,
  Assign = 2,
  Source = 3,
  Load = 4,
  Store = 5,
  Const = 6,
  BinOp = 7,
  Phi = 8,
  Sanitizer = 9,
};

const char* to_string(FlowCase c);

/// True for the five rules whose fanout is bounded by 2.
inline bool is_core_case(FlowCase c) {
  return c == FlowCase::Alloc || c == FlowCase::Assign ||
      c == FlowCase::Source || c == FlowCase::Load || c == FlowCase::Store;
}

struct FlowResult {
  std::vector<Fact> facts;
  FlowCase applied = FlowCase::Identity;
};

class FlowError : public std::logic_error {
  using std::logic_error::logic_error;
};

/// Inputs shared by the backward transfer functions of one method.
struct FlowContext {
  const Program& program;
  const Method& method;
  AccessPathFactory& paths;
  KConfig k;
  /// Decides whether a call statement is a taint source for the current
  /// query. Unset means no call is a source.
  std::function<bool(const Statement&)> is_source;
};

/// Fully reified access `base.fields` touched by a load or store.
struct ReifiedAccess {
  Symbol base;
  std::vector<Symbol> fields;

  friend bool operator==(const ReifiedAccess&, const ReifiedAccess&) =
      default;
};

/// Follows the SSA definition of `var` while it is a load, prepending the
/// loaded fields: with `tmp1 = y.f; tmp2 = tmp1.g`, `reify(tmp2, h)` is
/// `y.f.g.h`. Parameters and phi-defined variables stop the walk. The
/// length is not k-checked here.
ReifiedAccess reify(Symbol var, Symbol field, const Program& program,
                    const Method& method);

/// Backward transfer for an intra-procedural statement: which facts must
/// hold before `stmt` for `incoming` to hold after it. Calls are accepted
/// only when `ctx.is_source` says they are sources; other calls, returns
/// and phis throw FlowError.
FlowResult flow(const Statement& stmt, AccessPath incoming,
                const FlowContext& ctx);

/// Backward transfer through one phi along the edge from `pred_label`.
/// Throws FlowError if `pred_label` is not an incoming label.
FlowResult flow_phi(const Statement& phi, AccessPath incoming,
                    Symbol pred_label, AccessPathFactory& paths);

/// Backward transfer through a sanitizer call: anything rooted at the
/// sanitized result is killed.
FlowResult flow_sanitizer(const Statement& stmt, AccessPath incoming);

} // namespace taintflow
