#pragma once

#include <taintflow/ir.h>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace taintflow {

/// A call site together with the method that contains it.
struct CallSite {
  StmtId stmt;
  MethodId caller;

  friend auto operator<=>(const CallSite&, const CallSite&) = default;
  friend bool operator==(const CallSite&, const CallSite&) = default;
};

/// Resolved interprocedural edges. Every call statement is either in
/// `edges` (with a non-empty callee list sorted by qualified name) or in
/// `externals`.
class CallGraph {
 public:
  const std::vector<MethodId>* callees(StmtId call) const;
  bool is_external(StmtId call) const { return externals_.count(call) != 0; }
  const std::set<StmtId>& externals() const { return externals_; }
  const std::map<StmtId, std::vector<MethodId>>& edges() const {
    return edges_;
  }

  /// Resolved call sites that may dispatch to `callee`, ordered by id.
  const std::vector<CallSite>& callers(MethodId callee) const;

  /// `caller_stmt_id -> callee_qname` lines, sorted; externals render as
  /// `id -> name (external)`.
  std::string dump(const Program& program) const;

 private:
  friend CallGraph build_callgraph(const Program& program);

  std::map<StmtId, std::vector<MethodId>> edges_;
  std::set<StmtId> externals_;
  std::map<MethodId, std::vector<CallSite>> callers_;
};

/// Direct calls resolve by qualified name. Virtual calls resolve by class
/// hierarchy analysis, narrowed to a single dispatch target when the
/// receiver's SSA definition chain (through copies and phis) reaches a
/// unique `new T`. Candidates whose arity does not match are skipped; a call
/// with no candidate is external. Requires an SSA-form program.
CallGraph build_callgraph(const Program& program);

} // namespace taintflow
