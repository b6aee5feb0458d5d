#pragma once

#include <taintflow/access_path.h>
#include <taintflow/callgraph.h>
#include <taintflow/flow_functions.h>
#include <taintflow/ir.h>
#include <taintflow/taint_spec.h>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace taintflow {

/// Pseudo-variable naming a callee's return value in exit facts.
Symbol return_variable();

enum class ExternalModel {
  TaintThrough, // result facts flow back to every actual argument
  Opaque,       // result facts are dropped
};

struct SolverConfig {
  KConfig k;
  bool skip_identity = true;
  ExternalModel external_model = ExternalModel::TaintThrough;
  std::uint64_t budget = 10'000'000; // worklist pops
  /// When set, receives one line per flow-function invocation.
  std::function<void(const std::string&)> flow_log;
  /// Records statement/exit/entry visit events in the result.
  bool record_visits = false;
};

class BudgetExceeded : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class InvalidSummary : public std::logic_error {
  using std::logic_error::logic_error;
};

class TraceCorrupt : public std::logic_error {
  using std::logic_error::logic_error;
};

/// A demand: `fact` holds immediately before statement `stmt`.
struct Query {
  StmtId stmt;
  AccessPath fact;
};

struct SummaryRecord {
  MethodId method;
  Fact exit_fact;                 // callee-side, at method exit
  std::vector<Fact> entry_facts;  // callee-side, at method entry; 0 if a
                                  // source is reached inside
  std::set<StmtId> sources;

  /// `Box.get: <ret> <- {this.f}` with parameters renamed to this/argN.
  std::string render(const Program& program) const;
};

/// Canonical callee-side rendering: receiver `this`, other parameters
/// `arg0`, `arg1`, ... and the return pseudo-variable `<ret>`.
std::string render_canonical(Fact fact, const Method& method);

struct VisitEvent {
  enum class Kind { Statement, Exit, Entry };
  Kind kind;
  StmtId stmt;     // Statement
  MethodId method; // Exit / Entry
};

struct SolverStats {
  std::uint64_t worklist_pops = 0;
  std::uint64_t edges_materialized = 0;
  std::uint64_t flow_invocations = 0;
  std::size_t nodes = 0;
  std::size_t max_core_fanout = 0; // over allocation/assign/source/load/store
  std::set<MethodId> methods_visited;
};

struct TraceStep {
  StmtId stmt;
  Fact fact;
};

class TabulationState;

struct ReachabilityResult {
  bool reachable = false;
  std::vector<StmtId> sources; // sorted
  std::vector<SummaryRecord> summaries;
  SolverStats stats;
  std::vector<VisitEvent> visits;
  std::shared_ptr<const TabulationState> state;
};

/// Demand-driven backward tabulation for one taint label.
///
/// Exploded-supergraph edges are built lazily as worklist items demand
/// them. Phis are applied per incoming CFG edge. Call sites look up or
/// compute callee summaries keyed by callee-side exit fact and map the
/// entry facts back through the caller's actuals. Reaching the entry of
/// the query's method continues into every resolved caller. A solver
/// instance is single-threaded; instances may share the factory.
class BackwardSolver {
 public:
  BackwardSolver(const Program& program,
                 const CallGraph& callgraph,
                 const TaintRoles& roles,
                 Symbol label,
                 AccessPathFactory& paths,
                 SolverConfig config = {});

  /// Throws BudgetExceeded when the configured pop budget runs out.
  ReachabilityResult solve(const Query& query);

 private:
  const Program& program_;
  const CallGraph& callgraph_;
  const TaintRoles& roles_;
  Symbol label_;
  AccessPathFactory& paths_;
  SolverConfig config_;
};

/// Interprocedurally complete statement sequence from the sink (first) to
/// `source` (last, with fact 0), following first-witness predecessors and
/// descending into callee summaries. Throws TraceCorrupt on a dangling
/// link and std::invalid_argument if `source` was not reached.
std::vector<TraceStep> build_trace(const ReachabilityResult& result,
                                   StmtId source);

/// Caller fact to callee exit facts (one per matching position):
/// result base to `<ret>`, actual base to the matching parameter.
/// Empty when the fact is unrelated to the call.
std::vector<Fact> map_to_callee(const Statement& call, AccessPath caller_fact,
                                const Method& callee,
                                AccessPathFactory& paths);

/// Callee entry fact to caller fact before the call. Zero stays Zero.
/// Throws InvalidSummary when the base is not a parameter.
Fact map_to_caller(const Statement& call, Fact entry_fact,
                   const Method& callee, AccessPathFactory& paths);

/// Backward model for calls without an analyzable body.
std::vector<Fact> handle_external(const Statement& call, AccessPath fact,
                                  ExternalModel model,
                                  AccessPathFactory& paths, KConfig k);

/// The unique CFG predecessor statement of `stmt`, if it has exactly one
/// and no phi sits between them.
std::optional<StmtId> single_predecessor(const Program& program,
                                         StmtId stmt);

/// Whether `stmt` provably maps `fact` to itself (no def or reified store
/// touches its base).
bool is_identity_for(const Program& program, const Statement& stmt,
                     AccessPath fact);

/// Walks backward from `from` through single-predecessor statements that
/// are identity for `fact` and returns the furthest one reached (`from`
/// itself when none). Skipped statements are appended to `chain`.
StmtId skip_identity_chain(const Program& program, StmtId from,
                           AccessPath fact,
                           std::vector<StmtId>* chain = nullptr);

} // namespace taintflow
