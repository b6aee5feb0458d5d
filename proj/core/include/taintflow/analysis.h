#pragma once

#include <taintflow/access_path.h>
#include <taintflow/callgraph.h>
#include <taintflow/ir.h>
#include <taintflow/solver.h>
#include <taintflow/taint_spec.h>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace taintflow {

struct AnalysisOptions {
  SolverConfig solver;
  unsigned jobs = 1;
  bool traces = true;
};

struct Finding {
  StmtId sink;
  std::size_t arg = 0;
  StmtId source;
  std::set<Symbol> labels;
  std::vector<TraceStep> trace;
};

/// Outcome of one (sink, arg, label) query.
struct QueryOutcome {
  SinkQuery query;
  std::optional<std::string> error; // set when the budget ran out
  ReachabilityResult result;
};

struct AnalysisResult {
  std::vector<Finding> findings;
  std::vector<QueryOutcome> queries;
  /// Rendered summaries of every query, sorted and unique. A ` [LABEL]`
  /// suffix is added when the spec has more than one label.
  std::vector<std::string> summaries;
};

/// A reached source before label aggregation.
struct RawFinding {
  StmtId sink;
  std::size_t arg = 0;
  StmtId source;
  Symbol label;

  friend auto operator<=>(const RawFinding&, const RawFinding&) = default;
  friend bool operator==(const RawFinding&, const RawFinding&) = default;
};

/// Aggregates labels per (sink, arg, source), then keeps one finding per
/// (sink, source, label set) with the smallest argument index. Sorted by
/// sink, source, argument. Traces are left empty.
std::vector<Finding> aggregate_findings(const std::vector<RawFinding>& raw);

/// Runs one backward query per sink argument and label. Queries are
/// independent and run on up to `options.jobs` threads; the result does not
/// depend on the thread count.
AnalysisResult analyze(const Program& program,
                       const CallGraph& callgraph,
                       const TaintRoles& roles,
                       AccessPathFactory& paths,
                       const AnalysisOptions& options = {});

/// JSON array of {sink_stmt, sink_arg, source_stmt, labels, trace}.
std::string render_json(const std::vector<Finding>& findings);

/// Human-readable report with source lines and printed statements.
std::string render_text(const std::vector<Finding>& findings,
                        const Program& program);

} // namespace taintflow
