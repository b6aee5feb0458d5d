#pragma once

#include <taintflow/access_path.h>
#include <taintflow/analysis.h>
#include <taintflow/callgraph.h>
#include <taintflow/ir.h>
#include <taintflow/solver.h>
#include <taintflow/taint_spec.h>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace taintflow {

/// Forward-analysis fact. `Path` is one concrete access path; `Star` stands
/// for every path that extends `fields` and has at most `bound` fields in
/// total. Non-zero facts carry the source statement that produced them.
struct ForwardFact {
  enum class Kind : std::uint8_t { Zero, Path, Star };
  Kind kind = Kind::Zero;
  std::uint32_t source = 0;
  Symbol base;
  std::vector<Symbol> fields;
  int bound = 0;

  static ForwardFact zero() { return ForwardFact{}; }
  std::string to_string() const;

  friend auto operator<=>(const ForwardFact&, const ForwardFact&) = default;
  friend bool operator==(const ForwardFact&, const ForwardFact&) = default;
};

struct OracleOptions {
  KConfig k;
  ExternalModel external_model = ExternalModel::TaintThrough;
};

/// Exhaustive forward IFDS tabulation that treats every method as an entry
/// point. It shares no code with the backward solver or its transfer
/// functions. Results are raw (sink, arg, source, label) tuples, sorted and
/// unique.
std::vector<RawFinding> oracle_findings(const Program& program,
                                        const CallGraph& callgraph,
                                        const TaintRoles& roles,
                                        const OracleOptions& options = {});

/// `oracle_findings` aggregated the same way the client aggregates.
std::vector<Finding> oracle_analyze(const Program& program,
                                    const CallGraph& callgraph,
                                    const TaintRoles& roles,
                                    const OracleOptions& options = {});

/// Facts holding at the returns of `method` that derive from `entry` at its
/// start (the zero fact selects what sources inside produce). Return-value
/// facts are rebased onto `<ret>`; parameter-rooted facts are kept.
std::vector<ForwardFact> oracle_exit_facts(const Program& program,
                                           const CallGraph& callgraph,
                                           const TaintRoles& roles,
                                           Symbol label,
                                           MethodId method,
                                           const ForwardFact& entry,
                                           const OracleOptions& options = {});

/// Same question answered by enumerating every interprocedural path with
/// calls inlined. Only for loop-free, non-recursive programs with at most
/// `max_methods` methods; nullopt when the program is out of range or the
/// path count exceeds `max_steps`.
std::optional<std::vector<RawFinding>> enumerate_findings(
    const Program& program,
    const CallGraph& callgraph,
    const TaintRoles& roles,
    const OracleOptions& options = {},
    std::size_t max_methods = 3,
    std::size_t max_steps = 2'000'000);

} // namespace taintflow
