#pragma once

#include <taintflow/access_path.h>
#include <taintflow/analysis.h>
#include <taintflow/callgraph.h>
#include <taintflow/ir.h>
#include <taintflow/taint_spec.h>

#include <memory>
#include <string>
#include <string_view>

namespace taintflow::test {

std::string data_path(std::string_view name);
std::string read_file(const std::string& path);

/// Spec used by the hand-written programs: getTainted is an XSS source and
/// argument 0 of sink is an XSS sink.
std::string default_spec();

/// A program prepared for analysis together with its call graph and roles.
/// Members refer to each other, so instances live behind a unique_ptr.
class Loaded {
 public:
  Loaded(Program prepared, const std::string& spec_json);
  Loaded(const Loaded&) = delete;
  Loaded& operator=(const Loaded&) = delete;

  Program program;
  CallGraph callgraph;
  TaintSpec spec;
  TaintRoles roles;
  /// Outlives every result produced by `run_analysis`.
  mutable AccessPathFactory paths;
};

/// Parses, prepares and resolves `ir` (text, not a path).
std::unique_ptr<Loaded> load(std::string_view ir,
                             const std::string& spec_json = default_spec());
std::unique_ptr<Loaded> load_file(std::string_view data_name,
                                  const std::string& spec_json =
                                      default_spec());

/// First statement of `method` whose printed form equals `text`.
StmtId stmt(const Program& program, std::string_view method,
            std::string_view text);

/// Full client run with default options unless given.
AnalysisResult run_analysis(const Loaded& loaded,
                            const AnalysisOptions& options = {});

} // namespace taintflow::test
