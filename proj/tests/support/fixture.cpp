#include "fixture.h"

#include <taintflow/parser.h>
#include <taintflow/ssa.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace taintflow::test {

std::string data_path(std::string_view name) {
  return std::string(TAINTFLOW_TEST_DATA) + "/" + std::string(name);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string default_spec() {
  return read_file(data_path("default_spec.json"));
}

Loaded::Loaded(Program prepared, const std::string& spec_json)
    : program(std::move(prepared)),
      callgraph(build_callgraph(program)),
      spec(parse_spec(spec_json)),
      roles(program, callgraph, spec) {}

std::unique_ptr<Loaded> load(std::string_view ir,
                             const std::string& spec_json) {
  return std::make_unique<Loaded>(prepare_program(parse_program(ir)),
                                  spec_json);
}

std::unique_ptr<Loaded> load_file(std::string_view data_name,
                                  const std::string& spec_json) {
  return load(read_file(data_path(data_name)), spec_json);
}

StmtId stmt(const Program& program, std::string_view method,
            std::string_view text) {
  auto id = program.find_method(Symbol(method));
  if (!id) {
    throw std::runtime_error("no method " + std::string(method));
  }
  for (const auto& block : program.method(*id).blocks) {
    for (const auto& s : block.stmts) {
      if (print_statement(s) == text) {
        return s.id;
      }
    }
  }
  throw std::runtime_error("no statement '" + std::string(text) + "' in " +
                           std::string(method));
}

AnalysisResult run_analysis(const Loaded& loaded,
                            const AnalysisOptions& options) {
  return analyze(loaded.program, loaded.callgraph, loaded.roles, loaded.paths,
                 options);
}

} // namespace taintflow::test
