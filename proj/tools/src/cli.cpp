#include <taintflow_cli/cli.h>

#include <taintflow/analysis.h>
#include <taintflow/callgraph.h>
#include <taintflow/generator.h>
#include <taintflow/oracle.h>
#include <taintflow/parser.h>
#include <taintflow/ssa.h>
#include <taintflow/taint_spec.h>

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace taintflow::cli {

namespace {

std::string version_line() {
  return std::string("taintflow ") + TAINTFLOW_VERSION +
      " (default k=" + std::to_string(KConfig{}.k) + ")";
}

struct InputFile {
  std::string path;
  int first_line; // 1-based line in the concatenated text
};

/// Concatenates the inputs, parses them as one program and brings it into
/// SSA form. Error locations are mapped back to the originating file.
Program load_program(const std::vector<std::string>& paths) {
  std::string text;
  std::vector<InputFile> files;
  int line = 1;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) {
      throw std::runtime_error(path + ": cannot open input file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string content = buffer.str();
    if (!content.empty() && content.back() != '\n') {
      content += '\n';
    }
    files.push_back(InputFile{path, line});
    line += static_cast<int>(std::count(content.begin(), content.end(), '\n'));
    text += content;
  }
  try {
    return prepare_program(parse_program(text));
  } catch (const IrError& e) {
    std::string message = e.what();
    if (e.line() <= 0) {
      std::string where = paths.size() == 1 ? paths.front() : "input";
      throw std::runtime_error(where + ": " + message);
    }
    auto colon = message.find(": ");
    if (colon != std::string::npos) {
      message = message.substr(colon + 2);
    }
    const InputFile* file = &files.front();
    for (const auto& f : files) {
      if (f.first_line <= e.line()) {
        file = &f;
      }
    }
    throw std::runtime_error(file->path + ":" +
                             std::to_string(e.line() - file->first_line + 1) +
                             ":" + std::to_string(e.column()) + ": " +
                             message);
  }
}

struct AnalysisFlags {
  std::vector<std::string> files;
  std::string spec;
  int k = KConfig{}.k;
  std::string external_model = "taint-through";
  std::string format = "json";
  std::uint64_t budget = SolverConfig{}.budget;
  bool no_skip_identity = false;
  bool dump_summaries = false;
  bool dump_callgraph = false;
  bool trace_flows = false;
  unsigned jobs = 1;
};

void add_common(CLI::App* cmd, AnalysisFlags& flags) {
  cmd->add_option("files", flags.files, "IR input files")->required();
  cmd->add_option("--spec", flags.spec, "Taint specification (JSON)")
      ->required();
  cmd->add_option("--k", flags.k, "Access-path length bound")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--external-model", flags.external_model,
                  "Model for calls without a body")
      ->check(CLI::IsMember({"taint-through", "opaque"}));
  cmd->add_option("--format", flags.format, "Report format")
      ->check(CLI::IsMember({"json", "text"}));
}

ExternalModel model_of(const std::string& name) {
  return name == "opaque" ? ExternalModel::Opaque
                          : ExternalModel::TaintThrough;
}

std::string render(const std::vector<Finding>& findings,
                   const Program& program, const std::string& format) {
  if (format == "text") {
    return render_text(findings, program);
  }
  return render_json(findings) + "\n";
}

int run_analyze(const AnalysisFlags& flags, std::ostream& out,
                std::ostream& err) {
  Program program = load_program(flags.files);
  TaintSpec spec = load_spec(flags.spec);
  CallGraph callgraph = build_callgraph(program);
  TaintRoles roles(program, callgraph, spec);
  if (flags.dump_callgraph) {
    err << callgraph.dump(program);
  }

  AnalysisOptions options;
  options.solver.k = KConfig(flags.k);
  options.solver.skip_identity = !flags.no_skip_identity;
  options.solver.external_model = model_of(flags.external_model);
  options.solver.budget = flags.budget;
  options.jobs = flags.jobs;
  if (flags.trace_flows) {
    options.solver.flow_log = [&err](const std::string& line) {
      err << line << "\n";
    };
  }

  AccessPathFactory paths;
  AnalysisResult result = analyze(program, callgraph, roles, paths, options);
  for (const auto& q : result.queries) {
    if (q.error) {
      err << "warning: query at statement " << q.query.stmt.value << " arg "
          << q.query.arg << " [" << q.query.label.str()
          << "] abandoned: " << *q.error << "\n";
    }
  }
  if (flags.dump_summaries) {
    for (const auto& line : result.summaries) {
      err << line << "\n";
    }
  }
  out << render(result.findings, program, flags.format);
  return result.findings.empty() ? kClean : kFindings;
}

int run_oracle(const AnalysisFlags& flags, std::ostream& out) {
  Program program = load_program(flags.files);
  TaintSpec spec = load_spec(flags.spec);
  CallGraph callgraph = build_callgraph(program);
  TaintRoles roles(program, callgraph, spec);
  OracleOptions options;
  options.k = KConfig(flags.k);
  options.external_model = model_of(flags.external_model);
  auto findings = oracle_analyze(program, callgraph, roles, options);
  out << render(findings, program, flags.format);
  return findings.empty() ? kClean : kFindings;
}

struct GenFlags {
  std::uint64_t seed = 0;
  unsigned count = 1;
  GenLimits limits;
  bool no_loops = false;
  bool no_recursion = false;
  std::string out_dir;
  bool print_spec = false;
};

int run_gen(const GenFlags& flags, std::ostream& out) {
  if (flags.print_spec) {
    out << corpus_spec_json();
    return kClean;
  }
  GenLimits limits = flags.limits;
  limits.loops = !flags.no_loops;
  limits.recursion = !flags.no_recursion;
  if (flags.out_dir.empty()) {
    for (unsigned i = 0; i < flags.count; ++i) {
      out << generate_program(flags.seed + i, limits);
    }
    return kClean;
  }
  std::filesystem::create_directories(flags.out_dir);
  for (unsigned i = 0; i < flags.count; ++i) {
    auto path = std::filesystem::path(flags.out_dir) /
        ("gen_" + std::to_string(flags.seed + i) + ".ir");
    std::ofstream file(path);
    if (!file) {
      throw std::runtime_error(path.string() + ": cannot write");
    }
    file << generate_program(flags.seed + i, limits);
    out << path.string() << "\n";
  }
  return kClean;
}

int run_check(const std::vector<std::string>& files, std::ostream& out) {
  Program program = load_program(files);
  out << "ok: " << program.methods.size() << " methods, "
      << program.statement_count() << " statements\n";
  return kClean;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Demand-driven backward taint analysis", "taintflow"};
  app.set_version_flag("--version", version_line());
  app.require_subcommand(1);

  AnalysisFlags analyze_flags;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "Report source-to-sink flows");
  add_common(analyze_cmd, analyze_flags);
  analyze_cmd->add_option("--budget", analyze_flags.budget,
                          "Worklist pops allowed per query")
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--jobs", analyze_flags.jobs,
                          "Queries solved in parallel")
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_flag("--no-skip-identity", analyze_flags.no_skip_identity,
                        "Materialize every identity edge");
  analyze_cmd->add_flag("--dump-summaries", analyze_flags.dump_summaries,
                        "Print computed summaries to stderr");
  analyze_cmd->add_flag("--dump-callgraph", analyze_flags.dump_callgraph,
                        "Print resolved call edges to stderr");
  analyze_cmd->add_flag("--trace-flows", analyze_flags.trace_flows,
                        "Log every flow-function application to stderr");

  AnalysisFlags oracle_flags;
  auto* oracle_cmd = app.add_subcommand(
      "oracle", "Report flows found by exhaustive forward propagation");
  add_common(oracle_cmd, oracle_flags);

  GenFlags gen_flags;
  auto* gen_cmd = app.add_subcommand("gen", "Generate random test programs");
  gen_cmd->add_option("--seed", gen_flags.seed, "First seed");
  gen_cmd->add_option("--count", gen_flags.count, "Number of programs");
  gen_cmd->add_option("--methods", gen_flags.limits.methods)
      ->check(CLI::Range(1, 6));
  gen_cmd->add_option("--blocks", gen_flags.limits.blocks)
      ->check(CLI::Range(1, 4));
  gen_cmd->add_option("--fields", gen_flags.limits.fields)
      ->check(CLI::Range(1, 3));
  gen_cmd->add_flag("--no-loops", gen_flags.no_loops);
  gen_cmd->add_flag("--no-recursion", gen_flags.no_recursion);
  gen_cmd->add_option("--out-dir", gen_flags.out_dir,
                      "Write gen_<seed>.ir files here instead of stdout");
  gen_cmd->add_flag("--print-spec", gen_flags.print_spec,
                    "Print the taint spec matching generated programs");

  std::vector<std::string> check_files;
  auto* check_cmd =
      app.add_subcommand("check", "Parse and validate SSA form only");
  check_cmd->add_option("files", check_files, "IR input files")->required();

  std::vector<std::string> argv_storage{"taintflow"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) {
    argv.push_back(a.data());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kClean : kError;
  }

  try {
    if (*analyze_cmd) {
      return run_analyze(analyze_flags, out, err);
    }
    if (*oracle_cmd) {
      return run_oracle(oracle_flags, out);
    }
    if (*gen_cmd) {
      return run_gen(gen_flags, out);
    }
    if (*check_cmd) {
      return run_check(check_files, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

} // namespace taintflow::cli
