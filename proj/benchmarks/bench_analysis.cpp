#include <taintflow/analysis.h>
#include <taintflow/callgraph.h>
#include <taintflow/generator.h>
#include <taintflow/oracle.h>
#include <taintflow/parser.h>
#include <taintflow/ssa.h>
#include <taintflow/taint_spec.h>

#include <benchmark/benchmark.h>

#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace taintflow;

constexpr const char* kSpec = R"({
  "sources": [{"method": "getTainted", "labels": ["XSS"]}],
  "sinks": [{"method": "sink", "arg": 0, "labels": ["XSS"]}]
})";

constexpr const char* kBox = R"(#ssa
type Box { field f; }
method Box.put(this, str) { L0: this.f = str; return; }
method Box.get(this) { L0: str = this.f; return str; }
method copy(box) {
  L0:
    cpy = new Box;
    data = vcall box.get();
    vcall cpy.put(data);
    return cpy;
}
method foo() {
  L0:
    tainted = call getTainted();
    box1 = new Box;
    vcall box1.put(tainted);
    box2 = call copy(box1);
    boxData = vcall box2.get();
    call sink(boxData);
    return;
}
)";

struct Prepared {
  Prepared(std::string_view ir, std::string_view spec_json)
      : program(prepare_program(parse_program(ir))),
        callgraph(build_callgraph(program)),
        spec(parse_spec(spec_json)),
        roles(program, callgraph, spec) {}

  Program program;
  CallGraph callgraph;
  TaintSpec spec;
  TaintRoles roles;
};

const std::vector<std::unique_ptr<Prepared>>& corpus() {
  static const auto programs = [] {
    std::vector<std::unique_ptr<Prepared>> out;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      out.push_back(std::make_unique<Prepared>(generate_program(seed),
                                               corpus_spec_json()));
    }
    return out;
  }();
  return programs;
}

/// `main` reaches a sink through a chain of `depth` wrappers; `noise`
/// unrelated methods carry their own sources and heap traffic but
/// no sinks.
std::string chain_program(int depth, int noise) {
  std::ostringstream out;
  out << "type T { field f; }\n";
  out << "method main() {\n  L0:\n    t = call getTainted();\n"
         "    o = call w0(t);\n    v = o.f;\n    call sink(v);\n"
         "    return;\n}\n";
  for (int i = 0; i < depth; ++i) {
    out << "method w" << i << "(x) {\n  L0:\n";
    if (i + 1 < depth) {
      out << "    o = call w" << i + 1 << "(x);\n";
    } else {
      out << "    o = new T;\n    o.f = x;\n";
    }
    out << "    return o;\n}\n";
  }
  for (int i = 0; i < noise; ++i) {
    out << "method u" << i << "(a) {\n  L0:\n    s = call getTainted();\n"
        << "    n = new T;\n    n.f = s;\n    r = n.f;\n"
        << "    return r;\n}\n";
  }
  return out.str();
}

void BM_BoxExample(benchmark::State& state) {
  Prepared p(kBox, kSpec);
  for (auto _ : state) {
    AccessPathFactory paths;
    auto result = analyze(p.program, p.callgraph, p.roles, paths);
    benchmark::DoNotOptimize(result.findings.data());
  }
}
BENCHMARK(BM_BoxExample);

void BM_CorpusBackward(benchmark::State& state) {
  AnalysisOptions options;
  options.solver.skip_identity = state.range(0) != 0;
  options.traces = false;
  std::size_t edges = 0;
  for (auto _ : state) {
    edges = 0;
    for (const auto& p : corpus()) {
      AccessPathFactory paths;
      auto result = analyze(p->program, p->callgraph, p->roles, paths, options);
      for (const auto& q : result.queries) {
        edges += q.result.stats.edges_materialized;
      }
    }
  }
  state.counters["edges"] = static_cast<double>(edges);
}
BENCHMARK(BM_CorpusBackward)->ArgName("skip")->Arg(0)->Arg(1);

void BM_CorpusOracle(benchmark::State& state) {
  for (auto _ : state) {
    for (const auto& p : corpus()) {
      auto raw = oracle_findings(p->program, p->callgraph, p->roles);
      benchmark::DoNotOptimize(raw.data());
    }
  }
}
BENCHMARK(BM_CorpusOracle);

void BM_ChainDepth(benchmark::State& state) {
  Prepared p(chain_program(static_cast<int>(state.range(0)), 0), kSpec);
  for (auto _ : state) {
    AccessPathFactory paths;
    auto result = analyze(p.program, p.callgraph, p.roles, paths);
    benchmark::DoNotOptimize(result.findings.data());
  }
}
BENCHMARK(BM_ChainDepth)->RangeMultiplier(4)->Range(1, 256);

/// One query against a growing number of unrelated methods: the backward
/// solver's cost should stay flat while the forward oracle's grows.
void BM_UnrelatedCodeBackward(benchmark::State& state) {
  Prepared p(chain_program(3, static_cast<int>(state.range(0))), kSpec);
  for (auto _ : state) {
    AccessPathFactory paths;
    auto result = analyze(p.program, p.callgraph, p.roles, paths);
    benchmark::DoNotOptimize(result.findings.data());
  }
}
BENCHMARK(BM_UnrelatedCodeBackward)->RangeMultiplier(4)->Range(1, 1024);

void BM_UnrelatedCodeOracle(benchmark::State& state) {
  Prepared p(chain_program(3, static_cast<int>(state.range(0))), kSpec);
  for (auto _ : state) {
    auto raw = oracle_findings(p.program, p.callgraph, p.roles);
    benchmark::DoNotOptimize(raw.data());
  }
}
BENCHMARK(BM_UnrelatedCodeOracle)->RangeMultiplier(4)->Range(1, 1024);

} // namespace

BENCHMARK_MAIN();
