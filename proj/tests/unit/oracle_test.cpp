#include <taintflow/generator.h>
#include <taintflow/oracle.h>

#include <gtest/gtest.h>

#include "fixture.h"

namespace taintflow {
namespace {

TEST(OracleTest, ConcatenationProgram) {
  auto loaded = test::load_file("concat.ir");
  const Program& p = loaded->program;
  auto raw = oracle_findings(p, loaded->callgraph, loaded->roles);
  ASSERT_EQ(raw.size(), 1u);
  EXPECT_EQ(raw[0], (RawFinding{test::stmt(p, "start", "call sink(tmp);"), 0,
                                test::stmt(p, "start", "var = call getTainted();"),
                                Symbol("XSS")}));
  auto clean = test::load_file("concat_clean.ir");
  EXPECT_TRUE(
      oracle_findings(clean->program, clean->callgraph, clean->roles).empty());
}

TEST(OracleTest, BoxProgram) {
  auto loaded = test::load_file("box.ir");
  auto findings =
      oracle_analyze(loaded->program, loaded->callgraph, loaded->roles);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].sink,
            test::stmt(loaded->program, "foo", "call sink(boxData);"));
}

TEST(OracleTest, DeadMethodReportsNothing) {
  auto loaded = test::load(R"(
method keep(v) { L0: return; }
method dead(a) {
  L0:
    call sink(a);
    return;
}
method main() {
  L0:
    x = call getTainted();
    call keep(x);
    return;
}
)");
  EXPECT_TRUE(
      oracle_findings(loaded->program, loaded->callgraph, loaded->roles)
          .empty());
}

TEST(OracleTest, SanitizedOnEveryPath) {
  auto loaded = test::load(R"(#ssa
method main(c) {
  L0:
    x = call source1();
    if c goto L1 else L2;
  L1:
    y = call sanitizeXss(x);
    goto L3;
  L2:
    z = call sanitizeXss(x);
    goto L3;
  L3:
    w = phi(L1: y, L2: z);
    call sink1(w);
    call sink2(c, w);
    return;
}
)",
                           corpus_spec_json());
  auto raw = oracle_findings(loaded->program, loaded->callgraph, loaded->roles);
  ASSERT_EQ(raw.size(), 1u);
  EXPECT_EQ(raw[0].label, Symbol("SQLI"));
}

TEST(OracleTest, StarFactsRespectBound) {
  // The source value is tainted under every field path up to k.
  auto loaded = test::load(R"(
type T { field f; }
method main() {
  L0:
    x = call getTainted();
    a = x.f;
    b = a.f;
    call sink(b);
    return;
}
)");
  OracleOptions options;
  options.k = KConfig(2);
  EXPECT_EQ(oracle_findings(loaded->program, loaded->callgraph, loaded->roles,
                            options)
                .size(),
            1u);
  options.k = KConfig(1);
  EXPECT_TRUE(oracle_findings(loaded->program, loaded->callgraph,
                              loaded->roles, options)
                  .empty());
}

TEST(OracleTest, Fixpoint) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto loaded = test::load(generate_program(seed), corpus_spec_json());
    auto a = oracle_findings(loaded->program, loaded->callgraph, loaded->roles);
    auto b = oracle_findings(loaded->program, loaded->callgraph, loaded->roles);
    EXPECT_EQ(a, b);
  }
}

TEST(OracleTest, PathEnumerationAgrees) {
  GenLimits limits;
  limits.loops = false;
  limits.recursion = false;
  limits.methods = 3;
  std::size_t compared = 0;
  std::size_t nonempty = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    SCOPED_TRACE(seed);
    auto loaded = test::load(generate_program(seed, limits), corpus_spec_json());
    for (auto model : {ExternalModel::TaintThrough, ExternalModel::Opaque}) {
      OracleOptions options;
      options.external_model = model;
      options.k = KConfig(seed % 2 ? 5 : 2);
      auto brute = enumerate_findings(loaded->program, loaded->callgraph,
                                      loaded->roles, options);
      if (!brute) {
        continue;
      }
      auto tab = oracle_findings(loaded->program, loaded->callgraph,
                                 loaded->roles, options);
      EXPECT_EQ(*brute, tab);
      ++compared;
      nonempty += !tab.empty();
    }
  }
  EXPECT_GT(compared, 200u);
  EXPECT_GT(nonempty, 50u);
}

TEST(OracleTest, EnumerationRejectsLoops) {
  auto loaded = test::load(R"(
method main(c) {
  L0:
    goto L1;
  L1:
    if c goto L1 else L2;
  L2:
    return;
}
)");
  EXPECT_FALSE(enumerate_findings(loaded->program, loaded->callgraph,
                                  loaded->roles));
}

TEST(OracleTest, MatchesBackwardSolver) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SCOPED_TRACE(seed);
    auto loaded = test::load(generate_program(seed), corpus_spec_json());
    AnalysisOptions options;
    options.traces = false;
    auto backward = test::run_analysis(*loaded, options).findings;
    auto forward =
        oracle_analyze(loaded->program, loaded->callgraph, loaded->roles);
    EXPECT_EQ(render_json(backward), render_json(forward));
  }
}

} // namespace
} // namespace taintflow
