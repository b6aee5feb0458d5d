#include <taintflow/taint_spec.h>

#include <gtest/gtest.h>

#include "fixture.h"

namespace taintflow {
namespace {

TEST(TaintSpecTest, DefaultSpec) {
  TaintSpec spec = load_spec(test::data_path("default_spec.json"));
  ASSERT_EQ(spec.sources.size(), 1u);
  ASSERT_EQ(spec.sinks.size(), 1u);
  EXPECT_EQ(spec.sources[0].method, Symbol("getTainted"));
  EXPECT_EQ(spec.sinks[0].method, Symbol("sink"));
  EXPECT_EQ(spec.sinks[0].arg, 0u);
  EXPECT_EQ(spec.labels(), std::set<Symbol>{Symbol("XSS")});
}

TEST(TaintSpecTest, EmptySourcesIsValid) {
  TaintSpec spec = parse_spec(
      R"({"sources": [], "sinks": [{"method": "sink", "labels": ["XSS"]}]})");
  EXPECT_TRUE(spec.sources.empty());
  auto loaded = test::load_file("box.ir", R"({"sources": [],
      "sinks": [{"method": "sink", "labels": ["XSS"]}]})");
  EXPECT_TRUE(test::run_analysis(*loaded).findings.empty());
}

TEST(TaintSpecTest, Malformed) {
  try {
    parse_spec("{\"sources\": [", "spec.json");
    FAIL() << "expected SpecError";
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("spec.json"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
  EXPECT_THROW(parse_spec("[]"), SpecError);
  EXPECT_THROW(load_spec(test::data_path("no_such_spec.json")), SpecError);
}

TEST(TaintSpecTest, RejectsUnknownKeysAndBadEntries) {
  EXPECT_THROW(parse_spec(R"({"source": []})"), SpecError);
  EXPECT_THROW(
      parse_spec(R"({"sources": [{"method": "a", "labels": ["X"], "x": 1}]})"),
      SpecError);
  EXPECT_THROW(parse_spec(R"({"sources": [{"method": "a", "labels": []}]})"),
               SpecError);
  EXPECT_THROW(parse_spec(R"({"sources": [{"labels": ["X"]}]})"), SpecError);
  EXPECT_THROW(
      parse_spec(R"({"sinks": [{"method": "s", "arg": -1, "labels": ["X"]}]})"),
      SpecError);
  EXPECT_THROW(parse_spec(R"({"sanitizers": {}})"), SpecError);
}

TEST(TaintSpecTest, ErrorNamesLocation) {
  try {
    parse_spec(R"({"sinks": [{"method": "s", "labels": ["X"]},
                            {"method": "t", "labels": [""]}]})",
               "s.json");
    FAIL() << "expected SpecError";
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("sinks[1].labels[0]"),
              std::string::npos)
        << e.what();
  }
}

constexpr const char* kRolesProgram = R"(
type A { field f; }
method A.read(this) { L0: return this; }
method A.clean(this, x) { L0: return x; }
method main() {
  L0:
    a = new A;
    s = vcall a.read();
    c = vcall a.clean(s);
    e = call Util.fetch();
    call sink(c, s);
    call sink(e);
    return;
}
)";

TEST(TaintSpecTest, RolesAndPrecedence) {
  auto loaded = test::load(kRolesProgram, R"({
    "sources": [{"method": "A.read", "labels": ["X"]},
                {"method": "fetch", "labels": ["Y"]},
                {"method": "A.clean", "labels": ["Y"]}],
    "sinks": [{"method": "sink", "arg": 1, "labels": ["X", "Y"]}],
    "sanitizers": [{"method": "A.clean", "labels": ["X", "Y"]}]
  })");
  const Program& p = loaded->program;
  const Symbol x("X"), y("Y");
  const auto& read = p.statement(test::stmt(p, "main", "s = vcall a.read();"));
  const auto& clean =
      p.statement(test::stmt(p, "main", "c = vcall a.clean(s);"));
  const auto& fetch =
      p.statement(test::stmt(p, "main", "e = call Util.fetch();"));
  // Resolved targets match by qualified name.
  EXPECT_EQ(loaded->roles.role(read, x), CallRole::Source);
  EXPECT_EQ(loaded->roles.role(read, y), CallRole::Resolved);
  EXPECT_EQ(loaded->roles.role(clean, x), CallRole::Sanitizer);
  // Source wins over sanitizer.
  EXPECT_EQ(loaded->roles.role(clean, y), CallRole::Source);
  // Externals fall back to the bare name.
  EXPECT_EQ(loaded->roles.role(fetch, y), CallRole::Source);
  EXPECT_EQ(loaded->roles.role(fetch, x), CallRole::External);

  // The one-argument sink call has no argument 1.
  const auto& queries = loaded->roles.sink_queries();
  ASSERT_EQ(queries.size(), 2u);
  const StmtId sink = test::stmt(p, "main", "call sink(c, s);");
  EXPECT_EQ(queries[0], (SinkQuery{sink, 1, x}));
  EXPECT_EQ(queries[1], (SinkQuery{sink, 1, y}));
}

} // namespace
} // namespace taintflow
