#include <taintflow/generator.h>
#include <taintflow/parser.h>
#include <taintflow/oracle.h>
#include <taintflow/solver.h>

#include <gtest/gtest.h>

#include "fixture.h"

#include <algorithm>

namespace taintflow {
namespace {

ReachabilityResult solve_query(const test::Loaded& loaded,
                               AccessPathFactory& paths, StmtId sink,
                               std::size_t arg = 0,
                               SolverConfig config = {},
                               Symbol label = Symbol("XSS")) {
  BackwardSolver solver(loaded.program, loaded.callgraph, loaded.roles, label,
                        paths, std::move(config));
  const Statement& s = loaded.program.statement(sink);
  return solver.solve(Query{sink, paths.make_variable(s.args.at(arg))});
}

std::vector<std::string> rendered(const ReachabilityResult& r,
                                  const Program& p) {
  std::vector<std::string> out;
  for (const auto& s : r.summaries) {
    out.push_back(s.render(p));
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(SolverTest, BoxProgramSummaries) {
  auto loaded = test::load_file("box.ir");
  const Program& p = loaded->program;
  AccessPathFactory paths;
  auto r = solve_query(*loaded, paths, test::stmt(p, "foo", "call sink(boxData);"));
  EXPECT_TRUE(r.reachable);
  EXPECT_EQ(r.sources, std::vector<StmtId>{test::stmt(
                           p, "foo", "tainted = call getTainted();")});
  EXPECT_EQ(rendered(r, p),
            (std::vector<std::string>{"Box.get: <ret> <- {this.f}",
                                      "Box.put: this.f <- {arg0}",
                                      "copy: <ret>.f <- {arg0.f}"}));
}

TEST(SolverTest, ConcatenationSummary) {
  auto loaded = test::load_file("concat.ir");
  const Program& p = loaded->program;
  AccessPathFactory paths;
  auto r = solve_query(*loaded, paths, test::stmt(p, "start", "call sink(tmp);"));
  EXPECT_TRUE(r.reachable);
  EXPECT_EQ(rendered(r, p),
            std::vector<std::string>{"cat: <ret> <- {arg0, arg1}"});
}

TEST(SolverTest, ConstantInsteadOfSource) {
  std::string text = test::read_file(test::data_path("box.ir"));
  const std::string from = "tainted = call getTainted();";
  text.replace(text.find(from), from.size(), "tainted = \"safe\";");
  auto loaded = test::load(text);
  AccessPathFactory paths;
  auto r = solve_query(*loaded, paths,
                       test::stmt(loaded->program, "foo", "call sink(boxData);"));
  EXPECT_FALSE(r.reachable);
  EXPECT_TRUE(r.sources.empty());
}

class CallMappingTest : public ::testing::Test {
 protected:
  void SetUp() override { loaded_ = test::load_file("box.ir"); }
  const Program& p() { return loaded_->program; }
  const Method& method(const char* name) {
    return p().method(*p().find_method(Symbol(name)));
  }
  const Statement& at(const char* m, const char* text) {
    return p().statement(test::stmt(p(), m, text));
  }
  AccessPath ap(const char* base, std::initializer_list<const char*> fields) {
    std::vector<Symbol> f;
    for (const char* x : fields) {
      f.emplace_back(x);
    }
    return *paths_.make(Symbol(base), f, KConfig());
  }
  static std::vector<std::string> strings(const std::vector<Fact>& facts) {
    std::vector<std::string> out;
    for (Fact f : facts) {
      out.push_back(f.to_string());
    }
    return out;
  }

  std::unique_ptr<test::Loaded> loaded_;
  AccessPathFactory paths_;
};

using V = std::vector<std::string>;

TEST_F(CallMappingTest, ToCallee) {
  EXPECT_EQ(strings(map_to_callee(at("foo", "box2 = call copy(box1);"),
                                  ap("box2", {"f"}), method("copy"), paths_)),
            V{"<ret>.f"});
  EXPECT_EQ(strings(map_to_callee(at("copy", "vcall cpy.put(data);"),
                                  ap("cpy", {"f"}), method("Box.put"), paths_)),
            V{"this.f"});
  EXPECT_EQ(strings(map_to_callee(at("copy", "vcall cpy.put(data);"),
                                  ap("data", {}), method("Box.put"), paths_)),
            V{"str"});
  EXPECT_TRUE(map_to_callee(at("copy", "vcall cpy.put(data);"),
                            ap("unrelated", {"g"}), method("Box.put"), paths_)
                  .empty());
}

TEST_F(CallMappingTest, ToCaller) {
  const Method& get = method("Box.get");
  EXPECT_EQ(map_to_caller(at("copy", "data = vcall box.get();"),
                          ap("this", {"f"}), get, paths_)
                .to_string(),
            "box.f");
  EXPECT_EQ(map_to_caller(at("copy", "vcall cpy.put(data);"), ap("str", {}),
                          method("Box.put"), paths_)
                .to_string(),
            "data");
  EXPECT_TRUE(map_to_caller(at("copy", "data = vcall box.get();"),
                            Fact::zero(), get, paths_)
                  .is_zero());
  EXPECT_THROW(map_to_caller(at("copy", "data = vcall box.get();"),
                             ap("str", {}), get, paths_),
               InvalidSummary);
}

TEST(SolverCallTest, SameActualTwice) {
  auto loaded = test::load(R"(
method pair(a, b) { L0: return a; }
method main() {
  L0:
    x = "c";
    y = call pair(x, x);
    return;
}
)");
  const Program& p = loaded->program;
  AccessPathFactory paths;
  auto facts =
      map_to_callee(p.statement(test::stmt(p, "main", "y = call pair(x, x);")),
                    paths.make_variable(Symbol("x")),
                    p.method(*p.find_method(Symbol("pair"))), paths);
  ASSERT_EQ(facts.size(), 2u);
  EXPECT_EQ(facts[0].to_string(), "a");
  EXPECT_EQ(facts[1].to_string(), "b");
}

TEST(SolverCallTest, ExternalModels) {
  auto loaded = test::load(R"(
type T { field f; }
method main(a, b) {
  L0:
    x = call unknown(a, b);
    return;
}
)");
  const Program& p = loaded->program;
  const Statement& call =
      p.statement(test::stmt(p, "main", "x = call unknown(a, b);"));
  AccessPathFactory paths;
  auto show = [](const std::vector<Fact>& facts) {
    std::vector<std::string> out;
    for (Fact f : facts) {
      out.push_back(f.to_string());
    }
    return out;
  };
  const KConfig k(5);
  const auto x = paths.make_variable(Symbol("x"));
  const auto xf = *paths.make(Symbol("x"), std::vector{Symbol("f")}, k);
  const auto af = *paths.make(Symbol("a"), std::vector{Symbol("f")}, k);
  EXPECT_EQ(show(handle_external(call, x, ExternalModel::TaintThrough, paths, k)),
            (V{"a", "b"}));
  EXPECT_EQ(show(handle_external(call, xf, ExternalModel::TaintThrough, paths, k)),
            (V{"a.f", "b.f"}));
  EXPECT_EQ(show(handle_external(call, af, ExternalModel::TaintThrough, paths, k)),
            V{"a.f"});
  EXPECT_EQ(show(handle_external(call, x, ExternalModel::Opaque, paths, k)), V{});
  EXPECT_EQ(show(handle_external(call, af, ExternalModel::Opaque, paths, k)),
            V{"a.f"});
}

std::string chain_program(bool with_store) {
  std::string text = "type T { field f; }\nmethod main() {\n  L0:\n"
                     "    x = call getTainted();\n    o = new T;\n";
  for (int i = 0; i < 10; ++i) {
    text += "    u" + std::to_string(i) + " = \"c\";\n";
    if (with_store && i == 6) {
      text += "    x.f = o;\n";
    }
  }
  return text + "    call sink(x);\n    return;\n}\n";
}

TEST(SkipIdentityTest, JumpsUnrelatedChain) {
  auto loaded = test::load(chain_program(false));
  const Program& p = loaded->program;
  AccessPathFactory paths;
  std::vector<StmtId> chain;
  StmtId end = skip_identity_chain(p, test::stmt(p, "main", "call sink(x);"),
                                   paths.make_variable(Symbol("x")), &chain);
  // Ten constants plus the allocation of o.
  EXPECT_EQ(chain.size(), 11u);
  EXPECT_EQ(end, test::stmt(p, "main", "o = new T;"));
  EXPECT_EQ(chain.front(), test::stmt(p, "main", "u9 = \"c\";"));
}

TEST(SkipIdentityTest, StopsBeforeStoreToBase) {
  auto loaded = test::load(chain_program(true));
  const Program& p = loaded->program;
  AccessPathFactory paths;
  std::vector<StmtId> chain;
  StmtId end = skip_identity_chain(p, test::stmt(p, "main", "call sink(x);"),
                                   paths.make_variable(Symbol("x")), &chain);
  EXPECT_EQ(chain.size(), 3u);
  EXPECT_EQ(end, test::stmt(p, "main", "u7 = \"c\";"));
  EXPECT_EQ(*single_predecessor(p, end), test::stmt(p, "main", "x.f = o;"));
}

TEST(SkipIdentityTest, BlockHeads) {
  auto loaded = test::load(R"(
method main(c) {
  L0:
    x = call getTainted();
    goto L1;
  L1:
    y = x;
    if c goto L2 else L3;
  L2:
    goto L3;
  L3:
    call sink(y);
    return;
}
)");
  const Program& p = loaded->program;
  EXPECT_EQ(single_predecessor(p, test::stmt(p, "main", "y = x;")),
            test::stmt(p, "main", "goto L1;"));
  // Two predecessors.
  EXPECT_FALSE(single_predecessor(p, test::stmt(p, "main", "call sink(y);")));
  // Entry block.
  EXPECT_FALSE(
      single_predecessor(p, test::stmt(p, "main", "x = call getTainted();")));
}

TEST(SolverTest, BudgetExceeded) {
  auto loaded = test::load_file("box.ir");
  AccessPathFactory paths;
  SolverConfig config;
  config.budget = 3;
  EXPECT_THROW(solve_query(*loaded, paths,
                           test::stmt(loaded->program, "foo",
                                      "call sink(boxData);"),
                           0, config),
               BudgetExceeded);
}

TEST(SolverTest, RecursionReachesFixpoint) {
  auto loaded = test::load(R"(#ssa
type T { field f; }
method loop(a, n) {
  L0:
    if n goto L1 else L2;
  L1:
    r = call loop(a, n);
    goto L3;
  L2:
    s = a.f;
    goto L3;
  L3:
    v = phi(L1: r, L2: s);
    return v;
}
method main() {
  L0:
    t = call getTainted();
    o = new T;
    o.f = t;
    n = "n";
    x = call loop(o, n);
    call sink(x);
    return;
}
)");
  const Program& p = loaded->program;
  AccessPathFactory paths;
  auto r = solve_query(*loaded, paths, test::stmt(p, "main", "call sink(x);"));
  EXPECT_TRUE(r.reachable);
  EXPECT_EQ(rendered(r, p),
            std::vector<std::string>{"loop: <ret> <- {arg0.f}"});
}

TEST(SolverTest, DeadMethodNotVisited) {
  auto loaded = test::load(R"(
method dead(a) {
  L0:
    x = call getTainted();
    call sink(x);
    return;
}
method helper(a) { L0: return a; }
method main() {
  L0:
    x = call getTainted();
    y = call helper(x);
    call sink(y);
    return;
}
)");
  const Program& p = loaded->program;
  AccessPathFactory paths;
  auto r = solve_query(*loaded, paths, test::stmt(p, "main", "call sink(y);"));
  EXPECT_TRUE(r.reachable);
  EXPECT_EQ(r.stats.methods_visited,
            (std::set<MethodId>{*p.find_method(Symbol("main")),
                                *p.find_method(Symbol("helper"))}));
}

TEST(SolverTest, UnbalancedReturnReachesCallers) {
  auto loaded = test::load(R"(
method leak(v) {
  L0:
    call sink(v);
    return;
}
method a() {
  L0:
    x = call getTainted();
    call leak(x);
    return;
}
method b() {
  L0:
    y = "clean";
    call leak(y);
    return;
}
)");
  const Program& p = loaded->program;
  AccessPathFactory paths;
  auto r = solve_query(*loaded, paths, test::stmt(p, "leak", "call sink(v);"));
  EXPECT_EQ(r.sources,
            std::vector<StmtId>{test::stmt(p, "a", "x = call getTainted();")});
}

class CorpusSolverTest : public ::testing::Test {
 protected:
  template <typename Fn>
  void for_each_query(std::uint64_t programs, Fn fn) {
    for (std::uint64_t seed = 0; seed < programs; ++seed) {
      auto loaded = test::load(generate_program(seed), corpus_spec_json());
      for (const auto& q : loaded->roles.sink_queries()) {
        fn(seed, *loaded, q);
      }
    }
  }
};

TEST_F(CorpusSolverTest, Deterministic) {
  for_each_query(40, [](std::uint64_t, const test::Loaded& l,
                        const SinkQuery& q) {
    AccessPathFactory paths_a, paths_b;
    auto a = solve_query(l, paths_a, q.stmt, q.arg, {}, q.label);
    auto b = solve_query(l, paths_b, q.stmt, q.arg, {}, q.label);
    EXPECT_EQ(a.sources, b.sources);
    EXPECT_EQ(rendered(a, l.program), rendered(b, l.program));
    EXPECT_EQ(a.stats.edges_materialized, b.stats.edges_materialized);
    EXPECT_EQ(a.stats.worklist_pops, b.stats.worklist_pops);
    for (StmtId s : a.sources) {
      auto ta = build_trace(a, s), tb = build_trace(b, s);
      ASSERT_EQ(ta.size(), tb.size());
      for (std::size_t i = 0; i < ta.size(); ++i) {
        EXPECT_EQ(ta[i].stmt, tb[i].stmt);
        EXPECT_EQ(ta[i].fact.to_string(), tb[i].fact.to_string());
      }
    }
  });
}

TEST_F(CorpusSolverTest, SkippingIsTransparent) {
  for_each_query(60, [](std::uint64_t, const test::Loaded& l,
                        const SinkQuery& q) {
    AccessPathFactory paths;
    SolverConfig plain;
    plain.skip_identity = false;
    auto on = solve_query(l, paths, q.stmt, q.arg, {}, q.label);
    auto off = solve_query(l, paths, q.stmt, q.arg, plain, q.label);
    EXPECT_EQ(on.reachable, off.reachable);
    EXPECT_EQ(on.sources, off.sources);
    EXPECT_EQ(rendered(on, l.program), rendered(off, l.program));
    EXPECT_LE(on.stats.edges_materialized, off.stats.edges_materialized);
  });
}

/// Whether `before` runs immediately before `s` in the same method, and
/// no phi sits between them.
bool plain_predecessor(const Program& p, StmtId before, StmtId s) {
  const auto& loc = p.location(s);
  const auto& prev = p.location(before);
  if (prev.method != loc.method) {
    return false;
  }
  const Method& m = p.method(loc.method);
  const BasicBlock& block = m.blocks[loc.block];
  if (loc.index > block.phi_count()) {
    return prev.block == loc.block && prev.index + 1 == loc.index;
  }
  if (block.phi_count() > 0) {
    return false;
  }
  return std::any_of(block.preds.begin(), block.preds.end(),
                     [&](std::size_t b) {
                       return m.blocks[b].terminator().id == before;
                     });
}

TEST_F(CorpusSolverTest, TraceStepsAreValid) {
  std::size_t traces = 0;
  std::size_t steps = 0;
  for_each_query(60, [&](std::uint64_t seed, const test::Loaded& l,
                         const SinkQuery& q) {
    const Program& p = l.program;
    AccessPathFactory paths;
    auto r = solve_query(l, paths, q.stmt, q.arg, {}, q.label);
    for (StmtId source : r.sources) {
      SCOPED_TRACE("seed " + std::to_string(seed));
      auto trace = build_trace(r, source);
      ASSERT_GE(trace.size(), 2u);
      EXPECT_EQ(trace.front().stmt, q.stmt);
      EXPECT_EQ(trace.front().fact.to_string(),
                p.statement(q.stmt).args[q.arg].str());
      EXPECT_EQ(trace.back().stmt, source);
      EXPECT_TRUE(trace.back().fact.is_zero());
      EXPECT_EQ(l.roles.role(p.statement(source), q.label), CallRole::Source);
      for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        const TraceStep& here = trace[i];
        const TraceStep& next = trace[i + 1];
        const Statement& s = p.statement(next.stmt);
        if (here.fact.is_zero() || s.is_call() ||
            s.kind == StmtKind::Return ||
            !plain_predecessor(p, next.stmt, here.stmt)) {
          continue;
        }
        FlowContext ctx{p, p.method(p.location(next.stmt).method), paths,
                        KConfig(), nullptr};
        auto out = flow(s, here.fact.path(), ctx).facts;
        EXPECT_NE(std::find(out.begin(), out.end(), next.fact), out.end())
            << print_statement(s) << " " << here.fact.to_string() << " -> "
            << next.fact.to_string();
        ++steps;
      }
      ++traces;
    }
  });
  EXPECT_GT(traces, 20u);
  EXPECT_GT(steps, 50u);
}

bool covers(const std::vector<ForwardFact>& exits, Fact fact) {
  AccessPath ap = fact.path();
  std::vector<Symbol> fields(ap.fields().begin(), ap.fields().end());
  for (const auto& d : exits) {
    if (d.base != ap.base()) {
      continue;
    }
    if (d.kind == ForwardFact::Kind::Path && d.fields == fields) {
      return true;
    }
    if (d.kind == ForwardFact::Kind::Star &&
        fields.size() <= static_cast<std::size_t>(d.bound) &&
        d.fields.size() <= fields.size() &&
        std::equal(d.fields.begin(), d.fields.end(), fields.begin())) {
      return true;
    }
  }
  return false;
}

TEST_F(CorpusSolverTest, SummariesMatchForwardOracle) {
  const KConfig k(2);
  std::size_t summaries = 0;
  for_each_query(100, [&](std::uint64_t seed, const test::Loaded& l,
                         const SinkQuery& q) {
    const Program& p = l.program;
    AccessPathFactory paths;
    SolverConfig config;
    config.k = k;
    auto r = solve_query(l, paths, q.stmt, q.arg, config, q.label);
    OracleOptions oracle;
    oracle.k = k;
    for (const auto& summary : r.summaries) {
      SCOPED_TRACE("seed " + std::to_string(seed) + " " + summary.render(p));
      const Method& m = p.method(summary.method);
      std::set<std::string> entries;
      for (Fact f : summary.entry_facts) {
        entries.insert(f.to_string());
      }
      auto check = [&](const ForwardFact& entry, const std::string& name) {
        auto exits =
            oracle_exit_facts(p, l.callgraph, l.roles, q.label, summary.method,
                              entry, oracle);
        EXPECT_EQ(covers(exits, summary.exit_fact), entries.count(name) == 1)
            << "entry " << name;
      };
      check(ForwardFact::zero(), "0");
      // Every parameter path up to length k.
      for (Symbol param : m.params) {
        std::vector<std::vector<Symbol>> layer{{}};
        for (int len = 0; len <= k.k; ++len) {
          std::vector<std::vector<Symbol>> longer;
          for (const auto& fields : layer) {
            ForwardFact entry{ForwardFact::Kind::Path, 0, param, fields, 0};
            check(entry, paths.make(param, fields, k)->to_string());
            for (Symbol f : p.field_names()) {
              auto ext = fields;
              ext.push_back(f);
              longer.push_back(std::move(ext));
            }
          }
          layer = std::move(longer);
        }
      }
      ++summaries;
    }
  });
  EXPECT_GT(summaries, 20u);
}

} // namespace
} // namespace taintflow
