#include <taintflow/analysis.h>

#include <taintflow/parser.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace taintflow {

std::vector<Finding> aggregate_findings(const std::vector<RawFinding>& raw) {
  std::map<std::tuple<StmtId, std::size_t, StmtId>, std::set<Symbol>> labels;
  for (const auto& r : raw) {
    labels[{r.sink, r.arg, r.source}].insert(r.label);
  }
  // Map iteration visits args in increasing order, so the first finding
  // seen for a (sink, source, labels) group has the smallest arg.
  std::map<std::tuple<StmtId, StmtId, std::set<Symbol>>, std::size_t> kept;
  for (const auto& [key, set] : labels) {
    const auto& [sink, arg, source] = key;
    kept.emplace(std::make_tuple(sink, source, set), arg);
  }
  std::vector<Finding> out;
  for (const auto& [key, arg] : kept) {
    const auto& [sink, source, set] = key;
    out.push_back(Finding{sink, arg, source, set, {}});
  }
  std::sort(out.begin(), out.end(), [](const Finding& a, const Finding& b) {
    return std::tie(a.sink, a.source, a.arg, a.labels) <
        std::tie(b.sink, b.source, b.arg, b.labels);
  });
  return out;
}

AnalysisResult analyze(const Program& program,
                       const CallGraph& callgraph,
                       const TaintRoles& roles,
                       AccessPathFactory& paths,
                       const AnalysisOptions& options) {
  AnalysisResult result;
  const auto& queries = roles.sink_queries();
  result.queries.resize(queries.size());

  // Flow logs are buffered per query and replayed in query order so the
  // output does not depend on scheduling.
  std::vector<std::vector<std::string>> logs(queries.size());

  auto run_one = [&](std::size_t i) {
    const SinkQuery& q = queries[i];
    QueryOutcome& outcome = result.queries[i];
    outcome.query = q;
    const Statement& sink = program.statement(q.stmt);
    SolverConfig config = options.solver;
    if (config.flow_log) {
      config.flow_log = [&log = logs[i]](const std::string& line) {
        log.push_back(line);
      };
    }
    BackwardSolver solver(program, callgraph, roles, q.label, paths,
                          std::move(config));
    try {
      outcome.result =
          solver.solve(Query{q.stmt, paths.make_variable(sink.args[q.arg])});
    } catch (const BudgetExceeded& e) {
      outcome.error = e.what();
    }
  };

  unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1 || queries.size() < 2) {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      run_one(i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(queries.size()));
    for (unsigned t = 0; t < jobs; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < queries.size(); i = next++) {
          run_one(i);
        }
      });
    }
    for (auto& w : workers) {
      w.join();
    }
  }

  if (options.solver.flow_log) {
    for (const auto& log : logs) {
      for (const auto& line : log) {
        options.solver.flow_log(line);
      }
    }
  }

  std::vector<RawFinding> raw;
  std::set<std::string> summaries;
  const bool multi_label = roles.labels().size() > 1;
  for (const auto& outcome : result.queries) {
    for (StmtId source : outcome.result.sources) {
      raw.push_back(RawFinding{outcome.query.stmt, outcome.query.arg, source,
                               outcome.query.label});
    }
    for (const auto& summary : outcome.result.summaries) {
      std::string line = summary.render(program);
      if (multi_label) {
        line += " [" + outcome.query.label.str() + "]";
      }
      summaries.insert(line);
    }
  }
  result.summaries.assign(summaries.begin(), summaries.end());
  result.findings = aggregate_findings(raw);

  if (options.traces) {
    for (auto& finding : result.findings) {
      // The trace comes from the finding's smallest label.
      for (const auto& outcome : result.queries) {
        if (outcome.query.stmt == finding.sink &&
            outcome.query.arg == finding.arg &&
            outcome.query.label == *finding.labels.begin()) {
          finding.trace = build_trace(outcome.result, finding.source);
          break;
        }
      }
    }
  }
  return result;
}

std::string render_json(const std::vector<Finding>& findings) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& f : findings) {
    nlohmann::json labels = nlohmann::json::array();
    for (Symbol label : f.labels) {
      labels.push_back(label.str());
    }
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& step : f.trace) {
      trace.push_back({{"stmt", step.stmt.value},
                       {"fact", step.fact.to_string()}});
    }
    out.push_back({{"sink_stmt", f.sink.value},
                   {"sink_arg", f.arg},
                   {"source_stmt", f.source.value},
                   {"labels", labels},
                   {"trace", trace}});
  }
  return out.dump(2);
}

std::string render_text(const std::vector<Finding>& findings,
                        const Program& program) {
  std::ostringstream out;
  for (const auto& f : findings) {
    const auto& sink = program.statement(f.sink);
    const auto& source = program.statement(f.source);
    out << "finding: sink #" << f.sink.value << " (line " << sink.line
        << ") arg " << f.arg << " <- source #" << f.source.value << " (line "
        << source.line << ") [";
    bool first = true;
    for (Symbol label : f.labels) {
      out << (first ? "" : ", ") << label.str();
      first = false;
    }
    out << "]\n";
    for (const auto& step : f.trace) {
      const auto& stmt = program.statement(step.stmt);
      const auto& method = program.method(program.location(step.stmt).method);
      out << "  #" << step.stmt.value << " " << method.name.str() << ":"
          << stmt.line << "  " << print_statement(stmt) << "  {"
          << step.fact.to_string() << "}\n";
    }
    out << "\n";
  }
  out << findings.size() << (findings.size() == 1 ? " finding" : " findings")
      << "\n";
  return out.str();
}

} // namespace taintflow
