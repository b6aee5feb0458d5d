#include <taintflow/callgraph.h>

#include <algorithm>
#include <optional>
#include <sstream>
#include <unordered_set>

namespace taintflow {

namespace {

// Allocation types that can flow into `var` through copies and phis.
// Returns nullopt as soon as any other kind of definition is reached.
std::optional<std::set<Symbol>> allocation_types(const Program& program,
                                                 const Method& method,
                                                 Symbol var) {
  std::set<Symbol> types;
  std::unordered_set<Symbol> visited;
  std::vector<Symbol> work{var};
  while (!work.empty()) {
    Symbol current = work.back();
    work.pop_back();
    if (!visited.insert(current).second) {
      continue;
    }
    auto def = method.definitions.find(current);
    if (def == method.definitions.end()) {
      return std::nullopt; // parameter
    }
    const auto& stmt = program.statement(def->second);
    switch (stmt.kind) {
      case StmtKind::Alloc:
        types.insert(stmt.type);
        break;
      case StmtKind::Assign:
        work.push_back(stmt.value);
        break;
      case StmtKind::Phi:
        for (const auto& in : stmt.incoming) {
          work.push_back(in.value);
        }
        break;
      default:
        return std::nullopt;
    }
  }
  return types;
}

} // namespace

const std::vector<MethodId>* CallGraph::callees(StmtId call) const {
  auto it = edges_.find(call);
  return it == edges_.end() ? nullptr : &it->second;
}

const std::vector<CallSite>& CallGraph::callers(MethodId callee) const {
  static const std::vector<CallSite> none;
  auto it = callers_.find(callee);
  return it == callers_.end() ? none : it->second;
}

std::string CallGraph::dump(const Program& program) const {
  std::vector<std::pair<StmtId, std::string>> lines;
  for (const auto& [stmt, targets] : edges_) {
    for (MethodId target : targets) {
      lines.emplace_back(stmt, program.method(target).name.str());
    }
  }
  for (StmtId stmt : externals_) {
    lines.emplace_back(
        stmt, program.statement(stmt).callee.str() + " (external)");
  }
  std::sort(lines.begin(), lines.end());
  std::ostringstream out;
  for (const auto& [stmt, text] : lines) {
    out << stmt.value << " -> " << text << "\n";
  }
  return out.str();
}

CallGraph build_callgraph(const Program& program) {
  CallGraph graph;
  std::vector<Symbol> all_classes;
  for (const auto& cls : program.classes) {
    all_classes.push_back(cls.name);
  }

  for (std::uint32_t m = 0; m < program.methods.size(); ++m) {
    const auto& method = program.methods[m];
    for (const auto& block : method.blocks) {
      for (const auto& stmt : block.stmts) {
        if (!stmt.is_call()) {
          continue;
        }
        const std::size_t arity = stmt.actuals().size();
        std::set<MethodId> targets;
        if (stmt.kind == StmtKind::Call) {
          auto target = program.find_method(stmt.callee);
          if (target && program.method(*target).params.size() == arity) {
            targets.insert(*target);
          }
        } else {
          auto exact = allocation_types(program, method, stmt.object);
          const std::vector<Symbol>& receivers =
              exact ? std::vector<Symbol>(exact->begin(), exact->end())
                    : all_classes;
          for (Symbol cls : receivers) {
            auto target = program.dispatch(cls, stmt.callee);
            if (target && program.method(*target).params.size() == arity) {
              targets.insert(*target);
            }
          }
        }
        if (targets.empty()) {
          graph.externals_.insert(stmt.id);
          continue;
        }
        std::vector<MethodId> ordered(targets.begin(), targets.end());
        std::sort(ordered.begin(), ordered.end(),
                  [&](MethodId a, MethodId b) {
                    return program.method(a).name < program.method(b).name;
                  });
        for (MethodId target : ordered) {
          graph.callers_[target].push_back(
              CallSite{stmt.id, MethodId{m}});
        }
        graph.edges_.emplace(stmt.id, std::move(ordered));
      }
    }
  }
  return graph;
}

} // namespace taintflow
