#include <taintflow/ssa.h>

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace taintflow {

namespace {

template <typename F>
void for_each_use(Statement& stmt, F&& rewrite) {
  switch (stmt.kind) {
    case StmtKind::Assign:
    case StmtKind::If:
      rewrite(stmt.value);
      break;
    case StmtKind::Return:
      if (!stmt.value.empty()) {
        rewrite(stmt.value);
      }
      break;
    case StmtKind::Load:
      rewrite(stmt.object);
      break;
    case StmtKind::Store:
      rewrite(stmt.object);
      rewrite(stmt.value);
      break;
    case StmtKind::VCall:
      rewrite(stmt.object);
      for (auto& arg : stmt.args) {
        rewrite(arg);
      }
      break;
    case StmtKind::BinOp:
    case StmtKind::Call:
      for (auto& arg : stmt.args) {
        rewrite(arg);
      }
      break;
    default:
      break;
  }
}

std::optional<SsaError> check_ssa(const Method& method) {
  auto tree = compute_dominators(method);
  for (std::size_t b = 0; b < method.blocks.size(); ++b) {
    if (!tree.reachable(b)) {
      return SsaError("block '" + method.blocks[b].label.str() +
                      "' is unreachable");
    }
  }

  struct Site {
    std::size_t block;
    std::ptrdiff_t index; // -1 for parameters
  };
  std::unordered_map<Symbol, Site> defs;
  for (Symbol param : method.params) {
    if (!defs.emplace(param, Site{method.entry, -1}).second) {
      return SsaError("parameter '" + param.str() + "' is declared twice",
                      param);
    }
  }
  for (std::size_t b = 0; b < method.blocks.size(); ++b) {
    const auto& stmts = method.blocks[b].stmts;
    for (std::size_t i = 0; i < stmts.size(); ++i) {
      if (auto def = stmts[i].defined()) {
        if (!defs.emplace(*def, Site{b, std::ptrdiff_t(i)}).second) {
          return SsaError("variable '" + def->str() +
                              "' is defined more than once",
                          *def);
        }
      }
    }
  }

  for (std::size_t b = 0; b < method.blocks.size(); ++b) {
    const auto& block = method.blocks[b];
    for (std::size_t i = 0; i < block.stmts.size(); ++i) {
      const auto& stmt = block.stmts[i];
      if (stmt.kind == StmtKind::Phi) {
        std::vector<Symbol> expected;
        for (std::size_t p : block.preds) {
          expected.push_back(method.blocks[p].label);
        }
        std::vector<Symbol> actual;
        for (const auto& in : stmt.incoming) {
          actual.push_back(in.label);
        }
        std::sort(expected.begin(), expected.end());
        std::sort(actual.begin(), actual.end());
        if (expected != actual) {
          return SsaError("phi for '" + stmt.result.str() +
                              "' does not match the predecessors of block '" +
                              block.label.str() + "'",
                          stmt.result);
        }
        for (const auto& in : stmt.incoming) {
          auto def = defs.find(in.value);
          auto pred = *method.block_index(in.label);
          if (def == defs.end() || !tree.dominates(def->second.block, pred)) {
            return SsaError("phi operand '" + in.value.str() +
                                "' is not available on the edge from '" +
                                in.label.str() + "'",
                            in.value);
          }
        }
        continue;
      }
      for (Symbol use : stmt.uses()) {
        auto def = defs.find(use);
        bool ok = def != defs.end();
        if (ok && def->second.block == b) {
          ok = def->second.index < std::ptrdiff_t(i);
        } else if (ok) {
          ok = tree.dominates(def->second.block, b);
        }
        if (!ok) {
          return SsaError("use of '" + use.str() +
                              "' is not dominated by its definition",
                          use);
        }
      }
    }
  }
  return std::nullopt;
}

} // namespace

bool DominatorTree::dominates(std::size_t a, std::size_t b) const {
  if (!reachable(a) || !reachable(b)) {
    return false;
  }
  std::size_t current = b;
  for (;;) {
    if (current == a) {
      return true;
    }
    std::size_t up = *idom[current];
    if (up == current) {
      return false;
    }
    current = up;
  }
}

DominatorTree compute_dominators(const Method& method) {
  const std::size_t n = method.blocks.size();
  DominatorTree tree;
  tree.idom.assign(n, std::nullopt);
  tree.children.assign(n, {});
  if (n == 0) {
    return tree;
  }

  std::vector<std::size_t> postorder;
  std::vector<bool> seen(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  stack.emplace_back(method.entry, 0);
  seen[method.entry] = true;
  while (!stack.empty()) {
    auto& [block, next] = stack.back();
    const auto& succs = method.blocks[block].succs;
    if (next < succs.size()) {
      std::size_t succ = succs[next++];
      if (!seen[succ]) {
        seen[succ] = true;
        stack.emplace_back(succ, 0);
      }
    } else {
      postorder.push_back(block);
      stack.pop_back();
    }
  }
  std::vector<std::size_t> po_number(n, 0);
  for (std::size_t i = 0; i < postorder.size(); ++i) {
    po_number[postorder[i]] = i;
  }
  tree.reverse_postorder.assign(postorder.rbegin(), postorder.rend());

  auto intersect = [&](std::size_t a, std::size_t b) {
    while (a != b) {
      while (po_number[a] < po_number[b]) {
        a = *tree.idom[a];
      }
      while (po_number[b] < po_number[a]) {
        b = *tree.idom[b];
      }
    }
    return a;
  };

  tree.idom[method.entry] = method.entry;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t block : tree.reverse_postorder) {
      if (block == method.entry) {
        continue;
      }
      std::optional<std::size_t> candidate;
      for (std::size_t pred : method.blocks[block].preds) {
        if (!tree.idom[pred]) {
          continue;
        }
        candidate = candidate ? intersect(pred, *candidate) : pred;
      }
      if (candidate && tree.idom[block] != candidate) {
        tree.idom[block] = candidate;
        changed = true;
      }
    }
  }

  for (std::size_t block = 0; block < n; ++block) {
    if (block != method.entry && tree.idom[block]) {
      tree.children[*tree.idom[block]].push_back(block);
    }
  }
  return tree;
}

std::vector<std::set<std::size_t>> dominance_frontiers(
    const Method& method, const DominatorTree& tree) {
  std::vector<std::set<std::size_t>> frontiers(method.blocks.size());
  for (std::size_t block = 0; block < method.blocks.size(); ++block) {
    const auto& preds = method.blocks[block].preds;
    if (!tree.reachable(block) || preds.size() < 2) {
      continue;
    }
    for (std::size_t pred : preds) {
      if (!tree.reachable(pred)) {
        continue;
      }
      std::size_t runner = pred;
      while (runner != *tree.idom[block]) {
        frontiers[runner].insert(block);
        if (runner == *tree.idom[runner]) {
          break;
        }
        runner = *tree.idom[runner];
      }
    }
  }
  return frontiers;
}

Method remove_unreachable_blocks(const Method& method) {
  Method copy = method;
  copy.link_blocks();
  auto tree = compute_dominators(copy);
  bool all_reachable = true;
  for (std::size_t b = 0; b < copy.blocks.size(); ++b) {
    all_reachable = all_reachable && tree.reachable(b);
  }
  if (all_reachable) {
    return copy;
  }

  std::unordered_set<Symbol> dropped;
  std::vector<BasicBlock> kept;
  std::size_t entry = 0;
  for (std::size_t b = 0; b < copy.blocks.size(); ++b) {
    if (tree.reachable(b)) {
      if (b == copy.entry) {
        entry = kept.size();
      }
      kept.push_back(std::move(copy.blocks[b]));
    } else {
      dropped.insert(copy.blocks[b].label);
    }
  }
  for (auto& block : kept) {
    for (auto& stmt : block.stmts) {
      if (stmt.kind != StmtKind::Phi) {
        continue;
      }
      std::erase_if(stmt.incoming, [&](const PhiIncoming& in) {
        return dropped.count(in.label) != 0;
      });
    }
  }
  copy.blocks = std::move(kept);
  copy.entry = entry;
  copy.link_blocks();
  return copy;
}

void validate_ssa(const Method& method) {
  Method linked = method;
  linked.link_blocks();
  if (auto error = check_ssa(linked)) {
    throw SsaError("in method '" + method.name.str() + "': " + error->what(),
                   error->variable());
  }
}

Method construct_ssa(const Method& input) {
  Method method = remove_unreachable_blocks(input);
  if (!check_ssa(method)) {
    return method;
  }
  auto fail = [&](const std::string& message, Symbol var) -> SsaError {
    return SsaError("in method '" + method.name.str() + "': " + message, var);
  };

  const std::size_t n = method.blocks.size();
  for (const auto& block : method.blocks) {
    if (block.phi_count() != 0) {
      throw fail("explicit phi nodes in a method that is not in SSA form",
                 Symbol());
    }
  }
  if (!method.blocks[method.entry].preds.empty()) {
    throw fail("entry block has predecessors", Symbol());
  }

  auto tree = compute_dominators(method);
  auto frontiers = dominance_frontiers(method, tree);

  // Liveness over original names.
  std::vector<std::set<Symbol>> upward(n), killed(n), live_in(n);
  std::map<Symbol, std::set<std::size_t>> def_sites;
  std::unordered_set<Symbol> taken_names;
  std::map<Symbol, std::size_t> def_count;
  for (Symbol param : method.params) {
    def_sites[param].insert(method.entry);
    ++def_count[param];
    taken_names.insert(param);
  }
  for (std::size_t b = 0; b < n; ++b) {
    for (const auto& stmt : method.blocks[b].stmts) {
      for (Symbol use : stmt.uses()) {
        taken_names.insert(use);
        if (!killed[b].count(use)) {
          upward[b].insert(use);
        }
      }
      if (auto def = stmt.defined()) {
        taken_names.insert(*def);
        killed[b].insert(*def);
        def_sites[*def].insert(b);
        ++def_count[*def];
      }
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = tree.reverse_postorder.rbegin();
         it != tree.reverse_postorder.rend(); ++it) {
      std::size_t b = *it;
      std::set<Symbol> in = upward[b];
      for (std::size_t succ : method.blocks[b].succs) {
        for (Symbol var : live_in[succ]) {
          if (!killed[b].count(var)) {
            in.insert(var);
          }
        }
      }
      if (in != live_in[b]) {
        live_in[b] = std::move(in);
        changed = true;
      }
    }
  }

  // Phi placement at iterated dominance frontiers, pruned by liveness.
  std::vector<std::vector<Symbol>> phi_vars(n);
  for (const auto& [var, sites] : def_sites) {
    std::set<std::size_t> placed;
    std::vector<std::size_t> work(sites.begin(), sites.end());
    std::set<std::size_t> queued(sites.begin(), sites.end());
    while (!work.empty()) {
      std::size_t x = work.back();
      work.pop_back();
      for (std::size_t y : frontiers[x]) {
        if (!placed.insert(y).second) {
          continue;
        }
        if (live_in[y].count(var)) {
          phi_vars[y].push_back(var);
          ++def_count[var];
        }
        if (queued.insert(y).second) {
          work.push_back(y);
        }
      }
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    auto& block = method.blocks[b];
    std::sort(phi_vars[b].begin(), phi_vars[b].end());
    std::vector<Statement> phis;
    for (Symbol var : phi_vars[b]) {
      Statement phi;
      phi.kind = StmtKind::Phi;
      phi.line = block.line;
      phi.result = var;
      for (std::size_t pred : block.preds) {
        phi.incoming.push_back({method.blocks[pred].label, Symbol()});
      }
      phis.push_back(std::move(phi));
    }
    block.stmts.insert(block.stmts.begin(), phis.begin(), phis.end());
  }

  // Renaming along the dominator tree.
  std::map<Symbol, std::vector<Symbol>> stacks;
  std::map<Symbol, int> next_version;
  auto fresh = [&](Symbol var) {
    if (def_count[var] <= 1) {
      return var;
    }
    for (;;) {
      int version = ++next_version[var];
      Symbol name(var.str() + "$" + std::to_string(version));
      if (!taken_names.count(name)) {
        taken_names.insert(name);
        return name;
      }
    }
  };
  for (Symbol param : method.params) {
    stacks[param].push_back(param);
  }

  std::function<void(std::size_t)> rename = [&](std::size_t b) {
    std::vector<Symbol> pushed;
    auto& block = method.blocks[b];
    for (std::size_t i = 0; i < block.stmts.size(); ++i) {
      auto& stmt = block.stmts[i];
      if (stmt.kind != StmtKind::Phi) {
        for_each_use(stmt, [&](Symbol& use) {
          auto it = stacks.find(use);
          if (it == stacks.end() || it->second.empty()) {
            throw fail("variable '" + use.str() +
                           "' may be used before it is defined",
                       use);
          }
          use = it->second.back();
        });
      }
      if (auto def = stmt.defined()) {
        Symbol original = stmt.kind == StmtKind::Phi
            ? phi_vars[b][i]
            : *def;
        Symbol renamed = fresh(original);
        stmt.result = renamed;
        stacks[original].push_back(renamed);
        pushed.push_back(original);
      }
    }
    for (std::size_t succ : block.succs) {
      auto& succ_block = method.blocks[succ];
      for (std::size_t i = 0; i < phi_vars[succ].size(); ++i) {
        Symbol var = phi_vars[succ][i];
        auto it = stacks.find(var);
        if (it == stacks.end() || it->second.empty()) {
          throw fail("variable '" + var.str() +
                         "' may be used before it is defined",
                     var);
        }
        for (auto& in : succ_block.stmts[i].incoming) {
          if (in.label == block.label) {
            in.value = it->second.back();
          }
        }
      }
    }
    for (std::size_t child : tree.children[b]) {
      rename(child);
    }
    for (Symbol var : pushed) {
      stacks[var].pop_back();
    }
  };
  rename(method.entry);
  return method;
}

Program prepare_program(Program program) {
  for (auto& method : program.methods) {
    if (program.declared_ssa) {
      method = remove_unreachable_blocks(method);
      validate_ssa(method);
    } else {
      method = construct_ssa(method);
    }
  }
  program.finalize();
  return program;
}

} // namespace taintflow
