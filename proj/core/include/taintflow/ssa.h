#pragma once

#include <taintflow/ir.h>

#include <optional>
#include <set>
#include <vector>

namespace taintflow {

/// Immediate-dominator tree over the blocks of one method. Blocks that are
/// unreachable from the entry have no idom and are not in `reverse_postorder`.
struct DominatorTree {
  std::vector<std::optional<std::size_t>> idom;
  std::vector<std::vector<std::size_t>> children;
  std::vector<std::size_t> reverse_postorder;

  bool reachable(std::size_t block) const { return idom[block].has_value(); }
  bool dominates(std::size_t a, std::size_t b) const;
};

DominatorTree compute_dominators(const Method& method);

std::vector<std::set<std::size_t>> dominance_frontiers(
    const Method& method, const DominatorTree& tree);

/// Drops blocks that cannot be reached from the entry block.
Method remove_unreachable_blocks(const Method& method);

/// Converts a method to pruned SSA form: phis at iterated dominance
/// frontiers where the variable is live, versioned names (`x$1`, `x$2`, ...)
/// for variables with more than one definition. A method that already
/// validates is returned unchanged. Throws SsaError when a variable may be
/// read before any definition.
Method construct_ssa(const Method& method);

/// Checks single definitions, def-dominates-use, and that phi incoming
/// labels match CFG predecessors exactly. Throws SsaError.
void validate_ssa(const Method& method);

/// Pipeline used by every entry point: unreachable blocks are dropped, then
/// methods are validated (`#ssa` programs) or converted, then the program is
/// re-finalized so statement ids follow the final layout.
Program prepare_program(Program program);

} // namespace taintflow
