#pragma once

// Limited-horizon Bellman backup over a whole search tree:
//
//   value(n) = 0                                  if n's state satisfies the goal
//            = min_children (edge cost + value(c)) if n has tree children
//            = leaf_values[n]                      otherwise
//
// With compare_internal set, internal nodes also take the minimum with their
// own leaf_values entry (used for Q* trees, whose internal nodes may have
// edges that were never generated).

#include "xube/search/tree.hpp"

namespace xube {

struct LhblOptions {
    bool compare_internal = false;
};

template <Domain D>
std::vector<double> lhbl_backup(const D& domain, const SearchTree<StateOf<D>, ActionOf<D>>& tree,
                                std::span<const double> leaf_values, const GoalOf<D>& goal, LhblOptions opts = {}) {
    const std::size_t n = tree.nodes.size();
    if (leaf_values.size() != n) throw InternalError("leaf value table does not cover the tree");
    constexpr double kUnset = std::numeric_limits<double>::infinity();
    std::vector<double> best_child(n, kUnset);
    std::vector<bool> has_child(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const NodeId p = tree.nodes[i].parent;
        if (p == kNoNode) continue;
        if (p < 0 || static_cast<std::size_t>(p) >= i) throw InternalError("search tree record is not acyclic");
        has_child[static_cast<std::size_t>(p)] = true;
    }

    std::vector<double> value(n, 0.0);
    // children have larger ids than parents, so one reverse sweep suffices
    for (std::size_t i = n; i-- > 0;) {
        const auto& node = tree.nodes[i];
        double v;
        if (domain.is_solved(node.state, goal)) {
            v = 0.0;
        } else if (has_child[i]) {
            v = best_child[i];
            if (opts.compare_internal && !std::isnan(leaf_values[i])) v = std::min(v, leaf_values[i]);
        } else {
            if (std::isnan(leaf_values[i])) throw InternalError("missing leaf value in LHBL backup");
            v = leaf_values[i];
        }
        value[i] = v;
        if (node.parent != kNoNode) {
            auto& slot = best_child[static_cast<std::size_t>(node.parent)];
            slot = std::min(slot, node.edge_cost + v);
        }
    }
    return value;
}

}  // namespace xube
