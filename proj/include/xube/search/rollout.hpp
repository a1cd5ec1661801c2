#pragma once

#include "xube/search/tree.hpp"

namespace xube {

// Uniformly random policy: one sampled action per iteration until the goal is
// reached, a dead end is hit, or max_iters actions have been taken.
template <Domain D>
SearchResultOf<D> random_rollout(const D& domain, const InstanceOf<D>& inst, std::int64_t max_iters, Rng& rng) {
    if (max_iters < 1) throw ConfigError("rollout iteration limit must be >= 1");
    detail::Stopwatch sw;
    SearchResultOf<D> result;
    auto& tree = result.tree;
    NodeId cur = tree.add_root(inst.start);
    result.nodes_generated = 1;
    NodeId goal_node = kNoNode;
    for (;;) {
        if (domain.is_solved(tree[cur].state, inst.goal)) {
            goal_node = cur;
            tree.popped.push_back(cur);
            break;
        }
        if (result.iterations >= max_iters) break;
        auto a = domain.samp_state_act(tree[cur].state, rng);
        if (!a) break;
        ++result.iterations;
        tree[cur].expanded = true;
        tree.popped.push_back(cur);
        auto tr = domain.next_state(tree[cur].state, *a);
        cur = tree.add_child(cur, *std::move(a), std::move(tr.next_state), tr.cost);
        ++result.nodes_generated;
    }
    detail::finish(result, goal_node, sw);
    return result;
}

}  // namespace xube
