#pragma once

// Batch weighted A* search (BWAS).
//
// Each iteration pops up to B nodes (each pop is uniformly random with
// probability eps, otherwise minimal f = weight * g + h with FIFO ties). If
// any popped node is a goal, the cheapest such node is returned. Otherwise
// every popped node is expanded, children not improving on the closed map are
// kept in the tree as pruned leaves, and the rest are evaluated in one batch
// and pushed.

#include <unordered_map>
#include <unordered_set>

#include "xube/search/frontier.hpp"
#include "xube/search/heuristic.hpp"
#include "xube/search/tree.hpp"

namespace xube {

template <ActsEnum D>
SearchResultOf<D> bwas(const D& domain, const InstanceOf<D>& inst, const HeuristicV<D>& heuristic,
                       const SearchParams& params, Rng& rng) {
    params.validate();
    detail::Stopwatch sw;
    SearchResultOf<D> result;
    auto& tree = result.tree;
    const auto& goal = inst.goal;

    std::unordered_map<StateOf<D>, double> closed;
    Frontier<NodeId> frontier;

    const NodeId root = tree.add_root(inst.start);
    result.nodes_generated = 1;
    tree[root].h = heuristic(std::span<const StateOf<D>>(&inst.start, 1), goal).at(0);
    closed.emplace(inst.start, 0.0);
    frontier.push(tree[root].h, root);

    NodeId goal_node = kNoNode;
    std::vector<NodeId> batch;
    std::vector<NodeId> fresh;
    std::vector<StateOf<D>> fresh_states;
    std::unordered_set<StateOf<D>> batch_states;

    while (result.iterations < params.max_iters && !frontier.empty()) {
        ++result.iterations;

        batch.clear();
        batch_states.clear();
        while (batch.size() < params.batch && !frontier.empty()) {
            const bool random_pop = params.eps > 0.0 && uniform01(rng) < params.eps;
            const NodeId id = random_pop ? frontier.pop_random(rng).payload : frontier.pop_min().payload;
            const auto& node = tree[id];
            if (node.g > closed.at(node.state)) continue;  // a cheaper path was found after this push
            batch.push_back(id);
        }
        if (batch.empty()) break;

        for (NodeId id : batch) tree.popped.push_back(id);
        goal_node = detail::cheapest_solved(domain, tree, std::span<const NodeId>(batch), goal);
        if (goal_node != kNoNode) break;

        fresh.clear();
        fresh_states.clear();
        for (NodeId id : batch) {
            // duplicates within one batch: the first (cheapest) is expanded
            if (!batch_states.insert(tree[id].state).second) continue;
            tree[id].expanded = true;
            const StateOf<D> parent_state = tree[id].state;
            for (auto& [a, tr] : domain.expand(parent_state)) {
                const double g = tree[id].g + tr.cost;
                auto it = closed.find(tr.next_state);
                const bool improves = it == closed.end() || g < it->second;
                if (improves) {
                    if (it == closed.end()) {
                        closed.emplace(tr.next_state, g);
                    } else {
                        it->second = g;
                    }
                }
                const NodeId child = tree.add_child(id, std::move(a), std::move(tr.next_state), tr.cost);
                ++result.nodes_generated;
                if (improves) {
                    fresh.push_back(child);
                    fresh_states.push_back(tree[child].state);
                } else {
                    tree[child].pruned = true;
                }
            }
        }

        const auto hs = heuristic(std::span<const StateOf<D>>(fresh_states), goal);
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            auto& node = tree[fresh[i]];
            node.h = hs[i];
            frontier.push(params.weight * node.g + node.h, fresh[i]);
        }

        if (params.verbose) {
            std::vector<double> fs, hv;
            for (NodeId id : batch) {
                fs.push_back(params.weight * tree[id].g + tree[id].h);
                hv.push_back(tree[id].h);
            }
            detail::verbose_line(*params.verbose, result.iterations, frontier.size(), detail::summarize(fs),
                                 detail::summarize(hv), result.nodes_generated);
        }
    }

    detail::finish(result, goal_node, sw);
    return result;
}

}  // namespace xube
