#pragma once

// Batch weighted Q* search (BWQS).
//
// The frontier holds edges keyed by f = weight * g(parent) + q(parent, goal, a).
// Popping an edge generates exactly one node, so at most B nodes are generated
// per iteration regardless of the action count. The root is generated by
// popping a sentinel edge in the first iteration.

#include <unordered_map>

#include "xube/search/frontier.hpp"
#include "xube/search/heuristic.hpp"
#include "xube/search/tree.hpp"

namespace xube {

template <FixedActsEnum D>
SearchResultOf<D> bwqs(const D& domain, const InstanceOf<D>& inst, const HeuristicQ<D>& q, const SearchParams& params,
                       Rng& rng) {
    params.validate();
    const auto& all = domain.all_actions();
    if (q.num_actions != all.size()) throw ConfigError("heuristic-q width does not match the domain's action set");

    detail::Stopwatch sw;
    SearchResultOf<D> result;
    auto& tree = result.tree;
    const auto& goal = inst.goal;

    struct PendingEdge {
        NodeId parent;
        std::size_t action;
    };
    std::unordered_map<StateOf<D>, double> closed;
    Frontier<PendingEdge> frontier;
    frontier.push(0.0, {kNoNode, 0});

    NodeId goal_node = kNoNode;
    std::vector<NodeId> live;
    std::vector<StateOf<D>> live_states;
    std::vector<double> popped_f;

    while (result.iterations < params.max_iters && !frontier.empty()) {
        ++result.iterations;
        live.clear();
        live_states.clear();
        popped_f.clear();

        for (std::size_t k = 0; k < params.batch && !frontier.empty(); ++k) {
            const bool random_pop = params.eps > 0.0 && uniform01(rng) < params.eps;
            auto entry = random_pop ? frontier.pop_random(rng) : frontier.pop_min();
            popped_f.push_back(entry.f);
            const auto [parent, ai] = entry.payload;

            NodeId id;
            double g = 0.0;
            double cost = 0.0;
            StateOf<D> s;
            if (parent == kNoNode) {
                s = inst.start;
            } else {
                auto tr = domain.next_state(tree[parent].state, all[ai]);
                cost = tr.cost;
                g = tree[parent].g + cost;
                s = std::move(tr.next_state);
            }
            auto it = closed.find(s);
            const bool improves = it == closed.end() || g < it->second;
            if (improves) closed[s] = g;
            if (parent == kNoNode) {
                id = tree.add_root(std::move(s));
            } else {
                id = tree.add_child(parent, all[ai], std::move(s), cost);
            }
            ++result.nodes_generated;
            if (improves) {
                live.push_back(id);
                live_states.push_back(tree[id].state);
            } else {
                tree[id].pruned = true;
            }
        }

        for (NodeId id : live) tree.popped.push_back(id);
        goal_node = detail::cheapest_solved(domain, tree, std::span<const NodeId>(live), goal);
        if (goal_node != kNoNode) break;

        const auto qs = q(std::span<const StateOf<D>>(live_states), goal);
        for (std::size_t i = 0; i < live.size(); ++i) {
            auto& node = tree[live[i]];
            node.expanded = true;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& a : domain.actions(node.state)) {
                const std::size_t ai = domain.action_index(a);
                const double qv = qs[i * all.size() + ai];
                best = std::min(best, qv);
                frontier.push(params.weight * node.g + qv, {live[i], ai});
            }
            node.h = best;
        }

        if (params.verbose) {
            std::vector<double> hv;
            for (NodeId id : live) hv.push_back(tree[id].h);
            detail::verbose_line(*params.verbose, result.iterations, frontier.size(), detail::summarize(popped_f),
                                 detail::summarize(hv), result.nodes_generated);
        }
    }

    detail::finish(result, goal_node, sw);
    return result;
}

}  // namespace xube
