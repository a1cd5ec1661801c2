#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <variant>

#include "xube/search/heuristic.hpp"
#include "xube/search/lhbl.hpp"
#include "xube/search/tree.hpp"

namespace xube::training {

// Target for a state with no actions that does not satisfy the goal. The
// collector discards these examples.
inline constexpr double kDeadEnd = std::numeric_limits<double>::infinity();

// One-step value iteration targets for states sharing a goal. All children
// go through the target network in one batch.
template <ActsEnum D>
std::vector<double> vi_targets(const D& domain, std::span<const StateOf<D>> states, const GoalOf<D>& goal,
                               const HeuristicV<D>& target) {
    std::vector<double> out(states.size(), 0.0);
    std::vector<StateOf<D>> children;
    std::vector<double> costs;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (domain.is_solved(states[i], goal)) continue;
        out[i] = kDeadEnd;
        for (auto& [a, tr] : domain.expand(states[i])) {
            children.push_back(std::move(tr.next_state));
            costs.push_back(tr.cost);
            owner.push_back(i);
        }
    }
    if (children.empty()) return out;
    const auto hs = target(std::span<const StateOf<D>>(children), goal);
    for (std::size_t j = 0; j < children.size(); ++j) out[owner[j]] = std::min(out[owner[j]], costs[j] + hs[j]);
    return out;
}

template <ActsEnum D>
double vi_target(const D& domain, const StateOf<D>& s, const GoalOf<D>& goal, const HeuristicV<D>& target) {
    return vi_targets(domain, std::span<const StateOf<D>>(&s, 1), goal, target)[0];
}

// One-step Q-learning targets for (state, action) pairs sharing a goal.
template <FixedActsEnum D>
std::vector<double> ql_targets(const D& domain, std::span<const StateOf<D>> states, std::span<const ActionOf<D>> acts,
                               const GoalOf<D>& goal, const HeuristicQ<D>& target) {
    if (states.size() != acts.size()) throw InternalError("ql_targets needs one action per state");
    const std::size_t na = domain.all_actions().size();
    std::vector<double> out(states.size(), 0.0);
    std::vector<StateOf<D>> next;
    std::vector<double> costs;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (domain.is_solved(states[i], goal)) continue;
        auto tr = domain.next_state(states[i], acts[i]);
        next.push_back(std::move(tr.next_state));
        costs.push_back(tr.cost);
        owner.push_back(i);
    }
    if (next.empty()) return out;
    const auto qs = target(std::span<const StateOf<D>>(next), goal);
    for (std::size_t j = 0; j < next.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : domain.actions(next[j])) best = std::min(best, qs[j * na + domain.action_index(a)]);
        if (std::isinf(best) && domain.is_solved(next[j], goal)) best = 0.0;  // goal state without actions
        out[owner[j]] = costs[j] + best;
    }
    return out;
}

template <FixedActsEnum D>
double ql_target(const D& domain, const StateOf<D>& s, const GoalOf<D>& goal, const ActionOf<D>& a,
                 const HeuristicQ<D>& target) {
    return ql_targets(domain, std::span<const StateOf<D>>(&s, 1), std::span<const ActionOf<D>>(&a, 1), goal, target)[0];
}

template <class Goal>
struct HerRelabel {
    std::vector<NodeId> path;  // root to the selected node
    NodeId node = kNoNode;
    Goal goal;
};

// Relabel a search with a goal sampled from a deepest node (earliest on ties).
template <GoalSampleableFromState D>
HerRelabel<GoalOf<D>> her_relabel(const D& domain, const SearchTree<StateOf<D>, ActionOf<D>>& tree, Rng& rng) {
    if (tree.nodes.empty()) throw InternalError("her_relabel on an empty search tree");
    const NodeId node = tree.deepest();
    return {tree.path_nodes(node), node, domain.samp_goal_from_state(tree[node].state, rng)};
}

// A (state, action, target) triple before encoding. action is -1 for the v head.
template <class State>
struct Labeled {
    State state;
    int action = -1;
    double target = 0.0;
};

namespace detail {

inline std::vector<NodeId> unique_ids(std::span<const NodeId> ids, std::size_t n) {
    std::vector<bool> seen(n, false);
    std::vector<NodeId> out;
    for (NodeId id : ids) {
        if (seen[static_cast<std::size_t>(id)]) continue;
        seen[static_cast<std::size_t>(id)] = true;
        out.push_back(id);
    }
    return out;
}

template <class State, class Action>
std::vector<bool> has_children(const SearchTree<State, Action>& tree) {
    std::vector<bool> out(tree.nodes.size(), false);
    for (const auto& n : tree.nodes) {
        if (n.parent != kNoNode) out[static_cast<std::size_t>(n.parent)] = true;
    }
    return out;
}

}  // namespace detail

// v-head examples for every node a search selected for expansion. With lhbl,
// targets are the tree-wide backup; leaves take the target network's value.
template <ActsEnum D>
std::vector<Labeled<StateOf<D>>> tree_examples_v(const D& domain, const SearchTree<StateOf<D>, ActionOf<D>>& tree,
                                                 const GoalOf<D>& goal, const HeuristicV<D>& target, bool lhbl) {
    const auto ids = detail::unique_ids(tree.popped, tree.nodes.size());
    std::vector<Labeled<StateOf<D>>> out;
    out.reserve(ids.size());
    if (!lhbl) {
        std::vector<StateOf<D>> states;
        for (NodeId id : ids) states.push_back(tree[id].state);
        const auto t = vi_targets(domain, std::span<const StateOf<D>>(states), goal, target);
        for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({std::move(states[i]), -1, t[i]});
        return out;
    }

    const auto inner = detail::has_children(tree);
    std::vector<double> leaf(tree.nodes.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<StateOf<D>> leaf_states;
    std::vector<std::size_t> leaf_ids;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (inner[i] || domain.is_solved(tree.nodes[i].state, goal)) continue;
        if (tree.nodes[i].expanded) {
            leaf[i] = kDeadEnd;  // expanded without children
            continue;
        }
        leaf_states.push_back(tree.nodes[i].state);
        leaf_ids.push_back(i);
    }
    if (!leaf_states.empty()) {
        const auto hs = target(std::span<const StateOf<D>>(leaf_states), goal);
        for (std::size_t j = 0; j < leaf_ids.size(); ++j) leaf[leaf_ids[j]] = hs[j];
    }
    const auto value = lhbl_backup(domain, tree, std::span<const double>(leaf), goal);
    for (NodeId id : ids) out.push_back({tree[id].state, -1, value[static_cast<std::size_t>(id)]});
    return out;
}

// q-head examples: every action of every node a search selected for
// expansion. With lhbl, an action whose edge is in the tree gets
// cost + backed-up child value; the rest fall back to one-step targets.
template <FixedActsEnum D>
std::vector<Labeled<StateOf<D>>> tree_examples_q(const D& domain, const SearchTree<StateOf<D>, ActionOf<D>>& tree,
                                                 const GoalOf<D>& goal, const HeuristicQ<D>& target, bool lhbl) {
    const auto ids = detail::unique_ids(tree.popped, tree.nodes.size());
    const std::size_t na = domain.all_actions().size();

    std::vector<double> value;
    std::map<std::pair<NodeId, std::size_t>, const TreeEdge<ActionOf<D>>*> edge_of;
    if (lhbl) {
        std::vector<StateOf<D>> all_states;
        all_states.reserve(tree.nodes.size());
        for (const auto& n : tree.nodes) all_states.push_back(n.state);
        const auto qs = target(std::span<const StateOf<D>>(all_states), goal);
        std::vector<double> leaf(tree.nodes.size(), kDeadEnd);
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            for (const auto& a : domain.actions(all_states[i])) {
                leaf[i] = std::min(leaf[i], qs[i * na + domain.action_index(a)]);
            }
        }
        value = lhbl_backup(domain, tree, std::span<const double>(leaf), goal, LhblOptions{.compare_internal = true});
        for (const auto& e : tree.edges) edge_of.emplace(std::make_pair(e.parent, domain.action_index(e.action)), &e);
    }

    std::vector<Labeled<StateOf<D>>> out;
    std::vector<StateOf<D>> pend_states;
    std::vector<ActionOf<D>> pend_acts;
    std::vector<std::size_t> pend_slot;
    for (NodeId id : ids) {
        const auto& s = tree[id].state;
        for (const auto& a : domain.actions(s)) {
            const int ai = static_cast<int>(domain.action_index(a));
            if (lhbl && !domain.is_solved(s, goal)) {
                auto it = edge_of.find({id, static_cast<std::size_t>(ai)});
                if (it != edge_of.end()) {
                    const auto* e = it->second;
                    out.push_back({s, ai, e->cost + value[static_cast<std::size_t>(e->child)]});
                    continue;
                }
            }
            pend_states.push_back(s);
            pend_acts.push_back(a);
            pend_slot.push_back(out.size());
            out.push_back({s, ai, 0.0});
        }
    }
    if (!pend_states.empty()) {
        const auto t = ql_targets(domain, std::span<const StateOf<D>>(pend_states),
                                  std::span<const ActionOf<D>>(pend_acts), goal, target);
        for (std::size_t j = 0; j < pend_slot.size(); ++j) out[pend_slot[j]].target = t[j];
    }
    return out;
}

// One-step examples along a relabeled path, against the substituted goal.
template <ActsEnum D>
std::vector<Labeled<StateOf<D>>> her_examples_v(const D& domain, const SearchTree<StateOf<D>, ActionOf<D>>& tree,
                                                const HerRelabel<GoalOf<D>>& her, const HeuristicV<D>& target) {
    std::vector<StateOf<D>> states;
    for (NodeId id : her.path) states.push_back(tree[id].state);
    const auto t = vi_targets(domain, std::span<const StateOf<D>>(states), her.goal, target);
    std::vector<Labeled<StateOf<D>>> out;
    for (std::size_t i = 0; i < states.size(); ++i) out.push_back({std::move(states[i]), -1, t[i]});
    return out;
}

template <FixedActsEnum D>
std::vector<Labeled<StateOf<D>>> her_examples_q(const D& domain, const SearchTree<StateOf<D>, ActionOf<D>>& tree,
                                                const HerRelabel<GoalOf<D>>& her, const HeuristicQ<D>& target) {
    std::vector<StateOf<D>> states;
    std::vector<ActionOf<D>> acts;
    std::vector<Labeled<StateOf<D>>> out;
    for (NodeId id : her.path) {
        const auto& s = tree[id].state;
        for (const auto& a : domain.actions(s)) {
            states.push_back(s);
            acts.push_back(a);
            out.push_back({s, static_cast<int>(domain.action_index(a)), 0.0});
        }
    }
    if (states.empty()) return out;
    const auto t =
        ql_targets(domain, std::span<const StateOf<D>>(states), std::span<const ActionOf<D>>(acts), her.goal, target);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].target = t[i];
    return out;
}

}  // namespace xube::training
