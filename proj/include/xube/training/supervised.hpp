#pragma once

// Targets from random-walk path costs; no approximator is involved.

#include "xube/training/targets.hpp"

namespace xube::training {

enum class WalkDirection { Forward, Reverse };

template <class D>
struct WalkExamples {
    GoalOf<D> goal;
    std::vector<Labeled<StateOf<D>>> examples;
};

namespace detail {

template <class D>
void add_zero_actions(const D& domain, const StateOf<D>& s, std::vector<Labeled<StateOf<D>>>& out) {
    for (const auto& a : domain.actions(s)) out.push_back({s, static_cast<int>(domain.action_index(a)), 0.0});
}

}  // namespace detail

// Forward: walk k steps from a sampled start, goal sampled from the terminal
// state; states[i] gets the remaining walk cost sum(costs[i..]). For the q
// head the example's action is the walk's next action, and the terminal state
// gets a zero example for each of its actions.
//
// Reverse: walk k steps backwards from a sampled goal state; the state j
// steps out gets the cost of the j-step return path, and for the q head the
// forward action that undoes the last reverse step.
template <ActsEnum D>
WalkExamples<D> sup_walk_examples(const D& domain, WalkDirection dir, char head, int k, Rng& rng) {
    if (head == 'q' && !FixedActsEnum<D>) throw ConfigError("q-head supervised training needs a fixed action set");
    if (dir == WalkDirection::Forward) {
        if constexpr (GoalSampleableFromState<D>) {
            auto start = domain.samp_start_state(rng);
            auto walk = random_walk(domain, start, k, rng);
            WalkExamples<D> out{domain.samp_goal_from_state(walk.states.back(), rng), {}};
            const std::size_t len = walk.actions.size();
            std::vector<double> suffix(len + 1, 0.0);
            for (std::size_t i = len; i-- > 0;) suffix[i] = suffix[i + 1] + walk.costs[i];
            if (head == 'v') {
                for (std::size_t i = 0; i <= len; ++i) out.examples.push_back({walk.states[i], -1, suffix[i]});
            } else if constexpr (FixedActsEnum<D>) {
                for (std::size_t i = 0; i < len; ++i) {
                    out.examples.push_back(
                        {walk.states[i], static_cast<int>(domain.action_index(walk.actions[i])), suffix[i]});
                }
                detail::add_zero_actions(domain, walk.states[len], out.examples);
            }
            return out;
        } else {
            throw ConfigError("forward supervised walks need GoalSampleableFromState");
        }
    }
    if constexpr (ReverseWalkable<D>) {
        auto [goal_state, goal] = domain.samp_goal_state_and_goal(rng);
        auto walk = reverse_walk(domain, goal_state, k, rng);
        WalkExamples<D> out{std::move(goal), {}};
        const std::size_t len = walk.actions.size();
        double prefix = 0.0;
        if (head == 'v') {
            out.examples.push_back({walk.states[0], -1, 0.0});
        } else if constexpr (FixedActsEnum<D>) {
            detail::add_zero_actions(domain, walk.states[0], out.examples);
        }
        for (std::size_t j = 1; j <= len; ++j) {
            prefix += walk.costs[j - 1];
            if (head == 'v') {
                out.examples.push_back({walk.states[j], -1, prefix});
            } else if constexpr (FixedActsEnum<D>) {
                out.examples.push_back(
                    {walk.states[j], static_cast<int>(domain.action_index(walk.actions[j - 1])), prefix});
            }
        }
        return out;
    } else {
        throw ConfigError("reverse supervised walks need ReverseWalkable");
    }
}

}  // namespace xube::training
