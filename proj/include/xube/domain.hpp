#pragma once

// Pathfinding-domain contract.
//
// A domain is any type exposing State / Action / Goal and the four core
// operations:
//
//   samp_prob_insts(ks, rng) -> std::vector<ProblemInstance<State, Goal>>
//   samp_state_act(s, rng)   -> std::optional<Action>   (nullopt at a dead end)
//   next_state(s, a)         -> Transition<State>
//   is_solved(s, g)          -> bool
//
// Optional capabilities are detected with the concepts below. The CRTP mixins
// derive the methods that follow from simpler ones (for example an enumerable
// action set yields samp_state_act and expand).

#include <concepts>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xube/common.hpp"

namespace xube {

template <class State>
struct Transition {
    State next_state;
    double cost = 0.0;
};

template <class State, class Goal>
struct ProblemInstance {
    State start;
    Goal goal;
    int gen_steps = 0;
};

template <class State, class Action>
struct WalkRecord {
    std::vector<State> states;
    std::vector<Action> actions;
    std::vector<double> costs;

    [[nodiscard]] std::size_t length() const { return actions.size(); }
    [[nodiscard]] double total_cost() const {
        double total = 0.0;
        for (double c : costs) total += c;
        return total;
    }
};

// One step of a reverse walk: applying forward_action in prev reaches the
// state the step was taken from, at the given cost.
template <class State, class Action>
struct ReverseStep {
    State prev;
    Action forward_action;
    double cost = 0.0;
};

template <class T>
concept Hashable = requires(const T& v) {
    { std::hash<T>{}(v) } -> std::convertible_to<std::size_t>;
};

template <class D>
using StateOf = typename D::State;
template <class D>
using ActionOf = typename D::Action;
template <class D>
using GoalOf = typename D::Goal;
template <class D>
using InstanceOf = ProblemInstance<typename D::State, typename D::Goal>;

template <class D>
concept Domain = requires(const D& d, const typename D::State& s, const typename D::Action& a,
                          const typename D::Goal& g, std::span<const int> ks, Rng& rng) {
    requires std::equality_comparable<typename D::State>;
    requires Hashable<typename D::State>;
    requires std::equality_comparable<typename D::Action>;
    { d.samp_prob_insts(ks, rng) } -> std::same_as<std::vector<InstanceOf<D>>>;
    { d.samp_state_act(s, rng) } -> std::same_as<std::optional<typename D::Action>>;
    { d.next_state(s, a) } -> std::same_as<Transition<typename D::State>>;
    { d.is_solved(s, g) } -> std::convertible_to<bool>;
};

template <class D>
concept ActsEnum = Domain<D> && requires(const D& d, const typename D::State& s) {
    { d.actions(s) } -> std::same_as<std::vector<typename D::Action>>;
    { d.expand(s) } -> std::same_as<std::vector<std::pair<typename D::Action, Transition<typename D::State>>>>;
};

template <class D>
concept FixedActsEnum = ActsEnum<D> && requires(const D& d, const typename D::Action& a) {
    { d.all_actions() } -> std::convertible_to<const std::vector<typename D::Action>&>;
    { d.action_index(a) } -> std::convertible_to<std::size_t>;
};

template <class D>
concept GoalSampleableFromState = Domain<D> && requires(const D& d, const typename D::State& s, Rng& rng) {
    { d.samp_start_state(rng) } -> std::same_as<typename D::State>;
    { d.samp_goal_from_state(s, rng) } -> std::same_as<typename D::Goal>;
};

template <class D>
concept ReverseWalkable = Domain<D> && requires(const D& d, const typename D::State& s, Rng& rng) {
    { d.samp_goal_state_and_goal(rng) } -> std::same_as<std::pair<typename D::State, typename D::Goal>>;
    { d.reverse_step(s, rng) } -> std::same_as<std::optional<ReverseStep<typename D::State, typename D::Action>>>;
};

template <class D>
concept StringToAct = Domain<D> && requires(const D& d, const typename D::Action& a, std::string_view text) {
    { d.parse_action(text) } -> std::same_as<std::optional<typename D::Action>>;
    { d.action_to_string(a) } -> std::convertible_to<std::string>;
};

// Text codecs plus terminal rendering.
template <class D>
concept Renderable = Domain<D> && requires(const D& d, const typename D::State& s, const typename D::Goal& g,
                                           std::string_view text) {
    { d.state_to_text(s) } -> std::convertible_to<std::string>;
    { d.goal_to_text(g) } -> std::convertible_to<std::string>;
    { d.state_from_text(text) } -> std::same_as<typename D::State>;
    { d.goal_from_text(text) } -> std::same_as<typename D::Goal>;
    { d.render_state(s) } -> std::convertible_to<std::string>;
    { d.render_goal(g) } -> std::convertible_to<std::string>;
};

// States convert to a flat array of Flat elements (flat_width() per state),
// a whole batch steps in place, and the result converts back once.
template <class D>
concept BatchedTransition = ActsEnum<D> && requires(const D& d, std::span<const typename D::State> states,
                                                    std::vector<typename D::Flat>& flat,
                                                    std::span<const typename D::Action> acts) {
    { d.flat_width() } -> std::convertible_to<std::size_t>;
    { d.to_flat(states) } -> std::same_as<std::vector<typename D::Flat>>;
    { d.step_flat(flat, acts) } -> std::same_as<std::vector<double>>;
    { d.from_flat(std::as_const(flat)) } -> std::same_as<std::vector<typename D::State>>;
};

// ---------------------------------------------------------------------------
// Mixins

// Derived implements actions(s) and next_state(s, a); this supplies
// samp_state_act (uniform over actions(s)) and expand.
template <class Derived, class State, class Action>
class ActsEnumMixin {
  public:
    std::optional<Action> samp_state_act(const State& s, Rng& rng) const {
        auto acts = self().actions(s);
        if (acts.empty()) return std::nullopt;
        return acts[uniform_index(rng, acts.size())];
    }

    std::vector<std::pair<Action, Transition<State>>> expand(const State& s) const {
        std::vector<std::pair<Action, Transition<State>>> out;
        for (auto& a : self().actions(s)) {
            auto tr = self().next_state(s, a);
            out.emplace_back(std::move(a), std::move(tr));
        }
        return out;
    }

  private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// Derived additionally implements to_flat / step_flat / from_flat; expand and
// next_states are routed through a single conversion per call.
template <class Derived, class State, class Action>
class BatchedTransitionMixin : public ActsEnumMixin<Derived, State, Action> {
  public:
    std::vector<std::pair<Action, Transition<State>>> expand(const State& s) const {
        auto acts = self().actions(s);
        std::vector<State> repeated(acts.size(), s);
        auto flat = self().to_flat(std::span<const State>(repeated));
        auto costs = self().step_flat(flat, std::span<const Action>(acts));
        auto next = self().from_flat(std::as_const(flat));
        std::vector<std::pair<Action, Transition<State>>> out;
        out.reserve(acts.size());
        for (std::size_t i = 0; i < acts.size(); ++i) {
            out.push_back({acts[i], Transition<State>{std::move(next[i]), costs[i]}});
        }
        return out;
    }

    std::vector<Transition<State>> next_states(std::span<const State> states, std::span<const Action> acts) const {
        auto flat = self().to_flat(states);
        auto costs = self().step_flat(flat, acts);
        auto next = self().from_flat(std::as_const(flat));
        std::vector<Transition<State>> out;
        out.reserve(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) out.push_back({std::move(next[i]), costs[i]});
        return out;
    }

  private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// ---------------------------------------------------------------------------
// Generic operations

template <Domain D>
ActionOf<D> samp_state_act(const D& domain, const StateOf<D>& s, Rng& rng) {
    auto a = domain.samp_state_act(s, rng);
    if (!a) throw DeadEndError("no action can be sampled in this state");
    return *std::move(a);
}

// A state with no sampleable action ends the walk early; the record carries
// the actual length.
template <Domain D>
WalkRecord<StateOf<D>, ActionOf<D>> random_walk(const D& domain, const StateOf<D>& start, int steps, Rng& rng) {
    if (steps < 0) throw ConfigError("random walk length must be nonnegative");
    WalkRecord<StateOf<D>, ActionOf<D>> rec;
    rec.states.reserve(static_cast<std::size_t>(steps) + 1);
    rec.states.push_back(start);
    for (int i = 0; i < steps; ++i) {
        auto a = domain.samp_state_act(rec.states.back(), rng);
        if (!a) break;
        auto tr = domain.next_state(rec.states.back(), *a);
        rec.actions.push_back(*std::move(a));
        rec.costs.push_back(tr.cost);
        rec.states.push_back(std::move(tr.next_state));
    }
    return rec;
}

// Reverse walk from `goal_state`. states[0] is the goal state; actions[i] is
// the forward action leading from states[i + 1] back to states[i].
template <ReverseWalkable D>
WalkRecord<StateOf<D>, ActionOf<D>> reverse_walk(const D& domain, const StateOf<D>& goal_state, int steps,
                                                 Rng& rng) {
    if (steps < 0) throw ConfigError("random walk length must be nonnegative");
    WalkRecord<StateOf<D>, ActionOf<D>> rec;
    rec.states.push_back(goal_state);
    for (int i = 0; i < steps; ++i) {
        auto step = domain.reverse_step(rec.states.back(), rng);
        if (!step) break;
        rec.actions.push_back(std::move(step->forward_action));
        rec.costs.push_back(step->cost);
        rec.states.push_back(std::move(step->prev));
    }
    return rec;
}

// Each value uniform over {0, ..., max_k} inclusive.
inline std::vector<int> sample_ks(int max_k, std::size_t count, Rng& rng) {
    if (max_k < 0) throw ConfigError("K must be nonnegative");
    std::uniform_int_distribution<int> dist(0, max_k);
    std::vector<int> ks(count);
    for (auto& k : ks) k = dist(rng);
    return ks;
}

// Sample a start, walk ks[i] steps, sample the goal from the terminal state.
template <GoalSampleableFromState D>
std::vector<InstanceOf<D>> gen_prob_insts_forward(const D& domain, std::span<const int> ks, Rng& rng) {
    std::vector<InstanceOf<D>> out;
    out.reserve(ks.size());
    for (int k : ks) {
        auto start = domain.samp_start_state(rng);
        auto walk = random_walk(domain, start, k, rng);
        auto goal = domain.samp_goal_from_state(walk.states.back(), rng);
        out.push_back({std::move(start), std::move(goal), k});
    }
    return out;
}

// Sample a goal state and goal, walk ks[i] steps in reverse; the terminal
// state becomes the start.
template <ReverseWalkable D>
std::vector<InstanceOf<D>> gen_prob_insts_reverse(const D& domain, std::span<const int> ks, Rng& rng) {
    std::vector<InstanceOf<D>> out;
    out.reserve(ks.size());
    for (int k : ks) {
        auto [goal_state, goal] = domain.samp_goal_state_and_goal(rng);
        auto walk = reverse_walk(domain, goal_state, k, rng);
        out.push_back({std::move(walk.states.back()), std::move(goal), k});
    }
    return out;
}

// Fold actions through next_state; nullopt if any action is rejected.
template <Domain D>
std::optional<std::pair<StateOf<D>, double>> replay(const D& domain, const StateOf<D>& start,
                                                    std::span<const ActionOf<D>> path) {
    StateOf<D> s = start;
    double cost = 0.0;
    try {
        for (const auto& a : path) {
            auto tr = domain.next_state(s, a);
            cost += tr.cost;
            s = std::move(tr.next_state);
        }
    } catch (const InvalidActionError&) {
        return std::nullopt;
    }
    return std::make_pair(std::move(s), cost);
}

// Capability names, for listings and the timing report.
template <class D>
std::vector<std::string> capability_names() {
    std::vector<std::string> caps;
    if constexpr (ActsEnum<D>) caps.emplace_back("ActsEnum");
    if constexpr (FixedActsEnum<D>) caps.emplace_back("FixedActsEnum");
    if constexpr (GoalSampleableFromState<D>) caps.emplace_back("GoalSampleableFromState");
    if constexpr (ReverseWalkable<D>) caps.emplace_back("ReverseWalkable");
    if constexpr (StringToAct<D>) caps.emplace_back("StringToAct");
    if constexpr (Renderable<D>) caps.emplace_back("Renderable");
    if constexpr (BatchedTransition<D>) caps.emplace_back("BatchedTransition");
    return caps;
}

}  // namespace xube
