#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xube/domain.hpp"
#include "xube/nn/approximator.hpp"

namespace xube {

// h(s, g) for a batch of states sharing one goal.
template <class D>
struct HeuristicV {
    std::function<std::vector<double>(std::span<const StateOf<D>>, const GoalOf<D>&)> fn;

    std::vector<double> operator()(std::span<const StateOf<D>> states, const GoalOf<D>& goal) const {
        auto out = fn(states, goal);
        if (out.size() != states.size()) throw InternalError("heuristic-v returned the wrong batch size");
        return out;
    }
};

// q(s, g, a) for every a in the fixed action set: row i of the result holds
// states[i]'s values at offsets [i * num_actions, (i + 1) * num_actions).
template <class D>
struct HeuristicQ {
    std::size_t num_actions = 0;
    std::function<std::vector<double>(std::span<const StateOf<D>>, const GoalOf<D>&)> fn;

    std::vector<double> operator()(std::span<const StateOf<D>> states, const GoalOf<D>& goal) const {
        auto out = fn(states, goal);
        if (out.size() != states.size() * num_actions) throw InternalError("heuristic-q returned the wrong batch size");
        return out;
    }
};

template <class D>
HeuristicV<D> zero_heuristic() {
    return {[](std::span<const StateOf<D>> states, const GoalOf<D>&) { return std::vector<double>(states.size(), 0.0); }};
}

template <class D>
HeuristicQ<D> zero_q(std::size_t num_actions) {
    return {num_actions, [num_actions](std::span<const StateOf<D>> states, const GoalOf<D>&) {
                return std::vector<double>(states.size() * num_actions, 0.0);
            }};
}

// Converts (state, goal) into the approximator's input representation. One
// encoder is registered per (domain, architecture).
template <class D>
struct Encoder {
    std::string name;
    std::size_t dim = 0;
    std::function<void(const StateOf<D>&, const GoalOf<D>&, std::span<float>)> encode;

    [[nodiscard]] nn::Matrix batch(std::span<const StateOf<D>> states, const GoalOf<D>& goal) const {
        nn::Matrix m(states.size(), dim);
        for (std::size_t i = 0; i < states.size(); ++i) encode(states[i], goal, m.row(i));
        return m;
    }
};

template <class D>
HeuristicV<D> make_heuristic_v(Encoder<D> encoder, std::shared_ptr<const nn::Evaluator> eval) {
    if (eval->input_dim() != encoder.dim) throw ConfigError("encoder width does not match the approximator input");
    if (eval->output_dim() != 1) throw ConfigError("heuristic-v needs a single-output approximator");
    return {[enc = std::move(encoder), ev = std::move(eval)](std::span<const StateOf<D>> states, const GoalOf<D>& goal) {
        std::vector<double> out(states.size());
        if (states.empty()) return out;
        auto y = ev->forward(enc.batch(states, goal));
        for (std::size_t i = 0; i < states.size(); ++i) out[i] = y(i, 0);
        return out;
    }};
}

template <class D>
HeuristicQ<D> make_heuristic_q(Encoder<D> encoder, std::shared_ptr<const nn::Evaluator> eval, std::size_t num_actions) {
    if (eval->input_dim() != encoder.dim) throw ConfigError("encoder width does not match the approximator input");
    if (eval->output_dim() != num_actions) throw ConfigError("heuristic-q output width must equal the action count");
    return {num_actions,
            [enc = std::move(encoder), ev = std::move(eval)](std::span<const StateOf<D>> states, const GoalOf<D>& goal) {
                std::vector<double> out;
                if (states.empty()) return out;
                auto y = ev->forward(enc.batch(states, goal));
                out.assign(y.data.begin(), y.data.end());
                return out;
            }};
}

}  // namespace xube
