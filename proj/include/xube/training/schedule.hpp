#pragma once

#include <algorithm>
#include <memory>

#include "xube/nn/approximator.hpp"
#include "xube/training/config.hpp"

namespace xube::training {

inline int adapt_k(int current_k, double solve_rate, int k_max) {
    if (!(solve_rate >= 0.0 && solve_rate <= 1.0)) throw ConfigError("solve rate must be in [0, 1]");
    if (solve_rate >= 0.5 && current_k < k_max) return std::min(2 * current_k, k_max);
    return current_k;
}

// Holds the target network. It is zero until the first swap.
class TargetNetwork {
  public:
    TargetNetwork(std::size_t in, std::size_t out) : eval_(nn::zero_target(in, out)) {}

    [[nodiscard]] const std::shared_ptr<const nn::Evaluator>& evaluator() const { return eval_; }
    [[nodiscard]] bool is_zero() const { return !model_; }
    [[nodiscard]] const nn::Approximator* model() const { return model_.get(); }

    // Swaps in a copy of `approx` if the rule says so; returns whether it did.
    bool update_check(const nn::Approximator& approx, double loss, TargetUpdate rule, double threshold) {
        const bool swap = rule == TargetUpdate::Always || loss < threshold;
        if (swap) {
            model_ = approx.clone();
            eval_ = model_->snapshot();
        }
        return swap;
    }

  private:
    std::shared_ptr<const nn::Evaluator> eval_;
    std::unique_ptr<nn::Approximator> model_;
};

}  // namespace xube::training
