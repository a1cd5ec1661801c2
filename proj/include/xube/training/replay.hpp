#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "xube/common.hpp"
#include "xube/nn/approximator.hpp"

namespace xube::training {

struct TrainExample {
    std::vector<float> input;
    float target = 0.0f;
    std::optional<int> action;  // q head only
    int k_origin = 0;
};

// One update check's examples, stored as parallel arrays.
class ExampleBlock {
  public:
    explicit ExampleBlock(std::size_t dim = 0) : dim_(dim) {}

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::size_t size() const { return targets_.size(); }
    [[nodiscard]] bool empty() const { return targets_.empty(); }

    // action < 0 means no action (v head)
    void add(std::span<const float> input, double target, int action, int k) {
        if (input.size() != dim_) throw InternalError("example width does not match its block");
        if (!std::isfinite(target)) throw InternalError("non-finite training target");
        inputs_.insert(inputs_.end(), input.begin(), input.end());
        targets_.push_back(static_cast<float>(target));
        actions_.push_back(action);
        ks_.push_back(k);
    }

    void append(const ExampleBlock& other) {
        if (other.empty()) return;
        if (other.dim_ != dim_) throw InternalError("appending a block of a different width");
        inputs_.insert(inputs_.end(), other.inputs_.begin(), other.inputs_.end());
        targets_.insert(targets_.end(), other.targets_.begin(), other.targets_.end());
        actions_.insert(actions_.end(), other.actions_.begin(), other.actions_.end());
        ks_.insert(ks_.end(), other.ks_.begin(), other.ks_.end());
    }

    [[nodiscard]] std::span<const float> input(std::size_t i) const { return {inputs_.data() + i * dim_, dim_}; }
    [[nodiscard]] float target(std::size_t i) const { return targets_[i]; }
    [[nodiscard]] int action(std::size_t i) const { return actions_[i]; }
    [[nodiscard]] int k(std::size_t i) const { return ks_[i]; }
    [[nodiscard]] const std::vector<float>& targets() const { return targets_; }

    [[nodiscard]] TrainExample example(std::size_t i) const {
        TrainExample e;
        auto in = input(i);
        e.input.assign(in.begin(), in.end());
        e.target = targets_[i];
        if (actions_[i] >= 0) e.action = actions_[i];
        e.k_origin = ks_[i];
        return e;
    }

  private:
    std::size_t dim_;
    std::vector<float> inputs_;
    std::vector<float> targets_;
    std::vector<int> actions_;
    std::vector<int> ks_;
};

struct Batch {
    nn::Matrix inputs;
    std::vector<float> targets;
    std::vector<int> actions;  // empty for the v head
};

// The blocks of the last R update checks, oldest evicted first.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t span) : capacity_(std::max<std::size_t>(span, 1)) {}

    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] std::size_t blocks() const { return blocks_.size(); }
    [[nodiscard]] const ExampleBlock& block(std::size_t i) const { return blocks_[i]; }

    [[nodiscard]] std::size_t examples() const {
        std::size_t n = 0;
        for (const auto& b : blocks_) n += b.size();
        return n;
    }

    void push(ExampleBlock block) {
        blocks_.push_back(std::move(block));
        while (blocks_.size() > capacity_) blocks_.pop_front();
    }

    // n examples drawn uniformly with replacement over every retained example.
    [[nodiscard]] Batch sample(std::size_t n, bool with_actions, Rng& rng) const {
        const std::size_t total = examples();
        if (total == 0) throw InternalError("sampling from an empty replay buffer");
        const std::size_t dim = blocks_.front().dim();
        Batch b;
        b.inputs = nn::Matrix(n, dim);
        b.targets.resize(n);
        if (with_actions) b.actions.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t idx = uniform_index(rng, total);
            std::size_t bi = 0;
            while (idx >= blocks_[bi].size()) idx -= blocks_[bi++].size();
            const auto& blk = blocks_[bi];
            auto in = blk.input(idx);
            std::copy(in.begin(), in.end(), b.inputs.row(i).begin());
            b.targets[i] = blk.target(idx);
            if (with_actions) b.actions[i] = blk.action(idx);
        }
        return b;
    }

  private:
    std::size_t capacity_;
    std::deque<ExampleBlock> blocks_;
};

}  // namespace xube::training
