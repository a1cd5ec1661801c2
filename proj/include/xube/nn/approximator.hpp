#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "xube/common.hpp"

namespace xube::nn {

// Dense row-major float matrix; rows are samples.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

    float& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    float operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

// Anything that maps a batch of encoded inputs to a batch of outputs.
// Implementations are immutable after construction and safe to call
// concurrently.
class Evaluator {
  public:
    virtual ~Evaluator() = default;
    [[nodiscard]] virtual std::size_t input_dim() const = 0;
    [[nodiscard]] virtual std::size_t output_dim() const = 0;
    [[nodiscard]] virtual Matrix forward(const Matrix& inputs) const = 0;

  protected:
    void check_input(const Matrix& inputs) const {
        if (inputs.cols != input_dim()) {
            throw ConfigError("input width " + std::to_string(inputs.cols) + " does not match approximator input " +
                              std::to_string(input_dim()));
        }
    }
};

// Returns zero for every input; the target network before its first swap.
class ZeroEvaluator final : public Evaluator {
  public:
    ZeroEvaluator(std::size_t in, std::size_t out) : in_(in), out_(out) {}
    [[nodiscard]] std::size_t input_dim() const override { return in_; }
    [[nodiscard]] std::size_t output_dim() const override { return out_; }
    [[nodiscard]] Matrix forward(const Matrix& inputs) const override {
        check_input(inputs);
        return Matrix(inputs.rows, out_);
    }

  private:
    std::size_t in_;
    std::size_t out_;
};

inline std::shared_ptr<const Evaluator> zero_target(std::size_t in, std::size_t out) {
    return std::make_shared<ZeroEvaluator>(in, out);
}

// A trainable function approximator owned by a single trainer.
class Approximator : public Evaluator {
  public:
    [[nodiscard]] virtual std::string kind() const = 0;

    // One optimisation step on the squared error (1/N) sum (target - prediction)^2.
    // With `actions` empty, output_dim() must be 1 or targets must cover every
    // output; otherwise actions[i] selects the output trained by row i.
    // Returns the loss before the step.
    virtual double train_step(const Matrix& inputs, std::span<const float> targets, std::span<const int> actions) = 0;

    [[nodiscard]] virtual std::shared_ptr<const Evaluator> snapshot() const = 0;
    [[nodiscard]] virtual std::unique_ptr<Approximator> clone() const = 0;

    virtual void set_learning_rate(double lr) = 0;
    [[nodiscard]] virtual double learning_rate() const = 0;

    // Checkpoint plumbing: structured header plus a binary payload.
    [[nodiscard]] virtual nlohmann::json header() const = 0;
    virtual void write_payload(std::string& out) const = 0;
};

}  // namespace xube::nn
