#pragma once

// Feed-forward rectifier network with exact backpropagation.
//
// Parameter layout (ParamVector): layer-major; for each layer the weight
// matrix W (fan_in x fan_out, row-major) followed by its bias (fan_out).
// Hidden layers apply max(0, x); the output layer is linear.

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <numeric>

#include "xube/nn/approximator.hpp"

namespace xube::nn {

enum class Activation { Relu };

struct MlpSpec {
    std::vector<std::size_t> layers;  // input dim, hidden..., output dim
    Activation activation = Activation::Relu;

    [[nodiscard]] std::size_t input_dim() const { return layers.front(); }
    [[nodiscard]] std::size_t output_dim() const { return layers.back(); }

    void validate() const {
        if (layers.size() < 2) throw ConfigError("MLP needs at least an input and an output layer");
        for (auto n : layers) {
            if (n < 1) throw ConfigError("MLP layer sizes must be >= 1");
        }
    }

    friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

inline std::size_t param_count(const MlpSpec& spec) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < spec.layers.size(); ++l) n += spec.layers[l] * spec.layers[l + 1] + spec.layers[l + 1];
    return n;
}

using ParamVector = std::vector<float>;

namespace detail {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using ConstRowVecMap = Eigen::Map<const Eigen::RowVectorXf>;

struct Layer {
    std::size_t in;
    std::size_t out;
    std::size_t offset;  // of W; bias follows at offset + in * out
};

inline std::vector<Layer> layers_of(const MlpSpec& spec) {
    std::vector<Layer> out;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < spec.layers.size(); ++l) {
        out.push_back({spec.layers[l], spec.layers[l + 1], offset});
        offset += spec.layers[l] * spec.layers[l + 1] + spec.layers[l + 1];
    }
    return out;
}

// Pre-activations of every layer (kept for the backward pass).
inline std::vector<RowMat> forward_all(const MlpSpec& spec, std::span<const float> params, const Matrix& inputs) {
    const auto layers = layers_of(spec);
    std::vector<RowMat> pre;
    pre.reserve(layers.size());
    RowMat act = ConstRowMap(inputs.data.data(), static_cast<Eigen::Index>(inputs.rows),
                             static_cast<Eigen::Index>(inputs.cols));
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        ConstRowMap W(params.data() + L.offset, static_cast<Eigen::Index>(L.in), static_cast<Eigen::Index>(L.out));
        ConstRowVecMap b(params.data() + L.offset + L.in * L.out, static_cast<Eigen::Index>(L.out));
        RowMat z = act * W;
        z.rowwise() += b;
        if (l + 1 < layers.size()) act = z.cwiseMax(0.0f);
        pre.push_back(std::move(z));
    }
    return pre;
}

inline Matrix to_matrix(const RowMat& m) {
    Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    if (m.size() > 0) std::memcpy(out.data.data(), m.data(), sizeof(float) * static_cast<std::size_t>(m.size()));
    return out;
}

}  // namespace detail

inline void check_params(const MlpSpec& spec, std::span<const float> params) {
    if (params.size() != param_count(spec)) throw ConfigError("parameter vector does not match MLP spec");
}

inline Matrix forward_batch(const MlpSpec& spec, std::span<const float> params, const Matrix& inputs) {
    check_params(spec, params);
    if (inputs.cols != spec.input_dim()) {
        throw ConfigError("input width " + std::to_string(inputs.cols) + " does not match MLP input " +
                          std::to_string(spec.input_dim()));
    }
    if (inputs.rows == 0) return Matrix(0, spec.output_dim());
    return detail::to_matrix(detail::forward_all(spec, params, inputs).back());
}

struct LossAndGrad {
    double loss = 0.0;
    ParamVector grad;
};

// Mean squared error over N rows and its exact gradient. `actions` selects
// the trained output per row (q heads); empty means targets cover output 0
// (single-output nets) or every output (rows * output_dim targets).
inline LossAndGrad mse_loss_and_grad(const MlpSpec& spec, std::span<const float> params, const Matrix& inputs,
                                     std::span<const float> targets, std::span<const int> actions = {}) {
    check_params(spec, params);
    const std::size_t n = inputs.rows;
    const std::size_t out_dim = spec.output_dim();
    if (inputs.cols != spec.input_dim()) throw ConfigError("input width does not match MLP input");
    const bool full = actions.empty() && out_dim > 1;
    if (!actions.empty() && actions.size() != n) throw ConfigError("action mask length does not match batch size");
    if (targets.size() != (full ? n * out_dim : n)) throw ConfigError("target count does not match batch size");
    if (actions.empty() && out_dim > 1 && targets.size() != n * out_dim) {
        throw ConfigError("multi-output training needs an action mask");
    }

    LossAndGrad result;
    result.grad.assign(params.size(), 0.0f);
    if (n == 0) return result;

    const auto layers = detail::layers_of(spec);
    auto pre = detail::forward_all(spec, params, inputs);

    // dL/dz for the output layer
    detail::RowMat delta = detail::RowMat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out_dim));
    double loss = 0.0;
    const double scale = 2.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (full) {
            for (std::size_t j = 0; j < out_dim; ++j) {
                const double err = static_cast<double>(pre.back()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) -
                                   static_cast<double>(targets[i * out_dim + j]);
                loss += err * err;
                delta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<float>(scale * err);
            }
        } else {
            const std::size_t j = actions.empty() ? 0 : static_cast<std::size_t>(actions[i]);
            if (j >= out_dim) throw ConfigError("action index out of range for MLP output");
            const double err =
                static_cast<double>(pre.back()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) -
                static_cast<double>(targets[i]);
            loss += err * err;
            delta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<float>(scale * err);
        }
    }
    result.loss = loss / static_cast<double>(n);

    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& L = layers[l];
        detail::RowMat act_in;
        if (l == 0) {
            act_in = detail::ConstRowMap(inputs.data.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(inputs.cols));
        } else {
            act_in = pre[l - 1].cwiseMax(0.0f);
        }
        Eigen::Map<detail::RowMat> dW(result.grad.data() + L.offset, static_cast<Eigen::Index>(L.in),
                                      static_cast<Eigen::Index>(L.out));
        Eigen::Map<Eigen::RowVectorXf> db(result.grad.data() + L.offset + L.in * L.out, static_cast<Eigen::Index>(L.out));
        // batch reductions in double, stored back as float
        const Eigen::MatrixXd delta_d = delta.cast<double>();
        dW = (act_in.cast<double>().transpose() * delta_d).cast<float>();
        db = delta_d.colwise().sum().cast<float>();
        if (l > 0) {
            detail::ConstRowMap W(params.data() + L.offset, static_cast<Eigen::Index>(L.in), static_cast<Eigen::Index>(L.out));
            detail::RowMat dact = delta * W.transpose();
            delta = (pre[l - 1].array() > 0.0f).select(dact, 0.0f);
        }
    }
    return result;
}

inline void sgd_step(ParamVector& params, std::span<const float> grad, double lr) {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= static_cast<float>(lr) * grad[i];
}

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<float> m;
    std::vector<float> v;
    std::uint64_t step = 0;
};

inline void adam_step(ParamVector& params, std::span<const float> grad, const AdamConfig& cfg, AdamState& state) {
    if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0f);
        state.v.assign(params.size(), 0.0f);
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    const float b1 = static_cast<float>(cfg.beta1);
    const float b2 = static_cast<float>(cfg.beta2);
    const float step_size = static_cast<float>(cfg.lr / bc1);
    const float inv_sqrt_bc2 = static_cast<float>(1.0 / std::sqrt(bc2));
    const float eps = static_cast<float>(cfg.eps);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const float g = grad[i];
        state.m[i] = b1 * state.m[i] + (1.0f - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0f - b2) * g * g;
        params[i] -= step_size * state.m[i] / (std::sqrt(state.v[i]) * inv_sqrt_bc2 + eps);
    }
}

// Glorot-uniform weights, zero biases.
inline ParamVector init_params(const MlpSpec& spec, Rng& rng) {
    spec.validate();
    ParamVector params(param_count(spec), 0.0f);
    for (const auto& L : detail::layers_of(spec)) {
        const double limit = std::sqrt(6.0 / static_cast<double>(L.in + L.out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (std::size_t i = 0; i < L.in * L.out; ++i) params[L.offset + i] = static_cast<float>(dist(rng));
    }
    return params;
}

class MlpSnapshot final : public Evaluator {
  public:
    MlpSnapshot(MlpSpec spec, ParamVector params) : spec_(std::move(spec)), params_(std::move(params)) {}
    [[nodiscard]] std::size_t input_dim() const override { return spec_.input_dim(); }
    [[nodiscard]] std::size_t output_dim() const override { return spec_.output_dim(); }
    [[nodiscard]] Matrix forward(const Matrix& inputs) const override { return forward_batch(spec_, params_, inputs); }
    [[nodiscard]] const ParamVector& params() const { return params_; }

  private:
    const MlpSpec spec_;
    const ParamVector params_;
};

enum class Optimizer { Adam, Sgd };

class Mlp final : public Approximator {
  public:
    Mlp(MlpSpec spec, ParamVector params, Optimizer opt = Optimizer::Adam, AdamConfig adam = {})
        : spec_(std::move(spec)), params_(std::move(params)), optimizer_(opt), adam_(adam) {
        spec_.validate();
        check_params(spec_, params_);
    }

    static Mlp make(const MlpSpec& spec, Rng& rng, Optimizer opt = Optimizer::Adam, AdamConfig adam = {}) {
        return Mlp(spec, init_params(spec, rng), opt, adam);
    }

    [[nodiscard]] std::string kind() const override { return "mlp"; }
    [[nodiscard]] std::size_t input_dim() const override { return spec_.input_dim(); }
    [[nodiscard]] std::size_t output_dim() const override { return spec_.output_dim(); }
    [[nodiscard]] Matrix forward(const Matrix& inputs) const override { return forward_batch(spec_, params_, inputs); }

    double train_step(const Matrix& inputs, std::span<const float> targets, std::span<const int> actions) override {
        auto lg = mse_loss_and_grad(spec_, params_, inputs, targets, actions);
        if (inputs.rows == 0) return 0.0;
        if (optimizer_ == Optimizer::Adam) {
            adam_step(params_, lg.grad, adam_, adam_state_);
        } else {
            sgd_step(params_, lg.grad, adam_.lr);
        }
        return lg.loss;
    }

    [[nodiscard]] std::shared_ptr<const Evaluator> snapshot() const override {
        return std::make_shared<MlpSnapshot>(spec_, params_);
    }
    [[nodiscard]] std::unique_ptr<Approximator> clone() const override { return std::make_unique<Mlp>(*this); }

    void set_learning_rate(double lr) override { adam_.lr = lr; }
    [[nodiscard]] double learning_rate() const override { return adam_.lr; }

    [[nodiscard]] const MlpSpec& spec() const { return spec_; }
    [[nodiscard]] const ParamVector& params() const { return params_; }
    ParamVector& mutable_params() { return params_; }
    [[nodiscard]] Optimizer optimizer() const { return optimizer_; }
    [[nodiscard]] const AdamConfig& adam_config() const { return adam_; }
    [[nodiscard]] const AdamState& adam_state() const { return adam_state_; }
    void set_adam_state(AdamState s) { adam_state_ = std::move(s); }

    [[nodiscard]] nlohmann::json header() const override {
        nlohmann::json h;
        h["kind"] = "mlp";
        h["layers"] = spec_.layers;
        h["activation"] = "relu";
        h["param_count"] = params_.size();
        h["optimizer"] = {{"name", optimizer_ == Optimizer::Adam ? "adam" : "sgd"},
                          {"lr", adam_.lr},
                          {"beta1", adam_.beta1},
                          {"beta2", adam_.beta2},
                          {"eps", adam_.eps},
                          {"step", adam_state_.step},
                          {"has_moments", !adam_state_.m.empty()}};
        return h;
    }

    void write_payload(std::string& out) const override {
        append(out, params_);
        if (!adam_state_.m.empty()) {
            append(out, adam_state_.m);
            append(out, adam_state_.v);
        }
    }

  private:
    static void append(std::string& out, const std::vector<float>& v) {
        out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
    }

    MlpSpec spec_;
    ParamVector params_;
    Optimizer optimizer_;
    AdamConfig adam_;
    AdamState adam_state_;
};

}  // namespace xube::nn
