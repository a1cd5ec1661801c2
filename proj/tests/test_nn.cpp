#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "xube/nn/checkpoint.hpp"
#include "xube/nn/mlp.hpp"
#include "xube/nn/tabular.hpp"

using namespace xube;
using namespace xube::nn;

namespace {

Matrix random_inputs(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    std::normal_distribution<float> d(0.0f, 1.0f);
    for (auto& v : m.data) v = d(rng);
    return m;
}

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "xube_test_nn";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Mlp, ParamCountAndValidation) {
    EXPECT_EQ(param_count(MlpSpec{{162, 400, 200, 1}}), 162u * 400 + 400 + 400 * 200 + 200 + 200 + 1);
    EXPECT_THROW(MlpSpec{{3}}.validate(), ConfigError);
    EXPECT_THROW((MlpSpec{{3, 0, 1}}.validate()), ConfigError);
}

TEST(Mlp, ZeroParamsGiveZeroOutputs) {
    MlpSpec spec{{5, 7, 3}};
    ParamVector p(param_count(spec), 0.0f);
    Rng rng(1);
    auto y = forward_batch(spec, p, random_inputs(9, 5, rng));
    EXPECT_EQ(y.rows, 9u);
    EXPECT_EQ(y.cols, 3u);
    for (float v : y.data) EXPECT_EQ(v, 0.0f);
}

TEST(Mlp, HandComputedOneTwoOne) {
    // W1 = [2, -1], b1 = [0.5, 0.25], W2 = [3, 4], b2 = 0.1
    // x = 1: hidden = relu(2.5, -0.75) = (2.5, 0); out = 7.5 + 0.1
    MlpSpec spec{{1, 2, 1}};
    ParamVector p{2.0f, -1.0f, 0.5f, 0.25f, 3.0f, 4.0f, 0.1f};
    Matrix x(1, 1);
    x(0, 0) = 1.0f;
    EXPECT_FLOAT_EQ(forward_batch(spec, p, x)(0, 0), 7.6f);
    x(0, 0) = -1.0f;  // hidden = relu(-1.5, 1.25) = (0, 1.25); out = 5 + 0.1
    EXPECT_FLOAT_EQ(forward_batch(spec, p, x)(0, 0), 5.1f);
}

TEST(Mlp, DimensionMismatch) {
    MlpSpec spec{{4, 3, 1}};
    ParamVector p(param_count(spec), 0.0f);
    EXPECT_THROW(forward_batch(spec, p, Matrix(2, 5)), ConfigError);
    std::vector<float> t(3, 0.0f);
    EXPECT_THROW(mse_loss_and_grad(spec, p, Matrix(2, 4), t), ConfigError);
    ParamVector short_p(3, 0.0f);
    EXPECT_THROW(forward_batch(spec, short_p, Matrix(2, 4)), ConfigError);
}

TEST(Mlp, LossOfSingleSample) {
    // zero net plus output bias 2 predicts 2; target 5
    MlpSpec spec{{1, 1}};
    ParamVector p{0.0f, 2.0f};
    Matrix x(1, 1);
    std::vector<float> t{5.0f};
    auto lg = mse_loss_and_grad(spec, p, x, t);
    EXPECT_DOUBLE_EQ(lg.loss, 9.0);
}

TEST(Mlp, PerfectPredictionHasZeroLossAndGrad) {
    MlpSpec spec{{4, 6, 1}};
    Rng rng(2);
    auto p = init_params(spec, rng);
    auto x = random_inputs(8, 4, rng);
    auto y = forward_batch(spec, p, x);
    auto lg = mse_loss_and_grad(spec, p, x, y.data);
    EXPECT_EQ(lg.loss, 0.0);
    for (float g : lg.grad) EXPECT_EQ(g, 0.0f);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
    Rng rng(3);
    auto r = oracle::grad_check({10, 30, 1}, 16, false, rng);
    EXPECT_LT(r.rel_error, 1e-4);
}

TEST(Mlp, MaskedQHeadGradient) {
    Rng rng(4);
    auto r = oracle::grad_check({6, 12, 8, 4}, 16, true, rng);
    EXPECT_LT(r.rel_error, 1e-4);
    auto full = oracle::grad_check({6, 9, 3}, 8, false, rng);
    EXPECT_LT(full.rel_error, 1e-4);
}

TEST(Mlp, MaskOnlyTrainsSelectedOutput) {
    MlpSpec spec{{3, 5, 4}};
    Rng rng(5);
    auto p = init_params(spec, rng);
    auto x = random_inputs(6, 3, rng);
    std::vector<float> t(6, 1.0f);
    std::vector<int> a(6, 2);
    auto lg = mse_loss_and_grad(spec, p, x, t, a);
    // last-layer weights and biases for outputs other than 2 get no gradient
    const std::size_t off = 3 * 5 + 5;
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            if (j != 2) {
                EXPECT_EQ(lg.grad[off + i * 4 + j], 0.0f);
            }
        }
    }
    for (std::size_t j = 0; j < 4; ++j) {
        if (j != 2) {
            EXPECT_EQ(lg.grad[off + 20 + j], 0.0f);
        }
    }
    EXPECT_THROW(mse_loss_and_grad(spec, p, x, t), ConfigError);  // multi-output without mask
}

TEST(Optim, SgdZeroGradLeavesParams) {
    ParamVector p{1.0f, -2.0f, 3.5f};
    const auto before = p;
    std::vector<float> g(3, 0.0f);
    sgd_step(p, g, 0.1);
    EXPECT_EQ(p, before);
    EXPECT_THROW(sgd_step(p, g, 0.0), ConfigError);
}

TEST(Optim, SgdConvergesOnQuadratic) {
    // L(t) = (t - 3)^2, dL/dt = 2 (t - 3); contraction factor 0.8 per step
    ParamVector p{0.0f};
    for (int i = 0; i < 100; ++i) {
        std::vector<float> g{2.0f * (p[0] - 3.0f)};
        sgd_step(p, g, 0.1);
    }
    EXPECT_NEAR(p[0], 3.0f, 1e-3);
}

TEST(Optim, SmallSgdStepDoesNotIncreaseLoss) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        MlpSpec spec{{5, 16, 8, 1}};
        auto p = init_params(spec, rng);
        auto x = random_inputs(32, 5, rng);
        std::vector<float> t(32);
        for (auto& v : t) v = static_cast<float>(uniform01(rng) * 10);
        auto before = mse_loss_and_grad(spec, p, x, t);
        sgd_step(p, before.grad, 1e-4);
        auto after = mse_loss_and_grad(spec, p, x, t);
        EXPECT_LE(after.loss, before.loss);
    }
}

TEST(Optim, AdamCountsSteps) {
    ParamVector p{1.0f, 2.0f};
    AdamState st;
    std::vector<float> g{0.5f, -0.5f};
    adam_step(p, g, AdamConfig{}, st);
    EXPECT_EQ(st.step, 1u);
    adam_step(p, g, AdamConfig{}, st);
    EXPECT_EQ(st.step, 2u);
    // first Adam step moves each parameter by lr against the gradient sign
    ParamVector q{1.0f};
    AdamState s2;
    std::vector<float> g2{4.0f};
    adam_step(q, g2, AdamConfig{}, s2);
    EXPECT_NEAR(q[0], 1.0f - 1e-3f, 1e-6);
}

TEST(Optim, MlpTrainingReducesLoss) {
    Rng rng(7);
    auto net = Mlp::make(MlpSpec{{4, 32, 1}}, rng);
    auto x = random_inputs(64, 4, rng);
    std::vector<float> t(64);
    for (std::size_t i = 0; i < 64; ++i) t[i] = x(i, 0) * 2.0f - x(i, 1);
    const double first = net.train_step(x, t, {});
    double last = first;
    for (int i = 0; i < 500; ++i) last = net.train_step(x, t, {});
    EXPECT_LT(last, first * 0.1);
}

TEST(Snapshot, UnaffectedByTraining) {
    Rng rng(8);
    auto net = Mlp::make(MlpSpec{{3, 8, 2}}, rng);
    auto x = random_inputs(10, 3, rng);
    auto snap = net.snapshot();
    const auto before = snap->forward(x);
    EXPECT_EQ(before.data, net.forward(x).data);  // bitwise at copy time
    std::vector<float> t(10, 3.0f);
    std::vector<int> a(10, 1);
    for (int i = 0; i < 10; ++i) net.train_step(x, t, a);
    EXPECT_EQ(snap->forward(x).data, before.data);
    EXPECT_NE(net.forward(x).data, before.data);
}

TEST(Snapshot, ZeroedNetAndZeroTarget) {
    MlpSpec spec{{3, 4, 1}};
    Mlp net(spec, ParamVector(param_count(spec), 0.0f));
    Rng rng(9);
    auto x = random_inputs(5, 3, rng);
    for (float v : net.snapshot()->forward(x).data) EXPECT_EQ(v, 0.0f);
    auto z = zero_target(3, 4);
    auto y = z->forward(x);
    EXPECT_EQ(y.cols, 4u);
    for (float v : y.data) EXPECT_EQ(v, 0.0f);
    EXPECT_THROW(z->forward(Matrix(1, 2)), ConfigError);
}

TEST(Tabular, LrOneSetsTargetsExactly) {
    TabularApprox tab(2, 1);
    Matrix x(3, 2);
    x(0, 0) = 1;
    x(1, 1) = 1;
    x(2, 0) = 0.5f;
    std::vector<float> t{4.25f, -1.5f, 7.0f};
    tab.train_step(x, t, {});
    EXPECT_EQ(tab.forward(x).data, t);
    Matrix unseen(1, 2);
    unseen(0, 0) = 9;
    EXPECT_EQ(tab.forward(unseen)(0, 0), 0.0f);
}

TEST(Tabular, DuplicatesAverageAndMaskSelects) {
    TabularApprox tab(1, 3);
    Matrix x(2, 1);
    std::vector<float> t{1.0f, 3.0f};
    std::vector<int> a{1, 1};
    tab.train_step(x, t, a);
    auto y = tab.forward(Matrix(1, 1));
    EXPECT_EQ(y(0, 0), 0.0f);
    EXPECT_EQ(y(0, 1), 2.0f);
    EXPECT_EQ(y(0, 2), 0.0f);
}

TEST(Tabular, SnapshotIsCopyOnWrite) {
    TabularApprox tab(1, 1);
    Matrix x(1, 1);
    std::vector<float> t{5.0f};
    tab.train_step(x, t, {});
    auto snap = tab.snapshot();
    t[0] = 8.0f;
    tab.train_step(x, t, {});
    EXPECT_EQ(snap->forward(x)(0, 0), 5.0f);
    EXPECT_EQ(tab.forward(x)(0, 0), 8.0f);
}

TEST(Checkpoint, MlpRoundTripIsBitExact) {
    Rng rng(10);
    auto net = Mlp::make(MlpSpec{{6, 10, 4}}, rng);
    auto x = random_inputs(20, 6, rng);
    std::vector<float> t(20, 1.0f);
    std::vector<int> a(20, 3);
    for (int i = 0; i < 3; ++i) net.train_step(x, t, a);
    const auto path = temp_path("mlp.ckpt");
    save_checkpoint(net, path, {{"head", "q"}});
    auto loaded = load_checkpoint(path);
    EXPECT_EQ(loaded.meta.at("head"), "q");
    auto* mlp = dynamic_cast<Mlp*>(loaded.approx.get());
    ASSERT_NE(mlp, nullptr);
    EXPECT_EQ(mlp->spec(), net.spec());
    EXPECT_EQ(mlp->params(), net.params());
    EXPECT_EQ(mlp->adam_state().step, 3u);
    EXPECT_EQ(mlp->adam_state().m, net.adam_state().m);
    EXPECT_EQ(mlp->adam_state().v, net.adam_state().v);
    auto probe = random_inputs(50, 6, rng);
    EXPECT_EQ(mlp->forward(probe).data, net.forward(probe).data);
    // continuing training from the checkpoint matches continuing in memory
    mlp->train_step(x, t, a);
    net.train_step(x, t, a);
    EXPECT_EQ(mlp->params(), net.params());
}

TEST(Checkpoint, TableRoundTrip) {
    TabularApprox tab(2, 2, 0.5);
    Matrix x(2, 2);
    x(0, 0) = 1;
    x(1, 1) = 2;
    std::vector<float> t{1, 2, 3, 4};
    tab.train_step(x, t, {});
    auto loaded = deserialize_checkpoint(serialize_checkpoint(tab));
    EXPECT_EQ(loaded.approx->kind(), "table");
    EXPECT_EQ(loaded.approx->learning_rate(), 0.5);
    EXPECT_EQ(loaded.approx->forward(x).data, tab.forward(x).data);
    EXPECT_EQ(serialize_checkpoint(*loaded.approx), serialize_checkpoint(tab));
}

TEST(Checkpoint, HeaderMagicAndVersion) {
    Rng rng(11);
    auto net = Mlp::make(MlpSpec{{2, 2}}, rng);
    const auto bytes = serialize_checkpoint(net);
    EXPECT_EQ(bytes.substr(0, 4), "XUBE");
    std::uint32_t version = 0;
    std::memcpy(&version, bytes.data() + 4, 4);
    EXPECT_EQ(version, 1u);
}

TEST(Checkpoint, CorruptionIsDetected) {
    Rng rng(12);
    auto net = Mlp::make(MlpSpec{{3, 4, 1}}, rng);
    const auto bytes = serialize_checkpoint(net);
    for (std::size_t cut : {std::size_t{0}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
        EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, cut)), CorruptFileError);
    }
    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    EXPECT_THROW(deserialize_checkpoint(flipped), CorruptFileError);

    // truncated file on disk
    const auto path = temp_path("trunc.ckpt");
    {
        std::ofstream out(path, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 7));
    }
    EXPECT_THROW(load_checkpoint(path), CorruptFileError);
}

TEST(Checkpoint, VersionMismatch) {
    Rng rng(13);
    auto net = Mlp::make(MlpSpec{{3, 1}}, rng);
    auto bytes = serialize_checkpoint(net);
    bytes.resize(bytes.size() - 4);
    const std::uint32_t v2 = 2;
    std::memcpy(bytes.data() + 4, &v2, 4);
    const auto crc = static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
    bytes.append(reinterpret_cast<const char*>(&crc), 4);
    EXPECT_THROW(deserialize_checkpoint(bytes), VersionMismatchError);
}
