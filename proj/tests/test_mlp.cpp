#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "papr/mlp.hpp"

using namespace papr;

namespace {

Dataset small_dataset(std::size_t dim, std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<RealSeries> in(count, RealSeries(dim));
    std::vector<RealSeries> out(count, RealSeries(dim));
    for (std::size_t c = 0; c < count; ++c) {
        for (std::size_t i = 0; i < dim; ++i) {
            in[c][i] = u(eng);
        }
        for (std::size_t i = 0; i < dim; ++i) {
            out[c][i] = 0.5 * in[c][i] + 0.25 * in[c][(i + 1) % dim];
        }
    }
    return make_dataset(in, out);
}

} // namespace

TEST(Mlp, BipolarSigmoid)
{
    EXPECT_DOUBLE_EQ(bipolar_sigmoid(0.0), 0.0);
    EXPECT_NEAR(bipolar_sigmoid(1.0), (1.0 - std::exp(-1.0)) / (1.0 + std::exp(-1.0)), 1e-15);
    EXPECT_NEAR(bipolar_sigmoid(800.0), 1.0, 1e-15);
    EXPECT_NEAR(bipolar_sigmoid(-800.0), -1.0, 1e-15);
}

TEST(Mlp, PackUnpackRoundTrip)
{
    auto m = MlpModel::random(3, 7, 5, 6);
    const auto theta = m.pack();
    EXPECT_EQ(theta.size(), 7 * 5 + 5 + 5 * 6 + 6);
    auto z = MlpModel::zeros(7, 5, 6);
    z.unpack(theta);
    EXPECT_EQ(z.pack(), theta);
}

TEST(Mlp, GradientMatchesCentralDifferences)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto m = MlpModel::random(seed, 6, 4, 5);
        std::mt19937_64 eng(seed + 100);
        std::normal_distribution<double> g;
        Eigen::MatrixXd x(6, 3);
        Eigen::MatrixXd t(5, 3);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(eng);
        for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = g(eng);

        const auto lg = sse_and_gradient(m, x, t);
        EXPECT_NEAR(lg.sse, sse(m, x, t), 1e-12);
        const auto theta = m.pack();
        Eigen::VectorXd numeric(theta.size());
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            auto p = theta;
            p(i) += h;
            auto q = theta;
            q(i) -= h;
            MlpModel mp = m;
            mp.unpack(p);
            MlpModel mq = m;
            mq.unpack(q);
            numeric(i) = (sse(mp, x, t) - sse(mq, x, t)) / (2.0 * h);
        }
        const double rel = (numeric - lg.gradient).norm() / std::max(1e-12, numeric.norm());
        EXPECT_LT(rel, 1e-4) << seed;
    }
}

TEST(Train, BothOptimizersReduceLoss)
{
    const auto data = small_dataset(8, 12, 4);
    for (auto opt : {Optimizer::powell_beale_cg, Optimizer::gradient_descent}) {
        TrainConfig cfg;
        cfg.optimizer = opt;
        cfg.max_epochs = 200;
        cfg.learning_rate = 0.01;
        const auto r = train(MlpModel::random(1, 8, 6, 8), data, cfg);
        ASSERT_GE(r.report.mse_history.size(), 2u);
        EXPECT_LT(r.report.final_mse, r.report.mse_history.front());
        EXPECT_EQ(r.report.mse_history.size(), r.report.epochs_used + 1);
    }
}

TEST(Train, CgHistoryIsNonIncreasing)
{
    TrainConfig cfg;
    cfg.max_epochs = 300;
    const auto r = train(MlpModel::random(2, 8, 6, 8), small_dataset(8, 12, 5), cfg);
    for (std::size_t i = 1; i < r.report.mse_history.size(); ++i) {
        EXPECT_LE(r.report.mse_history[i], r.report.mse_history[i - 1]);
    }
}

TEST(Train, ReachesGoalOnRepresentableMapping)
{
    // With hidden size >= sample count the targets are exactly representable.
    TrainConfig cfg;
    cfg.goal_mse = 1e-6;
    cfg.max_epochs = 5000;
    const auto r = train(MlpModel::random(3, 8, 12, 8), small_dataset(8, 10, 6), cfg);
    EXPECT_TRUE(r.report.reached_goal) << r.report.final_mse << " " << r.report.stop_reason;
    EXPECT_EQ(r.report.stop_reason, "goal reached");
}

TEST(Train, IsDeterministic)
{
    TrainConfig cfg;
    cfg.max_epochs = 50;
    const auto data = small_dataset(8, 6, 7);
    const auto a = train(MlpModel::random(9, 8, 4, 8), data, cfg);
    const auto b = train(MlpModel::random(9, 8, 4, 8), data, cfg);
    EXPECT_EQ(a.report.mse_history, b.report.mse_history);
    EXPECT_EQ(a.model.pack(), b.model.pack());
}

TEST(Model, SaveLoadRoundTripIsExact)
{
    auto m = MlpModel::random(11, 9, 4, 9);
    m.input_scale = 0.7371;
    std::stringstream ss;
    save_model(ss, m);
    const auto back = load_model(ss);
    EXPECT_EQ(back.pack(), m.pack());
    EXPECT_EQ(back.input_scale, m.input_scale);

    const std::vector<double> env{0.1, 0.5, 2.0, 0.0, 1.1, 0.3, 0.9, 1.4, 0.2};
    EXPECT_EQ(predict_envelope(back, env), predict_envelope(m, env));
}

TEST(Model, RejectsCorruptFiles)
{
    std::stringstream bad_magic("not-a-model 1\n");
    EXPECT_THROW((void)load_model(bad_magic), InvalidInput);
    std::stringstream bad_version("papr-mlp 99\n");
    EXPECT_THROW((void)load_model(bad_version), InvalidInput);

    auto m = MlpModel::random(1, 3, 2, 3);
    std::stringstream ss;
    save_model(ss, m);
    auto text = ss.str();
    std::stringstream truncated(text.substr(0, text.size() / 2));
    EXPECT_THROW((void)load_model(truncated), InvalidInput);
    EXPECT_THROW((void)load_model(std::string("/nonexistent/dir/model.txt")), InvalidInput);
}

TEST(NnReduce, KeepsPhase)
{
    auto m = MlpModel::random(5, 16, 4, 16);
    TimeSymbol t{ComplexSeries(16), 0};
    for (std::size_t i = 0; i < 16; ++i) {
        t.samples[i] = std::polar(0.5 + 0.1 * static_cast<double>(i), 0.3 * static_cast<double>(i));
    }
    const auto out = nn_reduce(m, t);
    const auto env = predict_envelope(m, magnitudes(t.samples));
    for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_NEAR(std::abs(out.samples[i]), env[i], 1e-12);
        if (env[i] > 1e-9) {
            EXPECT_NEAR(std::arg(out.samples[i]), std::arg(t.samples[i]), 1e-9);
        }
    }
}
