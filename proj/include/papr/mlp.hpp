#pragma once

// Two-layer feed-forward network (bipolar-sigmoid hidden layer, linear output) mapping an
// OFDM magnitude envelope to a reduced-peak envelope, trained by full-batch conjugate
// gradient backpropagation.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "papr/common.hpp"
#include "papr/ofdm.hpp"

namespace papr {

/// (1 - e^{-x}) / (1 + e^{-x}); evaluated without overflow for large |x|.
inline double bipolar_sigmoid(double x)
{
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return (1.0 - e) / (1.0 + e);
    }
    const double e = std::exp(x);
    return (e - 1.0) / (e + 1.0);
}

struct MlpModel {
    Eigen::MatrixXd w1; // hidden x inputs
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2; // outputs x hidden
    Eigen::VectorXd b2;
    /// Envelopes are divided by this before the network and multiplied back afterwards.
    double input_scale = 1.0;

    static MlpModel zeros(std::size_t inputs = 512, std::size_t hidden = 30, std::size_t outputs = 512)
    {
        MlpModel m;
        const auto in = static_cast<Eigen::Index>(inputs);
        const auto hid = static_cast<Eigen::Index>(hidden);
        const auto out = static_cast<Eigen::Index>(outputs);
        m.w1 = Eigen::MatrixXd::Zero(hid, in);
        m.b1 = Eigen::VectorXd::Zero(hid);
        m.w2 = Eigen::MatrixXd::Zero(out, hid);
        m.b2 = Eigen::VectorXd::Zero(out);
        return m;
    }

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
    static MlpModel random(std::uint64_t seed, std::size_t inputs = 512, std::size_t hidden = 30,
                           std::size_t outputs = 512)
    {
        MlpModel m = zeros(inputs, hidden, outputs);
        std::mt19937_64 eng(seed);
        const auto draw = [&eng](double bound) {
            const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
            return (2.0 * u - 1.0) * bound;
        };
        const double r1 = 1.0 / std::sqrt(static_cast<double>(inputs));
        const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
        for (Eigen::Index j = 0; j < m.w1.cols(); ++j) {
            for (Eigen::Index i = 0; i < m.w1.rows(); ++i) {
                m.w1(i, j) = draw(r1);
            }
        }
        for (Eigen::Index j = 0; j < m.w2.cols(); ++j) {
            for (Eigen::Index i = 0; i < m.w2.rows(); ++i) {
                m.w2(i, j) = draw(r2);
            }
        }
        return m;
    }

    [[nodiscard]] std::size_t inputs() const { return static_cast<std::size_t>(w1.cols()); }
    [[nodiscard]] std::size_t hidden() const { return static_cast<std::size_t>(w1.rows()); }
    [[nodiscard]] std::size_t outputs() const { return static_cast<std::size_t>(w2.rows()); }
    [[nodiscard]] Eigen::Index parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

    /// Parameters flattened as [w1 (column-major), b1, w2 (column-major), b2].
    [[nodiscard]] Eigen::VectorXd pack() const
    {
        Eigen::VectorXd theta(parameter_count());
        Eigen::Index o = 0;
        theta.segment(o, w1.size()) = Eigen::Map<const Eigen::VectorXd>(w1.data(), w1.size());
        o += w1.size();
        theta.segment(o, b1.size()) = b1;
        o += b1.size();
        theta.segment(o, w2.size()) = Eigen::Map<const Eigen::VectorXd>(w2.data(), w2.size());
        o += w2.size();
        theta.segment(o, b2.size()) = b2;
        return theta;
    }

    void unpack(const Eigen::VectorXd& theta)
    {
        require(theta.size() == parameter_count(), "parameter vector has the wrong size");
        Eigen::Index o = 0;
        Eigen::Map<Eigen::VectorXd>(w1.data(), w1.size()) = theta.segment(o, w1.size());
        o += w1.size();
        b1 = theta.segment(o, b1.size());
        o += b1.size();
        Eigen::Map<Eigen::VectorXd>(w2.data(), w2.size()) = theta.segment(o, w2.size());
        o += w2.size();
        b2 = theta.segment(o, b2.size());
    }

    [[nodiscard]] bool finite() const { return pack().allFinite() && std::isfinite(input_scale); }
};

// ---------------------------------------------------------------------------
// Forward / backward

/// Network output for a batch; inputs are columns.
inline Eigen::MatrixXd forward_batch(const MlpModel& m, const Eigen::MatrixXd& x)
{
    require(static_cast<std::size_t>(x.rows()) == m.inputs(), "input dimension does not match the model");
    Eigen::MatrixXd h = (m.w1 * x).colwise() + m.b1;
    h = h.unaryExpr([](double v) { return bipolar_sigmoid(v); });
    return (m.w2 * h).colwise() + m.b2;
}

inline Eigen::VectorXd forward(const MlpModel& m, std::span<const double> x)
{
    require(x.size() == m.inputs(), "input dimension does not match the model");
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    return forward_batch(m, xv);
}

struct LossGradient {
    double sse = 0.0;
    Eigen::VectorXd gradient; // d(sse)/d(theta), packed like MlpModel::pack
};

/// Sum of squared errors over the batch and its gradient by backpropagation.
inline LossGradient sse_and_gradient(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t)
{
    require(x.cols() == t.cols(), "input and target batches differ in size");
    require(static_cast<std::size_t>(t.rows()) == m.outputs(), "target dimension does not match the model");
    Eigen::MatrixXd h = (m.w1 * x).colwise() + m.b1;
    h = h.unaryExpr([](double v) { return bipolar_sigmoid(v); });
    const Eigen::MatrixXd y = (m.w2 * h).colwise() + m.b2;
    const Eigen::MatrixXd dy = 2.0 * (y - t);

    LossGradient out;
    out.sse = (y - t).squaredNorm();
    const Eigen::MatrixXd dw2 = dy * h.transpose();
    const Eigen::VectorXd db2 = dy.rowwise().sum();
    // f'(z) = (1 - f(z)^2) / 2 for the bipolar sigmoid.
    const Eigen::MatrixXd dz = (m.w2.transpose() * dy).cwiseProduct((1.0 - h.array().square()).matrix() * 0.5);
    const Eigen::MatrixXd dw1 = dz * x.transpose();
    const Eigen::VectorXd db1 = dz.rowwise().sum();

    out.gradient.resize(m.parameter_count());
    Eigen::Index o = 0;
    out.gradient.segment(o, dw1.size()) = Eigen::Map<const Eigen::VectorXd>(dw1.data(), dw1.size());
    o += dw1.size();
    out.gradient.segment(o, db1.size()) = db1;
    o += db1.size();
    out.gradient.segment(o, dw2.size()) = Eigen::Map<const Eigen::VectorXd>(dw2.data(), dw2.size());
    o += dw2.size();
    out.gradient.segment(o, db2.size()) = db2;
    return out;
}

inline double sse(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t)
{
    return (forward_batch(m, x) - t).squaredNorm();
}

// ---------------------------------------------------------------------------
// Training

enum class Optimizer { powell_beale_cg, gradient_descent };

struct TrainConfig {
    /// Gradient-descent step, and the first trial step of the CG line search.
    double learning_rate = 0.1;
    double goal_mse = 1e-3;
    std::size_t max_epochs = 25000;
    Optimizer optimizer = Optimizer::powell_beale_cg;
    double min_gradient = 1e-10;

    void validate() const
    {
        require(learning_rate > 0.0, "learning_rate must be positive");
        require(goal_mse > 0.0, "goal_mse must be positive");
        require(max_epochs >= 1, "max_epochs must be >= 1");
    }
};

struct TrainReport {
    double final_mse = 0.0;
    std::size_t epochs_used = 0;
    /// Entry 0 is the MSE before training; entry e is the MSE after epoch e.
    std::vector<double> mse_history;
    bool reached_goal = false;
    std::string stop_reason;
};

/// Training pairs stored column-wise (one envelope per column).
struct Dataset {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;

    [[nodiscard]] Eigen::Index size() const { return inputs.cols(); }
};

inline Dataset make_dataset(const std::vector<RealSeries>& inputs, const std::vector<RealSeries>& targets)
{
    require(!inputs.empty(), "training dataset is empty");
    require(inputs.size() == targets.size(), "inputs and targets differ in count");
    const auto dim = static_cast<Eigen::Index>(inputs.front().size());
    Dataset d{Eigen::MatrixXd(dim, static_cast<Eigen::Index>(inputs.size())),
              Eigen::MatrixXd(static_cast<Eigen::Index>(targets.front().size()), static_cast<Eigen::Index>(targets.size()))};
    for (std::size_t c = 0; c < inputs.size(); ++c) {
        require(static_cast<Eigen::Index>(inputs[c].size()) == dim, "inconsistent input lengths");
        require(static_cast<Eigen::Index>(targets[c].size()) == d.targets.rows(), "inconsistent target lengths");
        d.inputs.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(inputs[c].data(), dim);
        d.targets.col(static_cast<Eigen::Index>(c)) =
            Eigen::Map<const Eigen::VectorXd>(targets[c].data(), d.targets.rows());
    }
    return d;
}

struct TrainResult {
    MlpModel model;
    TrainReport report;
};

namespace detail {

class Objective {
public:
    Objective(MlpModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t)
        : model_(model), x_(x), t_(t), count_(static_cast<double>(t.size()))
    {
    }

    /// MSE and its gradient at theta.
    double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad)
    {
        model_.unpack(theta);
        auto lg = sse_and_gradient(model_, x_, t_);
        grad = lg.gradient / count_;
        return lg.sse / count_;
    }

    double value(const Eigen::VectorXd& theta)
    {
        model_.unpack(theta);
        return sse(model_, x_, t_) / count_;
    }

private:
    MlpModel& model_;
    const Eigen::MatrixXd& x_;
    const Eigen::MatrixXd& t_;
    double count_;
};

struct LineSearchResult {
    bool ok = false;
    double step = 0.0;
    double value = 0.0;
};

// Backtracking (Armijo) with forward expansion while the objective keeps dropping.
inline LineSearchResult line_search(Objective& obj, const Eigen::VectorXd& theta, double f0, double slope,
                                    const Eigen::VectorXd& dir, double initial_step)
{
    constexpr double c1 = 1e-4;
    constexpr int max_backtracks = 60;
    constexpr int max_expansions = 20;

    double step = initial_step;
    double f = obj.value(theta + step * dir);
    int tries = 0;
    while (!(f <= f0 + c1 * step * slope) && tries++ < max_backtracks) {
        step *= 0.5;
        f = obj.value(theta + step * dir);
    }
    if (!(f <= f0 + c1 * step * slope)) {
        return {};
    }
    if (tries == 0) {
        for (int e = 0; e < max_expansions; ++e) {
            const double bigger = 2.0 * step;
            const double fb = obj.value(theta + bigger * dir);
            if (!(fb < f) || !(fb <= f0 + c1 * bigger * slope)) {
                break;
            }
            step = bigger;
            f = fb;
        }
    }
    return {true, step, f};
}

} // namespace detail

/// Full-batch training on envelopes. The dataset is normalised by the RMS of its inputs;
/// that scale is stored in the returned model and all reported MSE values are in
/// normalised units.
inline TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& cfg)
{
    cfg.validate();
    require(data.size() > 0, "training dataset is empty");
    require(static_cast<std::size_t>(data.inputs.rows()) == model.inputs(), "input dimension does not match the model");
    require(static_cast<std::size_t>(data.targets.rows()) == model.outputs(), "target dimension does not match the model");

    const double rms = std::sqrt(data.inputs.squaredNorm() / static_cast<double>(data.inputs.size()));
    model.input_scale = rms > 0.0 ? rms : 1.0;
    const Eigen::MatrixXd x = data.inputs / model.input_scale;
    const Eigen::MatrixXd t = data.targets / model.input_scale;

    MlpModel work = model;
    detail::Objective obj(work, x, t);
    Eigen::VectorXd theta = model.pack();
    Eigen::VectorXd grad;
    double f = obj.value_and_gradient(theta, grad);

    TrainReport report;
    report.mse_history.push_back(f);
    Eigen::VectorXd dir = -grad;
    double step = cfg.learning_rate;
    bool steepest = true;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        if (cfg.optimizer == Optimizer::gradient_descent) {
            theta -= cfg.learning_rate * grad;
            f = obj.value_and_gradient(theta, grad);
        } else {
            double slope = grad.dot(dir);
            if (!(slope < 0.0)) {
                dir = -grad;
                slope = -grad.squaredNorm();
                steepest = true;
            }
            auto ls = detail::line_search(obj, theta, f, slope, dir, step);
            if (!ls.ok && !steepest) {
                dir = -grad;
                slope = -grad.squaredNorm();
                steepest = true;
                ls = detail::line_search(obj, theta, f, slope, dir, cfg.learning_rate);
            }
            if (!ls.ok) {
                report.stop_reason = "line search failed";
                report.epochs_used = epoch - 1;
                break;
            }
            theta += ls.step * dir;
            step = ls.step;
            Eigen::VectorXd next_grad;
            f = obj.value_and_gradient(theta, next_grad);

            const double gg = next_grad.squaredNorm();
            // Powell-Beale restart: successive gradients are far from orthogonal.
            if (std::abs(next_grad.dot(grad)) >= 0.2 * gg) {
                dir = -next_grad;
                steepest = true;
            } else {
                const double beta = std::max(0.0, next_grad.dot(next_grad - grad) / grad.squaredNorm());
                dir = -next_grad + beta * dir;
                steepest = beta == 0.0;
            }
            grad = std::move(next_grad);
        }

        report.mse_history.push_back(f);
        report.epochs_used = epoch;
        if (!std::isfinite(f)) {
            report.stop_reason = "diverged";
            break;
        }
        if (f <= cfg.goal_mse) {
            report.stop_reason = "goal reached";
            break;
        }
        if (grad.norm() < cfg.min_gradient) {
            report.stop_reason = "minimum gradient reached";
            break;
        }
    }
    if (report.stop_reason.empty()) {
        report.stop_reason = "epoch budget exhausted";
    }
    report.final_mse = report.mse_history.back();
    report.reached_goal = report.final_mse <= cfg.goal_mse;
    model.unpack(theta);
    return {std::move(model), std::move(report)};
}

// ---------------------------------------------------------------------------
// Applying the model

/// Predicted envelope in signal units (input scaling applied and undone, clamped at zero).
inline RealSeries predict_envelope(const MlpModel& m, std::span<const double> envelope)
{
    require(envelope.size() == m.inputs(), "envelope length does not match the model");
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(envelope.data(), static_cast<Eigen::Index>(envelope.size()));
    x /= m.input_scale;
    const Eigen::VectorXd y = forward_batch(m, x) * m.input_scale;
    RealSeries out(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        out[static_cast<std::size_t>(i)] = std::max(0.0, y(i));
    }
    return out;
}

/// Replaces sample magnitudes with the network's prediction, keeping every phase.
inline TimeSymbol nn_reduce(const MlpModel& m, const TimeSymbol& symbol)
{
    const auto useful = symbol.useful();
    require(useful.size() == m.inputs() && m.inputs() == m.outputs(), "symbol length does not match the model");
    const auto env = magnitudes(useful);
    const auto pred = predict_envelope(m, env);
    TimeSymbol out{ComplexSeries(useful.size()), 0};
    for (std::size_t i = 0; i < useful.size(); ++i) {
        out.samples[i] = std::polar(pred[i], env[i] > 0.0 ? std::arg(useful[i]) : 0.0);
    }
    if (symbol.prefix_len > 0) {
        out = add_cyclic_prefix(out, GuardFraction{symbol.prefix_len, useful.size()});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence
//
// Text format, one token per whitespace-separated field:
//   papr-mlp 1
//   inputs <n> hidden <h> outputs <m>
//   hidden_activation bipolar_sigmoid
//   output_activation linear
//   input_scale <x>
//   w1 <h*n values, row-major>
//   b1 <h values>
//   w2 <m*h values, row-major>
//   b2 <m values>
// Numbers use the shortest round-trip decimal form, independent of locale.

inline constexpr std::string_view kModelMagic = "papr-mlp";
inline constexpr int kModelVersion = 1;

namespace detail {

inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw InvalidInput("model file: malformed number '" + s + "'");
    }
    return v;
}

inline void write_matrix(std::ostream& os, std::string_view tag, const Eigen::MatrixXd& m)
{
    os << tag << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            os << (j ? " " : "") << format_double(m(i, j));
        }
        os << '\n';
    }
}

inline std::string expect_token(std::istream& is, std::string_view what)
{
    std::string tok;
    if (!(is >> tok)) {
        throw InvalidInput("model file: unexpected end of input, wanted " + std::string(what));
    }
    return tok;
}

inline void expect_keyword(std::istream& is, std::string_view kw)
{
    if (expect_token(is, kw) != kw) {
        throw InvalidInput("model file: expected '" + std::string(kw) + "'");
    }
}

inline std::size_t read_dim(std::istream& is, std::string_view kw)
{
    expect_keyword(is, kw);
    const double v = parse_double(expect_token(is, kw));
    require(v >= 1.0 && v == std::floor(v), "model file: bad dimension");
    return static_cast<std::size_t>(v);
}

inline void read_matrix(std::istream& is, std::string_view tag, Eigen::MatrixXd& m)
{
    expect_keyword(is, tag);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = parse_double(expect_token(is, tag));
        }
    }
}

} // namespace detail

inline void save_model(std::ostream& os, const MlpModel& m)
{
    os << kModelMagic << ' ' << kModelVersion << '\n'
       << "inputs " << m.inputs() << " hidden " << m.hidden() << " outputs " << m.outputs() << '\n'
       << "hidden_activation bipolar_sigmoid\n"
       << "output_activation linear\n"
       << "input_scale " << detail::format_double(m.input_scale) << '\n';
    detail::write_matrix(os, "w1", m.w1);
    detail::write_matrix(os, "b1", m.b1.transpose());
    detail::write_matrix(os, "w2", m.w2);
    detail::write_matrix(os, "b2", m.b2.transpose());
}

inline MlpModel load_model(std::istream& is)
{
    detail::expect_keyword(is, kModelMagic);
    const auto version = detail::expect_token(is, "version");
    if (version != std::to_string(kModelVersion)) {
        throw InvalidInput("model file: unsupported version " + version);
    }
    const auto in = detail::read_dim(is, "inputs");
    const auto hid = detail::read_dim(is, "hidden");
    const auto out = detail::read_dim(is, "outputs");
    detail::expect_keyword(is, "hidden_activation");
    if (detail::expect_token(is, "activation") != "bipolar_sigmoid") {
        throw InvalidInput("model file: unsupported hidden activation");
    }
    detail::expect_keyword(is, "output_activation");
    if (detail::expect_token(is, "activation") != "linear") {
        throw InvalidInput("model file: unsupported output activation");
    }
    detail::expect_keyword(is, "input_scale");
    MlpModel m = MlpModel::zeros(in, hid, out);
    m.input_scale = detail::parse_double(detail::expect_token(is, "input_scale"));
    Eigen::MatrixXd b1(1, m.b1.size());
    Eigen::MatrixXd b2(1, m.b2.size());
    detail::read_matrix(is, "w1", m.w1);
    detail::read_matrix(is, "b1", b1);
    detail::read_matrix(is, "w2", m.w2);
    detail::read_matrix(is, "b2", b2);
    m.b1 = b1.transpose();
    m.b2 = b2.transpose();
    require(m.finite(), "model file: non-finite parameter");
    return m;
}

inline void save_model(const std::string& path, const MlpModel& m)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw InvalidInput("cannot open model file for writing: " + path);
    }
    save_model(os, m);
}

inline MlpModel load_model(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw InvalidInput("cannot open model file: " + path);
    }
    return load_model(is);
}

} // namespace papr
