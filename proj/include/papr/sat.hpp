#pragma once

// Special averaging technique: derivative-sign template matching finds local maxima of the
// envelope, a global statistical threshold keeps the abnormal ones, and each survivor is
// replaced by an average of itself and its neighbours.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "papr/common.hpp"
#include "papr/ofdm.hpp"

namespace papr {

enum class AveragingFilter { simple, exponential, weighted };
enum class Boundary { cyclic, clamp };

inline std::string_view to_string(AveragingFilter f)
{
    switch (f) {
    case AveragingFilter::simple: return "simple";
    case AveragingFilter::exponential: return "exponential";
    case AveragingFilter::weighted: return "weighted";
    }
    return "?";
}

struct SatConfig {
    double k = 2.5;
    AveragingFilter filter = AveragingFilter::simple;
    Boundary boundary = Boundary::cyclic;
    std::size_t max_passes = 1;
    double exponential_alpha = 0.5;

    void validate() const
    {
        require(k > 0.0 && std::isfinite(k), "SAT k must be a positive finite number");
        require(max_passes >= 1, "SAT max_passes must be >= 1");
        require(exponential_alpha >= 0.0 && exponential_alpha <= 1.0, "exponential alpha must lie in [0, 1]");
    }
};

/// Signs of first differences of a magnitude series. In cyclic mode there is one extra
/// entry closing the loop: signs[N-1] = sign(mag[0] - mag[N-1]).
struct SignSeries {
    std::vector<int> signs;
    bool cyclic = false;
};

struct PeakSet {
    std::vector<std::size_t> indices;
    double threshold = 0.0;
};

inline SignSeries sign_diff(std::span<const double> mag, Boundary boundary = Boundary::clamp)
{
    require(mag.size() >= 2, "sign_diff needs at least two samples");
    const std::size_t n = mag.size();
    const bool cyclic = boundary == Boundary::cyclic;
    SignSeries s{std::vector<int>(cyclic ? n : n - 1), cyclic};
    for (std::size_t i = 0; i < s.signs.size(); ++i) {
        const double d = mag[(i + 1) % n] - mag[i];
        s.signs[i] = (d > 0.0) - (d < 0.0);
    }
    return s;
}

/// Full discrete convolution of the sign series with the [-1, 1] kernel.
/// out[j] = signs[j-1] - signs[j], which is 2 only for an up-then-down pair.
inline std::vector<int> sign_template_response(const SignSeries& s)
{
    const auto& x = s.signs;
    const std::size_t n = x.size();
    if (s.cyclic) {
        std::vector<int> out(n);
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = x[(j + n - 1) % n] - x[j];
        }
        return out;
    }
    std::vector<int> out(n + 1, 0);
    for (std::size_t j = 0; j <= n; ++j) {
        const int prev = j > 0 ? x[j - 1] : 0;
        const int cur = j < n ? x[j] : 0;
        out[j] = prev - cur;
    }
    return out;
}

/// Magnitude indices where the template response equals 2 (strict local maxima).
inline std::vector<std::size_t> detect_peaks(const SignSeries& s)
{
    const auto response = sign_template_response(s);
    std::vector<std::size_t> peaks;
    for (std::size_t j = 0; j < response.size(); ++j) {
        if (response[j] == 2) {
            peaks.push_back(j);
        }
    }
    return peaks;
}

/// (max + mean + population std) / k.
inline double adaptive_threshold(std::span<const double> mag, double k)
{
    require(!mag.empty(), "adaptive_threshold needs a non-empty series");
    require(k > 0.0, "adaptive_threshold needs k > 0");
    const double n = static_cast<double>(mag.size());
    const double peak = *std::max_element(mag.begin(), mag.end());
    const double mean = std::accumulate(mag.begin(), mag.end(), 0.0) / n;
    double var = 0.0;
    for (double v : mag) {
        var += (v - mean) * (v - mean);
    }
    const double stddev = std::sqrt(var / n);
    return (peak + mean + stddev) / k;
}

/// Replacement value for the sample at n, computed from `x` (never from partially updated data).
inline cplx average_at(std::span<const cplx> x, std::size_t n, const SatConfig& cfg)
{
    const std::size_t len = x.size();
    std::size_t prev;
    std::size_t next;
    if (cfg.boundary == Boundary::cyclic) {
        prev = (n + len - 1) % len;
        next = (n + 1) % len;
    } else {
        prev = n == 0 ? 0 : n - 1;
        next = std::min(n + 1, len - 1);
    }
    switch (cfg.filter) {
    case AveragingFilter::simple: return (x[prev] + x[n] + x[next]) / 3.0;
    case AveragingFilter::weighted: return (x[prev] + 2.0 * x[n] + x[next]) / 4.0;
    case AveragingFilter::exponential: return cfg.exponential_alpha * x[prev] + (1.0 - cfg.exponential_alpha) * x[n];
    }
    return x[n];
}

struct SatResult {
    TimeSymbol symbol;
    /// Union of replaced indices over all passes; threshold is the first pass's.
    PeakSet peaks;
    std::vector<double> pass_thresholds;
};

/// Peaks of one pass: template-matched local maxima whose magnitude exceeds the threshold.
inline PeakSet find_bizarre_peaks(std::span<const cplx> x, const SatConfig& cfg)
{
    const auto mag = magnitudes(x);
    PeakSet ps;
    ps.threshold = adaptive_threshold(mag, cfg.k);
    for (auto i : detect_peaks(sign_diff(mag, cfg.boundary))) {
        if (mag[i] > ps.threshold) {
            ps.indices.push_back(i);
        }
    }
    return ps;
}

inline SatResult sat_process(const TimeSymbol& symbol, const SatConfig& cfg)
{
    cfg.validate();
    const auto useful = symbol.useful();
    require(useful.size() >= 2, "SAT needs at least two samples");

    ComplexSeries current(useful.begin(), useful.end());
    SatResult result;
    std::vector<std::size_t> touched;
    for (std::size_t pass = 0; pass < cfg.max_passes; ++pass) {
        const auto peaks = find_bizarre_peaks(current, cfg);
        result.pass_thresholds.push_back(peaks.threshold);
        if (pass == 0) {
            result.peaks.threshold = peaks.threshold;
        }
        if (peaks.indices.empty()) {
            break;
        }
        ComplexSeries next = current;
        for (auto i : peaks.indices) {
            next[i] = average_at(current, i, cfg);
        }
        current = std::move(next);
        touched.insert(touched.end(), peaks.indices.begin(), peaks.indices.end());
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    result.peaks.indices = std::move(touched);

    TimeSymbol out{std::move(current), 0};
    if (symbol.prefix_len > 0) {
        const GuardFraction g{symbol.prefix_len, out.samples.size()};
        out = add_cyclic_prefix(out, g);
    }
    result.symbol = std::move(out);
    return result;
}

} // namespace papr
