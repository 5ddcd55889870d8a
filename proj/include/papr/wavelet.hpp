#pragma once

// Periodic orthonormal discrete wavelet transform and universal-threshold denoising.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "papr/common.hpp"
#include "papr/metrics.hpp"
#include "papr/ofdm.hpp"

namespace papr {

enum class WaveletName { haar, db4 };

inline std::string_view to_string(WaveletName w) { return w == WaveletName::haar ? "haar" : "db4"; }

/// Orthonormal two-channel filter bank. `lowpass` is the scaling filter h (sum sqrt(2));
/// the wavelet filter is its quadrature mirror g[m] = (-1)^m h[L-1-m].
struct WaveletFamily {
    WaveletName name;
    std::vector<double> lowpass;
    std::vector<double> highpass;

    static WaveletFamily make(WaveletName name)
    {
        WaveletFamily f{name, {}, {}};
        switch (name) {
        case WaveletName::haar:
            f.lowpass = {std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0};
            break;
        case WaveletName::db4:
            // Daubechies, four vanishing moments (8 taps).
            f.lowpass = {0.23037781330885523,  0.7148465705525415,   0.6308807679295904,  -0.02798376941698385,
                         -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278};
            break;
        }
        const std::size_t len = f.lowpass.size();
        f.highpass.resize(len);
        for (std::size_t m = 0; m < len; ++m) {
            f.highpass[m] = ((m % 2) ? -1.0 : 1.0) * f.lowpass[len - 1 - m];
        }
        return f;
    }
};

struct DwtCoefficients {
    RealSeries approx;
    /// details[0] is the finest band (level 1).
    std::vector<RealSeries> details;

    [[nodiscard]] std::size_t levels() const { return details.size(); }
};

namespace detail {

inline void analysis_step(std::span<const double> x, const WaveletFamily& f, RealSeries& lo, RealSeries& hi)
{
    const std::size_t n = x.size();
    const std::size_t half = n / 2;
    lo.assign(half, 0.0);
    hi.assign(half, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
        double a = 0.0;
        double d = 0.0;
        for (std::size_t m = 0; m < f.lowpass.size(); ++m) {
            const double v = x[(2 * k + m) % n];
            a += f.lowpass[m] * v;
            d += f.highpass[m] * v;
        }
        lo[k] = a;
        hi[k] = d;
    }
}

inline RealSeries synthesis_step(std::span<const double> lo, std::span<const double> hi, const WaveletFamily& f)
{
    const std::size_t n = 2 * lo.size();
    RealSeries x(n, 0.0);
    for (std::size_t k = 0; k < lo.size(); ++k) {
        for (std::size_t m = 0; m < f.lowpass.size(); ++m) {
            x[(2 * k + m) % n] += f.lowpass[m] * lo[k] + f.highpass[m] * hi[k];
        }
    }
    return x;
}

} // namespace detail

inline DwtCoefficients dwt(std::span<const double> signal, const WaveletFamily& family, std::size_t levels)
{
    require(is_power_of_two(signal.size()) && signal.size() >= 2, "DWT length must be a power of two >= 2");
    require(levels >= 1 && levels <= log2_exact(signal.size()), "DWT levels must lie in [1, log2(length)]");
    DwtCoefficients c;
    RealSeries current(signal.begin(), signal.end());
    RealSeries lo;
    RealSeries hi;
    for (std::size_t l = 0; l < levels; ++l) {
        detail::analysis_step(current, family, lo, hi);
        c.details.push_back(std::move(hi));
        current = std::move(lo);
    }
    c.approx = std::move(current);
    return c;
}

inline RealSeries idwt(const DwtCoefficients& coeffs, const WaveletFamily& family)
{
    require(!coeffs.details.empty(), "no detail bands to reconstruct from");
    RealSeries current = coeffs.approx;
    for (std::size_t l = coeffs.details.size(); l-- > 0;) {
        require(coeffs.details[l].size() == current.size(), "inconsistent DWT band sizes");
        current = detail::synthesis_step(current, coeffs.details[l], family);
    }
    return current;
}

// ---------------------------------------------------------------------------
// Denoising

enum class ThresholdRule { soft, hard };

inline double apply_threshold(double c, double t, ThresholdRule rule)
{
    const double a = std::abs(c);
    if (rule == ThresholdRule::hard) {
        return a > t ? c : 0.0;
    }
    return a > t ? std::copysign(a - t, c) : 0.0;
}

/// Thresholds every detail band in place; the approximation band is left untouched.
inline void threshold_details(DwtCoefficients& c, double threshold, ThresholdRule rule)
{
    for (auto& band : c.details) {
        for (auto& v : band) {
            v = apply_threshold(v, threshold, rule);
        }
    }
}

/// Universal threshold sigma * sqrt(2 ln n), sigma = median(|finest detail|) / 0.6745.
inline double universal_threshold(const DwtCoefficients& c, std::size_t n)
{
    RealSeries finest(c.details.front().size());
    std::transform(c.details.front().begin(), c.details.front().end(), finest.begin(),
                   [](double v) { return std::abs(v); });
    const auto mid = finest.begin() + static_cast<std::ptrdiff_t>(finest.size() / 2);
    std::nth_element(finest.begin(), mid, finest.end());
    double median = *mid;
    if (finest.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(finest.begin(), mid));
    }
    const double sigma = median / 0.6745;
    return sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

inline RealSeries denoise_real(std::span<const double> x, const WaveletFamily& family, std::size_t levels,
                               ThresholdRule rule = ThresholdRule::soft)
{
    auto c = dwt(x, family, levels);
    const double t = universal_threshold(c, x.size());
    if (t == 0.0) {
        return RealSeries(x.begin(), x.end());
    }
    threshold_details(c, t, rule);
    return idwt(c, family);
}

/// Denoises the useful part; real and imaginary parts are handled as independent channels.
inline TimeSymbol denoise(const TimeSymbol& noisy, const WaveletFamily& family, std::size_t levels = 3,
                          ThresholdRule rule = ThresholdRule::soft)
{
    const auto u = noisy.useful();
    RealSeries re(u.size());
    RealSeries im(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        re[i] = u[i].real();
        im[i] = u[i].imag();
    }
    const auto dre = denoise_real(re, family, levels, rule);
    const auto dim = denoise_real(im, family, levels, rule);
    TimeSymbol out{ComplexSeries(u.size()), 0};
    for (std::size_t i = 0; i < u.size(); ++i) {
        out.samples[i] = {dre[i], dim[i]};
    }
    return out;
}

struct DenoiseReport {
    QualityReport before;
    QualityReport after;
};

inline DenoiseReport denoise_report(std::span<const cplx> clean, std::span<const cplx> noisy, std::span<const cplx> denoised)
{
    require(clean.size() == noisy.size() && clean.size() == denoised.size(), "denoise_report needs equal lengths");
    return {quality_report(clean, noisy), quality_report(clean, denoised)};
}

} // namespace papr
