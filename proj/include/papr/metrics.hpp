#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "papr/common.hpp"
#include "papr/ofdm.hpp"

namespace papr {

// ---------------------------------------------------------------------------
// PAPR

/// Peak-to-average power ratio in dB over the given samples.
inline double papr_db(std::span<const cplx> samples)
{
    require(!samples.empty(), "PAPR of an empty signal is undefined");
    double peak = 0.0;
    double sum = 0.0;
    for (const auto& s : samples) {
        const double p = std::norm(s);
        peak = std::max(peak, p);
        sum += p;
    }
    if (peak == 0.0) {
        throw NumericalError("PAPR of an all-zero signal is undefined");
    }
    return 10.0 * std::log10(peak * static_cast<double>(samples.size()) / sum);
}

/// PAPR of the useful part; a cyclic prefix, if attached, is ignored.
inline double papr_db(const TimeSymbol& symbol) { return papr_db(symbol.useful()); }

// ---------------------------------------------------------------------------
// CCDF

struct CcdfPoint {
    double threshold_db;
    double probability;
};

struct CcdfCurve {
    std::vector<CcdfPoint> points;
};

/// Empirical P(PAPR > threshold) on the given threshold grid (must be strictly increasing).
inline CcdfCurve ccdf_estimate(std::span<const double> papr_samples, std::span<const double> thresholds)
{
    require(!papr_samples.empty(), "CCDF needs at least one PAPR sample");
    for (std::size_t i = 1; i < thresholds.size(); ++i) {
        require(thresholds[i] > thresholds[i - 1], "CCDF thresholds must be strictly increasing");
    }
    std::vector<double> sorted(papr_samples.begin(), papr_samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    CcdfCurve curve;
    curve.points.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
        curve.points.push_back({t, static_cast<double>(above) / n});
    }
    return curve;
}

/// Smallest sample value g such that the fraction of samples strictly above g is at most
/// `probability`. This is the PAPR "at CCDF = p" operating point.
inline double papr_at_probability(std::span<const double> papr_samples, double probability)
{
    require(!papr_samples.empty(), "need at least one PAPR sample");
    require(probability >= 0.0 && probability < 1.0, "probability must lie in [0, 1)");
    std::vector<double> sorted(papr_samples.begin(), papr_samples.end());
    const auto allowed = static_cast<std::size_t>(std::floor(probability * static_cast<double>(sorted.size())));
    const auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(allowed);
    std::nth_element(sorted.begin(), nth, sorted.end(), std::greater<>{});
    return *nth;
}

/// Gaussian-approximation CCDF of critically sampled OFDM: 1 - (1 - e^{-g})^N.
inline double ccdf_gaussian_approx(double threshold_db, std::size_t n)
{
    const double g = std::pow(10.0, threshold_db / 10.0);
    return -std::expm1(static_cast<double>(n) * std::log1p(-std::exp(-g)));
}

// ---------------------------------------------------------------------------
// Signal quality

/// Reported in place of SNR/PSNR when the error energy is exactly zero.
inline constexpr double kInfiniteDb = 999.0;

struct QualityReport {
    double mse = 0.0;
    double snr_db = 0.0;
    double psnr_db = 0.0;

    [[nodiscard]] bool lossless() const { return mse == 0.0; }
};

inline QualityReport quality_report(std::span<const cplx> reference, std::span<const cplx> test)
{
    require(reference.size() == test.size(), "quality_report needs equal-length signals");
    require(!reference.empty(), "quality_report needs non-empty signals");
    double err = 0.0;
    double energy = 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        err += std::norm(reference[i] - test[i]);
        const double p = std::norm(reference[i]);
        energy += p;
        peak = std::max(peak, p);
    }
    QualityReport r;
    r.mse = err / static_cast<double>(reference.size());
    if (err == 0.0) {
        r.snr_db = kInfiniteDb;
        r.psnr_db = kInfiniteDb;
    } else {
        r.snr_db = 10.0 * std::log10(energy / err);
        r.psnr_db = 10.0 * std::log10(peak / r.mse);
    }
    return r;
}

inline QualityReport quality_report(const TimeSymbol& reference, const TimeSymbol& test)
{
    return quality_report(reference.useful(), test.useful());
}

// ---------------------------------------------------------------------------
// Error rates

struct BerPoint {
    double snr_db = 0.0;
    double ber = 0.0;
    std::uint64_t bit_count = 0;
    std::uint64_t error_count = 0;
    // Symbol (constellation point) statistics; zero for theoretical curves.
    std::uint64_t symbol_count = 0;
    std::uint64_t symbol_error_count = 0;

    [[nodiscard]] double ser() const
    {
        return symbol_count == 0 ? 0.0 : static_cast<double>(symbol_error_count) / static_cast<double>(symbol_count);
    }
};

struct BerCurve {
    std::vector<BerPoint> points;
};

inline BerPoint ber_count(std::span<const std::uint8_t> sent, std::span<const std::uint8_t> received)
{
    require(sent.size() == received.size(), "bit streams differ in length");
    require(!sent.empty(), "bit streams are empty");
    BerPoint p;
    p.bit_count = sent.size();
    for (std::size_t i = 0; i < sent.size(); ++i) {
        p.error_count += (sent[i] & 1u) != (received[i] & 1u);
    }
    p.ber = static_cast<double>(p.error_count) / static_cast<double>(p.bit_count);
    return p;
}

struct ChernoffPoint {
    double snr_db;
    double ser_bound;
    double ber_bound;
};

/// Chernoff union bound for square M-QAM over AWGN with symbol SNR gamma_s:
/// SER <= min(1, 2(1 - 1/sqrt(M)) exp(-3 gamma_s / (2(M-1)))), BER <= SER / log2(M).
inline std::vector<ChernoffPoint> chernoff_union_bound_ber(std::span<const double> snr_db_list, std::size_t m)
{
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m))));
    require(is_power_of_two(m) && side * side == m && m >= 4, "M must be a square power of two");
    const double md = static_cast<double>(m);
    std::vector<ChernoffPoint> out;
    out.reserve(snr_db_list.size());
    for (double snr_db : snr_db_list) {
        const double gamma = std::pow(10.0, snr_db / 10.0);
        const double ser = std::min(1.0, 4.0 * (1.0 - 1.0 / std::sqrt(md)) * 0.5 * std::exp(-3.0 * gamma / (2.0 * (md - 1.0))));
        out.push_back({snr_db, ser, ser / std::log2(md)});
    }
    return out;
}

} // namespace papr
