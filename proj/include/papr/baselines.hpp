#pragma once

// Reference PAPR reducers: amplitude clipping, selected mapping and partial transmit sequences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "papr/common.hpp"
#include "papr/metrics.hpp"
#include "papr/ofdm.hpp"

namespace papr {

/// Clip ratio meaning "do not clip".
inline constexpr double kNoClipping = std::numeric_limits<double>::infinity();

/// Limits every sample magnitude to A = rms * 10^(ratio/20), preserving phase.
inline TimeSymbol clip(const TimeSymbol& symbol, double clip_ratio_db)
{
    TimeSymbol out = symbol;
    if (!(clip_ratio_db < kNoClipping)) {
        return out;
    }
    const double rms = std::sqrt(mean_power(symbol.useful()));
    const double limit = rms * std::pow(10.0, clip_ratio_db / 20.0);
    for (auto& s : out.samples) {
        const double a = std::abs(s);
        if (a > limit) {
            s *= limit / a;
        }
    }
    return out;
}

/// Clips to an absolute magnitude limit.
inline TimeSymbol clip_to_level(const TimeSymbol& symbol, double limit)
{
    TimeSymbol out = symbol;
    for (auto& s : out.samples) {
        const double a = std::abs(s);
        if (a > limit) {
            s *= limit / a;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// SLM

struct SlmConfig {
    std::size_t u = 16;
    std::uint64_t seed = 0x5EED;
    std::size_t oversampling = 1;

    void validate() const { require(u >= 1, "SLM candidate count must be >= 1"); }
};

/// Quarter-turn phase factors {1, j, -1, -j} indexed 0..3.
inline cplx quarter_turn(unsigned q)
{
    switch (q & 3u) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

/// The SLM phase table: row 0 is all ones, rows 1..u-1 are pseudo-random quarter turns
/// drawn from `seed`. Transmitter and receiver regenerate it from the seed.
inline std::vector<std::vector<unsigned>> slm_phase_table(std::size_t n, const SlmConfig& cfg)
{
    std::vector<std::vector<unsigned>> table(cfg.u, std::vector<unsigned>(n, 0u));
    std::mt19937_64 eng(cfg.seed);
    for (std::size_t c = 1; c < cfg.u; ++c) {
        for (auto& q : table[c]) {
            q = static_cast<unsigned>(eng() >> 62);
        }
    }
    return table;
}

struct SlmResult {
    TimeSymbol symbol;
    std::size_t chosen_index = 0;
    double papr_db = 0.0;
};

inline SlmResult slm_reduce(const FreqSymbol& freq, const SlmConfig& cfg,
                            const std::vector<std::vector<unsigned>>& table)
{
    cfg.validate();
    require(table.size() == cfg.u, "SLM phase table does not match the candidate count");
    SlmResult best;
    best.papr_db = std::numeric_limits<double>::infinity();
    ComplexSeries rotated(freq.points.size());
    for (std::size_t c = 0; c < cfg.u; ++c) {
        for (std::size_t k = 0; k < rotated.size(); ++k) {
            rotated[k] = freq.points[k] * quarter_turn(table[c][k]);
        }
        auto time = ifft_oversampled(rotated, cfg.oversampling);
        const double p = papr_db(time);
        if (p < best.papr_db) {
            best = {TimeSymbol{std::move(time), 0}, c, p};
        }
    }
    return best;
}

inline SlmResult slm_reduce(const FreqSymbol& freq, const SlmConfig& cfg)
{
    return slm_reduce(freq, cfg, slm_phase_table(freq.points.size(), cfg));
}

// ---------------------------------------------------------------------------
// PTS

enum class PtsPartition { contiguous };

struct PtsConfig {
    std::size_t v = 4;
    /// Number of phase factors: 2 gives {+1, -1}, 4 gives {+1, +j, -1, -j}.
    std::size_t phase_count = 4;
    PtsPartition partition = PtsPartition::contiguous;
    std::size_t oversampling = 1;

    void validate() const
    {
        require(v >= 1, "PTS needs at least one partition");
        require(phase_count == 2 || phase_count == 4, "PTS phase set must have 2 or 4 members");
    }
};

inline cplx pts_phase(std::size_t index, std::size_t phase_count)
{
    return quarter_turn(static_cast<unsigned>(index * (4 / phase_count)));
}

struct PtsResult {
    TimeSymbol symbol;
    std::vector<cplx> phases;
    double papr_db = 0.0;
};

/// Exhaustive phase search over contiguous sub-blocks; block 0 keeps phase +1.
/// Candidates are enumerated in mixed-radix order (block 1 fastest) and ties keep
/// the earliest, so the all-ones vector wins whenever nothing is strictly better.
inline PtsResult pts_reduce(const FreqSymbol& freq, const PtsConfig& cfg)
{
    cfg.validate();
    const std::size_t n = freq.points.size();
    require(n % cfg.v == 0, "subcarrier count must be divisible by the PTS partition count");
    const std::size_t block = n / cfg.v;

    std::vector<ComplexSeries> partial(cfg.v);
    for (std::size_t b = 0; b < cfg.v; ++b) {
        ComplexSeries sub(n, cplx{});
        std::copy_n(freq.points.begin() + static_cast<std::ptrdiff_t>(b * block), block,
                    sub.begin() + static_cast<std::ptrdiff_t>(b * block));
        partial[b] = ifft_oversampled(sub, cfg.oversampling);
    }
    const std::size_t len = partial.front().size();

    // Phase rotations of disjoint sub-blocks leave total power unchanged, so comparing
    // peaks is equivalent to comparing PAPR.
    std::size_t combos = 1;
    for (std::size_t b = 1; b < cfg.v; ++b) {
        combos *= cfg.phase_count;
    }

    // The identity candidate is the plain transform, evaluated exactly as an unprocessed
    // symbol would be.
    auto original = ifft_oversampled(freq.points, cfg.oversampling);
    double best_peak = 0.0;
    for (const auto& s : original) {
        best_peak = std::max(best_peak, std::norm(s));
    }

    std::vector<std::size_t> digits(cfg.v, 0);
    std::vector<cplx> factors(cfg.v, cplx{1.0, 0.0});
    std::vector<std::size_t> best_digits(cfg.v, 0);
    for (std::size_t c = 1; c < combos; ++c) {
        std::size_t rem = c;
        for (std::size_t b = 1; b < cfg.v; ++b) {
            digits[b] = rem % cfg.phase_count;
            rem /= cfg.phase_count;
            factors[b] = pts_phase(digits[b], cfg.phase_count);
        }
        double peak = 0.0;
        for (std::size_t i = 0; i < len && peak < best_peak; ++i) {
            cplx s = partial[0][i];
            for (std::size_t b = 1; b < cfg.v; ++b) {
                s += factors[b] * partial[b][i];
            }
            peak = std::max(peak, std::norm(s));
        }
        if (peak < best_peak) {
            best_peak = peak;
            best_digits = digits;
        }
    }

    PtsResult identity{TimeSymbol{std::move(original), 0}, std::vector<cplx>(cfg.v, cplx{1.0, 0.0}), 0.0};
    identity.papr_db = papr_db(identity.symbol);
    if (std::all_of(best_digits.begin(), best_digits.end(), [](std::size_t d) { return d == 0; })) {
        return identity;
    }
    PtsResult r;
    r.phases.resize(cfg.v);
    for (std::size_t b = 0; b < cfg.v; ++b) {
        r.phases[b] = pts_phase(best_digits[b], cfg.phase_count);
    }
    r.symbol.samples.assign(len, cplx{});
    for (std::size_t b = 0; b < cfg.v; ++b) {
        for (std::size_t i = 0; i < len; ++i) {
            r.symbol.samples[i] += r.phases[b] * partial[b][i];
        }
    }
    r.papr_db = papr_db(r.symbol);
    // Guard against a last-ulp win in the peak comparison turning into a PAPR loss.
    return r.papr_db <= identity.papr_db ? r : identity;
}

/// Applies per-block PTS phases to a frequency-domain symbol (receiver side uses the conjugates).
inline ComplexSeries pts_rotate(std::span<const cplx> freq, std::span<const cplx> phases)
{
    const std::size_t block = freq.size() / phases.size();
    ComplexSeries out(freq.begin(), freq.end());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] *= phases[k / block];
    }
    return out;
}

} // namespace papr
