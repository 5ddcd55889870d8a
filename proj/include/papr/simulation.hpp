#pragma once

// Per-symbol transmit chains for every reduction technique, and the Monte-Carlo loops that
// drive them. Every symbol draws from its own RngStream keyed by its index, and results are
// aggregated by index or by integer counts, so output does not depend on the worker count.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "papr/baselines.hpp"
#include "papr/channel.hpp"
#include "papr/common.hpp"
#include "papr/metrics.hpp"
#include "papr/mlp.hpp"
#include "papr/ofdm.hpp"
#include "papr/sat.hpp"
#include "papr/wavelet.hpp"

namespace papr {

enum class Technique { none, sat, clip, slm, pts, nn };

inline constexpr Technique kAllTechniques[] = {Technique::none, Technique::sat, Technique::clip,
                                               Technique::slm,  Technique::pts, Technique::nn};

inline std::string_view to_string(Technique t)
{
    switch (t) {
    case Technique::none: return "none";
    case Technique::sat: return "sat";
    case Technique::clip: return "clip";
    case Technique::slm: return "slm";
    case Technique::pts: return "pts";
    case Technique::nn: return "nn";
    }
    return "?";
}

inline Technique parse_technique(std::string_view s)
{
    for (auto t : kAllTechniques) {
        if (to_string(t) == s) {
            return t;
        }
    }
    throw InvalidInput("unknown technique '" + std::string(s) + "'");
}

/// Optional wavelet pre-filter applied before peak detection. Off by default.
struct SatPrefilter {
    bool enabled = false;
    WaveletName family = WaveletName::haar;
    std::size_t levels = 3;
    ThresholdRule rule = ThresholdRule::soft;
};

struct TechniqueParams {
    SatConfig sat;
    SatPrefilter prefilter;
    double clip_ratio_db = 3.0;
    SlmConfig slm;
    PtsConfig pts;
    std::shared_ptr<const MlpModel> model;
};

/// What the transmitter produced plus the side information an ideal receiver uses to undo
/// phase-based techniques.
struct TxSymbol {
    TimeSymbol time;
    std::size_t slm_index = 0;
    std::vector<cplx> pts_phases;
};

/// Prepared per-run state shared read-only between workers.
class Transmitter {
public:
    Transmitter(const OfdmConfig& ofdm, Technique technique, TechniqueParams params)
        : ofdm_(ofdm), technique_(technique), params_(std::move(params))
    {
        ofdm_.validate();
        params_.sat.validate();
        params_.slm.oversampling = ofdm_.oversampling;
        params_.pts.oversampling = ofdm_.oversampling;
        if (technique_ == Technique::slm) {
            slm_table_ = slm_phase_table(ofdm_.n_subcarriers, params_.slm);
        }
        if (technique_ == Technique::pts) {
            params_.pts.validate();
            require(ofdm_.n_subcarriers % params_.pts.v == 0, "subcarrier count must be divisible by PTS v");
        }
        if (technique_ == Technique::nn) {
            require(params_.model != nullptr, "technique nn needs a trained model");
            require(ofdm_.oversampling == 1, "technique nn requires critically sampled symbols");
            require(params_.model->inputs() == ofdm_.n_subcarriers, "model size does not match n_subcarriers");
        }
    }

    [[nodiscard]] const OfdmConfig& ofdm() const { return ofdm_; }
    [[nodiscard]] Technique technique() const { return technique_; }
    [[nodiscard]] const TechniqueParams& params() const { return params_; }
    [[nodiscard]] const std::vector<std::vector<unsigned>>& slm_table() const { return slm_table_; }

    [[nodiscard]] TxSymbol transmit(const FreqSymbol& freq) const
    {
        TxSymbol tx;
        switch (technique_) {
        case Technique::none:
            tx.time = plain(freq);
            break;
        case Technique::sat: {
            TimeSymbol t = plain(freq);
            if (params_.prefilter.enabled) {
                t = denoise(t, WaveletFamily::make(params_.prefilter.family), params_.prefilter.levels,
                            params_.prefilter.rule);
            }
            tx.time = sat_process(t, params_.sat).symbol;
            break;
        }
        case Technique::clip:
            tx.time = clip(plain(freq), params_.clip_ratio_db);
            break;
        case Technique::slm: {
            auto r = slm_reduce(freq, params_.slm, slm_table_);
            tx.time = std::move(r.symbol);
            tx.slm_index = r.chosen_index;
            break;
        }
        case Technique::pts: {
            auto r = pts_reduce(freq, params_.pts);
            tx.time = std::move(r.symbol);
            tx.pts_phases = std::move(r.phases);
            break;
        }
        case Technique::nn:
            tx.time = nn_reduce(*params_.model, plain(freq));
            break;
        }
        return tx;
    }

    /// Removes SLM/PTS phase rotation from equalised subcarriers using the side information.
    [[nodiscard]] ComplexSeries undo_phases(std::span<const cplx> freq, const TxSymbol& tx) const
    {
        ComplexSeries out(freq.begin(), freq.end());
        if (technique_ == Technique::slm) {
            const auto& row = slm_table_[tx.slm_index];
            for (std::size_t k = 0; k < out.size(); ++k) {
                out[k] *= std::conj(quarter_turn(row[k]));
            }
        } else if (technique_ == Technique::pts) {
            std::vector<cplx> inv(tx.pts_phases.size());
            std::transform(tx.pts_phases.begin(), tx.pts_phases.end(), inv.begin(), [](cplx c) { return std::conj(c); });
            out = pts_rotate(out, inv);
        }
        return out;
    }

private:
    [[nodiscard]] TimeSymbol plain(const FreqSymbol& freq) const
    {
        return {ifft_oversampled(freq.points, ofdm_.oversampling), 0};
    }

    OfdmConfig ofdm_;
    Technique technique_;
    TechniqueParams params_;
    std::vector<std::vector<unsigned>> slm_table_;
};

// ---------------------------------------------------------------------------
// Work distribution

/// Calls fn(index, worker) for index in [0, n) using `threads` workers over contiguous
/// static chunks. The first exception (lowest worker) is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn)
{
    threads = std::max<std::size_t>(1, std::min(threads, std::max<std::size_t>(n, 1)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i, std::size_t{0});
        }
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        const std::size_t begin = n * w / threads;
        const std::size_t end = n * (w + 1) / threads;
        pool.emplace_back([&, w, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    fn(i, w);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

// Substream layout per symbol index.
inline constexpr std::uint64_t kDataSubstream = 0;
inline constexpr std::uint64_t kTapSubstream = 1;
inline constexpr std::uint64_t kNoiseSubstreamBase = 16;

/// Random data symbol number `index` of a run.
inline FreqSymbol random_symbol(const OfdmConfig& ofdm, std::uint64_t seed, std::uint64_t index)
{
    static thread_local std::optional<QamMapper> mapper;
    if (!mapper || mapper->order() != ofdm.modulation_order) {
        mapper.emplace(ofdm.modulation_order);
    }
    RngStream rng(seed, index, kDataSubstream);
    return {mapper->map(rng.bits(ofdm.bits_per_symbol()))};
}

/// PAPR (dB) of `n_symbols` transmitted symbols, in symbol-index order.
inline std::vector<double> run_papr(const Transmitter& tx, std::size_t n_symbols, std::uint64_t seed,
                                    std::size_t threads = 1)
{
    std::vector<double> out(n_symbols);
    parallel_for(n_symbols, threads, [&](std::size_t i, std::size_t) {
        out[i] = papr_db(tx.transmit(random_symbol(tx.ofdm(), seed, i)).time);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Link-level BER

inline BerCurve run_ber(const Transmitter& tx, const ChannelConfig& channel, std::span<const double> snr_grid,
                        std::size_t n_symbols, std::uint64_t seed, std::size_t threads = 1)
{
    require(n_symbols >= 1, "run_ber needs at least one symbol");
    channel.validate();
    const auto& ofdm = tx.ofdm();
    require(ofdm.oversampling == 1, "BER simulation requires critically sampled symbols");
    const std::size_t n = ofdm.n_subcarriers;
    const GuardFraction guard = ofdm.guard;
    require(channel.kind == ChannelKind::awgn || guard.prefix_length(n) + 1 >= channel.tap_powers.size(),
            "cyclic prefix shorter than the channel memory");

    struct Counts {
        std::uint64_t bits = 0;
        std::uint64_t bit_errors = 0;
        std::uint64_t symbols = 0;
        std::uint64_t symbol_errors = 0;
    };
    threads = std::max<std::size_t>(1, threads);
    std::vector<std::vector<Counts>> per_worker(threads, std::vector<Counts>(snr_grid.size()));
    const QamMapper mapper(ofdm.modulation_order);
    const std::size_t bpp = mapper.bits_per_point();

    parallel_for(n_symbols, threads, [&](std::size_t i, std::size_t w) {
        RngStream data_rng(seed, i, kDataSubstream);
        const Bits bits = data_rng.bits(ofdm.bits_per_symbol());
        const FreqSymbol freq{mapper.map(bits)};
        const TxSymbol sent = tx.transmit(freq);
        const double tx_power = mean_power(sent.time.useful());
        const TimeSymbol on_air = add_cyclic_prefix(sent.time, guard);

        TimeSymbol faded = on_air;
        ComplexSeries response(n, cplx{1.0, 0.0});
        if (channel.kind == ChannelKind::rayleigh_multipath) {
            RngStream tap_rng(channel.seed, i, kTapSubstream);
            auto r = rayleigh_apply(on_air, channel.tap_powers, tap_rng);
            faded = std::move(r.received);
            response = channel_response(r.taps, n);
        }

        for (std::size_t s = 0; s < snr_grid.size(); ++s) {
            RngStream noise_rng(channel.seed, i, kNoiseSubstreamBase + s);
            const double var = noise_variance_for(tx_power, snr_grid[s]);
            TimeSymbol rx{add_noise(faded.samples, var, noise_rng), faded.prefix_len};
            auto y = fft_unitary(rx.useful());
            if (channel.kind == ChannelKind::rayleigh_multipath) {
                y = equalize_zf(y, response);
            }
            y = tx.undo_phases(y, sent);
            const Bits rx_bits = mapper.demap(y);

            Counts& c = per_worker[w][s];
            c.bits += bits.size();
            c.symbols += n;
            for (std::size_t k = 0; k < n; ++k) {
                bool wrong = false;
                for (std::size_t b = 0; b < bpp; ++b) {
                    const bool e = bits[k * bpp + b] != rx_bits[k * bpp + b];
                    c.bit_errors += e;
                    wrong = wrong || e;
                }
                c.symbol_errors += wrong;
            }
        }
    });

    BerCurve curve;
    for (std::size_t s = 0; s < snr_grid.size(); ++s) {
        BerPoint p;
        p.snr_db = snr_grid[s];
        for (const auto& worker : per_worker) {
            p.bit_count += worker[s].bits;
            p.error_count += worker[s].bit_errors;
            p.symbol_count += worker[s].symbols;
            p.symbol_error_count += worker[s].symbol_errors;
        }
        p.ber = static_cast<double>(p.error_count) / static_cast<double>(p.bit_count);
        curve.points.push_back(p);
    }
    return curve;
}

} // namespace papr
