#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "papr/common.hpp"
#include "papr/ofdm.hpp"

namespace papr {

/// Deterministic random stream keyed by (seed, stream_id, substream). Distinct keys give
/// independently seeded engines; identical keys reproduce the same sequence.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t substream = 0)
        : seed_(seed), stream_id_(stream_id)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                          static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32)};
        engine_.seed(seq);
    }

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next() { return engine_(); }

    /// Standard normal deviate.
    double normal() { return normal_(engine_); }

    /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
    cplx complex_normal(double variance)
    {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    Bits bits(std::size_t n)
    {
        Bits out(n);
        std::uint64_t word = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i % 64 == 0) {
                word = next();
            }
            out[i] = static_cast<std::uint8_t>(word & 1u);
            word >>= 1;
        }
        return out;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// SNR value meaning "no noise".
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

enum class ChannelKind { awgn, rayleigh_multipath };

inline std::string_view to_string(ChannelKind k) { return k == ChannelKind::awgn ? "awgn" : "rayleigh"; }

/// Exponential power-delay profile decaying `decay_db` per tap, normalised to unit sum.
inline std::vector<double> exponential_profile(std::size_t taps, double decay_db = 3.0)
{
    require(taps >= 1, "profile needs at least one tap");
    std::vector<double> p(taps);
    double sum = 0.0;
    for (std::size_t i = 0; i < taps; ++i) {
        p[i] = std::pow(10.0, -decay_db * static_cast<double>(i) / 10.0);
        sum += p[i];
    }
    for (auto& v : p) {
        v /= sum;
    }
    return p;
}

struct ChannelConfig {
    ChannelKind kind = ChannelKind::awgn;
    double snr_db = kNoiseless;
    std::vector<double> tap_powers = exponential_profile(4);
    std::uint64_t seed = 1;

    void validate() const
    {
        require(!tap_powers.empty(), "tap_powers must not be empty");
        double sum = 0.0;
        for (double p : tap_powers) {
            require(p >= 0.0 && std::isfinite(p), "tap powers must be non-negative");
            sum += p;
        }
        require(std::abs(sum - 1.0) <= 1e-9, "tap powers must sum to 1");
    }
};

/// Adds circular complex Gaussian noise of the given per-sample variance.
inline ComplexSeries add_noise(std::span<const cplx> signal, double noise_variance, RngStream& rng)
{
    ComplexSeries out(signal.begin(), signal.end());
    if (noise_variance <= 0.0) {
        return out;
    }
    for (auto& s : out) {
        s += rng.complex_normal(noise_variance);
    }
    return out;
}

inline double noise_variance_for(double signal_power, double snr_db)
{
    if (!(snr_db < kNoiseless)) {
        return 0.0;
    }
    return signal_power / std::pow(10.0, snr_db / 10.0);
}

/// AWGN at the given SNR relative to the measured mean power of `signal`.
inline ComplexSeries awgn(std::span<const cplx> signal, double snr_db, RngStream& rng)
{
    if (!(snr_db < kNoiseless)) {
        return ComplexSeries(signal.begin(), signal.end());
    }
    const double p = mean_power(signal);
    if (!(p > 0.0)) {
        throw InvalidInput("AWGN reference power must be non-zero");
    }
    return add_noise(signal, noise_variance_for(p, snr_db), rng);
}

/// Linear convolution truncated to the input length.
inline TimeSymbol apply_taps(const TimeSymbol& symbol, std::span<const cplx> taps)
{
    const auto& x = symbol.samples;
    TimeSymbol y{ComplexSeries(x.size(), cplx{}), symbol.prefix_len};
    for (std::size_t n = 0; n < x.size(); ++n) {
        cplx acc{};
        for (std::size_t l = 0; l < taps.size() && l <= n; ++l) {
            acc += taps[l] * x[n - l];
        }
        y.samples[n] = acc;
    }
    return y;
}

struct RayleighOutput {
    TimeSymbol received;
    ComplexSeries taps;
};

/// Draws i.i.d. complex Gaussian taps with the given powers and convolves the symbol with
/// them, starting from zero channel state. Output keeps the input length and prefix layout,
/// so after prefix removal the channel acts as a circular convolution.
inline RayleighOutput rayleigh_apply(const TimeSymbol& symbol_with_cp, std::span<const double> tap_powers, RngStream& rng)
{
    require(!tap_powers.empty(), "tap_powers must not be empty");
    require(symbol_with_cp.prefix_len + 1 >= tap_powers.size(), "cyclic prefix shorter than the channel memory");
    RayleighOutput out;
    out.taps.resize(tap_powers.size());
    for (std::size_t l = 0; l < tap_powers.size(); ++l) {
        out.taps[l] = rng.complex_normal(tap_powers[l]);
    }
    out.received = apply_taps(symbol_with_cp, out.taps);
    return out;
}

/// Channel frequency response on n subcarriers (unnormalised DFT of the taps).
inline ComplexSeries channel_response(std::span<const cplx> taps, std::size_t n)
{
    ComplexSeries padded(n, cplx{});
    require(taps.size() <= n, "more taps than subcarriers");
    std::copy(taps.begin(), taps.end(), padded.begin());
    auto h = fft_unitary(padded);
    const double s = std::sqrt(static_cast<double>(n));
    for (auto& v : h) {
        v *= s;
    }
    return h;
}

/// Ideal-CSI zero-forcing equalisation per subcarrier.
inline ComplexSeries equalize_zf(std::span<const cplx> freq, std::span<const cplx> response)
{
    require(freq.size() == response.size(), "response length mismatch");
    ComplexSeries out(freq.size());
    for (std::size_t k = 0; k < freq.size(); ++k) {
        out[k] = freq[k] / response[k];
    }
    return out;
}

} // namespace papr
