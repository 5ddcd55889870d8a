#pragma once

// Baseband OFDM modem: square Gray-coded QAM, unitary radix-2 FFT, cyclic prefix.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "papr/common.hpp"

namespace papr {

/// Guard interval length as a fraction of the useful symbol, kept rational so that
/// integrality of the prefix length can be checked exactly.
struct GuardFraction {
    std::size_t num = 1;
    std::size_t den = 4;

    [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    /// Prefix length for an n-sample symbol; throws if it is not an integer.
    [[nodiscard]] std::size_t prefix_length(std::size_t n) const
    {
        require(den != 0, "guard fraction denominator must be non-zero");
        require((num * n) % den == 0, "guard_fraction * N must be an integer");
        return num * n / den;
    }
};

struct OfdmConfig {
    std::size_t n_subcarriers = 512;
    GuardFraction guard{1, 4};
    std::size_t modulation_order = 64;
    /// Time-domain oversampling for PAPR measurement (1 = critically sampled).
    std::size_t oversampling = 1;

    void validate() const
    {
        require(is_power_of_two(n_subcarriers), "n_subcarriers must be a power of two");
        (void)guard.prefix_length(n_subcarriers);
        const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(modulation_order))));
        require(is_power_of_two(modulation_order) && side * side == modulation_order && modulation_order >= 4,
                "modulation_order must be a square power of two");
        require(is_power_of_two(oversampling), "oversampling must be a power of two");
    }

    [[nodiscard]] std::size_t bits_per_point() const { return log2_exact(modulation_order); }
    [[nodiscard]] std::size_t bits_per_symbol() const { return bits_per_point() * n_subcarriers; }
};

struct FreqSymbol {
    ComplexSeries points;
};

/// One OFDM symbol in time. `samples` holds the prefix (if any) followed by the useful part.
struct TimeSymbol {
    ComplexSeries samples;
    std::size_t prefix_len = 0;

    [[nodiscard]] std::span<const cplx> useful() const
    {
        return std::span<const cplx>(samples).subspan(prefix_len);
    }
    [[nodiscard]] std::size_t useful_size() const { return samples.size() - prefix_len; }
};

// ---------------------------------------------------------------------------
// QAM

/// Square M-QAM with binary-reflected Gray coding per axis and unit average energy.
/// The first half of each codeword's bits selects the in-phase level, the second half
/// the quadrature level; level index 0 is the most negative amplitude.
class QamMapper {
public:
    explicit QamMapper(std::size_t order = 64) : order_(order)
    {
        const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(order))));
        require(is_power_of_two(order) && side * side == order && order >= 4,
                "QAM order must be a square power of two");
        side_ = side;
        axis_bits_ = log2_exact(side);
        scale_ = 1.0 / std::sqrt(2.0 * static_cast<double>(order - 1) / 3.0);
        gray_to_level_.resize(side);
        for (std::size_t level = 0; level < side; ++level) {
            gray_to_level_[level ^ (level >> 1)] = level;
        }
    }

    [[nodiscard]] std::size_t order() const { return order_; }
    [[nodiscard]] std::size_t bits_per_point() const { return 2 * axis_bits_; }
    /// Distance from a constellation level to its decision boundary.
    [[nodiscard]] double half_spacing() const { return scale_; }

    [[nodiscard]] ComplexSeries map(std::span<const std::uint8_t> bits) const
    {
        const std::size_t bpp = bits_per_point();
        require(bits.size() % bpp == 0, "bit count must be a multiple of bits per QAM point");
        ComplexSeries out(bits.size() / bpp);
        for (std::size_t k = 0; k < out.size(); ++k) {
            const auto chunk = bits.subspan(k * bpp, bpp);
            out[k] = {amplitude(read_axis(chunk.first(axis_bits_))),
                      amplitude(read_axis(chunk.subspan(axis_bits_)))};
        }
        return out;
    }

    [[nodiscard]] Bits demap(std::span<const cplx> points) const
    {
        Bits out(points.size() * bits_per_point());
        auto it = out.begin();
        for (const auto& p : points) {
            it = write_axis(decide(p.real()), it);
            it = write_axis(decide(p.imag()), it);
        }
        return out;
    }

    /// Hard decision to the nearest constellation point (used for symbol error counting).
    [[nodiscard]] cplx slice(cplx p) const { return {amplitude_of_level(decide_level(p.real())), amplitude_of_level(decide_level(p.imag()))}; }

private:
    [[nodiscard]] std::size_t read_axis(std::span<const std::uint8_t> b) const
    {
        std::size_t g = 0;
        for (auto bit : b) {
            g = (g << 1) | (bit & 1u);
        }
        return g;
    }

    [[nodiscard]] double amplitude(std::size_t gray) const { return amplitude_of_level(gray_to_level_[gray]); }

    [[nodiscard]] double amplitude_of_level(std::size_t level) const
    {
        return (2.0 * static_cast<double>(level) - static_cast<double>(side_ - 1)) * scale_;
    }

    [[nodiscard]] std::size_t decide_level(double x) const
    {
        const double idx = std::round((x / scale_ + static_cast<double>(side_ - 1)) / 2.0);
        return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(side_ - 1)));
    }

    [[nodiscard]] std::size_t decide(double x) const
    {
        const std::size_t level = decide_level(x);
        return level ^ (level >> 1);
    }

    Bits::iterator write_axis(std::size_t gray, Bits::iterator it) const
    {
        for (std::size_t b = axis_bits_; b-- > 0;) {
            *it++ = static_cast<std::uint8_t>((gray >> b) & 1u);
        }
        return it;
    }

    std::size_t order_;
    std::size_t side_ = 0;
    std::size_t axis_bits_ = 0;
    double scale_ = 1.0;
    std::vector<std::size_t> gray_to_level_;
};

inline ComplexSeries map_qam64(std::span<const std::uint8_t> bits)
{
    static const QamMapper mapper(64);
    return mapper.map(bits);
}

inline Bits demap_qam64(std::span<const cplx> points)
{
    static const QamMapper mapper(64);
    return mapper.demap(points);
}

// ---------------------------------------------------------------------------
// Transforms

namespace detail {

// exp(-2*pi*i*k/n) for k < n/2, cached per thread and size.
inline const std::vector<cplx>& twiddles(std::size_t n)
{
    thread_local std::vector<std::vector<cplx>> cache(64);
    auto& table = cache[log2_exact(n)];
    if (table.size() != n / 2) {
        table.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            table[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
        }
    }
    return table;
}

// In-place iterative radix-2 FFT, sign = -1 forward, +1 inverse, no scaling.
inline void fft_inplace(std::span<cplx> a, int sign)
{
    const std::size_t n = a.size();
    if (n < 2) {
        return;
    }
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(a[i], a[j]);
        }
    }
    const auto& w = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const cplx t = sign < 0 ? w[k * stride] : std::conj(w[k * stride]);
                const cplx u = a[i + k];
                const cplx v = a[i + k + half] * t;
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

inline ComplexSeries unitary_transform(std::span<const cplx> in, int sign)
{
    require(is_power_of_two(in.size()), "transform length must be a power of two");
    ComplexSeries out(in.begin(), in.end());
    fft_inplace(out, sign);
    const double s = 1.0 / std::sqrt(static_cast<double>(out.size()));
    for (auto& v : out) {
        v *= s;
    }
    return out;
}

} // namespace detail

/// Forward DFT with 1/sqrt(N) scaling.
inline ComplexSeries fft_unitary(std::span<const cplx> time) { return detail::unitary_transform(time, -1); }

/// Inverse DFT with 1/sqrt(N) scaling.
inline ComplexSeries ifft_unitary(std::span<const cplx> freq) { return detail::unitary_transform(freq, +1); }

inline TimeSymbol ifft_unitary(const FreqSymbol& freq) { return {ifft_unitary(freq.points), 0}; }

inline FreqSymbol fft_unitary(const TimeSymbol& time) { return {fft_unitary(time.useful())}; }

/// Oversampled synthesis: zero-pads the spectrum in the middle (between the positive and
/// negative frequency halves) to factor*N bins before a unitary inverse transform, then
/// rescales by sqrt(factor) so the average time-domain power equals the average point power.
inline ComplexSeries ifft_oversampled(std::span<const cplx> freq, std::size_t factor)
{
    require(is_power_of_two(freq.size()), "transform length must be a power of two");
    require(is_power_of_two(factor), "oversampling factor must be a power of two");
    if (factor == 1) {
        return ifft_unitary(freq);
    }
    const std::size_t n = freq.size();
    const std::size_t half = n / 2;
    ComplexSeries padded(n * factor, cplx{});
    std::copy(freq.begin(), freq.begin() + static_cast<std::ptrdiff_t>(half), padded.begin());
    std::copy(freq.begin() + static_cast<std::ptrdiff_t>(half), freq.end(),
              padded.end() - static_cast<std::ptrdiff_t>(n - half));
    auto out = ifft_unitary(padded);
    const double s = std::sqrt(static_cast<double>(factor));
    for (auto& v : out) {
        v *= s;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cyclic prefix

inline TimeSymbol add_cyclic_prefix(const TimeSymbol& time, GuardFraction guard)
{
    const auto useful = time.useful();
    const std::size_t cp = guard.prefix_length(useful.size());
    TimeSymbol out;
    out.prefix_len = cp;
    out.samples.reserve(useful.size() + cp);
    out.samples.insert(out.samples.end(), useful.end() - static_cast<std::ptrdiff_t>(cp), useful.end());
    out.samples.insert(out.samples.end(), useful.begin(), useful.end());
    return out;
}

inline TimeSymbol remove_cyclic_prefix(const TimeSymbol& time)
{
    const auto useful = time.useful();
    return {ComplexSeries(useful.begin(), useful.end()), 0};
}

} // namespace papr
