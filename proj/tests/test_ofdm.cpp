#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "papr/channel.hpp"
#include "papr/ofdm.hpp"

using namespace papr;

namespace {

ComplexSeries random_vector(std::size_t n, std::mt19937_64& eng)
{
    std::normal_distribution<double> g;
    ComplexSeries v(n);
    for (auto& x : v) {
        x = {g(eng), g(eng)};
    }
    return v;
}

// Direct O(N^2) DFT with unitary scaling; sign -1 is forward.
ComplexSeries naive_dft(const ComplexSeries& x, int sign)
{
    const std::size_t n = x.size();
    ComplexSeries out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
            acc += x[t] * std::polar(1.0, ang);
        }
        out[k] = acc / std::sqrt(static_cast<double>(n));
    }
    return out;
}

double max_abs_diff(const ComplexSeries& a, const ComplexSeries& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

} // namespace

TEST(Fft, MatchesNaiveDft)
{
    std::mt19937_64 eng(7);
    for (std::size_t n : {1u, 2u, 4u, 8u, 64u, 512u}) {
        const auto x = random_vector(n, eng);
        EXPECT_LT(max_abs_diff(fft_unitary(x), naive_dft(x, -1)), 1e-10) << n;
        EXPECT_LT(max_abs_diff(ifft_unitary(x), naive_dft(x, +1)), 1e-10) << n;
    }
}

TEST(Fft, RoundTripAndParseval)
{
    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = random_vector(512, eng);
        const auto y = ifft_unitary(x);
        EXPECT_LT(max_abs_diff(fft_unitary(y), x), 1e-12);
        double ex = 0.0;
        double ey = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            ex += std::norm(x[i]);
            ey += std::norm(y[i]);
        }
        EXPECT_NEAR(ex, ey, 1e-12 * ex);
    }
}

TEST(Fft, RejectsNonPowerOfTwo)
{
    ComplexSeries x(12);
    EXPECT_THROW((void)fft_unitary(x), InvalidInput);
}

TEST(Fft, DeltaGivesFlatSpectrum)
{
    ComplexSeries x(16, cplx{});
    x[0] = 4.0;
    for (const auto& v : fft_unitary(x)) {
        EXPECT_NEAR(std::abs(v - cplx{1.0, 0.0}), 0.0, 1e-14);
    }
}

TEST(Qam, Gray64AxisLevels)
{
    // Per-axis bit triples map to levels -7..7 in Gray order.
    const double s = 1.0 / std::sqrt(42.0);
    const int expected[8] = {-7, -5, -1, -3, 7, 5, 1, 3};
    for (unsigned code = 0; code < 8; ++code) {
        Bits b{static_cast<std::uint8_t>((code >> 2) & 1), static_cast<std::uint8_t>((code >> 1) & 1),
               static_cast<std::uint8_t>(code & 1), 0, 0, 0};
        const auto p = map_qam64(b);
        ASSERT_EQ(p.size(), 1u);
        EXPECT_NEAR(p[0].real(), expected[code] * s, 1e-15) << code;
        EXPECT_NEAR(p[0].imag(), -7 * s, 1e-15);
    }
}

TEST(Qam, AdjacentLevelsDifferInOneBit)
{
    const QamMapper m(64);
    for (std::size_t lvl = 0; lvl + 1 < 8; ++lvl) {
        const double s = m.half_spacing();
        const cplx a{(-7.0 + 2.0 * static_cast<double>(lvl)) * s, 0.0};
        const cplx b{(-5.0 + 2.0 * static_cast<double>(lvl)) * s, 0.0};
        const auto ba = m.demap(std::vector<cplx>{a});
        const auto bb = m.demap(std::vector<cplx>{b});
        int diff = 0;
        for (std::size_t i = 0; i < ba.size(); ++i) {
            diff += ba[i] != bb[i];
        }
        EXPECT_EQ(diff, 1);
    }
}

TEST(Qam, UnitAveragePowerAndRoundTrip)
{
    RngStream rng(3, 0);
    for (std::size_t m : {4u, 16u, 64u, 256u}) {
        const QamMapper mapper(m);
        const auto bits = rng.bits(mapper.bits_per_point() * 4096);
        const auto pts = mapper.map(bits);
        EXPECT_EQ(mapper.demap(pts), bits);
        // Average over the full constellation is exactly one.
        Bits all;
        for (std::size_t v = 0; v < m; ++v) {
            for (std::size_t b = mapper.bits_per_point(); b-- > 0;) {
                all.push_back(static_cast<std::uint8_t>((v >> b) & 1));
            }
        }
        EXPECT_NEAR(mean_power(mapper.map(all)), 1.0, 1e-12) << m;
    }
}

TEST(Qam, DemapIsNearestPoint)
{
    const QamMapper m(64);
    RngStream rng(5, 0);
    const auto bits = rng.bits(6 * 500);
    auto pts = m.map(bits);
    for (auto& p : pts) {
        p += rng.complex_normal(0.9 * m.half_spacing() * m.half_spacing());
    }
    // Brute force nearest neighbour over all 64 points.
    Bits all;
    for (std::size_t v = 0; v < 64; ++v) {
        for (std::size_t b = 6; b-- > 0;) {
            all.push_back(static_cast<std::uint8_t>((v >> b) & 1));
        }
    }
    const auto constellation = m.map(all);
    for (const auto& p : pts) {
        std::size_t best = 0;
        for (std::size_t v = 1; v < 64; ++v) {
            if (std::abs(p - constellation[v]) < std::abs(p - constellation[best])) {
                best = v;
            }
        }
        const auto got = m.demap(std::vector<cplx>{p});
        const Bits want(all.begin() + static_cast<std::ptrdiff_t>(best * 6), all.begin() + static_cast<std::ptrdiff_t>(best * 6 + 6));
        EXPECT_EQ(got, want);
    }
}

TEST(Qam, RejectsBadInput)
{
    EXPECT_THROW(QamMapper(32), InvalidInput);
    EXPECT_THROW(QamMapper(12), InvalidInput);
    EXPECT_THROW((void)map_qam64(Bits(7)), InvalidInput);
}

TEST(CyclicPrefix, CopiesTailAndStripsCleanly)
{
    TimeSymbol t{ComplexSeries(16), 0};
    for (std::size_t i = 0; i < 16; ++i) {
        t.samples[i] = {static_cast<double>(i), -static_cast<double>(i)};
    }
    const auto with = add_cyclic_prefix(t, {1, 4});
    ASSERT_EQ(with.prefix_len, 4u);
    ASSERT_EQ(with.samples.size(), 20u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(with.samples[i], t.samples[12 + i]);
    }
    EXPECT_EQ(remove_cyclic_prefix(with).samples, t.samples);
    EXPECT_EQ(add_cyclic_prefix(t, {0, 1}).samples, t.samples);
}

TEST(CyclicPrefix, RejectsNonIntegralLength)
{
    TimeSymbol t{ComplexSeries(10), 0};
    EXPECT_THROW((void)add_cyclic_prefix(t, {1, 4}), InvalidInput);
}

TEST(Oversampling, KeepsPowerAndInterpolatesCriticalSamples)
{
    RngStream rng(9, 0);
    const auto freq = map_qam64(rng.bits(6 * 64));
    const auto base = ifft_unitary(freq);
    const auto over = ifft_oversampled(freq, 4);
    ASSERT_EQ(over.size(), 256u);
    EXPECT_NEAR(mean_power(over), mean_power(base), 1e-12);
    EXPECT_EQ(ifft_oversampled(freq, 1), base);
}

TEST(OfdmConfig, Defaults)
{
    const OfdmConfig c;
    EXPECT_EQ(c.n_subcarriers, 512u);
    EXPECT_EQ(c.bits_per_symbol(), 3072u);
    EXPECT_EQ(c.guard.prefix_length(512), 128u);
    EXPECT_NO_THROW(c.validate());
    OfdmConfig bad;
    bad.n_subcarriers = 500;
    EXPECT_THROW(bad.validate(), InvalidInput);
}
