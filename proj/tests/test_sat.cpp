#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "papr/channel.hpp"
#include "papr/metrics.hpp"
#include "papr/sat.hpp"

using namespace papr;

namespace {

std::vector<std::size_t> brute_force_maxima(const RealSeries& m, bool cyclic)
{
    const std::size_t n = m.size();
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!cyclic && (i == 0 || i + 1 == n)) {
            continue;
        }
        const double l = m[(i + n - 1) % n];
        const double r = m[(i + 1) % n];
        if (m[i] > l && m[i] > r) {
            out.push_back(i);
        }
    }
    return out;
}

ComplexSeries real_series(const RealSeries& r)
{
    return ComplexSeries(r.begin(), r.end());
}

} // namespace

TEST(SignDiff, ClampAndCyclicLengths)
{
    const RealSeries m{1.0, 3.0, 3.0, 2.0};
    const auto s = sign_diff(m);
    EXPECT_EQ(s.signs, (std::vector<int>{1, 0, -1}));
    const auto c = sign_diff(m, Boundary::cyclic);
    EXPECT_EQ(c.signs, (std::vector<int>{1, 0, -1, -1}));
    EXPECT_THROW((void)sign_diff(RealSeries{1.0}), InvalidInput);
}

TEST(TemplateResponse, PeakGivesTwo)
{
    const auto s = sign_diff(RealSeries{1.0, 5.0, 2.0, 4.0, 0.0});
    const auto r = sign_template_response(s);
    ASSERT_EQ(r.size(), 5u);
    EXPECT_EQ(r[1], 2);
    EXPECT_EQ(r[3], 2);
    EXPECT_EQ(r[2], -2);
    EXPECT_EQ(detect_peaks(s), (std::vector<std::size_t>{1, 3}));
}

TEST(DetectPeaks, PlateauIsNotAPeak)
{
    EXPECT_TRUE(detect_peaks(sign_diff(RealSeries{1.0, 3.0, 3.0, 1.0})).empty());
    EXPECT_TRUE(detect_peaks(sign_diff(RealSeries(6, 2.0))).empty());
}

TEST(DetectPeaks, MatchesBruteForce)
{
    std::mt19937_64 eng(99);
    std::uniform_int_distribution<std::size_t> len(8, 512);
    std::uniform_int_distribution<int> small(0, 4);
    std::exponential_distribution<double> e;
    for (int trial = 0; trial < 2000; ++trial) {
        RealSeries m(len(eng));
        const bool quantised = trial % 3 == 0; // exercise ties and plateaus
        for (auto& v : m) {
            v = quantised ? small(eng) : e(eng);
        }
        EXPECT_EQ(detect_peaks(sign_diff(m, Boundary::clamp)), brute_force_maxima(m, false));
        EXPECT_EQ(detect_peaks(sign_diff(m, Boundary::cyclic)), brute_force_maxima(m, true));
    }
}

TEST(AdaptiveThreshold, HandComputed)
{
    EXPECT_NEAR(adaptive_threshold(RealSeries{1.0, 2.0, 3.0, 4.0, 10.0}, 2.0), 8.581138830084189, 1e-12);
    EXPECT_NEAR(adaptive_threshold(RealSeries{1.0, 1.0, 9.0, 1.0, 1.0}, 2.0), 7.4, 1e-12);
    EXPECT_THROW((void)adaptive_threshold(RealSeries{1.0}, 0.0), InvalidInput);
}

TEST(Sat, WorkedExample)
{
    SatConfig cfg;
    cfg.k = 2.0;
    const TimeSymbol t{real_series({1.0, 1.0, 9.0, 1.0, 1.0}), 0};
    const auto r = sat_process(t, cfg);
    EXPECT_NEAR(r.peaks.threshold, 7.4, 1e-9);
    EXPECT_EQ(r.peaks.indices, (std::vector<std::size_t>{2}));
    const RealSeries want{1.0, 1.0, 11.0 / 3.0, 1.0, 1.0};
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_NEAR(r.symbol.samples[i].real(), want[i], 1e-12);
        EXPECT_EQ(r.symbol.samples[i].imag(), 0.0);
    }
}

TEST(Sat, FilterVariants)
{
    const ComplexSeries x = real_series({1.0, 2.0, 9.0, 4.0, 1.0});
    SatConfig cfg;
    cfg.filter = AveragingFilter::simple;
    EXPECT_NEAR(average_at(x, 2, cfg).real(), 5.0, 1e-12);
    cfg.filter = AveragingFilter::weighted;
    EXPECT_NEAR(average_at(x, 2, cfg).real(), (2.0 + 18.0 + 4.0) / 4.0, 1e-12);
    cfg.filter = AveragingFilter::exponential;
    EXPECT_NEAR(average_at(x, 2, cfg).real(), 0.5 * 2.0 + 0.5 * 9.0, 1e-12);
}

TEST(Sat, ReplacementUsesOriginalSamples)
{
    // Peaks at 1 and 3 share neighbour 2; both averages must use the unmodified value.
    SatConfig cfg;
    cfg.k = 3.0;
    const TimeSymbol t{real_series({0.0, 6.0, 3.0, 6.0, 0.0, 0.0}), 0};
    const auto r = sat_process(t, cfg);
    EXPECT_EQ(r.peaks.indices, (std::vector<std::size_t>{1, 3}));
    EXPECT_NEAR(r.symbol.samples[1].real(), 3.0, 1e-12);
    EXPECT_NEAR(r.symbol.samples[3].real(), 3.0, 1e-12);
}

TEST(Sat, NoPeakAboveThresholdIsIdentity)
{
    SatConfig cfg;
    cfg.k = 0.5;
    RngStream rng(2, 0);
    TimeSymbol t{ComplexSeries(64), 0};
    for (auto& s : t.samples) {
        s = rng.complex_normal(1.0);
    }
    const auto r = sat_process(t, cfg);
    EXPECT_TRUE(r.peaks.indices.empty());
    EXPECT_EQ(r.symbol.samples, t.samples);
}

TEST(Sat, ReducesPeakAndKeepsPrefixLayout)
{
    RngStream rng(12, 0);
    TimeSymbol t{ComplexSeries(512), 0};
    for (auto& s : t.samples) {
        s = rng.complex_normal(1.0);
    }
    const auto with_cp = add_cyclic_prefix(t, {1, 4});
    const auto r = sat_process(with_cp, SatConfig{});
    EXPECT_EQ(r.symbol.prefix_len, 128u);
    EXPECT_EQ(r.symbol.samples.size(), 640u);
    for (std::size_t i = 0; i < 128; ++i) {
        EXPECT_EQ(r.symbol.samples[i], r.symbol.samples[512 + i]);
    }
    double peak_in = 0.0;
    double peak_out = 0.0;
    for (std::size_t i = 0; i < 512; ++i) {
        peak_in = std::max(peak_in, std::abs(t.samples[i]));
        peak_out = std::max(peak_out, std::abs(r.symbol.useful()[i]));
    }
    EXPECT_LT(peak_out, peak_in);
}

TEST(Sat, MultiPassRecomputesThreshold)
{
    SatConfig cfg;
    cfg.max_passes = 3;
    RngStream rng(13, 0);
    TimeSymbol t{ComplexSeries(256), 0};
    for (auto& s : t.samples) {
        s = rng.complex_normal(1.0);
    }
    const auto r = sat_process(t, cfg);
    ASSERT_GE(r.pass_thresholds.size(), 2u);
    EXPECT_EQ(r.peaks.threshold, r.pass_thresholds.front());
    EXPECT_LT(r.pass_thresholds[1], r.pass_thresholds[0]);
    EXPECT_TRUE(std::is_sorted(r.peaks.indices.begin(), r.peaks.indices.end()));
}

TEST(Sat, ThresholdFallsAsKGrows)
{
    RngStream rng(14, 0);
    RealSeries m(512);
    for (auto& v : m) {
        v = std::abs(rng.complex_normal(1.0));
    }
    double prev = adaptive_threshold(m, 1.5);
    for (double k = 2.0; k <= 4.0; k += 0.5) {
        const double t = adaptive_threshold(m, k);
        EXPECT_LT(t, prev);
        prev = t;
    }
}

TEST(Sat, ConfigValidation)
{
    SatConfig c;
    c.k = 0.0;
    EXPECT_THROW(c.validate(), InvalidInput);
    c.k = 2.5;
    c.max_passes = 0;
    EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(Sat, NeverRaisesTheMaximumMagnitude)
{
    for (std::uint64_t id = 0; id < 200; ++id) {
        RngStream rng(15, id);
        TimeSymbol t{ComplexSeries(512), 0};
        for (auto& s : t.samples) {
            s = rng.complex_normal(1.0);
        }
        const auto in = magnitudes(t.samples);
        const auto out = magnitudes(sat_process(t, SatConfig{}).symbol.samples);
        EXPECT_LE(*std::max_element(out.begin(), out.end()), *std::max_element(in.begin(), in.end()));
    }
}

TEST(Sat, ConvergedOutputIsAFixedPoint)
{
    // Convergence needs the global maximum to fall below its own recomputed threshold,
    // which requires k < 1 + (mean + std) / max; larger k keeps finding a peak every pass.
    SatConfig cfg;
    cfg.k = 1.5;
    cfg.max_passes = 10000;
    RngStream rng(16, 0);
    TimeSymbol t{ComplexSeries(512), 0};
    for (auto& s : t.samples) {
        s = rng.complex_normal(1.0);
    }
    const auto once = sat_process(t, cfg);
    ASSERT_FALSE(once.peaks.indices.empty());
    ASSERT_LT(once.pass_thresholds.size(), cfg.max_passes) << "did not converge";
    const auto twice = sat_process(once.symbol, cfg);
    EXPECT_TRUE(twice.peaks.indices.empty());
    EXPECT_EQ(twice.symbol.samples, once.symbol.samples);
}
