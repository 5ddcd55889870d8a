#pragma once

// Experiment configuration and the CSV-producing commands behind the papr_sim CLI.
// Commands return their CSV text so callers (CLI, tests) decide where it goes.

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "papr/baselines.hpp"
#include "papr/channel.hpp"
#include "papr/common.hpp"
#include "papr/metrics.hpp"
#include "papr/mlp.hpp"
#include "papr/ofdm.hpp"
#include "papr/sat.hpp"
#include "papr/simulation.hpp"
#include "papr/wavelet.hpp"

namespace papr {

/// Raised when training stops before the MSE goal; artifacts are still written.
class NotConverged : public std::runtime_error {
public:
    explicit NotConverged(const std::string& what) : std::runtime_error(what) {}
};

struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    [[nodiscard]] std::vector<double> values() const
    {
        require(step > 0.0 && stop >= start, "grid needs step > 0 and stop >= start");
        std::vector<double> v;
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) {
            v.push_back(start + step * static_cast<double>(i));
        }
        return v;
    }
};

struct NnSettings {
    std::string model_path = "papr_mlp.txt";
    std::size_t hidden = 30;
    std::size_t train_symbols = 100;
    TrainConfig train;
};

struct DenoiseSettings {
    std::vector<WaveletName> families{WaveletName::haar, WaveletName::db4};
    std::vector<std::size_t> levels{1, 2, 3};
    /// Input SNRs in dB; kNoiseless marks the clean reference row.
    std::vector<double> input_snr_db{0.0, 5.0, 10.0, 15.0, 20.0, kNoiseless};
    ThresholdRule rule = ThresholdRule::soft;
    /// The test signal is oversampled so it is band-limited relative to the noise.
    std::size_t oversampling = 8;
};

struct ExperimentConfig {
    OfdmConfig ofdm;
    TechniqueParams technique;
    NnSettings nn;
    ChannelConfig channel;
    std::vector<Technique> techniques{Technique::none, Technique::sat};
    GridSpec thresholds{0.0, 16.0, 0.1};
    std::vector<double> snr_grid_db{10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 25.0, 30.0};
    std::vector<double> k_sweep{1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    DenoiseSettings denoise;
    std::size_t trials = 100000;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::string out;
    std::string mimo = "none";
    std::string data_source = "synthetic";

    void validate() const
    {
        ofdm.validate();
        technique.sat.validate();
        technique.slm.validate();
        technique.pts.validate();
        channel.validate();
        require(trials >= 1, "trials must be >= 1");
        require(!techniques.empty(), "at least one technique is required");
        require(threads >= 1, "threads must be >= 1");
        if (mimo != "none") {
            throw NotImplemented("MIMO mode '" + mimo + "' is not implemented; only single-antenna links are simulated");
        }
        if (data_source != "synthetic") {
            throw NotImplemented("data source '" + data_source + "' is not implemented; only synthetic symbols are available");
        }
    }
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out)
{
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

inline GuardFraction parse_guard(const nlohmann::json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        const auto slash = s.find('/');
        require(slash != std::string::npos, "guard_fraction must look like \"1/4\"");
        GuardFraction g{};
        const auto num = s.substr(0, slash);
        const auto den = s.substr(slash + 1);
        const auto r1 = std::from_chars(num.data(), num.data() + num.size(), g.num);
        const auto r2 = std::from_chars(den.data(), den.data() + den.size(), g.den);
        require(r1.ec == std::errc{} && r2.ec == std::errc{} && g.den > 0, "guard_fraction must look like \"1/4\"");
        return g;
    }
    if (j.is_number_integer() && j.get<long long>() == 0) {
        return {0, 1};
    }
    throw InvalidInput("guard_fraction must be a string such as \"1/4\" or 0");
}

inline AveragingFilter parse_filter(std::string_view s)
{
    for (auto f : {AveragingFilter::simple, AveragingFilter::exponential, AveragingFilter::weighted}) {
        if (to_string(f) == s) {
            return f;
        }
    }
    throw InvalidInput("unknown averaging filter '" + std::string(s) + "'");
}

inline WaveletName parse_wavelet(std::string_view s)
{
    if (s == "haar") return WaveletName::haar;
    if (s == "db4") return WaveletName::db4;
    throw InvalidInput("unknown wavelet family '" + std::string(s) + "'");
}

inline double parse_snr(const nlohmann::json& j)
{
    if (j.is_string()) {
        require(j.get<std::string>() == "inf", "SNR strings other than \"inf\" are not accepted");
        return kNoiseless;
    }
    return j.get<double>();
}

} // namespace detail

inline std::vector<Technique> parse_technique_list(std::string_view list)
{
    std::vector<Technique> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const auto comma = list.find(',', pos);
        const auto item = list.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        if (!item.empty()) {
            out.push_back(parse_technique(item));
        }
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    require(!out.empty(), "technique list is empty");
    return out;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    using detail::read_opt;
    ExperimentConfig c;
    try {
        if (j.contains("ofdm")) {
            const auto& o = j.at("ofdm");
            read_opt(o, "n_subcarriers", c.ofdm.n_subcarriers);
            read_opt(o, "modulation_order", c.ofdm.modulation_order);
            read_opt(o, "oversampling", c.ofdm.oversampling);
            if (o.contains("guard_fraction")) {
                c.ofdm.guard = detail::parse_guard(o.at("guard_fraction"));
            }
            read_opt(o, "mimo", c.mimo);
        }
        if (j.contains("sat")) {
            const auto& s = j.at("sat");
            read_opt(s, "k", c.technique.sat.k);
            read_opt(s, "max_passes", c.technique.sat.max_passes);
            read_opt(s, "exponential_alpha", c.technique.sat.exponential_alpha);
            if (s.contains("filter")) {
                c.technique.sat.filter = detail::parse_filter(s.at("filter").get<std::string>());
            }
            if (s.contains("boundary")) {
                const auto b = s.at("boundary").get<std::string>();
                require(b == "cyclic" || b == "clamp", "sat.boundary must be cyclic or clamp");
                c.technique.sat.boundary = b == "cyclic" ? Boundary::cyclic : Boundary::clamp;
            }
            if (s.contains("wavelet_prefilter")) {
                const auto& w = s.at("wavelet_prefilter");
                read_opt(w, "enabled", c.technique.prefilter.enabled);
                read_opt(w, "levels", c.technique.prefilter.levels);
                if (w.contains("family")) {
                    c.technique.prefilter.family = detail::parse_wavelet(w.at("family").get<std::string>());
                }
            }
            read_opt(s, "k_sweep", c.k_sweep);
        }
        if (j.contains("clip")) {
            read_opt(j.at("clip"), "ratio_db", c.technique.clip_ratio_db);
        }
        if (j.contains("slm")) {
            read_opt(j.at("slm"), "u", c.technique.slm.u);
            read_opt(j.at("slm"), "seed", c.technique.slm.seed);
        }
        if (j.contains("pts")) {
            read_opt(j.at("pts"), "v", c.technique.pts.v);
            read_opt(j.at("pts"), "phases", c.technique.pts.phase_count);
        }
        if (j.contains("nn")) {
            const auto& n = j.at("nn");
            read_opt(n, "model", c.nn.model_path);
            read_opt(n, "hidden", c.nn.hidden);
            read_opt(n, "train_symbols", c.nn.train_symbols);
            read_opt(n, "learning_rate", c.nn.train.learning_rate);
            read_opt(n, "max_epochs", c.nn.train.max_epochs);
            if (n.contains("goal_mse")) {
                c.nn.train.goal_mse = detail::parse_snr(n.at("goal_mse"));
            }
            if (n.contains("optimizer")) {
                const auto o = n.at("optimizer").get<std::string>();
                require(o == "powell_beale_cg" || o == "gradient_descent", "unknown optimizer");
                c.nn.train.optimizer = o == "powell_beale_cg" ? Optimizer::powell_beale_cg : Optimizer::gradient_descent;
            }
        }
        if (j.contains("channel")) {
            const auto& ch = j.at("channel");
            if (ch.contains("kind")) {
                const auto k = ch.at("kind").get<std::string>();
                require(k == "awgn" || k == "rayleigh", "channel.kind must be awgn or rayleigh");
                c.channel.kind = k == "awgn" ? ChannelKind::awgn : ChannelKind::rayleigh_multipath;
            }
            read_opt(ch, "tap_powers", c.channel.tap_powers);
            if (ch.contains("snr_db")) {
                c.snr_grid_db.clear();
                for (const auto& v : ch.at("snr_db")) {
                    c.snr_grid_db.push_back(detail::parse_snr(v));
                }
            }
        }
        if (j.contains("ccdf")) {
            const auto& g = j.at("ccdf");
            read_opt(g, "threshold_start_db", c.thresholds.start);
            read_opt(g, "threshold_stop_db", c.thresholds.stop);
            read_opt(g, "threshold_step_db", c.thresholds.step);
        }
        if (j.contains("denoise")) {
            const auto& d = j.at("denoise");
            if (d.contains("families")) {
                c.denoise.families.clear();
                for (const auto& f : d.at("families")) {
                    c.denoise.families.push_back(detail::parse_wavelet(f.get<std::string>()));
                }
            }
            read_opt(d, "levels", c.denoise.levels);
            read_opt(d, "oversampling", c.denoise.oversampling);
            if (d.contains("input_snr_db")) {
                c.denoise.input_snr_db.clear();
                for (const auto& v : d.at("input_snr_db")) {
                    c.denoise.input_snr_db.push_back(detail::parse_snr(v));
                }
            }
            if (d.contains("rule")) {
                const auto r = d.at("rule").get<std::string>();
                require(r == "soft" || r == "hard", "denoise.rule must be soft or hard");
                c.denoise.rule = r == "soft" ? ThresholdRule::soft : ThresholdRule::hard;
            }
        }
        if (j.contains("techniques")) {
            c.techniques.clear();
            for (const auto& t : j.at("techniques")) {
                c.techniques.push_back(parse_technique(t.get<std::string>()));
            }
        }
        read_opt(j, "trials", c.trials);
        read_opt(j, "seed", c.seed);
        read_opt(j, "threads", c.threads);
        read_opt(j, "out", c.out);
        read_opt(j, "data_source", c.data_source);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("config: ") + e.what());
    }
    c.channel.seed = c.seed + 1;
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw InvalidInput("cannot open config file: " + path);
    }
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV formatting (locale independent)

namespace csv {

inline std::string fixed(double v, int precision)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    return std::string(buf, r.ptr);
}

inline std::string sci(double v, int precision = 6)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, precision);
    return std::string(buf, r.ptr);
}

inline std::string db(double v) { return std::isfinite(v) ? fixed(v, 4) : std::string("inf"); }

inline std::string join(const std::vector<std::string>& cells)
{
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) {
            line += ',';
        }
        line += cells[i];
    }
    line += '\n';
    return line;
}

} // namespace csv

// ---------------------------------------------------------------------------
// Commands

/// Operating point used for the comparison table (CCDF = 2%).
inline constexpr double kOperatingProbability = 0.02;

struct CommandOutput {
    std::string csv;
    /// Human-readable summary lines (not part of the CSV).
    std::vector<std::string> summary;
};

namespace detail {

inline std::shared_ptr<const MlpModel> load_model_if_needed(const ExperimentConfig& c, std::span<const Technique> ts)
{
    if (std::find(ts.begin(), ts.end(), Technique::nn) == ts.end()) {
        return nullptr;
    }
    return std::make_shared<const MlpModel>(load_model(c.nn.model_path));
}

inline Transmitter make_transmitter(const ExperimentConfig& c, Technique t, std::shared_ptr<const MlpModel> model)
{
    TechniqueParams p = c.technique;
    p.model = std::move(model);
    return Transmitter(c.ofdm, t, std::move(p));
}

} // namespace detail

/// PAPR samples for every configured technique, in configuration order.
inline std::vector<std::vector<double>> collect_papr(const ExperimentConfig& c)
{
    const auto model = detail::load_model_if_needed(c, c.techniques);
    std::vector<std::vector<double>> out;
    for (auto t : c.techniques) {
        out.push_back(run_papr(detail::make_transmitter(c, t, model), c.trials, c.seed, c.threads));
    }
    return out;
}

/// CSV columns: threshold_db, then one probability column per technique.
inline CommandOutput cmd_ccdf(const ExperimentConfig& c)
{
    c.validate();
    const auto thresholds = c.thresholds.values();
    const auto samples = collect_papr(c);

    CommandOutput out;
    std::vector<std::string> header{"threshold_db"};
    for (auto t : c.techniques) {
        header.emplace_back(to_string(t));
    }
    out.csv = csv::join(header);
    std::vector<CcdfCurve> curves;
    for (const auto& s : samples) {
        curves.push_back(ccdf_estimate(s, thresholds));
    }
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        std::vector<std::string> row{csv::fixed(thresholds[i], 2)};
        for (const auto& curve : curves) {
            row.push_back(csv::sci(curve.points[i].probability));
        }
        out.csv += csv::join(row);
    }
    for (std::size_t k = 0; k < c.techniques.size(); ++k) {
        out.summary.push_back(std::string(to_string(c.techniques[k])) + ": PAPR at CCDF 2% = " +
                              csv::fixed(papr_at_probability(samples[k], kOperatingProbability), 3) + " dB");
    }
    return out;
}

/// CSV columns: snr_db, one BER column per technique, chernoff_bound (BER bound).
inline CommandOutput cmd_ber(const ExperimentConfig& c)
{
    c.validate();
    const auto model = detail::load_model_if_needed(c, c.techniques);
    std::vector<BerCurve> curves;
    for (auto t : c.techniques) {
        curves.push_back(run_ber(detail::make_transmitter(c, t, model), c.channel, c.snr_grid_db, c.trials, c.seed, c.threads));
    }
    const auto bound = chernoff_union_bound_ber(c.snr_grid_db, c.ofdm.modulation_order);

    CommandOutput out;
    std::vector<std::string> header{"snr_db"};
    for (auto t : c.techniques) {
        header.emplace_back(to_string(t));
    }
    header.emplace_back("chernoff_bound");
    out.csv = csv::join(header);
    for (std::size_t s = 0; s < c.snr_grid_db.size(); ++s) {
        std::vector<std::string> row{csv::db(c.snr_grid_db[s])};
        for (const auto& curve : curves) {
            row.push_back(csv::sci(curve.points[s].ber));
        }
        row.push_back(csv::sci(bound[s].ber_bound));
        out.csv += csv::join(row);
    }
    out.summary.push_back("bits per SNR point per technique: " + std::to_string(curves.front().points.front().bit_count));
    return out;
}

struct DenoiseRow {
    WaveletName family;
    std::size_t level;
    double input_snr_db;
    QualityReport before;
    QualityReport after;
};

namespace detail {

inline double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

/// Median quality metrics over `trials` symbols for every (family, level, input SNR).
/// The noiseless row (input SNR = inf) is the clean reference and bypasses the denoiser.
inline std::vector<DenoiseRow> denoise_evaluation(const ExperimentConfig& c)
{
    OfdmConfig ofdm = c.ofdm;
    ofdm.oversampling = c.denoise.oversampling;
    ofdm.validate();
    std::vector<DenoiseRow> rows;
    for (auto fam : c.denoise.families) {
        const auto family = WaveletFamily::make(fam);
        for (auto level : c.denoise.levels) {
            for (std::size_t si = 0; si < c.denoise.input_snr_db.size(); ++si) {
                const double snr = c.denoise.input_snr_db[si];
                std::vector<QualityReport> before(c.trials);
                std::vector<QualityReport> after(c.trials);
                parallel_for(c.trials, c.threads, [&](std::size_t i, std::size_t) {
                    const auto freq = random_symbol(ofdm, c.seed, i);
                    const TimeSymbol clean{ifft_oversampled(freq.points, ofdm.oversampling), 0};
                    RngStream noise_rng(c.seed + 1, i, kNoiseSubstreamBase + si);
                    const TimeSymbol noisy{awgn(clean.samples, snr, noise_rng), 0};
                    const TimeSymbol cleaned = snr < kNoiseless ? denoise(noisy, family, level, c.denoise.rule) : noisy;
                    const auto rep = denoise_report(clean.samples, noisy.samples, cleaned.samples);
                    before[i] = rep.before;
                    after[i] = rep.after;
                });
                const auto med = [](const std::vector<QualityReport>& v) {
                    std::vector<double> m;
                    std::vector<double> s;
                    std::vector<double> p;
                    for (const auto& r : v) {
                        m.push_back(r.mse);
                        s.push_back(r.snr_db);
                        p.push_back(r.psnr_db);
                    }
                    return QualityReport{detail::median(m), detail::median(s), detail::median(p)};
                };
                rows.push_back({fam, level, snr, med(before), med(after)});
            }
        }
    }
    return rows;
}

inline CommandOutput cmd_denoise_eval(const ExperimentConfig& c)
{
    c.validate();
    CommandOutput out;
    out.csv = csv::join({"family", "level", "input_snr_db", "mse_before", "snr_before_db", "psnr_before_db",
                         "mse_after", "snr_after_db", "psnr_after_db"});
    for (const auto& r : denoise_evaluation(c)) {
        out.csv += csv::join({std::string(to_string(r.family)), std::to_string(r.level), csv::db(r.input_snr_db),
                              csv::sci(r.before.mse), csv::db(r.before.snr_db), csv::db(r.before.psnr_db),
                              csv::sci(r.after.mse), csv::db(r.after.snr_db), csv::db(r.after.psnr_db)});
    }
    out.summary.push_back("SNR/PSNR of " + csv::db(kInfiniteDb) + " dB marks an error-free comparison");
    return out;
}

/// Training set: envelopes of random symbols and their SAT-processed envelopes.
inline Dataset sat_imitation_dataset(const OfdmConfig& ofdm, const SatConfig& sat, std::size_t symbols,
                                     std::uint64_t seed, std::size_t threads = 1)
{
    require(symbols >= 1, "training needs at least one symbol");
    std::vector<RealSeries> inputs(symbols);
    std::vector<RealSeries> targets(symbols);
    parallel_for(symbols, threads, [&](std::size_t i, std::size_t) {
        const TimeSymbol t = ifft_unitary(random_symbol(ofdm, seed, i));
        inputs[i] = magnitudes(t.useful());
        targets[i] = magnitudes(sat_process(t, sat).symbol.useful());
    });
    return make_dataset(inputs, targets);
}

struct TrainOutput {
    CommandOutput output;
    MlpModel model;
    TrainReport report;
};

/// Trains the envelope network, writes the model to c.nn.model_path and returns the
/// epoch,mse history CSV. Throws NotConverged (after writing) if the goal was missed.
inline TrainOutput cmd_train_nn(const ExperimentConfig& c, bool throw_on_miss = true)
{
    c.validate();
    require(c.ofdm.oversampling == 1, "NN training requires critically sampled symbols");
    const auto data = sat_imitation_dataset(c.ofdm, c.technique.sat, c.nn.train_symbols, c.seed, c.threads);
    auto init = MlpModel::random(c.seed, c.ofdm.n_subcarriers, c.nn.hidden, c.ofdm.n_subcarriers);
    auto result = train(std::move(init), data, c.nn.train);
    if (!c.nn.model_path.empty()) {
        save_model(c.nn.model_path, result.model);
    }

    TrainOutput out{{}, std::move(result.model), std::move(result.report)};
    out.output.csv = csv::join({"epoch", "mse"});
    for (std::size_t e = 0; e < out.report.mse_history.size(); ++e) {
        out.output.csv += csv::join({std::to_string(e), csv::sci(out.report.mse_history[e], 9)});
    }
    out.output.summary.push_back("final MSE " + csv::sci(out.report.final_mse) + " after " +
                                 std::to_string(out.report.epochs_used) + " epochs (" + out.report.stop_reason + ")");
    if (throw_on_miss && !out.report.reached_goal) {
        throw NotConverged("training stopped at MSE " + csv::sci(out.report.final_mse) + " above goal " +
                           csv::sci(c.nn.train.goal_mse) + " (" + out.report.stop_reason + ")");
    }
    return out;
}

/// One row per technique at CCDF = 2%. reduction_percent = (conventional - x) / conventional * 100;
/// sat_gain_percent = (x - sat) / x * 100, the extra reduction SAT achieves over that technique.
inline CommandOutput cmd_compare(const ExperimentConfig& c)
{
    ExperimentConfig cfg = c;
    std::vector<Technique> order{Technique::none};
    for (auto t : c.techniques) {
        if (std::find(order.begin(), order.end(), t) == order.end()) {
            order.push_back(t);
        }
    }
    if (std::find(order.begin(), order.end(), Technique::sat) == order.end()) {
        order.insert(order.begin() + 1, Technique::sat);
    }
    cfg.techniques = order;
    cfg.validate();
    const auto samples = collect_papr(cfg);

    std::vector<double> at2(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        at2[i] = papr_at_probability(samples[i], kOperatingProbability);
    }
    const double conventional = at2[0];
    const double sat = at2[static_cast<std::size_t>(std::find(order.begin(), order.end(), Technique::sat) - order.begin())];

    CommandOutput out;
    out.csv = csv::join({"technique", "papr_db_at_2pct", "reduction_percent", "sat_gain_percent", "data_source"});
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.csv += csv::join({std::string(to_string(order[i])), csv::fixed(at2[i], 4),
                              csv::fixed((conventional - at2[i]) / conventional * 100.0, 2),
                              csv::fixed((at2[i] - sat) / at2[i] * 100.0, 2), cfg.data_source});
    }
    return out;
}

struct KSweepRow {
    double k;
    double mean_threshold;
    double mean_peaks_replaced;
    double papr_db_at_2pct;
};

/// SAT statistics over the k grid on the same symbols.
inline std::vector<KSweepRow> k_sweep(const ExperimentConfig& c)
{
    std::vector<KSweepRow> rows;
    for (double k : c.k_sweep) {
        SatConfig sat = c.technique.sat;
        sat.k = k;
        sat.validate();
        std::vector<double> thr(c.trials);
        std::vector<double> peaks(c.trials);
        std::vector<double> papr(c.trials);
        parallel_for(c.trials, c.threads, [&](std::size_t i, std::size_t) {
            const TimeSymbol t{ifft_oversampled(random_symbol(c.ofdm, c.seed, i).points, c.ofdm.oversampling), 0};
            const auto r = sat_process(t, sat);
            thr[i] = r.peaks.threshold;
            peaks[i] = static_cast<double>(r.peaks.indices.size());
            papr[i] = papr_db(r.symbol);
        });
        const auto mean = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) {
                s += x;
            }
            return s / static_cast<double>(v.size());
        };
        rows.push_back({k, mean(thr), mean(peaks), papr_at_probability(papr, kOperatingProbability)});
    }
    return rows;
}

inline CommandOutput cmd_k_sweep(const ExperimentConfig& c)
{
    c.validate();
    CommandOutput out;
    out.csv = csv::join({"k", "mean_threshold", "mean_peaks_replaced", "papr_db_at_2pct"});
    for (const auto& r : k_sweep(c)) {
        out.csv += csv::join({csv::fixed(r.k, 3), csv::fixed(r.mean_threshold, 6), csv::fixed(r.mean_peaks_replaced, 4),
                              csv::fixed(r.papr_db_at_2pct, 4)});
    }
    return out;
}

} // namespace papr
