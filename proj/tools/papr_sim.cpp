// papr_sim: command-line front end for the PAPR reduction experiments.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
// 3 training did not reach its goal.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "papr/papr.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> threads;
    std::optional<double> k;
    std::string out;
    std::string technique;
    std::string filter;
    std::string model;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config, "JSON experiment configuration")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--trials", o.trials, "number of OFDM symbols per technique");
    cmd->add_option("--out", o.out, "output CSV path (stdout when omitted)");
    cmd->add_option("--technique", o.technique, "comma list of none,sat,clip,slm,pts,nn");
    cmd->add_option("--k", o.k, "SAT threshold divisor");
    cmd->add_option("--filter", o.filter, "SAT averaging filter")
        ->check(CLI::IsMember({"simple", "exponential", "weighted"}));
    cmd->add_option("--threads", o.threads, "worker threads");
    cmd->add_option("--model", o.model, "NN model file");
    cmd->add_option("--set", o.sets, "override any config key, e.g. --set sat.max_passes=2 (repeatable)");
}

// Applies "a.b.c=value" overrides to the raw config; value is parsed as JSON, else taken as a string.
void apply_sets(nlohmann::json& j, const std::vector<std::string>& sets)
{
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw papr::InvalidInput("--set expects key=value, got '" + s + "'");
        }
        std::string pointer = "/" + s.substr(0, eq);
        std::replace(pointer.begin(), pointer.end(), '.', '/');
        const auto text = s.substr(eq + 1);
        auto value = nlohmann::json::parse(text, nullptr, false);
        if (value.is_discarded()) {
            value = text;
        }
        try {
            j[nlohmann::json::json_pointer(pointer)] = value;
        } catch (const nlohmann::json::exception& e) {
            throw papr::InvalidInput("--set " + s + ": " + e.what());
        }
    }
}

papr::ExperimentConfig build_config(const Overrides& o)
{
    nlohmann::json raw = nlohmann::json::object();
    if (!o.config.empty()) {
        std::ifstream is(o.config);
        raw = nlohmann::json::parse(is, nullptr, false);
        if (raw.is_discarded() || !raw.is_object()) {
            throw papr::InvalidInput("config " + o.config + " is not a JSON object");
        }
    }
    apply_sets(raw, o.sets);
    papr::ExperimentConfig c = papr::config_from_json(raw);
    if (o.seed) {
        c.seed = *o.seed;
        c.channel.seed = *o.seed + 1;
    }
    if (o.trials) c.trials = *o.trials;
    if (o.threads) c.threads = *o.threads;
    if (o.k) c.technique.sat.k = *o.k;
    if (!o.out.empty()) c.out = o.out;
    if (!o.technique.empty()) c.techniques = papr::parse_technique_list(o.technique);
    if (!o.filter.empty()) c.technique.sat.filter = papr::detail::parse_filter(o.filter);
    if (!o.model.empty()) c.nn.model_path = o.model;
    c.validate();
    return c;
}

void emit(const papr::ExperimentConfig& c, const papr::CommandOutput& out)
{
    if (c.out.empty()) {
        std::cout << out.csv;
    } else {
        std::ofstream os(c.out, std::ios::binary);
        if (!os) {
            throw papr::InvalidInput("cannot write " + c.out);
        }
        os << out.csv;
    }
    for (const auto& line : out.summary) {
        std::cerr << line << '\n';
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"OFDM PAPR reduction simulator"};
    app.require_subcommand(1);
    Overrides o;
    auto* ccdf = app.add_subcommand("ccdf", "PAPR CCDF per technique");
    auto* ber = app.add_subcommand("ber", "bit error rate versus SNR per technique");
    auto* den = app.add_subcommand("denoise-eval", "wavelet denoising quality");
    auto* trn = app.add_subcommand("train-nn", "train the envelope network to imitate SAT");
    auto* cmp = app.add_subcommand("compare", "PAPR at CCDF 2% and relative reductions");
    auto* ksw = app.add_subcommand("k-sweep", "SAT statistics over the k grid");
    for (auto* cmd : {ccdf, ber, den, trn, cmp, ksw}) {
        add_common(cmd, o);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const auto c = build_config(o);
        if (ccdf->parsed()) {
            emit(c, papr::cmd_ccdf(c));
        } else if (ber->parsed()) {
            emit(c, papr::cmd_ber(c));
        } else if (den->parsed()) {
            emit(c, papr::cmd_denoise_eval(c));
        } else if (cmp->parsed()) {
            emit(c, papr::cmd_compare(c));
        } else if (ksw->parsed()) {
            emit(c, papr::cmd_k_sweep(c));
        } else if (trn->parsed()) {
            auto r = papr::cmd_train_nn(c, false);
            emit(c, r.output);
            std::cerr << "model written to " << c.nn.model_path << '\n';
            if (!r.report.reached_goal) {
                std::cerr << "error: training did not reach the MSE goal\n";
                return 3;
            }
        }
    } catch (const papr::NotImplemented& e) {
        std::cerr << "not implemented: " << e.what() << '\n';
        return 1;
    } catch (const papr::InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const papr::NotConverged& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const papr::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
