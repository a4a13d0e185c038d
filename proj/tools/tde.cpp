// tde: command-line front end for the delay/magnitude estimator.
//
//   tde simulate --config FILE [--out FILE]
//   tde sweep    --config FILE --snr LIST [--trials N] [--seed N] [--jobs N] [--out FILE]
//   tde compare  --config FILE --estimators LIST --snr LIST [--trials N] [--seed N] [--jobs N] [--out FILE]
//   tde analyze  pe|tf|rate [options]
//
// Exit codes: 0 success, 2 usage or configuration error, 3 I/O error.

#include "tde/analysis.hpp"
#include "tde/carrier.hpp"
#include "tde/config.hpp"
#include "tde/experiment.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <limits>
#include <optional>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_snr_list(const std::vector<std::string>& items) {
    std::vector<double> out;
    for (const auto& s : items) {
        double v = 0.0;
        if (!tde::parse_double(s, v) || std::isnan(v) || v == -std::numeric_limits<double>::infinity())
            throw UsageError("invalid SNR value '" + s + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<tde::EstimatorId> parse_estimators(const std::vector<std::string>& items) {
    std::vector<tde::EstimatorId> out;
    for (const auto& s : items) {
        if (s.empty())
            continue;
        const auto id = tde::parse_estimator_id(s);
        if (!id)
            throw UsageError("unknown estimator '" + s + "' (expected proposed, sinc, lagrange or quad)");
        out.push_back(*id);
    }
    if (out.empty())
        throw UsageError("estimator list is empty");
    return out;
}

// Write to the named file, or stdout when the path is empty.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        if (!std::cout)
            throw tde::IoError("failed writing to stdout");
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw tde::IoError(path + ": cannot open for writing");
    write(out);
    out.flush();
    if (!out)
        throw tde::IoError(path + ": write failed");
}

void print_kv(std::ostream& out, const std::string& key, double value) {
    out << key << ',' << tde::format_number(value) << '\n';
}

struct Options {
    std::string config;
    std::string out;
    std::vector<std::string> snr;
    std::vector<std::string> estimators;
    int trials = 1;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool timing = false;

    // analyze
    double f1 = 1000.0;
    double delta_periods = 1.0;
    double t0 = 0.0;
    std::optional<double> k, k1, k2;
    bool at_resonance = false;
    std::optional<double> freq;
    double g = 400.0;
    int n = 1;
    std::optional<double> lambda1, lambda2;
};

int cmd_simulate(const Options& o) {
    const tde::ExperimentConfig cfg = tde::load_config(o.config);
    tde::ScenarioConfig sc = cfg.scenario;
    if (o.seed)
        sc.seed = *o.seed;
    const tde::GeneratedPair pair = tde::generate_pair(sc);
    const tde::EstimateTrace tr = tde::run_proposed(cfg, pair);
    emit(o.out, [&](std::ostream& os) { tde::write_trace_csv(os, pair, tr); });
    return 0;
}

std::vector<double> snrs_or_config(const Options& o, const tde::ExperimentConfig& cfg) {
    if (o.snr.empty())
        return {cfg.scenario.snr1_db};
    return parse_snr_list(o.snr);
}

int cmd_sweep(const Options& o) {
    const tde::ExperimentConfig cfg = tde::load_config(o.config);
    const auto snrs = snrs_or_config(o, cfg);
    const auto rows = tde::run_sweep(cfg, snrs, o.trials, o.seed.value_or(cfg.scenario.seed), o.jobs);
    emit(o.out, [&](std::ostream& os) { tde::write_results_csv(os, rows, o.timing); });
    return 0;
}

int cmd_compare(const Options& o) {
    const auto ids = parse_estimators(o.estimators);
    const tde::ExperimentConfig cfg = tde::load_config(o.config);
    const auto snrs = snrs_or_config(o, cfg);
    const auto rows = tde::run_compare(cfg, ids, snrs, o.trials, o.seed.value_or(cfg.scenario.seed), o.jobs);
    emit(o.out, [&](std::ostream& os) { tde::write_results_csv(os, rows, o.timing); });
    return 0;
}

tde::CarrierGains analyze_gains(const Options& o) {
    tde::CarrierGains g{0.1, 0.1};
    if (o.k)
        g = {*o.k, *o.k};
    if (o.k1)
        g.k1 = *o.k1;
    if (o.k2)
        g.k2 = *o.k2;
    g.validate();
    return g;
}

int cmd_analyze_pe(const Options& o) {
    const double w = 2.0 * std::numbers::pi * o.f1;
    const tde::PEWindow win{o.t0, o.delta_periods * 2.0 * std::numbers::pi / w, w};
    const tde::Mat2 gram = tde::pe_gramian(win);
    const tde::PEBounds b = tde::pe_bounds(win);
    emit(o.out, [&](std::ostream& os) {
        os << "quantity,value\n";
        print_kv(os, "omega1", w);
        print_kv(os, "t0", win.t0);
        print_kv(os, "delta", win.delta);
        print_kv(os, "pe_11", gram[0][0]);
        print_kv(os, "pe_12", gram[0][1]);
        print_kv(os, "pe_21", gram[1][0]);
        print_kv(os, "pe_22", gram[1][1]);
        print_kv(os, "lambda1", b.lambda1);
        print_kv(os, "lambda2", b.lambda2);
    });
    return 0;
}

int cmd_analyze_tf(const Options& o) {
    const double w = 2.0 * std::numbers::pi * o.f1;
    const tde::CarrierGains gains = analyze_gains(o);
    if (o.at_resonance && o.freq)
        throw UsageError("--at-resonance and --freq are mutually exclusive");
    const double f = o.freq.value_or(o.f1);
    const auto tf = tde::transfer_functions({0.0, 2.0 * std::numbers::pi * f}, w, gains);
    emit(o.out, [&](std::ostream& os) {
        os << "quantity,value\n";
        print_kv(os, "freq_hz", f);
        print_kv(os, "tf1s_re", tf.tf1s.real());
        print_kv(os, "tf1s_im", tf.tf1s.imag());
        print_kv(os, "tf1s_abs", std::abs(tf.tf1s));
        print_kv(os, "tf1c_re", tf.tf1c.real());
        print_kv(os, "tf1c_im", tf.tf1c.imag());
        print_kv(os, "tf1c_abs", std::abs(tf.tf1c));
    });
    return 0;
}

int cmd_analyze_rate(const Options& o) {
    const double w = 2.0 * std::numbers::pi * o.f1;
    const tde::PEWindow win{o.t0, o.delta_periods * 2.0 * std::numbers::pi / w, w};
    const tde::PEBounds b = tde::pe_bounds(win);
    tde::ConvergenceParams p{o.g, o.lambda1.value_or(b.lambda1), o.lambda2.value_or(b.lambda2), win.delta, o.n};
    const double alpha = tde::convergence_rate(p);
    emit(o.out, [&](std::ostream& os) {
        os << "quantity,value\n";
        print_kv(os, "g", p.g);
        print_kv(os, "lambda1", p.lambda1);
        print_kv(os, "lambda2", p.lambda2);
        print_kv(os, "delta", p.delta);
        print_kv(os, "n", p.n);
        print_kv(os, "alpha", alpha);
    });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive time-delay and magnitude estimation for sinusoids"};
    app.require_subcommand(1);
    Options o;

    auto add_run_opts = [&](CLI::App* sub, bool with_snr) {
        sub->add_option("--config", o.config, "Scenario configuration file")->required();
        sub->add_option("--out", o.out, "Output CSV (default: stdout)");
        sub->add_option("--seed", o.seed, "Master seed (default: config seed)");
        if (with_snr) {
            sub->add_option("--snr", o.snr, "Comma-separated SNR list in dB ('inf' allowed)")->delimiter(',');
            sub->add_option("--trials", o.trials, "Trials per SNR")->check(CLI::PositiveNumber);
            sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
            sub->add_flag("--timing", o.timing, "Append a wall_time column (not deterministic)");
        }
    };

    auto* simulate = app.add_subcommand("simulate", "Run one scenario and write the estimate trace");
    add_run_opts(simulate, false);
    auto* sweep = app.add_subcommand("sweep", "SNR sweep of the proposed estimator");
    add_run_opts(sweep, true);
    auto* compare = app.add_subcommand("compare", "Paired comparison against the baseline estimators");
    add_run_opts(compare, true);
    compare->add_option("--estimators", o.estimators, "Comma-separated: proposed,sinc,lagrange,quad")
        ->delimiter(',')
        ->required()
        ->expected(0, -1);

    auto* analyze = app.add_subcommand("analyze", "Theory quantities");
    analyze->require_subcommand(1);
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--f1", o.f1, "Carrier frequency, Hz")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "Output file (default: stdout)");
    };
    auto add_window = [&](CLI::App* sub) {
        sub->add_option("--delta-periods", o.delta_periods, "PE window length in carrier periods")
            ->check(CLI::PositiveNumber);
        sub->add_option("--t0", o.t0, "PE window start, s");
    };
    auto* pe = analyze->add_subcommand("pe", "PE Gramian and its eigenvalue bounds");
    add_common(pe);
    add_window(pe);
    auto* tf = analyze->add_subcommand("tf", "Carrier-loop transfer functions on the j-omega axis");
    add_common(tf);
    tf->add_option("--k", o.k, "Set K1 = K2");
    tf->add_option("--k1", o.k1, "Resonance gain K1");
    tf->add_option("--k2", o.k2, "Bandwidth gain K2");
    tf->add_flag("--at-resonance", o.at_resonance, "Evaluate at f1 (default)");
    tf->add_option("--freq", o.freq, "Evaluation frequency, Hz");
    auto* rate = analyze->add_subcommand("rate", "Exponential convergence-rate bound");
    add_common(rate);
    add_window(rate);
    rate->add_option("--g", o.g, "Adaptation gain");
    rate->add_option("--n", o.n, "Plant order");
    rate->add_option("--lambda1", o.lambda1, "Lower PE bound (default: from the window)");
    rate->add_option("--lambda2", o.lambda2, "Upper PE bound (default: from the window)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*simulate)
            return cmd_simulate(o);
        if (*sweep)
            return cmd_sweep(o);
        if (*compare)
            return cmd_compare(o);
        if (*pe)
            return cmd_analyze_pe(o);
        if (*tf)
            return cmd_analyze_tf(o);
        if (*rate)
            return cmd_analyze_rate(o);
    } catch (const tde::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
