#pragma once

// Experiment harness: single-scenario traces, SNR sweeps and paired
// estimator comparisons, with deterministic CSV output.
//
// Seeds: trial seeds come from derive_seed(master, snr_index * trials + trial),
// so every (snr, trial) cell has its own noise realization and all estimators
// in a comparison see the same one.

#include "tde/analysis.hpp"
#include "tde/baselines.hpp"
#include "tde/config.hpp"
#include "tde/detector.hpp"
#include "tde/signals.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace tde {

enum class EstimatorId { proposed, sinc, lagrange, quad };

inline std::optional<EstimatorId> parse_estimator_id(std::string_view s) {
    if (s == "proposed")
        return EstimatorId::proposed;
    if (s == "sinc")
        return EstimatorId::sinc;
    if (s == "lagrange")
        return EstimatorId::lagrange;
    if (s == "quad")
        return EstimatorId::quad;
    return std::nullopt;
}

inline const char* to_string(EstimatorId id) noexcept {
    switch (id) {
    case EstimatorId::proposed: return "proposed";
    case EstimatorId::sinc: return "sinc";
    case EstimatorId::lagrange: return "lagrange";
    case EstimatorId::quad: return "quad";
    }
    return "?";
}

struct ExperimentResult {
    EstimatorId estimator = EstimatorId::proposed;
    double snr_db = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    double rms_phi = 0.0;
    double mse_m1 = std::numeric_limits<double>::quiet_NaN(); ///< NaN when not estimated
    double mse_m2 = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    double wall_time = 0.0; ///< s
};

/// Number formatting shared by all CSV output: up to 12 significant digits.
inline std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline constexpr std::string_view kTraceHeader =
    "t,x1,x2,m1_true,m2_true,phi_true,m1_hat,m2_hat,phi_hat,phi_hat_unwrapped,tau_hat,e";

inline void write_trace_csv(std::ostream& out, const GeneratedPair& pair, const EstimateTrace& tr) {
    out << kTraceHeader << '\n';
    const auto& gt = pair.truth;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double row[] = {tr.t[k],      pair.x1[k],        pair.x2[k],       gt.m1[k],
                              gt.m2[k],     gt.phi[k],         tr.m1_hat[k],     tr.m2_hat[k],
                              tr.phi_hat[k], tr.phi_hat_unwrapped[k], tr.tau_hat[k], tr.e[k]};
        for (std::size_t c = 0; c < std::size(row); ++c) {
            if (c)
                out << ',';
            out << format_number(row[c]);
        }
        out << '\n';
    }
}

inline std::string results_header(bool with_timing) {
    std::string h = "estimator,snr_db,trial,seed,rms_phi,mse_m1,mse_m2,converged";
    if (with_timing)
        h += ",wall_time";
    return h;
}

/// wall_time is only written when requested; it is the one non-deterministic column.
inline void write_results_csv(std::ostream& out, const std::vector<ExperimentResult>& rows, bool with_timing = false) {
    out << results_header(with_timing) << '\n';
    for (const auto& r : rows) {
        out << to_string(r.estimator) << ',' << format_number(r.snr_db) << ',' << r.trial << ',' << r.seed << ','
            << format_number(r.rms_phi) << ',' << format_number(r.mse_m1) << ',' << format_number(r.mse_m2) << ','
            << (r.converged ? 1 : 0);
        if (with_timing)
            out << ',' << format_number(r.wall_time);
        out << '\n';
    }
}

/// Run the proposed estimator on an already generated pair.
inline EstimateTrace run_proposed(const ExperimentConfig& cfg, const GeneratedPair& pair) {
    const auto& est = cfg.estimators;
    return run_estimator(pair.x1, pair.x2, cfg.scenario.fs, cfg.scenario.omega1(), est.carrier, est.detector,
                         est.norm_floor);
}

inline int quad_ma_len(const ExperimentConfig& cfg) {
    if (cfg.estimators.quad_ma_len > 0)
        return cfg.estimators.quad_ma_len;
    return std::max(1, static_cast<int>(std::lround(cfg.scenario.fs / cfg.scenario.f1)));
}

/// Per-sample phase estimate of a comparison estimator; NaN where the
/// estimator has no valid output yet.
inline std::vector<double> run_baseline_phase(const ExperimentConfig& cfg, EstimatorId id, const GeneratedPair& pair) {
    const auto& est = cfg.estimators;
    const double rad_per_sample = cfg.scenario.omega1() / cfg.scenario.fs;
    const std::size_t n = pair.x1.size();
    std::vector<double> phi(n, std::numeric_limits<double>::quiet_NaN());
    switch (id) {
    case EstimatorId::lagrange: {
        FdfState s = fdf_init(est.lagrange_order, est.lagrange_mu);
        for (std::size_t k = 0; k < n; ++k) {
            fdf_lms_step(s, pair.x1[k], pair.x2[k]);
            if (k >= static_cast<std::size_t>(est.lagrange_order))
                phi[k] = s.d_hat * rad_per_sample;
        }
        break;
    }
    case EstimatorId::sinc: {
        FdfState s = sinc_init(est.sinc_taps, est.sinc_mu);
        for (std::size_t k = 0; k < n; ++k) {
            sinc_etde_step(s, pair.x1[k], pair.x2[k]);
            if (k >= static_cast<std::size_t>(est.sinc_taps - 1))
                phi[k] = s.d_hat * rad_per_sample;
        }
        break;
    }
    case EstimatorId::quad: {
        QuadState s = quad_init(est.quad_taps, quad_ma_len(cfg), rad_per_sample);
        for (std::size_t k = 0; k < n; ++k) {
            const QuadOutput o = quad_estimator_step(s, pair.x1[k], pair.x2[k]);
            if (o.valid)
                phi[k] = o.phi_hat;
        }
        break;
    }
    case EstimatorId::proposed:
        throw ConfigError("run_baseline_phase: 'proposed' is not a baseline");
    }
    return phi;
}

/// RMS phase error over t > settle; samples without a valid estimate count as
/// an error of pi/2 so an estimator that never produces output cannot look good.
inline double rms_phase_error(std::span<const double> phi_hat, const GroundTruth& truth, double settle) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (!(truth.t[k] > settle))
            continue;
        const double d = std::isnan(phi_hat[k]) ? std::numbers::pi / 2.0 : wrap_to_pi(phi_hat[k] - truth.phi[k]);
        s += d * d;
        ++n;
    }
    if (n == 0)
        throw DataError("rms_phase_error: no samples after the settle time");
    return std::sqrt(s / static_cast<double>(n));
}

/// Evaluate every estimator in `ids` on one noise realization.
inline std::vector<ExperimentResult> run_trial(const ExperimentConfig& cfg, const std::vector<EstimatorId>& ids,
                                               double snr_db, int trial, std::uint64_t seed) {
    ExperimentConfig local = cfg;
    local.scenario.snr1_db = local.scenario.snr2_db = snr_db;
    local.scenario.seed = seed;
    const GeneratedPair pair = generate_pair(local.scenario);

    std::vector<ExperimentResult> out;
    out.reserve(ids.size());
    for (EstimatorId id : ids) {
        const auto start = std::chrono::steady_clock::now();
        ExperimentResult r;
        r.estimator = id;
        r.snr_db = snr_db;
        r.trial = trial;
        r.seed = seed;
        if (id == EstimatorId::proposed) {
            const EstimateTrace tr = run_proposed(local, pair);
            const ErrorMetrics m = error_metrics(tr, pair.truth, local.settle);
            r.rms_phi = m.rms_phi;
            r.mse_m1 = m.mse_m1;
            r.mse_m2 = m.mse_m2;
        } else {
            const auto phi = run_baseline_phase(local, id, pair);
            r.rms_phi = rms_phase_error(phi, pair.truth, local.settle);
        }
        r.converged = std::isfinite(r.rms_phi) && r.rms_phi < local.converge_tol;
        r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.push_back(r);
    }
    return out;
}

/// Runs every (snr, trial) cell, possibly on `jobs` threads. Rows are ordered
/// by snr, then trial, then estimator, independent of completion order.
inline std::vector<ExperimentResult> run_compare(const ExperimentConfig& cfg, const std::vector<EstimatorId>& ids,
                                                 const std::vector<double>& snrs, int trials,
                                                 std::uint64_t master_seed, int jobs = 1) {
    if (ids.empty())
        throw ConfigError("compare: estimator list is empty");
    if (snrs.empty())
        throw ConfigError("compare: snr list is empty");
    if (trials < 1)
        throw ConfigError("compare: trials must be >= 1");
    for (double snr : snrs)
        if (std::isnan(snr) || snr == -std::numeric_limits<double>::infinity())
            throw ConfigError("compare: snr must be a number or inf");

    const std::size_t cells = snrs.size() * static_cast<std::size_t>(trials);
    std::vector<std::vector<ExperimentResult>> results(cells);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t c = next++; c < cells; c = next++) {
            try {
                const std::size_t si = c / static_cast<std::size_t>(trials);
                const int trial = static_cast<int>(c % static_cast<std::size_t>(trials));
                results[c] = run_trial(cfg, ids, snrs[si], trial, derive_seed(master_seed, c));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };

    const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(cells, 1)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<ExperimentResult> rows;
    rows.reserve(cells * ids.size());
    for (auto& cell : results)
        rows.insert(rows.end(), cell.begin(), cell.end());
    return rows;
}

/// SNR sweep of the proposed estimator.
inline std::vector<ExperimentResult> run_sweep(const ExperimentConfig& cfg, const std::vector<double>& snrs,
                                               int trials, std::uint64_t master_seed, int jobs = 1) {
    return run_compare(cfg, {EstimatorId::proposed}, snrs, trials, master_seed, jobs);
}

/// Median rms_phi of one estimator at one SNR.
inline double median_rms(const std::vector<ExperimentResult>& rows, EstimatorId id, double snr_db) {
    std::vector<double> v;
    for (const auto& r : rows)
        if (r.estimator == id && r.snr_db == snr_db)
            v.push_back(r.rms_phi);
    if (v.empty())
        throw DataError("median_rms: no rows for the requested estimator and snr");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

} // namespace tde
