#pragma once

// Synthetic two-channel sinusoid scenarios with exact ground truth.
//
// Convention used throughout the library: x2 lags x1 by the phase delay phi,
//   x1(t) = m1(t) cos(w1 t)         + n1(t)
//   x2(t) = m2(t) cos(w1 t - phi(t)) + n2(t)
// so phi > 0 means x2 is delayed and the time delay is tau = phi / w1.

#include "tde/errors.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace tde {

enum class DelayKind { constant, linear, parabolic };
enum class EnvelopeKind { constant, damped };

/// Phase delay phi(t) = theta + nu t + nu_dot t^2 / 2 (radians).
struct DelayProfile {
    DelayKind kind = DelayKind::constant;
    double theta = 0.0;  ///< rad
    double nu = 0.0;     ///< rad/s
    double nu_dot = 0.0; ///< rad/s^2

    static DelayProfile constant(double theta) { return {DelayKind::constant, theta, 0.0, 0.0}; }
    static DelayProfile linear(double theta, double nu) { return {DelayKind::linear, theta, nu, 0.0}; }
    static DelayProfile parabolic(double theta, double nu, double nu_dot) {
        return {DelayKind::parabolic, theta, nu, nu_dot};
    }

    void validate() const {
        if (!std::isfinite(theta) || !std::isfinite(nu) || !std::isfinite(nu_dot))
            throw ConfigError("delay profile: non-finite parameter");
        if (kind == DelayKind::constant && (nu != 0.0 || nu_dot != 0.0))
            throw ConfigError("delay profile: constant kind requires nu = nu_dot = 0");
        if (kind == DelayKind::linear && nu_dot != 0.0)
            throw ConfigError("delay profile: linear kind requires nu_dot = 0");
    }
};

inline double eval_delay(const DelayProfile& p, double t) noexcept {
    return p.theta + p.nu * t + 0.5 * p.nu_dot * t * t;
}

/// Amplitude m(t) = m0 exp(-sigma t); sigma is a rate in 1/s.
struct EnvelopeProfile {
    EnvelopeKind kind = EnvelopeKind::constant;
    double m0 = 1.0;
    double sigma = 0.0;

    static EnvelopeProfile constant(double m0) { return {EnvelopeKind::constant, m0, 0.0}; }
    static EnvelopeProfile damped(double m0, double sigma) { return {EnvelopeKind::damped, m0, sigma}; }

    void validate() const {
        if (!std::isfinite(m0) || !(m0 > 0.0))
            throw ConfigError("envelope: m0 must be finite and > 0");
        if (!std::isfinite(sigma) || sigma < 0.0)
            throw ConfigError("envelope: sigma must be finite and >= 0");
        if (kind == EnvelopeKind::constant && sigma != 0.0)
            throw ConfigError("envelope: constant kind requires sigma = 0");
    }
};

inline double eval_envelope(const EnvelopeProfile& e, double t) noexcept {
    return e.sigma == 0.0 ? e.m0 : e.m0 * std::exp(-e.sigma * t);
}

/// Complete description of one synthetic experiment.
struct ScenarioConfig {
    double f1 = 1000.0;     ///< Hz
    double fs = 100000.0;   ///< Hz
    double duration = 0.2;  ///< s
    EnvelopeProfile env1 = EnvelopeProfile::constant(std::numbers::sqrt2);
    EnvelopeProfile env2 = EnvelopeProfile::constant(std::numbers::sqrt2);
    DelayProfile delay = DelayProfile::constant(0.0);
    double snr1_db = std::numeric_limits<double>::infinity();
    double snr2_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 1;

    double omega1() const noexcept { return 2.0 * std::numbers::pi * f1; }

    std::size_t sample_count() const noexcept {
        return static_cast<std::size_t>(std::llround(duration * fs));
    }

    void validate() const {
        if (!std::isfinite(f1) || !(f1 > 0.0))
            throw ConfigError("scenario: f1 must be finite and > 0");
        if (!std::isfinite(fs) || !(fs > 0.0))
            throw ConfigError("scenario: fs must be finite and > 0");
        if (fs < 20.0 * f1)
            throw ConfigError("scenario: fs must be at least 20 * f1");
        if (!std::isfinite(duration) || !(duration > 0.0))
            throw ConfigError("scenario: duration must be finite and > 0");
        if (sample_count() == 0)
            throw ConfigError("scenario: duration shorter than one sample");
        for (double snr : {snr1_db, snr2_db})
            if (std::isnan(snr) || snr == -std::numeric_limits<double>::infinity())
                throw ConfigError("scenario: snr must be finite or +inf");
        env1.validate();
        env2.validate();
        delay.validate();
        if (!std::isfinite(eval_delay(delay, duration)))
            throw ConfigError("scenario: delay profile diverges within the horizon");
    }
};

/// Noise-free reference traces aligned sample-for-sample with the generated streams.
struct GroundTruth {
    std::vector<double> t;
    std::vector<double> m1;
    std::vector<double> m2;
    std::vector<double> phi;
    std::vector<double> clean1;
    std::vector<double> clean2;

    std::size_t size() const noexcept { return t.size(); }
};

struct GeneratedPair {
    std::vector<double> x1;
    std::vector<double> x2;
    GroundTruth truth;
};

/// Noise standard deviation giving `snr_db` for a sinusoid of peak `amplitude`
/// (signal power amplitude^2 / 2). Returns 0 for +inf.
inline double awgn_sigma(double amplitude, double snr_db) noexcept {
    if (std::isinf(snr_db) && snr_db > 0.0)
        return 0.0;
    return std::sqrt(0.5 * amplitude * amplitude / std::pow(10.0, snr_db / 10.0));
}

/// SplitMix64 finalizer applied to master + golden-ratio * (counter + 1).
/// Used to derive independent sub-stream seeds from one master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) noexcept {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Generate x1, x2 and the ground truth. Noise is scaled from each channel's
/// initial amplitude m0 and drawn from per-channel sub-streams of `seed`.
inline GeneratedPair generate_pair(const ScenarioConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.sample_count();
    const double w1 = cfg.omega1();

    GeneratedPair out;
    auto& gt = out.truth;
    gt.t.resize(n);
    gt.m1.resize(n);
    gt.m2.resize(n);
    gt.phi.resize(n);
    gt.clean1.resize(n);
    gt.clean2.resize(n);
    out.x1.resize(n);
    out.x2.resize(n);

    const double sd1 = awgn_sigma(cfg.env1.m0, cfg.snr1_db);
    const double sd2 = awgn_sigma(cfg.env2.m0, cfg.snr2_db);
    std::mt19937_64 rng1(derive_seed(cfg.seed, 1));
    std::mt19937_64 rng2(derive_seed(cfg.seed, 2));
    std::normal_distribution<double> gauss1(0.0, 1.0);
    std::normal_distribution<double> gauss2(0.0, 1.0);

    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / cfg.fs;
        gt.t[k] = t;
        gt.m1[k] = eval_envelope(cfg.env1, t);
        gt.m2[k] = eval_envelope(cfg.env2, t);
        gt.phi[k] = eval_delay(cfg.delay, t);
        gt.clean1[k] = gt.m1[k] * std::cos(w1 * t);
        gt.clean2[k] = gt.m2[k] * std::cos(w1 * t - gt.phi[k]);
        out.x1[k] = gt.clean1[k];
        out.x2[k] = gt.clean2[k];
        if (sd1 > 0.0)
            out.x1[k] += sd1 * gauss1(rng1);
        if (sd2 > 0.0)
            out.x2[k] += sd2 * gauss2(rng2);
    }
    return out;
}

} // namespace tde
