#pragma once

// Adaptive quadrature phase detector and the end-to-end delay/magnitude
// estimator.
//
// The detector models x2 as a phasor on the normalized carriers,
//   x2_hat = mI_hat cos(w1 t) + mQ_hat sin(w1 t),   e = x2 - x2_hat,
// and adapts the phasor by gradient descent on e^2:
//   mQ_hat' = 2 gQ e sin(w1 t),   mI_hat' = 2 gI e cos(w1 t).
// For x2 = m2 cos(w1 t - phi) the fixed point is (m2 cos phi, m2 sin phi), so
// m2 = |phasor| and phi = atan2(mQ, mI) is the lag of x2 behind x1.

#include "tde/carrier.hpp"
#include "tde/errors.hpp"
#include "tde/integrator.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

namespace tde {

struct DetectorGains {
    double g_i = 400.0; ///< 1/s
    double g_q = 400.0; ///< 1/s

    void validate() const {
        if (!std::isfinite(g_i) || !(g_i > 0.0) || !std::isfinite(g_q) || !(g_q > 0.0))
            throw ConfigError("detector gains: g_i and g_q must be finite and > 0");
    }
};

struct DetectorState {
    double m_i_hat = 0.0;
    double m_q_hat = 0.0;
    DetectorGains gains{};
    double last_error = 0.0;
};

inline DetectorState detector_init(DetectorGains gains) {
    gains.validate();
    DetectorState s;
    s.gains = gains;
    return s;
}

/// Phasor rate (mI_hat', mQ_hat') for phasor m = (mI_hat, mQ_hat).
inline Vec<2> detector_rate(const Vec<2>& m, double x2, const Carriers& c, const DetectorGains& g) noexcept {
    const double e = x2 - (m[0] * c.cos_hat + m[1] * c.sin_hat);
    return {2.0 * g.g_i * e * c.cos_hat, 2.0 * g.g_q * e * c.sin_hat};
}

/// One fixed-step update with x2 and the carriers held over the step.
inline DetectorState detector_step(const DetectorState& state, double x2_sample, double sin_hat, double cos_hat,
                                   double dt) {
    if (!(dt > 0.0))
        throw ConfigError("detector: dt must be > 0");
    if (!std::isfinite(x2_sample) || !std::isfinite(sin_hat) || !std::isfinite(cos_hat))
        throw DataError("detector: non-finite input sample");

    const Carriers c{sin_hat, cos_hat};
    const DetectorGains g = state.gains;
    const Vec<2> m{state.m_i_hat, state.m_q_hat};
    auto rate = [&](const Vec<2>& y, double) { return detector_rate(y, x2_sample, c, g); };
    const Vec<2> next = rk4_step(m, dt, rate);

    DetectorState out = state;
    out.last_error = x2_sample - (m[0] * cos_hat + m[1] * sin_hat);
    out.m_i_hat = next[0];
    out.m_q_hat = next[1];
    return out;
}

/// Wrap an angle into (-pi, pi].
inline double wrap_to_pi(double a) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(a, two_pi);
    if (r <= -std::numbers::pi)
        r += two_pi;
    return r;
}

struct Readout {
    double m2_hat = 0.0;
    double phi_hat = 0.0;     ///< (-pi, pi]; 0 when indeterminate
    bool determinate = false; ///< false for the zero phasor
};

inline Readout readout(const DetectorState& s) noexcept {
    if (s.m_i_hat == 0.0 && s.m_q_hat == 0.0)
        return {0.0, 0.0, false};
    double phi = std::atan2(s.m_q_hat, s.m_i_hat);
    if (phi == -std::numbers::pi)
        phi = std::numbers::pi;
    return {std::hypot(s.m_i_hat, s.m_q_hat), phi, true};
}

/// Table-driven four-quadrant arctangent: atan over [0, 1] sampled on
/// 2^bits uniform intervals with linear interpolation, extended by octant
/// symmetry. The interpolation error is bounded by h^2 / 8 * max|atan''|
/// (h = 2^-bits), well inside the documented 2 pi / 2^bits.
class AtanTable {
public:
    explicit AtanTable(int bits) : bits_(bits) {
        if (bits < 8 || bits > 20)
            throw ConfigError("atan table: bits must be in [8, 20]");
        const std::size_t n = std::size_t{1} << bits;
        table_.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            table_[i] = std::atan(static_cast<double>(i) / static_cast<double>(n));
    }

    int bits() const noexcept { return bits_; }
    double error_bound() const noexcept { return 2.0 * std::numbers::pi / static_cast<double>(1u << bits_); }

    /// Angle of (x, y) in (-pi, pi]; 0 for the origin.
    double angle(double y, double x) const noexcept {
        const double ax = std::fabs(x);
        const double ay = std::fabs(y);
        if (ax == 0.0 && ay == 0.0)
            return 0.0;
        double a = ay <= ax ? lookup(ay / ax) : std::numbers::pi / 2.0 - lookup(ax / ay);
        if (x < 0.0)
            a = std::numbers::pi - a;
        return (y < 0.0 && a != std::numbers::pi) ? -a : a;
    }

private:
    double lookup(double r) const noexcept {
        const double n = static_cast<double>(table_.size() - 1);
        const double pos = r * n;
        const std::size_t i = std::min(static_cast<std::size_t>(pos), table_.size() - 2);
        const double frac = pos - static_cast<double>(i);
        return table_[i] + frac * (table_[i + 1] - table_[i]);
    }

    int bits_;
    std::vector<double> table_;
};

/// Shared table for `bits`, built on first use.
inline const AtanTable& atan_table(int bits) {
    if (bits < 8 || bits > 20)
        throw ConfigError("atan table: bits must be in [8, 20]");
    static std::array<std::unique_ptr<AtanTable>, 13> tables;
    static std::array<std::once_flag, 13> once;
    const auto idx = static_cast<std::size_t>(bits - 8);
    std::call_once(once[idx], [&] { tables[idx] = std::make_unique<AtanTable>(bits); });
    return *tables[idx];
}

/// Phase readout through a lookup-table arctangent. Returns the same
/// indeterminate flag as `readout` for the zero phasor.
inline Readout readout_lut(const DetectorState& s, int table_bits) {
    const AtanTable& table = atan_table(table_bits);
    if (s.m_i_hat == 0.0 && s.m_q_hat == 0.0)
        return {0.0, 0.0, false};
    return {std::hypot(s.m_i_hat, s.m_q_hat), table.angle(s.m_q_hat, s.m_i_hat), true};
}

/// Remove 2 pi jumps between consecutive samples.
inline std::vector<double> unwrap(std::span<const double> phase) {
    std::vector<double> out(phase.begin(), phase.end());
    double offset = 0.0;
    for (std::size_t k = 1; k < out.size(); ++k) {
        const double d = phase[k] - phase[k - 1];
        offset += wrap_to_pi(d) - d;
        out[k] = phase[k] + offset;
    }
    return out;
}

struct EstimateTrace {
    std::vector<double> t;
    std::vector<double> m1_hat;
    std::vector<double> m2_hat;
    std::vector<double> phi_hat;           ///< wrapped to (-pi, pi]
    std::vector<double> phi_hat_unwrapped;
    std::vector<double> tau_hat;           ///< unwrapped phi_hat / w1, seconds
    std::vector<double> e;

    std::size_t size() const noexcept { return t.size(); }
};

/// Streaming form of the full estimator: carrier loop on x1, normalized
/// carriers, detector on x2, readout. Zero phasor holds the previous phase.
class DelayEstimator {
public:
    DelayEstimator(double fs, double omega1, CarrierGains carrier_gains, DetectorGains detector_gains,
                   double norm_floor = kDefaultNormFloor)
        : dt_(1.0 / fs), floor_(norm_floor), carrier_(carrier_init(omega1, carrier_gains)),
          detector_(detector_init(detector_gains)) {
        if (!std::isfinite(fs) || !(fs > 0.0))
            throw ConfigError("estimator: fs must be finite and > 0");
        if (!(norm_floor > 0.0))
            throw ConfigError("estimator: normalization floor must be > 0");
        if (!(dt_ * omega1 <= kCarrierStepLimit))
            throw ConfigError("estimator: sample rate too low for the carrier loop (w1/fs > 0.35)");
    }

    struct Output {
        double m1_hat;
        double m2_hat;
        double phi_hat;
        double e;
    };

    Output push(double x1, double x2) {
        carrier_ = carrier_step(carrier_, x1, dt_);
        const Carriers c = normalized_carriers(carrier_, floor_);
        detector_ = detector_step(detector_, x2, c.sin_hat, c.cos_hat, dt_);
        const Readout r = readout(detector_);
        if (r.determinate)
            phi_ = r.phi_hat;
        return {magnitude_estimate(carrier_), r.m2_hat, phi_, detector_.last_error};
    }

    const CarrierState& carrier() const noexcept { return carrier_; }
    const DetectorState& detector() const noexcept { return detector_; }

private:
    double dt_;
    double floor_;
    CarrierState carrier_;
    DetectorState detector_;
    double phi_ = 0.0;
};

inline EstimateTrace run_estimator(std::span<const double> x1, std::span<const double> x2, double fs,
                                   double omega1, const CarrierGains& carrier_gains,
                                   const DetectorGains& detector_gains, double norm_floor = kDefaultNormFloor) {
    if (x1.size() != x2.size())
        throw DataError("run_estimator: x1 and x2 lengths differ");
    DelayEstimator est(fs, omega1, carrier_gains, detector_gains, norm_floor);

    const std::size_t n = x1.size();
    EstimateTrace tr;
    tr.t.resize(n);
    tr.m1_hat.resize(n);
    tr.m2_hat.resize(n);
    tr.phi_hat.resize(n);
    tr.e.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto o = est.push(x1[k], x2[k]);
        tr.t[k] = static_cast<double>(k) / fs;
        tr.m1_hat[k] = o.m1_hat;
        tr.m2_hat[k] = o.m2_hat;
        tr.phi_hat[k] = o.phi_hat;
        tr.e[k] = o.e;
    }
    tr.phi_hat_unwrapped = unwrap(tr.phi_hat);
    tr.tau_hat.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        tr.tau_hat[k] = tr.phi_hat_unwrapped[k] / omega1;
    return tr;
}

} // namespace tde
