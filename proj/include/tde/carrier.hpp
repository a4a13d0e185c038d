#pragma once

// Quadrature carrier generator: an amplitude-controlled oscillator loop at the
// known frequency w1, driven by x1. In steady state
//   x1c -> m1 cos(w1 t),  x1s -> -m1 sin(w1 t)
// so sqrt(x1s^2 + x1c^2) tracks the magnitude of x1 and the normalized pair
// (-x1s, x1c) / m1 gives phase-locked sine/cosine carriers.
//
// Loop dynamics (K1 sets the resonance, K2 the bandwidth):
//   x1s' = -(K1 + 1) w1 x1c + w1 K1 u
//   x1c' =  w1 x1s - w1 K2 x1c + w1 K2 u

#include "tde/errors.hpp"
#include "tde/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace tde {

struct CarrierGains {
    double k1 = 0.1;
    double k2 = 0.1;

    void validate() const {
        if (!std::isfinite(k1) || !(k1 > 0.0) || !std::isfinite(k2) || !(k2 > 0.0))
            throw ConfigError("carrier gains: k1 and k2 must be finite and > 0");
    }
};

inline constexpr double kCarrierStepLimit = 0.35; ///< max w1 * dt accepted by carrier_step
inline constexpr double kDefaultNormFloor = 1e-6;

struct CarrierState {
    double x1s = 0.0;
    double x1c = 1.0;
    double omega1 = 0.0;
    CarrierGains gains{};
    double t = 0.0;
    // Previous input sample; the step interpolates linearly from it to the
    // current sample. NaN until the first sample has been consumed.
    double u_prev = std::numeric_limits<double>::quiet_NaN();
};

inline CarrierState carrier_init(double omega1, CarrierGains gains) {
    if (!std::isfinite(omega1) || !(omega1 > 0.0))
        throw ConfigError("carrier: omega1 must be finite and > 0");
    gains.validate();
    CarrierState s;
    s.omega1 = omega1;
    s.gains = gains;
    return s;
}

/// Right-hand side of the loop equations for state (x1s, x1c) and input u.
inline Vec<2> carrier_rate(const Vec<2>& x, double u, double omega1, const CarrierGains& g) noexcept {
    return {-(g.k1 + 1.0) * omega1 * x[1] + omega1 * g.k1 * u,
            omega1 * x[0] - omega1 * g.k2 * x[1] + omega1 * g.k2 * u};
}

/// Advance the loop by dt. The input is interpolated linearly between the
/// previous sample and `u` over the step (held constant on the first step),
/// so the returned state corresponds to the instant at which `u` was sampled.
inline CarrierState carrier_step(const CarrierState& state, double u, double dt) {
    if (!(dt > 0.0) || !(dt * state.omega1 <= kCarrierStepLimit))
        throw ConfigError("carrier: step must satisfy 0 < w1*dt <= 0.35");
    if (!std::isfinite(u))
        throw DataError("carrier: non-finite input sample");

    const double u0 = std::isnan(state.u_prev) ? u : state.u_prev;
    const double w = state.omega1;
    const CarrierGains g = state.gains;
    auto rate = [&](const Vec<2>& x, double s) { return carrier_rate(x, u0 + s * (u - u0), w, g); };
    const Vec<2> next = rk4_step(Vec<2>{state.x1s, state.x1c}, dt, rate);

    CarrierState out = state;
    out.x1s = next[0];
    out.x1c = next[1];
    out.t = state.t + dt;
    out.u_prev = u;
    return out;
}

inline double magnitude_estimate(const CarrierState& s) noexcept { return std::hypot(s.x1s, s.x1c); }

struct Carriers {
    double sin_hat = 0.0;
    double cos_hat = 0.0;
};

inline Carriers normalized_carriers(const CarrierState& s, double floor = kDefaultNormFloor) {
    if (!(floor > 0.0))
        throw ConfigError("carrier: normalization floor must be > 0");
    const double m = std::max(magnitude_estimate(s), floor);
    return {-s.x1s / m, s.x1c / m};
}

struct TransferPair {
    std::complex<double> tf1s;
    std::complex<double> tf1c;
};

/// Loop transfer functions X1s/X1 and X1c/X1 evaluated at complex frequency s.
inline TransferPair transfer_functions(std::complex<double> s, double omega1, const CarrierGains& g) {
    const double w = omega1;
    // s^2 + w^2 in factored form so the resonance term cancels exactly at s = jw
    const std::complex<double> jw(0.0, w);
    const std::complex<double> den = (s - jw) * (s + jw) + w * g.k2 * s + g.k1 * w * w;
    const double scale = std::norm(s) + w * w;
    if (!(std::abs(den) > 1e-12 * scale))
        throw DomainError("transfer_functions: evaluated at a pole");
    return {w * (g.k1 * s - w * g.k2) / den, w * (g.k2 * s + w * g.k1) / den};
}

} // namespace tde
