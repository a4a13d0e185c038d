#pragma once

// Comparison delay estimators in their canonical textbook forms:
//  - explicit LMS adaptation of the delay through an order-N Lagrange
//    fractional-delay filter,
//  - explicit LMS adaptation through a sinc interpolator over a 2P+1 tap
//    window (Hann taper centered on the delay, x2 delayed by P),
//  - an open-loop quadrature phase detector: FIR Hilbert transform of x1,
//    products with x2, moving averages and a hard-limited arctangent.
// Delays of the FDF estimators are in samples.

#include "tde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace tde {

/// h[k] = prod_{i != k} (d - i) / (k - i), k = 0..order.
inline std::vector<double> lagrange_coeffs(double d, int order) {
    if (order < 1)
        throw ConfigError("lagrange_coeffs: order must be >= 1");
    if (!(d >= 0.0 && d <= static_cast<double>(order)))
        throw DomainError("lagrange_coeffs: d must lie in [0, order]");
    std::vector<double> h(static_cast<std::size_t>(order) + 1, 1.0);
    for (int k = 0; k <= order; ++k)
        for (int i = 0; i <= order; ++i)
            if (i != k)
                h[k] *= (d - i) / static_cast<double>(k - i);
    return h;
}

/// dh[k]/dd by the product rule.
inline std::vector<double> lagrange_coeff_derivs(double d, int order) {
    if (order < 1)
        throw ConfigError("lagrange_coeff_derivs: order must be >= 1");
    std::vector<double> dh(static_cast<std::size_t>(order) + 1, 0.0);
    for (int k = 0; k <= order; ++k) {
        for (int j = 0; j <= order; ++j) {
            if (j == k)
                continue;
            double term = 1.0 / static_cast<double>(k - j);
            for (int i = 0; i <= order; ++i)
                if (i != k && i != j)
                    term *= (d - i) / static_cast<double>(k - i);
            dh[k] += term;
        }
    }
    return dh;
}

inline double sinc(double x) noexcept {
    if (x == 0.0)
        return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

inline double sinc_deriv(double x) noexcept {
    if (std::fabs(x) < 1e-4) {
        const double p2 = std::numbers::pi * std::numbers::pi;
        return -p2 * x / 3.0 + p2 * p2 * x * x * x / 30.0;
    }
    return (std::cos(std::numbers::pi * x) - sinc(x)) / x;
}

enum class FdfKind { lagrange, sinc };

struct FdfState {
    FdfKind kind = FdfKind::lagrange;
    double d_hat = 0.0;               ///< samples
    double mu = 0.0;
    int order = 3;                    ///< filter order (taps - 1)
    double d_min = 0.0;
    double d_max = 3.0;
    std::vector<double> delay_line;   ///< x1[n - k], k = 0..order
    std::vector<double> x2_line;      ///< bulk delay of x2 (sinc only)
    double last_error = 0.0;
    bool clamped = false;             ///< d_hat hit a range limit on the last step
};

/// Lagrange estimator with delay range [0, order]; starts at the center.
inline FdfState fdf_init(int order, double mu) {
    if (order < 1)
        throw ConfigError("lagrange estimator: order must be >= 1");
    if (!std::isfinite(mu) || !(mu > 0.0))
        throw ConfigError("lagrange estimator: mu must be finite and > 0");
    FdfState s;
    s.kind = FdfKind::lagrange;
    s.order = order;
    s.mu = mu;
    s.d_min = 0.0;
    s.d_max = order;
    s.d_hat = 0.5 * order;
    s.delay_line.assign(static_cast<std::size_t>(order) + 1, 0.0);
    return s;
}

/// Sinc estimator with an odd number of taps 2P+1 and delay range [-P, P].
inline FdfState sinc_init(int taps, double mu) {
    if (taps < 3 || taps % 2 == 0)
        throw ConfigError("sinc estimator: taps must be odd and >= 3");
    if (!std::isfinite(mu) || !(mu > 0.0))
        throw ConfigError("sinc estimator: mu must be finite and > 0");
    const int half = taps / 2;
    FdfState s;
    s.kind = FdfKind::sinc;
    s.order = taps - 1;
    s.mu = mu;
    s.d_min = -half;
    s.d_max = half;
    s.d_hat = 0.0;
    s.delay_line.assign(static_cast<std::size_t>(taps), 0.0);
    s.x2_line.assign(static_cast<std::size_t>(half) + 1, 0.0);
    return s;
}

namespace detail {

inline void push_front(std::vector<double>& line, double x) {
    std::move_backward(line.begin(), line.end() - 1, line.end());
    line.front() = x;
}

inline void apply_delay_update(FdfState& s, double e, double grad) {
    if (e == 0.0)
        return;
    const double d = s.d_hat + s.mu * e * grad;
    s.clamped = d < s.d_min || d > s.d_max;
    s.d_hat = std::clamp(d, s.d_min, s.d_max);
}

} // namespace detail

/// One LMS update of the delay through the Lagrange interpolator:
/// e = x2 - sum h(D) x1, D += mu e sum dh/dD x1.
inline void fdf_lms_step(FdfState& s, double x1_sample, double x2_sample) {
    detail::push_front(s.delay_line, x1_sample);
    const auto h = lagrange_coeffs(s.d_hat, s.order);
    const auto dh = lagrange_coeff_derivs(s.d_hat, s.order);
    double y = 0.0, grad = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        y += h[k] * s.delay_line[k];
        grad += dh[k] * s.delay_line[k];
    }
    s.last_error = x2_sample - y;
    detail::apply_delay_update(s, s.last_error, grad);
}

/// Hann-tapered sinc tap and its derivative with respect to the delay, for
/// tap offset `a` = position - delay on a window of half-length `half`.
struct SincTap {
    double h;
    double dh_dd;
};

inline SincTap windowed_sinc_tap(double a, int half) noexcept {
    const double span = half + 1.0;
    if (std::fabs(a) >= span)
        return {0.0, 0.0};
    const double arg = std::numbers::pi * a / span;
    const double w = 0.5 * (1.0 + std::cos(arg));
    const double dw = -0.5 * std::numbers::pi / span * std::sin(arg);
    // d/dd of f(position - d) is -f'(a)
    return {sinc(a) * w, -(sinc_deriv(a) * w + sinc(a) * dw)};
}

/// One LMS update of the delay through the windowed sinc interpolator:
/// e = x2[n-P] - sum_j h(j - P - D) x1[n-j], D += mu e sum dh/dD x1.
inline void sinc_etde_step(FdfState& s, double x1_sample, double x2_sample) {
    detail::push_front(s.delay_line, x1_sample);
    detail::push_front(s.x2_line, x2_sample);
    const int half = s.order / 2;
    double y = 0.0, grad = 0.0;
    for (int j = 0; j <= s.order; ++j) {
        const SincTap tap = windowed_sinc_tap(j - half - s.d_hat, half);
        y += tap.h * s.delay_line[static_cast<std::size_t>(j)];
        grad += tap.dh_dd * s.delay_line[static_cast<std::size_t>(j)];
    }
    s.last_error = s.x2_line.back() - y;
    detail::apply_delay_update(s, s.last_error, grad);
}

/// Odd-length antisymmetric FIR Hilbert transformer: truncated ideal response
/// 2 / (pi n) at odd offsets, raised-cosine window.
inline std::vector<double> hilbert_taps(int length) {
    if (length < 3 || length % 2 == 0)
        throw ConfigError("hilbert_taps: length must be odd and >= 3");
    const int mid = length / 2;
    std::vector<double> h(static_cast<std::size_t>(length), 0.0);
    for (int k = 0; k < length; ++k) {
        const int n = k - mid;
        if (n % 2 == 0)
            continue;
        const double window = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * k / (length - 1));
        h[static_cast<std::size_t>(k)] = 2.0 / (std::numbers::pi * n) * window;
    }
    return h;
}

/// Magnitude of an antisymmetric FIR's response at `omega` rad/sample.
inline double hilbert_gain(const std::vector<double>& taps, double omega) {
    const int mid = static_cast<int>(taps.size()) / 2;
    double a = 0.0;
    for (int n = 1; n <= mid; ++n)
        a += 2.0 * taps[static_cast<std::size_t>(mid + n)] * std::sin(omega * n);
    return a;
}

struct QuadState {
    std::vector<double> hilbert_taps;
    int ma_len = 100;
    double accum_i = 0.0;
    double accum_q = 0.0;
    double gain = 1.0;            ///< Hilbert gain at the carrier, divided out of Q
    std::vector<double> x1_line;  ///< newest first, Hilbert input
    std::vector<double> x2_line;  ///< aligns x2 with the Hilbert group delay
    std::vector<double> ring_i;
    std::vector<double> ring_q;
    std::size_t pos = 0;
    std::size_t count = 0;
};

/// `omega` is the carrier in rad/sample; it sets the Hilbert gain correction.
inline QuadState quad_init(int taps, int ma_len, double omega) {
    if (ma_len < 1)
        throw ConfigError("quadrature estimator: ma_len must be >= 1");
    QuadState s;
    s.hilbert_taps = hilbert_taps(taps);
    s.ma_len = ma_len;
    s.gain = hilbert_gain(s.hilbert_taps, omega);
    if (!(std::fabs(s.gain) > 1e-6))
        throw ConfigError("quadrature estimator: Hilbert filter has no gain at the carrier");
    s.x1_line.assign(s.hilbert_taps.size(), 0.0);
    s.x2_line.assign(s.hilbert_taps.size() / 2 + 1, 0.0);
    s.ring_i.assign(static_cast<std::size_t>(ma_len), 0.0);
    s.ring_q.assign(static_cast<std::size_t>(ma_len), 0.0);
    return s;
}

struct QuadOutput {
    double phi_hat = 0.0; ///< rad, hard-limited to [-pi/2, pi/2]
    bool valid = false;   ///< false until the filters have filled
};

inline std::size_t quad_warmup(const QuadState& s) noexcept {
    return s.hilbert_taps.size() - 1 + static_cast<std::size_t>(s.ma_len);
}

inline QuadOutput quad_estimator_step(QuadState& s, double x1_sample, double x2_sample) {
    detail::push_front(s.x1_line, x1_sample);
    detail::push_front(s.x2_line, x2_sample);
    const std::size_t mid = s.hilbert_taps.size() / 2;

    double hx1 = 0.0;
    for (std::size_t k = 0; k < s.hilbert_taps.size(); ++k)
        hx1 += s.hilbert_taps[k] * s.x1_line[k];
    const double x2d = s.x2_line.back();
    const double pi_ = x2d * s.x1_line[mid];
    const double pq = x2d * hx1 / s.gain;

    s.accum_i += pi_ - s.ring_i[s.pos];
    s.accum_q += pq - s.ring_q[s.pos];
    s.ring_i[s.pos] = pi_;
    s.ring_q[s.pos] = pq;
    s.pos = (s.pos + 1) % s.ring_i.size();
    ++s.count;

    constexpr double half_pi = std::numbers::pi / 2.0;
    QuadOutput out;
    out.phi_hat = std::clamp(std::atan2(s.accum_q, s.accum_i), -half_pi, half_pi);
    out.valid = s.count >= quad_warmup(s);
    return out;
}

} // namespace tde
