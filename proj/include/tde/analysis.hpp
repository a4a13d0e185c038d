#pragma once

// Convergence theory for the phase detector as executable checks:
// persistent-excitation Gramian of the regressor w = [sin(w1 t), cos(w1 t)],
// its eigenvalue bounds, the exponential-rate bound, the Lyapunov energy of
// the phasor error, the phasor error dynamics, and the error metrics used by
// the experiment harness.

#include "tde/detector.hpp"
#include "tde/errors.hpp"
#include "tde/integrator.hpp"
#include "tde/signals.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tde {

using Mat2 = std::array<std::array<double, 2>, 2>;

struct PEWindow {
    double t0 = 0.0;
    double delta = 0.0;  ///< s
    double omega1 = 0.0; ///< rad/s

    void validate() const {
        if (!std::isfinite(t0) || !std::isfinite(delta) || !(delta > 0.0))
            throw ConfigError("PE window: delta must be finite and > 0");
        if (!std::isfinite(omega1) || !(omega1 > 0.0))
            throw ConfigError("PE window: omega1 must be finite and > 0");
    }
};

/// Integral of w w^T over [t0, t0 + delta], exact trig antiderivatives.
inline Mat2 pe_gramian(const PEWindow& win) {
    win.validate();
    const double w = win.omega1;
    const double wd = w * win.delta;
    const double mid = 2.0 * w * win.t0 + wd;
    // sin(2w(t0+d)) - sin(2w t0) and cos(2w(t0+d)) - cos(2w t0) in product form
    const double ds = 2.0 * std::cos(mid) * std::sin(wd);
    const double dc = -2.0 * std::sin(mid) * std::sin(wd);
    const double ss = 0.5 * win.delta - ds / (4.0 * w);
    const double cc = 0.5 * win.delta + ds / (4.0 * w);
    const double sc = -dc / (4.0 * w);
    return {{{ss, sc}, {sc, cc}}};
}

struct PEBounds {
    double lambda1 = 0.0; ///< smallest eigenvalue
    double lambda2 = 0.0; ///< largest eigenvalue
};

namespace detail {

// x - |sin x| for x >= 0 without cancellation near 0.
inline double x_minus_abs_sin(double x) noexcept {
    if (x < 0.5) {
        const double x2 = x * x;
        double term = x * x2 / 6.0;
        double sum = term;
        for (int k = 2; k <= 8; ++k) {
            term *= -x2 / static_cast<double>((2 * k) * (2 * k + 1));
            sum += term;
        }
        return sum;
    }
    return x - std::fabs(std::sin(x));
}

} // namespace detail

/// Eigenvalues of the PE Gramian. Trace is delta and the eigenvalue gap is
/// |sin(w1 delta)| / w1, independent of t0.
inline PEBounds pe_bounds(const PEWindow& win) {
    win.validate();
    const double x = win.omega1 * win.delta;
    const double two_w = 2.0 * win.omega1;
    return {detail::x_minus_abs_sin(x) / two_w, (x + std::fabs(std::sin(x))) / two_w};
}

struct ConvergenceParams {
    double g = 0.0;       ///< adaptation gain
    double lambda1 = 0.0; ///< lower PE bound
    double lambda2 = 0.0; ///< upper PE bound
    double delta = 0.0;   ///< PE window, s
    int n = 1;            ///< plant order
};

/// Lower bound on the exponential convergence rate of the parameter error:
///   alpha = 1/(2 delta) ln(1 / (1 - 2 g lambda1 / (1 + sqrt(2 n g lambda2))^2))
/// g = 0 is accepted and gives alpha = 0.
inline double convergence_rate(const ConvergenceParams& p) {
    if (!std::isfinite(p.g) || p.g < 0.0)
        throw DomainError("convergence_rate: requires g >= 0");
    if (!std::isfinite(p.lambda1) || !(p.lambda1 > 0.0))
        throw DomainError("convergence_rate: requires lambda1 > 0");
    if (!std::isfinite(p.lambda2) || !(p.lambda1 <= p.lambda2))
        throw DomainError("convergence_rate: requires lambda1 <= lambda2");
    if (!std::isfinite(p.delta) || !(p.delta > 0.0))
        throw DomainError("convergence_rate: requires delta > 0");
    if (p.n < 1)
        throw DomainError("convergence_rate: requires n >= 1");
    const double root = 1.0 + std::sqrt(2.0 * p.n * p.g * p.lambda2);
    const double ratio = 2.0 * p.g * p.lambda1 / (root * root);
    if (!(ratio < 1.0))
        throw DomainError("convergence_rate: requires 2*g*lambda1 < (1 + sqrt(2*n*g*lambda2))^2");
    return -std::log1p(-ratio) / (2.0 * p.delta);
}

/// V = (mI_err^2 + mQ_err^2) / 2 per sample.
inline std::vector<double> lyapunov_trace(std::span<const double> m_tilde_i, std::span<const double> m_tilde_q) {
    if (m_tilde_i.size() != m_tilde_q.size())
        throw DataError("lyapunov_trace: length mismatch");
    std::vector<double> v(m_tilde_i.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = 0.5 * (m_tilde_i[k] * m_tilde_i[k] + m_tilde_q[k] * m_tilde_q[k]);
    return v;
}

/// Phasor error dynamics for constant truth, state ordered (mQ_err, mI_err):
///   d/dt [mQ~]   [ -2 gQ sin^2     -gQ sin 2wt ] [mQ~]
///        [mI~] = [ -gI sin 2wt     -2 gI cos^2 ] [mI~]
/// with sin/cos the carrier values at the current instant.
inline Vec<2> error_dynamics_rate(const Vec<2>& err_qi, double sin_c, double cos_c, const DetectorGains& g) noexcept {
    const double sin2 = 2.0 * sin_c * cos_c;
    return {-2.0 * g.g_q * sin_c * sin_c * err_qi[0] - g.g_q * sin2 * err_qi[1],
            -g.g_i * sin2 * err_qi[0] - 2.0 * g.g_i * cos_c * cos_c * err_qi[1]};
}

/// Advance the error dynamics one fixed step with the carriers held.
inline Vec<2> error_dynamics_step(const Vec<2>& err_qi, double sin_c, double cos_c, const DetectorGains& g,
                                  double dt) {
    auto rate = [&](const Vec<2>& y, double) { return error_dynamics_rate(y, sin_c, cos_c, g); };
    return rk4_step(err_qi, dt, rate);
}

struct ErrorMetrics {
    double rms_phi = 0.0; ///< rad
    double mse_m1 = 0.0;
    double mse_m2 = 0.0;
    std::size_t samples = 0;
};

/// Errors over t > settle. The phase error uses the unwrapped estimate and is
/// reduced modulo 2 pi so a whole-turn offset between branches is not counted.
inline ErrorMetrics error_metrics(const EstimateTrace& trace, const GroundTruth& truth, double settle) {
    if (trace.size() != truth.size())
        throw DataError("error_metrics: trace and truth lengths differ");
    ErrorMetrics m;
    double sp = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (!(trace.t[k] > settle))
            continue;
        const double dphi = wrap_to_pi(trace.phi_hat_unwrapped[k] - truth.phi[k]);
        const double d1 = trace.m1_hat[k] - truth.m1[k];
        const double d2 = trace.m2_hat[k] - truth.m2[k];
        sp += dphi * dphi;
        s1 += d1 * d1;
        s2 += d2 * d2;
        ++m.samples;
    }
    if (m.samples == 0)
        throw DataError("error_metrics: no samples after the settle time");
    const auto n = static_cast<double>(m.samples);
    m.rms_phi = std::sqrt(sp / n);
    m.mse_m1 = s1 / n;
    m.mse_m2 = s2 / n;
    return m;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least-squares line y = slope x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw DataError("fit_line: need two or more paired points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0.0)
        throw DataError("fit_line: degenerate abscissa");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

} // namespace tde
