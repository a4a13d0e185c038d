#pragma once

#include <array>
#include <cstddef>
#include <utility>

namespace tde {

template <std::size_t N>
using Vec = std::array<double, N>;

namespace detail {

template <std::size_t N>
constexpr Vec<N> axpy(const Vec<N>& y, double a, const Vec<N>& k) noexcept {
    Vec<N> out{};
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + a * k[i];
    return out;
}

} // namespace detail

// Classical 4-stage Runge-Kutta step for y' = f(y, s), s in [0, 1] being the
// fractional position within the step. Inputs that vary over the step are
// evaluated by the caller's f from s (0, 1/2, 1/2, 1).
template <std::size_t N, typename F>
constexpr Vec<N> rk4_increment(const Vec<N>& y, double dt, F&& f) {
    const Vec<N> k1 = f(y, 0.0);
    const Vec<N> k2 = f(detail::axpy(y, 0.5 * dt, k1), 0.5);
    const Vec<N> k3 = f(detail::axpy(y, 0.5 * dt, k2), 0.5);
    const Vec<N> k4 = f(detail::axpy(y, dt, k3), 1.0);
    Vec<N> inc{};
    for (std::size_t i = 0; i < N; ++i)
        inc[i] = dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return inc;
}

template <std::size_t N, typename F>
constexpr Vec<N> rk4_step(const Vec<N>& y, double dt, F&& f) {
    const Vec<N> inc = rk4_increment(y, dt, std::forward<F>(f));
    Vec<N> out{};
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + inc[i];
    return out;
}

} // namespace tde
