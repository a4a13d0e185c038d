#include "tde/baselines.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace tde;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOmega = 2.0 * kPi / 100.0; // 1 kHz at 100 kHz, rad/sample

std::vector<double> white(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v)
        x = g(rng);
    return v;
}

// x2[n] = x1[n - d] for integer d, zero before the start.
std::vector<double> shift(const std::vector<double>& x, int d) {
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t n = static_cast<std::size_t>(d); n < x.size(); ++n)
        y[n] = x[n - static_cast<std::size_t>(d)];
    return y;
}

double tone(double n, double amp, double delay) { return amp * std::cos(kOmega * (n - delay)); }

} // namespace

TEST(LagrangeCoeffs, IntegerDelaySelectsTap) {
    const auto h = lagrange_coeffs(1.0, 3);
    ASSERT_EQ(h.size(), 4u);
    EXPECT_EQ(h[0], 0.0);
    EXPECT_EQ(h[1], 1.0);
    EXPECT_EQ(h[2], 0.0);
    EXPECT_EQ(h[3], 0.0);
}

TEST(LagrangeCoeffs, HalfSample) {
    const auto h = lagrange_coeffs(1.5, 3);
    EXPECT_NEAR(h[0], -0.0625, 1e-15);
    EXPECT_NEAR(h[1], 0.5625, 1e-15);
    EXPECT_NEAR(h[2], 0.5625, 1e-15);
    EXPECT_NEAR(h[3], -0.0625, 1e-15);
}

TEST(LagrangeCoeffs, PartitionOfUnityAndCubicReproduction) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ud(0.0, 3.0), uc(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const double d = ud(rng);
        const auto h = lagrange_coeffs(d, 3);
        double sum = 0.0;
        for (double v : h)
            sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-12);

        const double a = uc(rng), b = uc(rng), c = uc(rng), e = uc(rng);
        auto p = [&](double k) { return ((a * k + b) * k + c) * k + e; };
        const double n = 10.0;
        double y = 0.0;
        for (int k = 0; k <= 3; ++k)
            y += h[static_cast<std::size_t>(k)] * p(n - k);
        EXPECT_NEAR(y, p(n - d), 1e-9);
    }
}

TEST(LagrangeCoeffs, DerivativesMatchFiniteDifferences) {
    for (int order : {1, 3, 5}) {
        for (double d : {0.2, 0.7, 0.5 * order}) {
            const auto dh = lagrange_coeff_derivs(d, order);
            const double eps = 1e-6;
            const auto hp = lagrange_coeffs(d + eps, order);
            const auto hm = lagrange_coeffs(d - eps, order);
            for (std::size_t k = 0; k < dh.size(); ++k)
                EXPECT_NEAR(dh[k], (hp[k] - hm[k]) / (2 * eps), 1e-7);
        }
    }
}

TEST(LagrangeCoeffs, DomainChecks) {
    EXPECT_THROW(lagrange_coeffs(-0.1, 3), DomainError);
    EXPECT_THROW(lagrange_coeffs(3.1, 3), DomainError);
    EXPECT_THROW(lagrange_coeffs(1.0, 0), ConfigError);
}

TEST(Sinc, ValuesAndDerivative) {
    EXPECT_EQ(sinc(0.0), 1.0);
    EXPECT_NEAR(sinc(1.0), 0.0, 1e-16);
    EXPECT_NEAR(sinc(0.5), 2.0 / kPi, 1e-15);
    for (double x : {-2.3, -0.4, 1e-5, 3e-4, 0.7}) {
        const double h = 1e-6;
        EXPECT_NEAR(sinc_deriv(x), (sinc(x + h) - sinc(x - h)) / (2 * h), 1e-8) << x;
    }
    EXPECT_EQ(sinc_deriv(0.0), 0.0);
}

TEST(WindowedSincTap, DerivativeMatchesFiniteDifference) {
    const int half = 10;
    for (double a : {-9.7, -3.2, -0.4, 0.0, 0.6, 5.5}) {
        const double h = 1e-6;
        // a = position - delay, so d/d(delay) = -d/da
        const double fd = -(windowed_sinc_tap(a + h, half).h - windowed_sinc_tap(a - h, half).h) / (2 * h);
        EXPECT_NEAR(windowed_sinc_tap(a, half).dh_dd, fd, 1e-7) << a;
    }
    EXPECT_EQ(windowed_sinc_tap(11.0, half).h, 0.0);
    EXPECT_EQ(windowed_sinc_tap(0.0, half).h, 1.0);
}

TEST(FdfLms, IntegerDelayOnWhiteNoise) {
    const auto x1 = white(20000, 1);
    const auto x2 = shift(x1, 1);
    FdfState s = fdf_init(3, 0.01);
    for (std::size_t n = 0; n < x1.size(); ++n)
        fdf_lms_step(s, x1[n], x2[n]);
    EXPECT_NEAR(s.d_hat, 1.0, 0.01);
}

TEST(FdfLms, SubsampleDelayOnSinusoid) {
    FdfState s = fdf_init(3, 1.0);
    s.d_hat = 0.5;
    for (int n = 0; n < 50000; ++n)
        fdf_lms_step(s, tone(n, std::numbers::sqrt2, 0.0), tone(n, std::numbers::sqrt2, 1.5));
    EXPECT_NEAR(s.d_hat, 1.5, 0.02);
}

TEST(FdfLms, AmplitudeConsistency) {
    for (double c : {0.5, 2.0}) {
        FdfState s = fdf_init(3, 1.0 / (c * c));
        s.d_hat = 0.5;
        for (int n = 0; n < 50000; ++n)
            fdf_lms_step(s, c * tone(n, std::numbers::sqrt2, 0.0), c * tone(n, std::numbers::sqrt2, 1.5));
        EXPECT_NEAR(s.d_hat, 1.5, 0.02) << c;
    }
}

TEST(FdfLms, ZeroErrorLeavesDelayUnchanged) {
    FdfState s = fdf_init(3, 1.0);
    s.d_hat = 0.9;
    for (int n = 0; n < 10; ++n)
        fdf_lms_step(s, 0.0, 0.0);
    EXPECT_EQ(s.d_hat, 0.9);
    EXPECT_EQ(s.last_error, 0.0);
}

TEST(FdfLms, InitChecks) {
    EXPECT_THROW(fdf_init(0, 1.0), ConfigError);
    EXPECT_THROW(fdf_init(3, 0.0), ConfigError);
    const FdfState s = fdf_init(3, 1.0);
    EXPECT_EQ(s.d_hat, 1.5);
    EXPECT_EQ(s.delay_line.size(), 4u);
}

TEST(SincEtde, IntegerDelayOnWhiteNoise) {
    const auto x1 = white(20000, 2);
    const auto x2 = shift(x1, 2);
    FdfState s = sinc_init(21, 0.01);
    s.d_hat = 1.6; // white-noise cost is unimodal only within one sample
    for (std::size_t n = 0; n < x1.size(); ++n)
        sinc_etde_step(s, x1[n], x2[n]);
    EXPECT_NEAR(s.d_hat, 2.0, 0.02);
}

TEST(SincEtde, IntegerDelayOnSinusoid) {
    FdfState s = sinc_init(21, 1.0);
    for (int n = 0; n < 50000; ++n)
        sinc_etde_step(s, tone(n, std::numbers::sqrt2, 0.0), tone(n, std::numbers::sqrt2, 2.0));
    EXPECT_NEAR(s.d_hat, 2.0, 0.02);
}

TEST(SincEtde, ZeroErrorLeavesDelayUnchanged) {
    FdfState s = sinc_init(5, 1.0);
    s.d_hat = 0.3;
    for (int n = 0; n < 10; ++n)
        sinc_etde_step(s, 0.0, 0.0);
    EXPECT_EQ(s.d_hat, 0.3);
}

TEST(SincEtde, ClampedAtWindowEdge) {
    const auto x1 = white(2000, 3);
    const auto x2 = white(2000, 4);
    FdfState s = sinc_init(5, 50.0);
    bool seen = false;
    for (std::size_t n = 0; n < x1.size(); ++n) {
        sinc_etde_step(s, x1[n], x2[n]);
        ASSERT_GE(s.d_hat, s.d_min);
        ASSERT_LE(s.d_hat, s.d_max);
        if (s.clamped) {
            seen = true;
            EXPECT_TRUE(s.d_hat == s.d_min || s.d_hat == s.d_max);
        }
    }
    EXPECT_TRUE(seen);
}

TEST(SincEtde, InitChecks) {
    EXPECT_THROW(sinc_init(4, 1.0), ConfigError);
    EXPECT_THROW(sinc_init(1, 1.0), ConfigError);
    EXPECT_THROW(sinc_init(21, -1.0), ConfigError);
    const FdfState s = sinc_init(21, 1.0);
    EXPECT_EQ(s.d_min, -10.0);
    EXPECT_EQ(s.d_max, 10.0);
}

TEST(Hilbert, AntisymmetricTapsAndGain) {
    const auto h = hilbert_taps(31);
    ASSERT_EQ(h.size(), 31u);
    for (std::size_t k = 0; k < h.size(); ++k) {
        EXPECT_NEAR(h[k], -h[h.size() - 1 - k], 1e-15);
        if ((static_cast<int>(k) - 15) % 2 == 0) {
            EXPECT_EQ(h[k], 0.0);
        }
    }
    // Close to unity mid-band, small near DC.
    EXPECT_NEAR(hilbert_gain(h, kPi / 2.0), 1.0, 0.02);
    EXPECT_LT(hilbert_gain(h, kOmega), 0.5);
    EXPECT_THROW(hilbert_taps(30), ConfigError);
}

TEST(Hilbert, GainMatchesFilteredSinusoid) {
    const auto h = hilbert_taps(31);
    const double g = hilbert_gain(h, kOmega);
    // Filter cos(w n) and compare with g sin(w (n - 15)).
    const int n = 200;
    double y = 0.0;
    for (int k = 0; k < 31; ++k)
        y += h[static_cast<std::size_t>(k)] * std::cos(kOmega * (n - k));
    EXPECT_NEAR(y, g * std::sin(kOmega * (n - 15)), 1e-12);
}

namespace {

QuadOutput run_quad(double m2, double phi, int samples, double scale = 1.0) {
    QuadState s = quad_init(31, 100, kOmega);
    QuadOutput o;
    for (int n = 0; n < samples; ++n)
        o = quad_estimator_step(s, scale * std::cos(kOmega * n), scale * m2 * std::cos(kOmega * n - phi));
    return o;
}

} // namespace

TEST(QuadEstimator, ZeroDelay) {
    const QuadOutput o = run_quad(1.0, 0.0, 1000);
    EXPECT_TRUE(o.valid);
    EXPECT_NEAR(o.phi_hat, 0.0, 0.01);
}

TEST(QuadEstimator, HalfRadian) { EXPECT_NEAR(run_quad(1.0, 0.5, 1000).phi_hat, 0.5, 0.02); }

TEST(QuadEstimator, UnequalAndScaledAmplitudes) {
    const double ref = run_quad(1.0, 0.5, 1000).phi_hat;
    EXPECT_NEAR(run_quad(0.5, 0.5, 1000).phi_hat, ref, 1e-12);
    EXPECT_NEAR(run_quad(1.0, 0.5, 1000, 3.0).phi_hat, ref, 1e-12);
}

TEST(QuadEstimator, HardLimited) {
    const QuadOutput o = run_quad(1.0, 2.5, 1000);
    EXPECT_EQ(o.phi_hat, kPi / 2.0);
}

TEST(QuadEstimator, WarmupFlagged) {
    QuadState s = quad_init(31, 100, kOmega);
    const std::size_t warm = quad_warmup(s);
    EXPECT_EQ(warm, 130u);
    for (std::size_t n = 0; n < warm + 1; ++n) {
        const QuadOutput o = quad_estimator_step(s, std::cos(kOmega * n), std::cos(kOmega * n));
        EXPECT_EQ(o.valid, n + 1 >= warm) << n;
    }
    EXPECT_THROW(quad_init(31, 0, kOmega), ConfigError);
    EXPECT_THROW(quad_init(31, 100, 0.0), ConfigError);
}
