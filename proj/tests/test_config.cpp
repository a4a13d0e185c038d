#include "tde/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>

using namespace tde;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.cfg");
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(ParseDouble, Spellings) {
    double v = 0.0;
    EXPECT_TRUE(parse_double("1.5e3", v));
    EXPECT_EQ(v, 1500.0);
    EXPECT_TRUE(parse_double("+2", v));
    EXPECT_EQ(v, 2.0);
    EXPECT_TRUE(parse_double("inf", v));
    EXPECT_TRUE(std::isinf(v));
    EXPECT_FALSE(parse_double("", v));
    EXPECT_FALSE(parse_double("1.5x", v));
    EXPECT_FALSE(parse_double("abc", v));
}

TEST(ParseConfig, EmptyGivesDefaults) {
    const ExperimentConfig c = parse("# nothing\n\n");
    EXPECT_EQ(c.scenario.f1, 1000.0);
    EXPECT_EQ(c.scenario.fs, 100000.0);
    EXPECT_EQ(c.estimators.carrier.k1, 0.1);
    EXPECT_EQ(c.estimators.detector.g_q, 400.0);
    EXPECT_TRUE(std::isinf(c.scenario.snr1_db));
}

TEST(ParseConfig, AllKeys) {
    const ExperimentConfig c = parse("f1 = 500\n"
                                     "fs = 20000   # trailing comment\n"
                                     "duration = 0.3\n"
                                     "seed = 77\n"
                                     "m1 = 2\n"
                                     "m2 = 0.5\n"
                                     "sigma1 = 10\n"
                                     "theta = 0.25\n"
                                     "nu = 3\n"
                                     "nu_dot = 4\n"
                                     "snr1_db = 10\n"
                                     "snr2_db = inf\n"
                                     "k1 = 0.2\n"
                                     "k2 = 0.3\n"
                                     "g_i = 100\n"
                                     "g_q = 200\n"
                                     "norm_floor = 1e-4\n"
                                     "lagrange_order = 5\n"
                                     "lagrange_mu = 0.5\n"
                                     "sinc_taps = 11\n"
                                     "sinc_mu = 0.25\n"
                                     "quad_taps = 15\n"
                                     "quad_ma_len = 40\n"
                                     "settle = 0.1\n"
                                     "converge_tol = 0.05\n");
    const auto& sc = c.scenario;
    EXPECT_EQ(sc.f1, 500.0);
    EXPECT_EQ(sc.fs, 20000.0);
    EXPECT_EQ(sc.duration, 0.3);
    EXPECT_EQ(sc.seed, 77u);
    EXPECT_EQ(sc.env1.kind, EnvelopeKind::damped);
    EXPECT_EQ(sc.env1.m0, 2.0);
    EXPECT_EQ(sc.env1.sigma, 10.0);
    EXPECT_EQ(sc.env2.kind, EnvelopeKind::constant);
    EXPECT_EQ(sc.env2.m0, 0.5);
    EXPECT_EQ(sc.delay.kind, DelayKind::parabolic);
    EXPECT_EQ(sc.delay.theta, 0.25);
    EXPECT_EQ(sc.delay.nu, 3.0);
    EXPECT_EQ(sc.delay.nu_dot, 4.0);
    EXPECT_EQ(sc.snr1_db, 10.0);
    EXPECT_TRUE(std::isinf(sc.snr2_db));
    const auto& e = c.estimators;
    EXPECT_EQ(e.carrier.k1, 0.2);
    EXPECT_EQ(e.carrier.k2, 0.3);
    EXPECT_EQ(e.detector.g_i, 100.0);
    EXPECT_EQ(e.detector.g_q, 200.0);
    EXPECT_EQ(e.norm_floor, 1e-4);
    EXPECT_EQ(e.lagrange_order, 5);
    EXPECT_EQ(e.lagrange_mu, 0.5);
    EXPECT_EQ(e.sinc_taps, 11);
    EXPECT_EQ(e.sinc_mu, 0.25);
    EXPECT_EQ(e.quad_taps, 15);
    EXPECT_EQ(e.quad_ma_len, 40);
    EXPECT_EQ(c.settle, 0.1);
    EXPECT_EQ(c.converge_tol, 0.05);
}

TEST(ParseConfig, SharedShorthands) {
    const ExperimentConfig c = parse("k = 1\ng = 4000\nsnr_db = 20\n");
    EXPECT_EQ(c.estimators.carrier.k1, 1.0);
    EXPECT_EQ(c.estimators.carrier.k2, 1.0);
    EXPECT_EQ(c.estimators.detector.g_i, 4000.0);
    EXPECT_EQ(c.estimators.detector.g_q, 4000.0);
    EXPECT_EQ(c.scenario.snr1_db, 20.0);
    EXPECT_EQ(c.scenario.snr2_db, 20.0);
}

TEST(ParseConfig, DelayKindInferredOrExplicit) {
    EXPECT_EQ(parse("theta = 1\n").scenario.delay.kind, DelayKind::constant);
    EXPECT_EQ(parse("nu = 1\n").scenario.delay.kind, DelayKind::linear);
    EXPECT_EQ(parse("delay = parabolic\n").scenario.delay.kind, DelayKind::parabolic);
    EXPECT_NE(error_of("delay = constant\nnu = 2\n"), "");
    EXPECT_NE(error_of("delay = wobbly\n"), "");
}

TEST(ParseConfig, LineAnchoredErrors) {
    EXPECT_EQ(error_of("f1 = 1000\nbogus = 3\n"), "test.cfg:2: unknown key 'bogus'");
    EXPECT_EQ(error_of("fs = 1e5\n\nfs = 2e5\n"), "test.cfg:3: duplicate key 'fs'");
    EXPECT_EQ(error_of("\n\nduration = abc\n"), "test.cfg:3: 'duration' is not a number");
    EXPECT_EQ(error_of("duration = 0\n"), "test.cfg:1: 'duration' must be finite and > 0");
    EXPECT_EQ(error_of("just words\n"), "test.cfg:1: expected 'key = value'");
    EXPECT_EQ(error_of("g =\n"), "test.cfg:1: missing value for 'g'");
    EXPECT_EQ(error_of("# c\nfs = 15000\n"), "test.cfg:2: fs must be at least 20 * f1");
    EXPECT_EQ(error_of("duration = 0.1\nsettle = 0.2\n"), "test.cfg:2: settle must be < duration");
}

TEST(ParseConfig, RejectsInvalidValues) {
    EXPECT_NE(error_of("k1 = 0\n"), "");
    EXPECT_NE(error_of("g = -1\n"), "");
    EXPECT_NE(error_of("snr_db = -inf\n"), "");
    EXPECT_NE(error_of("snr_db = nan\n"), "");
    EXPECT_NE(error_of("sinc_taps = 20\n"), "");
    EXPECT_NE(error_of("lagrange_order = 1.5\n"), "");
    EXPECT_NE(error_of("seed = -1\n"), "");
    EXPECT_NE(error_of("k = 1\nk1 = 2\n"), "");
    EXPECT_NE(error_of("g = 1\ng_q = 2\n"), "");
    EXPECT_NE(error_of("snr_db = 1\nsnr2_db = 2\n"), "");
    EXPECT_NE(error_of("duration = 1e-9\n"), "");
    EXPECT_NE(error_of("f1 = inf\n"), "");
}

TEST(LoadConfig, MissingFileIsIoError) {
    EXPECT_THROW(load_config("/nonexistent/dir/x.cfg"), IoError);
}

TEST(LoadConfig, BundledConfigsParse) {
    for (const auto& entry : std::filesystem::directory_iterator(TDE_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg")
            continue;
        EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    }
}

TEST(LoadConfig, Fig4Scenario) {
    const ExperimentConfig c = load_config(std::string(TDE_CONFIG_DIR) + "/fig4.cfg");
    EXPECT_EQ(c.scenario.env1.kind, EnvelopeKind::damped);
    EXPECT_EQ(c.scenario.env1.sigma, 62.8319);
    EXPECT_EQ(c.scenario.env2.sigma, 94.2478);
}
