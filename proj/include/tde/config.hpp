#pragma once

// Flat key-value experiment configuration.
//
//   # comment
//   key = value
//
// One key per line, each key at most once. Numbers accept "inf". See
// README.md for the full key list.

#include "tde/baselines.hpp"
#include "tde/carrier.hpp"
#include "tde/detector.hpp"
#include "tde/errors.hpp"
#include "tde/signals.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

namespace tde {

struct EstimatorConfig {
    CarrierGains carrier{0.1, 0.1};
    DetectorGains detector{400.0, 400.0};
    double norm_floor = kDefaultNormFloor;
    int lagrange_order = 3;
    double lagrange_mu = 1.0;
    int sinc_taps = 21;
    double sinc_mu = 1.0;
    int quad_taps = 31;
    int quad_ma_len = 0; ///< 0 selects one carrier period
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    EstimatorConfig estimators;
    double settle = 0.05;      ///< s, start of the error-metric window
    double converge_tol = 0.1; ///< rad, rms_phi below this counts as converged
};

/// Parse a double, accepting "inf"/"-inf"/"nan" spellings.
inline bool parse_double(std::string_view text, double& out) {
    if (text.empty())
        return false;
    if (text.front() == '+')
        text.remove_prefix(1);
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class ConfigReader {
public:
    explicit ConfigReader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
    }

    void read(std::istream& in) {
        std::string raw;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            std::string_view s = raw;
            if (const auto hash = s.find('#'); hash != std::string_view::npos)
                s = s.substr(0, hash);
            s = trim(s);
            if (s.empty())
                continue;
            const auto eq = s.find('=');
            if (eq == std::string_view::npos)
                fail(line, "expected 'key = value'");
            const std::string key(trim(s.substr(0, eq)));
            const std::string value(trim(s.substr(eq + 1)));
            if (key.empty())
                fail(line, "missing key");
            if (value.empty())
                fail(line, "missing value for '" + key + "'");
            if (entries_.count(key))
                fail(line, "duplicate key '" + key + "'");
            entries_[key] = {value, line};
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    int line_of(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }
    const std::string& text(const std::string& key) const { return entries_.at(key).value; }

    void mark(const std::string& key) { used_[key] = true; }

    void check_unused() const {
        for (const auto& [key, e] : entries_)
            if (!used_.count(key))
                fail(e.line, "unknown key '" + key + "'");
    }

    // Reads `key` into out if present; `ok` validates the parsed value.
    void number(const std::string& key, double& out, const std::function<bool(double)>& ok,
                const char* requirement) {
        if (!has(key))
            return;
        mark(key);
        double v = 0.0;
        if (!parse_double(text(key), v))
            fail(line_of(key), "'" + key + "' is not a number");
        if (!ok(v))
            fail(line_of(key), "'" + key + "' " + requirement);
        out = v;
    }

    void integer(const std::string& key, int& out, const std::function<bool(long long)>& ok,
                 const char* requirement) {
        if (!has(key))
            return;
        mark(key);
        const std::string& t = text(key);
        long long v = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size() || v > std::numeric_limits<int>::max() ||
            v < std::numeric_limits<int>::min())
            fail(line_of(key), "'" + key + "' is not an integer");
        if (!ok(v))
            fail(line_of(key), "'" + key + "' " + requirement);
        out = static_cast<int>(v);
    }

    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (!has(key))
            return;
        mark(key);
        const std::string& t = text(key);
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
        if (ec != std::errc{} || ptr != t.data() + t.size())
            fail(line_of(key), "'" + key + "' is not an unsigned integer");
    }

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string source_;
    std::map<std::string, Entry> entries_;
    std::map<std::string, bool> used_;
};

} // namespace detail

/// Parse a configuration stream. `source` names the input in error messages,
/// which have the form "source:LINE: message".
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "config") {
    detail::ConfigReader r(source);
    r.read(in);

    const auto finite_pos = [](double v) { return std::isfinite(v) && v > 0.0; };
    const auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    const auto finite = [](double v) { return std::isfinite(v); };
    const auto snr_ok = [](double v) { return !std::isnan(v) && v != -std::numeric_limits<double>::infinity(); };

    ExperimentConfig cfg;
    ScenarioConfig& sc = cfg.scenario;
    EstimatorConfig& est = cfg.estimators;

    r.number("f1", sc.f1, finite_pos, "must be finite and > 0");
    r.number("fs", sc.fs, finite_pos, "must be finite and > 0");
    r.number("duration", sc.duration, finite_pos, "must be finite and > 0");
    r.unsigned64("seed", sc.seed);

    double m1 = sc.env1.m0, m2 = sc.env2.m0, sigma1 = 0.0, sigma2 = 0.0;
    r.number("m1", m1, finite_pos, "must be finite and > 0");
    r.number("m2", m2, finite_pos, "must be finite and > 0");
    r.number("sigma1", sigma1, finite_nonneg, "must be finite and >= 0");
    r.number("sigma2", sigma2, finite_nonneg, "must be finite and >= 0");
    sc.env1 = sigma1 > 0.0 ? EnvelopeProfile::damped(m1, sigma1) : EnvelopeProfile::constant(m1);
    sc.env2 = sigma2 > 0.0 ? EnvelopeProfile::damped(m2, sigma2) : EnvelopeProfile::constant(m2);

    double theta = 0.0, nu = 0.0, nu_dot = 0.0;
    r.number("theta", theta, finite, "must be finite");
    r.number("nu", nu, finite, "must be finite");
    r.number("nu_dot", nu_dot, finite, "must be finite");
    DelayKind kind = nu_dot != 0.0 ? DelayKind::parabolic : (nu != 0.0 ? DelayKind::linear : DelayKind::constant);
    if (r.has("delay")) {
        r.mark("delay");
        const std::string& k = r.text("delay");
        if (k == "constant")
            kind = DelayKind::constant;
        else if (k == "linear")
            kind = DelayKind::linear;
        else if (k == "parabolic")
            kind = DelayKind::parabolic;
        else
            r.fail(r.line_of("delay"), "'delay' must be constant, linear or parabolic");
        if (kind == DelayKind::constant && (nu != 0.0 || nu_dot != 0.0))
            r.fail(r.line_of("delay"), "constant delay requires nu = nu_dot = 0");
        if (kind == DelayKind::linear && nu_dot != 0.0)
            r.fail(r.line_of("delay"), "linear delay requires nu_dot = 0");
    }
    sc.delay = {kind, theta, nu, nu_dot};

    if (r.has("snr_db") && (r.has("snr1_db") || r.has("snr2_db")))
        r.fail(r.line_of("snr_db"), "'snr_db' cannot be combined with 'snr1_db'/'snr2_db'");
    double snr = sc.snr1_db;
    r.number("snr_db", snr, snr_ok, "must be a number or inf");
    sc.snr1_db = sc.snr2_db = snr;
    r.number("snr1_db", sc.snr1_db, snr_ok, "must be a number or inf");
    r.number("snr2_db", sc.snr2_db, snr_ok, "must be a number or inf");

    if (r.has("k") && (r.has("k1") || r.has("k2")))
        r.fail(r.line_of("k"), "'k' cannot be combined with 'k1'/'k2'");
    double k = est.carrier.k1;
    r.number("k", k, finite_pos, "must be finite and > 0");
    est.carrier = {k, k};
    r.number("k1", est.carrier.k1, finite_pos, "must be finite and > 0");
    r.number("k2", est.carrier.k2, finite_pos, "must be finite and > 0");

    if (r.has("g") && (r.has("g_i") || r.has("g_q")))
        r.fail(r.line_of("g"), "'g' cannot be combined with 'g_i'/'g_q'");
    double g = est.detector.g_i;
    r.number("g", g, finite_pos, "must be finite and > 0");
    est.detector = {g, g};
    r.number("g_i", est.detector.g_i, finite_pos, "must be finite and > 0");
    r.number("g_q", est.detector.g_q, finite_pos, "must be finite and > 0");
    r.number("norm_floor", est.norm_floor, finite_pos, "must be finite and > 0");

    r.integer("lagrange_order", est.lagrange_order, [](long long v) { return v >= 1; }, "must be >= 1");
    r.number("lagrange_mu", est.lagrange_mu, finite_pos, "must be finite and > 0");
    r.integer("sinc_taps", est.sinc_taps, [](long long v) { return v >= 3 && v % 2 == 1; }, "must be odd and >= 3");
    r.number("sinc_mu", est.sinc_mu, finite_pos, "must be finite and > 0");
    r.integer("quad_taps", est.quad_taps, [](long long v) { return v >= 3 && v % 2 == 1; }, "must be odd and >= 3");
    r.integer("quad_ma_len", est.quad_ma_len, [](long long v) { return v >= 0; }, "must be >= 0");

    r.number("settle", cfg.settle, finite_nonneg, "must be finite and >= 0");
    r.number("converge_tol", cfg.converge_tol, finite_pos, "must be finite and > 0");

    r.check_unused();

    if (sc.fs < 20.0 * sc.f1)
        r.fail(r.line_of("fs") ? r.line_of("fs") : r.line_of("f1"), "fs must be at least 20 * f1");
    if (sc.sample_count() == 0)
        r.fail(r.line_of("duration"), "duration shorter than one sample");
    if (!(cfg.settle < sc.duration))
        r.fail(r.line_of("settle") ? r.line_of("settle") : r.line_of("duration"), "settle must be < duration");
    try {
        sc.validate();
    } catch (const ConfigError& e) {
        r.fail(0, e.what());
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError(path + ": cannot open configuration file");
    return parse_config(in, path);
}

} // namespace tde
