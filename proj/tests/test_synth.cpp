#include <cmath>

#include "doctest.h"
#include "gwf/errors.hpp"
#include "gwf/geostrophy.hpp"
#include "gwf/synth.hpp"

using namespace gwf;
using namespace gwf::synth;

namespace {

geostrophy::GeoWindSeries estimate(const SynthOutput& out) {
    geostrophy::EstimationOptions opt;
    opt.policy = geostrophy::MeanRemovalPolicy::None;
    return geostrophy::estimate_series(out.network, opt);
}

bool same_bits(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST_CASE("rng is reproducible and roughly standard") {
    Rng a(7), b(7), c(8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        differs = differs || x != c.next();
    }
    CHECK(differs);

    Rng r(123);
    const int n = 200000;
    double s = 0, s2 = 0, umin = 1, umax = 0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
        const double u = r.uniform();
        umin = std::min(umin, u);
        umax = std::max(umax, u);
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
    CHECK(umin >= 0.0);
    CHECK(umax < 1.0);
}

TEST_CASE("noiseless network reproduces the generating geostrophic wind") {
    const auto out = generate(SynthConfig::noiseless(30));
    REQUIRE(out.network.stations.size() == 12);
    REQUIRE(out.network.hours == 30 * 24);
    const auto est = estimate(out);
    REQUIRE(est.samples.size() == out.truth.samples.size());
    double worst = 0;
    for (std::size_t t = 0; t < est.samples.size(); ++t) {
        REQUIRE_FALSE(is_missing(est.samples[t].u_g));
        worst = std::max({worst, std::abs(est.samples[t].u_g - out.truth.samples[t].u_g),
                          std::abs(est.samples[t].v_g - out.truth.samples[t].v_g)});
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("one metre of height noise keeps geostrophic speed error small") {
    SynthConfig cfg;
    cfg.height_noise_m = 1.0;
    const auto out = generate(cfg);
    const auto est = estimate(out);
    double se = 0;
    for (std::size_t t = 0; t < est.samples.size(); ++t) {
        const double e = est.samples[t].w_g - out.truth.samples[t].w_g;
        se += e * e;
    }
    const double rmse = std::sqrt(se / double(est.samples.size()));
    MESSAGE("w_g rmse " << rmse);
    CHECK(rmse < 0.5);
    CHECK(rmse > 0.0);
}

TEST_CASE("surface speed is the lagged geostrophic speed scaled by friction") {
    auto cfg = SynthConfig::noiseless(10);
    cfg.friction = 0.5;
    cfg.friction_angle_deg = 25.0;
    cfg.driving_lag_hours = 4;
    const auto out = generate(cfg);
    for (const auto& s : out.network.stations)
        for (std::size_t t = 4; t < s.size(); ++t) {
            const auto& g = out.truth.samples[t - 4];
            REQUIRE(s.speed[t] == doctest::Approx(0.5 * g.w_g).epsilon(1e-12));
            const double turned = wrap_two_pi(g.theta_g + 25.0 * std::numbers::pi / 180.0);
            const double d = std::remainder(s.direction[t] - turned, 2 * std::numbers::pi);
            REQUIRE(std::abs(d) < 1e-9);
        }
}

TEST_CASE("diurnal shape is added by local hour") {
    auto cfg = SynthConfig::noiseless(60);
    cfg.diurnal = SynthConfig::default_diurnal();
    auto flat = cfg;
    flat.diurnal.fill(0.0);
    const auto a = generate(cfg), b = generate(flat);
    // Mean excess by local hour follows the configured shape up to a station scale in [0.8, 1.2].
    for (const auto& s : a.network.stations) {
        const auto& f = b.network.station(s.meta.id);
        std::array<double, 24> sum{};
        std::array<int, 24> n{};
        for (std::size_t t = 0; t < s.size(); ++t) {
            const int h = hour_of_day(s.start + std::int64_t(t), cfg.tz);
            if (s.speed[t] > 0 && f.speed[t] + cfg.diurnal[h] * 1.3 > 0) {
                sum[h] += s.speed[t] - f.speed[t];
                ++n[h];
            }
        }
        for (int h = 0; h < 24; ++h) {
            if (n[h] < 40) continue;
            const double ratio = sum[h] / n[h] / cfg.diurnal[h];
            CHECK(ratio > 0.8 * 0.69);
            CHECK(ratio < 1.2 * 1.31);
        }
    }
}

TEST_CASE("same seed, same bits; different seed, different data") {
    SynthConfig cfg;
    cfg.days = 5;
    cfg.missing_fraction = 0.05;
    cfg.height_noise_m = 0.5;
    const auto a = generate(cfg), b = generate(cfg);
    for (std::size_t i = 0; i < a.network.stations.size(); ++i) {
        const auto &x = a.network.stations[i], &y = b.network.stations[i];
        CHECK(x.meta.latitude == y.meta.latitude);
        for (std::size_t t = 0; t < x.size(); ++t) {
            REQUIRE(same_bits(x.speed[t], y.speed[t]));
            REQUIRE(same_bits(x.direction[t], y.direction[t]));
            REQUIRE(same_bits(x.temperature[t], y.temperature[t]));
            REQUIRE(same_bits(x.pressure[t], y.pressure[t]));
        }
    }
    cfg.seed = 2;
    const auto c = generate(cfg);
    CHECK(c.network.stations[0].meta.latitude != a.network.stations[0].meta.latitude);
}

TEST_CASE("missing fraction produces gaps at about the requested rate") {
    SynthConfig cfg;
    cfg.days = 40;
    cfg.missing_fraction = 0.1;
    const auto out = generate(cfg);
    std::size_t gaps = 0, total = 0;
    for (const auto& s : out.network.stations)
        for (double p : s.pressure) {
            gaps += is_missing(p);
            ++total;
        }
    const double rate = double(gaps) / double(total);
    CHECK(rate > 0.09);
    CHECK(rate < 0.11);
}

TEST_CASE("outputs are physically plausible") {
    const auto out = generate(SynthConfig{});
    for (const auto& s : out.network.stations)
        for (std::size_t t = 0; t < s.size(); ++t) {
            REQUIRE(s.speed[t] >= 0.0);
            REQUIRE(s.direction[t] >= 0.0);
            REQUIRE(s.direction[t] < 2 * std::numbers::pi);
            REQUIRE(s.pressure[t] > 800.0);
            REQUIRE(s.pressure[t] < 1000.0);
        }
}

TEST_CASE("invalid configurations list every problem") {
    SynthConfig cfg;
    cfg.n_stations = 2;
    cfg.friction = 0.0;
    cfg.days = 0;
    cfg.noise_phi = 1.0;
    try {
        cfg.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.violations().size() == 4);
    }
    CHECK_THROWS_AS(generate(cfg), ConfigError);
}
