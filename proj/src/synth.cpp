#include "gwf/synth.hpp"

#include <cmath>
#include <numbers>

#include "gwf/errors.hpp"

namespace gwf::synth {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform() { return double(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do u1 = uniform();
    while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::array<double, 24> SynthConfig::default_diurnal() {
    std::array<double, 24> d{-0.80, -0.85, -0.90, -0.90, -0.90, -0.85, -0.80, -0.60, -0.10, 0.60, 1.10, 1.35,
                             1.45,  1.50,  1.50,  1.45,  1.30,  0.90,  0.30,  -0.20, -0.50, -0.65, -0.70, -0.75};
    for (auto& x : d) x *= 1.5;
    return d;
}

SynthConfig SynthConfig::noiseless(int days) {
    SynthConfig c;
    c.days = days;
    c.friction = 1.0;
    c.friction_angle_deg = 0.0;
    c.diurnal.fill(0.0);
    c.diurnal_seasonal_swing = 0.0;
    c.noise_scale = 0.0;
    c.direction_noise_deg = 0.0;
    c.height_noise_m = 0.0;
    c.missing_fraction = 0.0;
    return c;
}

void SynthConfig::validate() const {
    std::vector<std::string> bad;
    if (n_stations < 3) bad.push_back("synth: need at least 3 stations");
    if (!(domain_km > 0)) bad.push_back("synth: domain_km must be positive");
    if (days < 1) bad.push_back("synth: days must be at least 1");
    if (!(friction > 0 && friction <= 1)) bad.push_back("synth: friction must lie in (0, 1]");
    if (driving_lag_hours < 0) bad.push_back("synth: driving_lag_hours must be >= 0");
    if (std::abs(center_latitude) < 5 || std::abs(center_latitude) > 85)
        bad.push_back("synth: center_latitude must satisfy 5 <= |lat| <= 85");
    for (auto [v, name] : {std::pair{a0_innovation, "a0_innovation"}, {gradient_innovation, "gradient_innovation"},
                           {noise_scale, "noise_scale"}, {direction_noise_deg, "direction_noise_deg"},
                           {temp_noise, "temp_noise"}, {height_noise_m, "height_noise_m"},
                           {temp_station_spread, "temp_station_spread"}})
        if (!(v >= 0)) bad.push_back(std::string("synth: ") + name + " must be >= 0");
    for (auto [v, name] : {std::pair{a0_phi, "a0_phi"}, {gradient_phi, "gradient_phi"}, {noise_phi, "noise_phi"}})
        if (!(std::abs(v) < 1)) bad.push_back(std::string("synth: ") + name + " must lie in (-1, 1)");
    if (!(noise_common >= 0 && noise_common <= 1)) bad.push_back("synth: noise_common must lie in [0, 1]");
    if (!(missing_fraction >= 0 && missing_fraction < 1)) bad.push_back("synth: missing_fraction must lie in [0, 1)");
    if (!(elevation_max >= elevation_min)) bad.push_back("synth: elevation_max below elevation_min");
    if (!bad.empty()) throw ConfigError(bad);
}

SynthOutput generate(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const geostrophy::PhysicalConstants pc{};
    const std::size_t ns = cfg.n_stations;
    const std::size_t nh = std::size_t(cfg.days) * 24;

    // Stations scattered over a square domain, placed through the inverse
    // of the estimator's projection.
    std::vector<StationMeta> metas(ns);
    const double half = 500.0 * cfg.domain_km;
    const double lat0 = cfg.center_latitude * kDeg;
    for (std::size_t i = 0; i < ns; ++i) {
        const double x = (2 * rng.uniform() - 1) * half;
        const double y = (2 * rng.uniform() - 1) * half;
        metas[i].id = "ST" + std::string(i < 9 ? "0" : "") + std::to_string(i + 1);
        metas[i].latitude = cfg.center_latitude + y / geostrophy::kEarthRadius / kDeg;
        metas[i].longitude = cfg.center_longitude + x / (geostrophy::kEarthRadius * std::cos(lat0)) / kDeg;
        metas[i].elevation = cfg.elevation_min + (cfg.elevation_max - cfg.elevation_min) * rng.uniform();
    }
    const auto origin = geostrophy::centroid(metas);
    const auto xy = geostrophy::project_local(metas, origin);
    const double f = geostrophy::coriolis(origin.latitude, pc);

    std::vector<double> temp_offset(ns), diurnal_scale(ns);
    double off_mean = 0;
    for (std::size_t i = 0; i < ns; ++i) {
        temp_offset[i] = cfg.temp_station_spread * rng.normal();
        off_mean += temp_offset[i];
        diurnal_scale[i] = 0.8 + 0.4 * rng.uniform();
    }
    off_mean /= double(ns);
    for (auto& o : temp_offset) o -= off_mean;

    // Gradient process, run from a burn-in so the driving lag reaches back.
    const std::size_t lag = std::size_t(cfg.driving_lag_hours);
    const std::size_t burn = 500 + lag;
    std::vector<double> a1(nh + burn), a2(nh + burn), a0(nh + burn);
    const double gsd = cfg.gradient_innovation, asd = cfg.a0_innovation;
    double g1 = 0, g2 = 0, z0 = 0;
    for (std::size_t k = 0; k < nh + burn; ++k) {
        g1 = cfg.gradient_phi * g1 + gsd * rng.normal();
        g2 = cfg.gradient_phi * g2 + gsd * rng.normal();
        z0 = cfg.a0_phi * z0 + asd * rng.normal();
        a1[k] = cfg.gradient_mean_x + g1;
        a2[k] = cfg.gradient_mean_y + g2;
        a0[k] = cfg.a0_mean + z0;
    }
    auto geo_at = [&](std::size_t k) {
        geostrophy::PlaneFit p;
        p.a1 = a1[k];
        p.a2 = a2[k];
        return geostrophy::geostrophic_from_plane(p, f, pc);
    };

    SynthOutput out;
    out.truth.start = cfg.start;
    out.truth.samples.resize(nh);
    std::vector<StationSeries> series(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        series[i].meta = metas[i];
        series[i].start = cfg.start;
        series[i].resize(nh);
    }

    const double cr = std::cos(cfg.friction_angle_deg * kDeg), sr = std::sin(cfg.friction_angle_deg * kDeg);
    const double common = std::sqrt(cfg.noise_common), own = std::sqrt(1.0 - cfg.noise_common);
    std::vector<double> noise(ns, 0.0);
    double temp_ar = 0.0;
    std::vector<double> temps(ns);
    for (std::size_t t = 0; t < nh; ++t) {
        const std::size_t k = t + burn;
        const UtcHour now = cfg.start + std::int64_t(t);
        const auto g = geo_at(k);
        out.truth.samples[t] = geostrophy::GeoWindSample::from_components(now, g.u, g.v);
        out.truth.samples[t].n_stations = ns;
        out.truth.samples[t].rms_residual = 0.0;

        const int hod = hour_of_day(now, cfg.tz);
        const double year_phase = 2 * std::numbers::pi * double(local_day(now, cfg.tz) % 365) / 365.0;
        const double season = std::cos(year_phase - 3.3);  // warmest in mid July
        const double t_mean = cfg.temp_mean_c + cfg.temp_seasonal_amp * season +
                              cfg.temp_diurnal_amp * std::sin(2 * std::numbers::pi * (hod - 9) / 24.0);
        temp_ar = 0.95 * temp_ar + cfg.temp_noise * rng.normal();

        double tsum = 0;
        for (std::size_t i = 0; i < ns; ++i) {
            temps[i] = t_mean + temp_ar + temp_offset[i];
            tsum += temps[i] + geostrophy::kCelsiusToKelvin;
        }
        const double t_bar = tsum / double(ns);

        const auto d = geo_at(k - lag);
        const double us = cfg.friction * (cr * d.u - sr * d.v);
        const double vs = cfg.friction * (sr * d.u + cr * d.v);
        const double base_speed = std::hypot(us, vs);
        const double base_dir = std::atan2(vs, us);
        const double shared = rng.normal();
        const double amp = 1.0 + cfg.diurnal_seasonal_swing * season;
        for (std::size_t i = 0; i < ns; ++i) {
            auto& s = series[i];
            noise[i] = cfg.noise_phi * noise[i] + cfg.noise_scale * (common * shared + own * rng.normal());
            const double speed = base_speed + amp * diurnal_scale[i] * cfg.diurnal[std::size_t(hod)] + noise[i];
            s.speed[t] = std::max(0.0, speed);
            s.direction[t] = wrap_two_pi(base_dir + cfg.direction_noise_deg * kDeg * rng.normal());
            s.temperature[t] = temps[i];
            const double z = a0[k] + a1[k] * xy[i].x + a2[k] * xy[i].y + cfg.height_noise_m * rng.normal();
            s.pressure[t] = pc.p_ref * std::exp(pc.g0 * (z - metas[i].elevation) / (pc.gas_constant * t_bar));
            if (cfg.missing_fraction > 0) {
                if (rng.uniform() < cfg.missing_fraction) s.speed[t] = s.direction[t] = kMissing;
                if (rng.uniform() < cfg.missing_fraction) s.temperature[t] = kMissing;
                if (rng.uniform() < cfg.missing_fraction) s.pressure[t] = kMissing;
            }
        }
    }
    out.network = make_network(std::move(series));
    return out;
}

}  // namespace gwf::synth
