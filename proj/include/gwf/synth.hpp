#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gwf/geostrophy.hpp"
#include "gwf/station.hpp"
#include "gwf/time.hpp"

namespace gwf::synth {

/// mt19937_64 with explicit uniform and normal transforms; the standard
/// distributions are implementation-defined, these are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    double uniform();  // [0, 1)
    double normal();   // Box-Muller, one draw per call

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct SynthConfig {
    std::uint64_t seed = 1;
    std::size_t n_stations = 12;
    double domain_km = 400.0;
    double center_latitude = 33.6;
    double center_longitude = -100.8;
    double elevation_min = 600.0;
    double elevation_max = 1000.0;
    UtcHour start = hour_from_civil(2008, 1, 1);
    int days = 30;
    TimeZone tz{-6};

    // Height plane Z = a0 + a1 x + a2 y at the reference pressure.
    double a0_mean = 1500.0;
    double a0_phi = 0.99;
    double a0_innovation = 2.0;      // m per step
    double gradient_phi = 0.98;      // hourly AR(1) coefficient of a1 and a2
    double gradient_innovation = 1.2e-5;
    double gradient_mean_x = 0.0;
    double gradient_mean_y = 0.0;

    // Surface wind
    double friction = 0.5;            // kappa in (0, 1]
    double friction_angle_deg = 20.0; // turning toward low pressure
    int driving_lag_hours = 1;
    std::array<double, 24> diurnal = default_diurnal();  // added speed by local hour, m/s
    double diurnal_seasonal_swing = 0.3;  // relative amplitude change over the year
    double noise_phi = 0.95;
    double noise_scale = 0.6;         // AR innovation standard deviation, m/s
    double noise_common = 0.6;        // share of the innovation common to all stations
    double direction_noise_deg = 10.0;

    // Thermodynamics
    double temp_mean_c = 16.0;
    double temp_seasonal_amp = 10.0;
    double temp_diurnal_amp = 7.0;
    double temp_noise = 0.3;
    double temp_station_spread = 1.5;

    double height_noise_m = 0.0;      // per-station, per-hour noise on Z
    double missing_fraction = 0.0;    // independent hourly gaps per station and field

    /// The default non-sinusoidal diurnal shape: calm nights, a sharp
    /// late-morning rise and an afternoon maximum.
    static std::array<double, 24> default_diurnal();
    /// A setup with no noise, no friction turning and no diurnal cycle.
    static SynthConfig noiseless(int days = 30);

    /// Throws ConfigError listing each violated constraint.
    void validate() const;
};

struct SynthOutput {
    Network network;
    geostrophy::GeoWindSeries truth;
};

SynthOutput generate(const SynthConfig& config);

}  // namespace gwf::synth
