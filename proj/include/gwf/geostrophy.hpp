#pragma once

#include <span>
#include <string>
#include <vector>

#include "gwf/station.hpp"
#include "gwf/time.hpp"

namespace gwf::geostrophy {

struct PhysicalConstants {
    double g0 = 9.80665;        // m s^-2
    double gas_constant = 287;  // J K^-1 kg^-1, dry air
    double omega = 7.2921159e-5;  // rad s^-1
    double p_ref = 850.0;       // hPa

    void validate() const;
};

inline constexpr double kEarthRadius = 6.371e6;  // m
inline constexpr double kMinLatitude = 5.0;      // degrees
inline constexpr double kCelsiusToKelvin = 273.15;

struct LatLon {
    double latitude;
    double longitude;
};

struct LocalPoint {
    double x;  // m east of origin
    double y;  // m north of origin
};

struct PlanePoint {
    double x;
    double y;
    double z;
};

/// Z(x, y) = a0 + a1 x + a2 y
struct PlaneFit {
    double a0 = 0.0;
    double a1 = 0.0;  // dZ/dx
    double a2 = 0.0;  // dZ/dy
    double rms_residual = 0.0;
    std::size_t n_stations = 0;

    double evaluate(double x, double y) const { return a0 + a1 * x + a2 * y; }
};

struct GeoVector {
    double u;  // m/s eastward
    double v;  // m/s northward
};

struct GeoWindSample {
    UtcHour time{};
    double u_g = kMissing;
    double v_g = kMissing;
    double w_g = kMissing;
    double theta_g = kMissing;  // atan2(v_g, u_g) in (-pi, pi]
    std::size_t n_stations = 0;
    double rms_residual = kMissing;

    bool valid() const { return !is_missing(u_g); }
    static GeoWindSample from_components(UtcHour t, double u, double v);
};

struct GeoWindSeries {
    UtcHour start{};
    std::vector<GeoWindSample> samples;

    std::size_t size() const { return samples.size(); }
    const GeoWindSample* at(UtcHour t) const;
};

enum class MeanRemovalPolicy {
    None,
    PerStationWholeRecordMean,
    PerStationMonthlyMean,
};

MeanRemovalPolicy parse_mean_removal(const std::string& s);
std::string to_string(MeanRemovalPolicy p);

struct EstimationOptions {
    PhysicalConstants constants{};
    MeanRemovalPolicy policy = MeanRemovalPolicy::PerStationMonthlyMean;
    TimeZone tz{};            // month boundaries for the monthly policy
    std::size_t min_stations = 3;
};

/// Geopotential height (m) of the p_ref surface above a barometer at height
/// `z_station` reading `p_hpa`, for layer-mean temperature `t_bar_kelvin`.
double reduce_to_reference(double p_hpa, double z_station, double t_bar_kelvin,
                           const PhysicalConstants& c);

/// Equirectangular projection about `origin`. The origin must lie within the
/// stations' bounding box.
std::vector<LocalPoint> project_local(std::span<const StationMeta> stations, LatLon origin);

LatLon centroid(std::span<const StationMeta> stations);

/// Least-squares plane through the points. Throws RankDeficient when fewer
/// than three points are given or the points are collinear.
PlaneFit fit_plane(std::span<const PlanePoint> points);

/// f = 2 omega sin(latitude); |latitude| must be at least 5 degrees.
double coriolis(double latitude_deg, const PhysicalConstants& c);

GeoVector geostrophic_from_plane(const PlaneFit& fit, double f, const PhysicalConstants& c);

/// Hourly geostrophic wind of the whole network. Hours with fewer than
/// `min_stations` usable barometers (or a degenerate layout) are returned
/// as missing samples.
GeoWindSeries estimate_series(const Network& network, const EstimationOptions& options = {});

void write_csv(const GeoWindSeries& series, const std::string& path);
GeoWindSeries read_csv(const std::string& path);

}  // namespace gwf::geostrophy
