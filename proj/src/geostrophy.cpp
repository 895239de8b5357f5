#include "gwf/geostrophy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <numbers>

#include "gwf/csv.hpp"
#include "gwf/errors.hpp"

namespace gwf::geostrophy {

void PhysicalConstants::validate() const {
    if (!(g0 > 0) || !(gas_constant > 0) || !(omega > 0) || !(p_ref > 0))
        throw InvalidInput("physical constants must be strictly positive");
}

GeoWindSample GeoWindSample::from_components(UtcHour t, double u, double v) {
    GeoWindSample s;
    s.time = t;
    s.u_g = u;
    s.v_g = v;
    s.w_g = std::hypot(u, v);
    s.theta_g = std::atan2(v, u);
    if (s.theta_g == -std::numbers::pi) s.theta_g = std::numbers::pi;
    return s;
}

const GeoWindSample* GeoWindSeries::at(UtcHour t) const {
    const std::int64_t i = t - start;
    if (i < 0 || i >= std::int64_t(samples.size())) return nullptr;
    return &samples[std::size_t(i)];
}

MeanRemovalPolicy parse_mean_removal(const std::string& s) {
    if (s == "none") return MeanRemovalPolicy::None;
    if (s == "whole_record") return MeanRemovalPolicy::PerStationWholeRecordMean;
    if (s == "monthly") return MeanRemovalPolicy::PerStationMonthlyMean;
    throw InvalidInput("unknown mean-removal policy '" + s + "' (none|whole_record|monthly)");
}

std::string to_string(MeanRemovalPolicy p) {
    switch (p) {
        case MeanRemovalPolicy::None: return "none";
        case MeanRemovalPolicy::PerStationWholeRecordMean: return "whole_record";
        case MeanRemovalPolicy::PerStationMonthlyMean: return "monthly";
    }
    return "?";
}

double reduce_to_reference(double p_hpa, double z_station, double t_bar_kelvin,
                           const PhysicalConstants& c) {
    if (!(p_hpa > 0)) throw InvalidInput("pressure must be positive");
    if (!(t_bar_kelvin > 0)) throw InvalidInput("temperature must be positive (kelvin)");
    return z_station + (c.gas_constant * t_bar_kelvin / c.g0) * std::log(p_hpa / c.p_ref);
}

LatLon centroid(std::span<const StationMeta> stations) {
    if (stations.empty()) throw InvalidInput("centroid of an empty station set");
    double lat = 0, lon = 0;
    for (const auto& s : stations) {
        lat += s.latitude;
        lon += s.longitude;
    }
    return {lat / double(stations.size()), lon / double(stations.size())};
}

std::vector<LocalPoint> project_local(std::span<const StationMeta> stations, LatLon origin) {
    if (stations.empty()) return {};
    double lat_lo = 90, lat_hi = -90, lon_lo = 180, lon_hi = -180;
    for (const auto& s : stations) {
        s.validate();
        lat_lo = std::min(lat_lo, s.latitude);
        lat_hi = std::max(lat_hi, s.latitude);
        lon_lo = std::min(lon_lo, s.longitude);
        lon_hi = std::max(lon_hi, s.longitude);
    }
    if (origin.latitude < lat_lo || origin.latitude > lat_hi || origin.longitude < lon_lo ||
        origin.longitude > lon_hi)
        throw InvalidInput("projection origin lies outside the station bounding box");

    constexpr double deg = std::numbers::pi / 180.0;
    const double coslat = std::cos(origin.latitude * deg);
    std::vector<LocalPoint> out;
    out.reserve(stations.size());
    for (const auto& s : stations) {
        out.push_back({kEarthRadius * coslat * (s.longitude - origin.longitude) * deg,
                       kEarthRadius * (s.latitude - origin.latitude) * deg});
    }
    return out;
}

PlaneFit fit_plane(std::span<const PlanePoint> points) {
    const auto n = Eigen::Index(points.size());
    if (n < 3) throw RankDeficient("plane fit needs at least 3 points");

    // Centred, scaled coordinates keep the design well conditioned.
    double mx = 0, my = 0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= double(n);
    my /= double(n);
    double spread = 0;
    for (const auto& p : points) spread += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
    spread = std::sqrt(spread / double(n));
    if (!(spread > 0)) throw RankDeficient("plane fit points are coincident");

    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = points[std::size_t(i)];
        a(i, 0) = 1.0;
        a(i, 1) = (p.x - mx) / spread;
        a(i, 2) = (p.y - my) / spread;
        z(i) = p.z;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-9);
    if (qr.rank() < 3) throw RankDeficient("plane fit points are collinear");
    const Eigen::Vector3d b = qr.solve(z);

    PlaneFit fit;
    fit.a1 = b(1) / spread;
    fit.a2 = b(2) / spread;
    fit.a0 = b(0) - fit.a1 * mx - fit.a2 * my;
    fit.rms_residual = std::sqrt((a * b - z).squaredNorm() / double(n));
    fit.n_stations = std::size_t(n);
    return fit;
}

double coriolis(double latitude_deg, const PhysicalConstants& c) {
    if (!(std::abs(latitude_deg) >= kMinLatitude) || std::abs(latitude_deg) > 90.0)
        throw UnsupportedLatitude("geostrophic balance is not used within 5 degrees of the equator");
    return 2.0 * c.omega * std::sin(latitude_deg * std::numbers::pi / 180.0);
}

GeoVector geostrophic_from_plane(const PlaneFit& fit, double f, const PhysicalConstants& c) {
    if (f == 0.0) throw InvalidInput("Coriolis parameter is zero");
    const double k = c.g0 / f;
    return {-k * fit.a2, k * fit.a1};
}

GeoWindSeries estimate_series(const Network& network, const EstimationOptions& options) {
    const auto& c = options.constants;
    c.validate();
    const std::size_t ns = network.stations.size();
    const std::size_t nh = network.hours;

    std::vector<StationMeta> metas;
    for (const auto& s : network.stations) metas.push_back(s.meta);

    GeoWindSeries out;
    out.start = network.start;
    out.samples.resize(nh);
    for (std::size_t t = 0; t < nh; ++t) out.samples[t].time = network.start + std::int64_t(t);
    if (ns == 0) return out;

    const LatLon origin = centroid(metas);
    const auto xy = project_local(metas, origin);
    const double f = coriolis(origin.latitude, c);

    // Height of the reference surface above each usable barometer.
    std::vector<std::vector<double>> z(ns, std::vector<double>(nh, kMissing));
    for (std::size_t t = 0; t < nh; ++t) {
        double tsum = 0;
        std::size_t tn = 0;
        for (const auto& s : network.stations) {
            if (!is_missing(s.pressure[t]) && !is_missing(s.temperature[t]) && s.pressure[t] > 0) {
                tsum += s.temperature[t] + kCelsiusToKelvin;
                ++tn;
            }
        }
        if (tn == 0) continue;
        const double t_bar = tsum / double(tn);
        if (!(t_bar > 0)) continue;
        for (std::size_t i = 0; i < ns; ++i) {
            const auto& s = network.stations[i];
            if (!is_missing(s.pressure[t]) && !is_missing(s.temperature[t]) && s.pressure[t] > 0)
                z[i][t] = reduce_to_reference(s.pressure[t], s.meta.elevation, t_bar, c);
        }
    }

    if (options.policy != MeanRemovalPolicy::None) {
        auto group_of = [&](std::size_t t) -> std::int64_t {
            if (options.policy == MeanRemovalPolicy::PerStationWholeRecordMean) return 0;
            const CivilTime ct =
                civil_from_seconds((network.start.index + std::int64_t(t) + options.tz.utc_offset_hours) * 3600);
            return std::int64_t(ct.year) * 12 + ct.month;
        };
        for (std::size_t i = 0; i < ns; ++i) {
            std::map<std::int64_t, std::pair<double, std::size_t>> sums;
            for (std::size_t t = 0; t < nh; ++t) {
                if (is_missing(z[i][t])) continue;
                auto& [sum, cnt] = sums[group_of(t)];
                sum += z[i][t];
                ++cnt;
            }
            for (std::size_t t = 0; t < nh; ++t) {
                if (is_missing(z[i][t])) continue;
                const auto& [sum, cnt] = sums[group_of(t)];
                z[i][t] -= sum / double(cnt);
            }
        }
    }

    std::vector<PlanePoint> pts;
    for (std::size_t t = 0; t < nh; ++t) {
        pts.clear();
        for (std::size_t i = 0; i < ns; ++i)
            if (!is_missing(z[i][t])) pts.push_back({xy[i].x, xy[i].y, z[i][t]});
        auto& sample = out.samples[t];
        sample.n_stations = pts.size();
        if (pts.size() < std::max<std::size_t>(3, options.min_stations)) continue;
        try {
            const PlaneFit fit = fit_plane(pts);
            const GeoVector g = geostrophic_from_plane(fit, f, c);
            sample = GeoWindSample::from_components(sample.time, g.u, g.v);
            sample.n_stations = fit.n_stations;
            sample.rms_residual = fit.rms_residual;
        } catch (const RankDeficient&) {
            // degenerate layout at this hour: leave the sample missing
        }
    }
    return out;
}

void write_csv(const GeoWindSeries& series, const std::string& path) {
    std::string s = "iso8601_utc_hour,u_g,v_g,w_g,theta_g_rad,n_stations,rms_residual\n";
    for (const auto& g : series.samples) {
        s += csv::join({to_iso8601(g.time), csv::format_double(g.u_g), csv::format_double(g.v_g),
                        csv::format_double(g.w_g), csv::format_double(g.theta_g),
                        std::to_string(g.n_stations), csv::format_double(g.rms_residual)});
        s += '\n';
    }
    csv::write_atomic(path, s);
}

GeoWindSeries read_csv(const std::string& path) {
    const csv::Table t = csv::read_table(path);
    const std::size_t ct = t.column("iso8601_utc_hour"), cu = t.column("u_g"), cv = t.column("v_g"),
                      cn = t.column("n_stations"), cr = t.column("rms_residual");
    std::vector<GeoWindSample> rows;
    for (const auto& r : t.rows) {
        if (r.fields.size() != t.header.size()) throw LoadError("wrong field count", r.line);
        const auto h = parse_iso8601_hour(r.fields[ct]);
        if (!h) throw LoadError("unparseable timestamp '" + r.fields[ct] + "'", r.line);
        const auto u = csv::parse_double(r.fields[cu]);
        const auto v = csv::parse_double(r.fields[cv]);
        const auto rms = csv::parse_double(r.fields[cr]);
        if (!u || !v || !rms) throw LoadError("unparseable number", r.line);
        GeoWindSample g;
        if (!std::isnan(*u) && !std::isnan(*v)) g = GeoWindSample::from_components(*h, *u, *v);
        g.time = *h;
        g.n_stations = std::size_t(std::stoul(r.fields[cn]));
        g.rms_residual = *rms;
        rows.push_back(g);
    }
    GeoWindSeries out;
    if (rows.empty()) return out;
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
    out.start = rows.front().time;
    out.samples.resize(std::size_t(rows.back().time - out.start) + 1);
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i].time = out.start + std::int64_t(i);
    for (const auto& g : rows) out.samples[std::size_t(g.time - out.start)] = g;
    return out;
}

}  // namespace gwf::geostrophy
