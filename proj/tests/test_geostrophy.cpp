#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gwf/errors.hpp"
#include "gwf/geostrophy.hpp"

using namespace gwf;
using namespace gwf::geostrophy;

namespace {

const PhysicalConstants kC{};

// Normal-equations oracle, independent of the QR path under test.
Eigen::Vector3d normal_equations_plane(const std::vector<PlanePoint>& pts) {
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atz = Eigen::Vector3d::Zero();
    for (const auto& p : pts) {
        const Eigen::Vector3d r(1.0, p.x, p.y);
        ata += r * r.transpose();
        atz += r * p.z;
    }
    return ata.fullPivLu().solve(atz);
}

std::vector<StationMeta> ring_network(std::size_t n, double lat0, double lon0, double radius_deg) {
    std::vector<StationMeta> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double ang = 2 * std::numbers::pi * double(i) / double(n) + 0.3 * double(i % 3);
        const double r = radius_deg * (0.4 + 0.6 * double((i * 7) % n) / double(n));
        out.push_back({"S" + std::to_string(i), lat0 + r * std::sin(ang), lon0 + r * std::cos(ang),
                       700.0 + 25.0 * double(i)});
    }
    return out;
}

}  // namespace

TEST_CASE("reduce_to_reference") {
    CHECK(reduce_to_reference(850, 1500, 280, kC) == 1500.0);
    CHECK(reduce_to_reference(850, 1500, 1.0, kC) == 1500.0);
    CHECK(reduce_to_reference(1000, 700, 290, kC) == doctest::Approx(2079.31408810346102).epsilon(1e-13));
    CHECK(reduce_to_reference(850 * std::exp(1.0), 0, kC.g0 / kC.gas_constant, kC) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(reduce_to_reference(0, 0, 280, kC), InvalidInput);
    CHECK_THROWS_AS(reduce_to_reference(900, 0, -3, kC), InvalidInput);
}

TEST_CASE("project_local") {
    const std::vector<StationMeta> s{{"a", 60, 10, 0}, {"b", 61, 11, 0}, {"c", 60, 11, 0}, {"d", 61, 10, 0}};
    const auto xy = project_local(s, {60, 10});
    CHECK(xy[0].x == 0.0);
    CHECK(xy[0].y == 0.0);
    CHECK(xy[3].y == doctest::Approx(111194.926644558737).epsilon(1e-14));
    CHECK(xy[2].x == doctest::Approx(55597.4633222793687).epsilon(1e-12));
    CHECK_THROWS_AS(project_local(s, {59, 10}), InvalidInput);
    const std::vector<StationMeta> bad{{"x", 95, 0, 0}};
    CHECK_THROWS_AS(project_local(bad, {95, 0}), InvalidInput);
}

TEST_CASE("fit_plane exact and degenerate") {
    std::vector<PlanePoint> pts;
    for (auto [x, y] : {std::pair{0.0, 0.0}, {10e3, 5e3}, {-30e3, 20e3}, {45e3, -12e3}, {7e3, 60e3}})
        pts.push_back({x, y, 1500 + 0.001 * x - 0.002 * y});
    const auto fit = fit_plane(pts);
    CHECK(fit.a0 == doctest::Approx(1500).epsilon(1e-12));
    CHECK(fit.a1 == doctest::Approx(0.001).epsilon(1e-10));
    CHECK(fit.a2 == doctest::Approx(-0.002).epsilon(1e-10));
    CHECK(fit.rms_residual < 1e-9 * 1500);
    CHECK(fit.n_stations == 5);

    for (auto& p : pts) p.z = 1420;
    const auto flat = fit_plane(pts);
    CHECK(flat.a0 == doctest::Approx(1420));
    CHECK(std::abs(flat.a1) < 1e-15);
    CHECK(std::abs(flat.a2) < 1e-15);

    std::vector<PlanePoint> line{{0, 0, 1}, {1e3, 2e3, 2}, {2e3, 4e3, 3}, {-5e3, -10e3, 0}};
    CHECK_THROWS_AS(fit_plane(line), RankDeficient);
    CHECK_THROWS_AS(fit_plane(std::vector<PlanePoint>{{0, 0, 1}, {1, 1, 1}}), RankDeficient);
}

TEST_CASE("fit_plane with noise matches the normal-equations oracle") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> pos(-150e3, 150e3);
    std::vector<PlanePoint> pts;
    for (int i = 0; i < 12; ++i) {
        const double x = pos(rng), y = pos(rng);
        pts.push_back({x, y, 1480 + 3e-5 * x + 2e-5 * y + noise(rng)});
    }
    const auto fit = fit_plane(pts);
    const Eigen::Vector3d ref = normal_equations_plane(pts);
    CHECK(fit.a0 == doctest::Approx(ref(0)).epsilon(1e-9));
    CHECK(fit.a1 == doctest::Approx(ref(1)).epsilon(1e-7));
    CHECK(fit.a2 == doctest::Approx(ref(2)).epsilon(1e-7));
    CHECK(std::abs(fit.a1 - 3e-5) < 2e-5);
    CHECK(std::abs(fit.a2 - 2e-5) < 2e-5);
}

TEST_CASE("coriolis") {
    CHECK(coriolis(90, kC) == doctest::Approx(1.45842318e-4).epsilon(1e-12));
    CHECK(coriolis(30, kC) == doctest::Approx(kC.omega).epsilon(1e-12));
    CHECK(coriolis(33.6, kC) == doctest::Approx(8.07079063032604464e-5).epsilon(1e-12));
    CHECK(coriolis(-45, kC) < 0);
    CHECK_THROWS_AS(coriolis(4.9, kC), UnsupportedLatitude);
    CHECK_THROWS_AS(coriolis(-2, kC), UnsupportedLatitude);
}

TEST_CASE("geostrophic_from_plane") {
    PlaneFit flat;
    const auto z = geostrophic_from_plane(flat, 1e-4, kC);
    CHECK(z.u == 0.0);
    CHECK(z.v == 0.0);
    PlaneFit f1;
    f1.a2 = 1e-4;
    const auto g1 = geostrophic_from_plane(f1, 1e-4, kC);
    CHECK(g1.u == doctest::Approx(-9.80665).epsilon(1e-14));
    CHECK(g1.v == 0.0);
    PlaneFit f2;
    f2.a1 = 1e-4;
    CHECK(geostrophic_from_plane(f2, 8.069e-5, kC).v == doctest::Approx(12.1534886603048705).epsilon(1e-13));
    CHECK_THROWS_AS(geostrophic_from_plane(f2, 0.0, kC), InvalidInput);
}

TEST_CASE("sign convention: height rising eastward gives southerly flow in the north") {
    PlaneFit f;
    f.a1 = 2e-5;
    CHECK(geostrophic_from_plane(f, coriolis(35, kC), kC).v > 0);
}

TEST_CASE("rotation, scale and offset properties") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(-100e3, 100e3), grad(-5e-5, 5e-5), off(-50, 50);
    const double f = coriolis(34, kC);
    for (int trial = 0; trial < 25; ++trial) {
        const double a1 = grad(rng), a2 = grad(rng);
        std::vector<PlanePoint> pts;
        for (int i = 0; i < 12; ++i) {
            const double x = pos(rng), y = pos(rng);
            pts.push_back({x, y, 1500 + a1 * x + a2 * y + 0.3 * std::sin(double(i))});
        }
        const auto base = geostrophic_from_plane(fit_plane(pts), f, kC);

        const double alpha = 0.1 + 0.2 * trial;
        const double c = std::cos(alpha), s = std::sin(alpha);
        std::vector<PlanePoint> rot;
        for (const auto& p : pts) rot.push_back({c * p.x - s * p.y, s * p.x + c * p.y, p.z});
        const auto r = geostrophic_from_plane(fit_plane(rot), f, kC);
        const double w = std::hypot(base.u, base.v);
        CHECK(std::abs(r.u - (c * base.u - s * base.v)) <= 1e-8 * w);
        CHECK(std::abs(r.v - (s * base.u + c * base.v)) <= 1e-8 * w);
        CHECK(std::hypot(r.u, r.v) == doctest::Approx(w).epsilon(1e-8));

        std::vector<PlanePoint> doubled;
        for (const auto& p : pts) doubled.push_back({p.x, p.y, 2 * (p.z - 1500)});
        const auto centred = geostrophic_from_plane(fit_plane(doubled), f, kC);
        CHECK(centred.u == doctest::Approx(2 * base.u).epsilon(1e-9));
        CHECK(centred.v == doctest::Approx(2 * base.v).epsilon(1e-9));

        const double k = off(rng);
        std::vector<PlanePoint> shifted;
        for (const auto& p : pts) shifted.push_back({p.x, p.y, p.z + k});
        const auto sh = geostrophic_from_plane(fit_plane(shifted), f, kC);
        CHECK(sh.u == doctest::Approx(base.u).epsilon(1e-8));
        CHECK(sh.v == doctest::Approx(base.v).epsilon(1e-8));
    }
}

namespace {

// Forward-construct a network whose reference-surface height anomaly is
// z_anom(x, y, t) plus a per-station constant.
Network synthetic_network(const std::vector<StationMeta>& metas, std::size_t hours,
                          const std::function<double(double, double, std::size_t)>& z_anom,
                          double station_offset = 0.0) {
    const auto origin = centroid(metas);
    const auto xy = project_local(metas, origin);
    std::vector<StationSeries> series;
    for (std::size_t i = 0; i < metas.size(); ++i) {
        StationSeries s;
        s.meta = metas[i];
        s.start = UtcHour{350000};
        s.resize(hours);
        for (std::size_t t = 0; t < hours; ++t) {
            s.temperature[t] = 15.0;
            s.speed[t] = 3.0;
            s.direction[t] = 1.0;
        }
        series.push_back(s);
    }
    for (std::size_t t = 0; t < hours; ++t) {
        const double t_bar = 15.0 + kCelsiusToKelvin;
        for (std::size_t i = 0; i < metas.size(); ++i) {
            const double z = 1500.0 + station_offset * double(i) + z_anom(xy[i].x, xy[i].y, t);
            series[i].pressure[t] =
                kC.p_ref * std::exp(kC.g0 * (z - metas[i].elevation) / (kC.gas_constant * t_bar));
        }
    }
    return make_network(series);
}

}  // namespace

TEST_CASE("estimate_series on forward-constructed fields") {
    const auto metas = ring_network(12, 33.6, -100.8, 1.2);
    const double f = coriolis(centroid(metas).latitude, kC);

    SUBCASE("constant planar anomaly, no mean removal") {
        const auto net = synthetic_network(metas, 30, [](double x, double, std::size_t) { return 0.001 * x; });
        EstimationOptions opt;
        opt.policy = MeanRemovalPolicy::None;
        const auto g = estimate_series(net, opt);
        REQUIRE(g.size() == 30);
        for (const auto& s : g.samples) {
            REQUIRE(s.valid());
            CHECK(s.v_g == doctest::Approx(kC.g0 * 0.001 / f).epsilon(1e-9));
            CHECK(std::abs(s.u_g) < 1e-6);
            CHECK(s.n_stations == 12);
            CHECK(s.w_g == doctest::Approx(std::hypot(s.u_g, s.v_g)).epsilon(1e-15));
            CHECK(s.theta_g == doctest::Approx(std::atan2(s.v_g, s.u_g)).epsilon(1e-15));
        }
    }

    SUBCASE("zero anomaly with per-station offsets removed by the mean") {
        const auto net = synthetic_network(metas, 48, [](double, double, std::size_t) { return 0.0; }, 3.0);
        for (auto policy : {MeanRemovalPolicy::PerStationMonthlyMean, MeanRemovalPolicy::PerStationWholeRecordMean}) {
            EstimationOptions opt;
            opt.policy = policy;
            for (const auto& s : estimate_series(net, opt).samples) {
                REQUIRE(s.valid());
                CHECK(s.w_g < 1e-6);
            }
        }
    }

    SUBCASE("dropping one station leaves an exact plane unchanged") {
        auto net = synthetic_network(metas, 5, [](double x, double y, std::size_t t) {
            return (1e-4 + 1e-5 * double(t)) * x - 2e-4 * y;
        });
        EstimationOptions opt;
        opt.policy = MeanRemovalPolicy::None;
        const auto full = estimate_series(net, opt);
        for (auto& p : net.stations[4].pressure) p = kMissing;
        const auto dropped = estimate_series(net, opt);
        for (std::size_t t = 0; t < 5; ++t) {
            CHECK(dropped.samples[t].n_stations == 11);
            CHECK(dropped.samples[t].u_g == doctest::Approx(full.samples[t].u_g).epsilon(1e-8));
            CHECK(dropped.samples[t].v_g == doctest::Approx(full.samples[t].v_g).epsilon(1e-8));
        }
    }

    SUBCASE("hours with fewer than three barometers are missing") {
        auto net = synthetic_network(metas, 3, [](double x, double, std::size_t) { return 1e-4 * x; });
        for (std::size_t i = 2; i < net.stations.size(); ++i) net.stations[i].pressure[1] = kMissing;
        EstimationOptions opt;
        opt.policy = MeanRemovalPolicy::None;
        const auto g = estimate_series(net, opt);
        CHECK(g.samples[0].valid());
        CHECK_FALSE(g.samples[1].valid());
        CHECK(g.samples[1].n_stations == 2);
        CHECK(g.samples[2].valid());
    }
}

TEST_CASE("theta_g stays in (-pi, pi]") {
    const auto s = GeoWindSample::from_components(UtcHour{0}, -3.0, -0.0);
    CHECK(s.theta_g == doctest::Approx(std::numbers::pi));
    CHECK(s.theta_g > 0);
}

TEST_CASE("geowind csv round trip") {
    GeoWindSeries g;
    g.start = UtcHour{400000};
    g.samples.push_back(GeoWindSample::from_components(g.start, 1.25, -3.5));
    g.samples.push_back(GeoWindSample{});
    g.samples.back().time = g.start + 1;
    g.samples[0].n_stations = 12;
    g.samples[0].rms_residual = 0.4;
    const auto path = (std::filesystem::temp_directory_path() / "gwf_geo_roundtrip.csv").string();
    write_csv(g, path);
    const auto back = read_csv(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == 2);
    CHECK(back.samples[0].u_g == 1.25);
    CHECK(back.samples[0].v_g == -3.5);
    CHECK(back.samples[0].n_stations == 12);
    CHECK_FALSE(back.samples[1].valid());
}
