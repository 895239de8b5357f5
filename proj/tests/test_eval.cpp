#include <cmath>

#include "doctest.h"
#include "gwf/errors.hpp"
#include "gwf/eval.hpp"
#include "gwf/synth.hpp"

using namespace gwf;
using namespace gwf::eval;
using forecast::ForecastRecord;

namespace {

// Records spread over three months, drawn from their own distributions.
std::vector<ForecastRecord> calibrated(std::size_t n, std::uint64_t seed, double sigma_scale = 1.0) {
    synth::Rng rng(seed);
    std::vector<ForecastRecord> out;
    const UtcHour t0 = hour_from_civil(2010, 1, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = -1.0 + 9.0 * rng.uniform();
        const double sigma = 0.3 + 2.0 * rng.uniform();
        const predictive::TruncatedNormal truth(mu, sigma);
        const predictive::TruncatedNormal issued(mu, sigma * sigma_scale);
        ForecastRecord r;
        r.station = i % 2 ? "A" : "B";
        r.issue_time = t0 + std::int64_t(i % 2000);
        r.horizon = 2;
        r.distribution = issued;
        r.point = issued.median();
        double u;
        do u = rng.uniform();
        while (u <= 0.0);
        r.observed = truth.quantile(u);
        out.push_back(r);
    }
    return out;
}

}  // namespace

TEST_CASE("perfect point forecasts score zero") {
    std::vector<ForecastRecord> recs(5);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].station = "S";
        recs[i].issue_time = UtcHour{100000 + std::int64_t(i)};
        recs[i].point = recs[i].observed = 1.5 + double(i);
    }
    const auto rep = score(recs, "PSS");
    REQUIRE(rep.cells.size() == 1);
    CHECK(rep.cells[0].overall.mae() == 0.0);
    CHECK(rep.cells[0].overall.rmse() == 0.0);
    CHECK(rep.cells[0].overall.crps() == 0.0);
    CHECK(is_missing(rep.cells[0].overall.width90()));
    CHECK(rep.cells[0].pit.empty());
}

TEST_CASE("monthly cells pool into the overall cell") {
    const auto recs = calibrated(3000, 3);
    const auto rep = score(recs, "TDD");
    REQUIRE(rep.cells.size() == 2);
    for (const auto& c : rep.cells) {
        CHECK(c.monthly.size() == 3);
        double n = 0, abs = 0, sq = 0, cr = 0;
        std::size_t pit = 0;
        for (const auto& [m, s] : c.monthly) {
            n += double(s.n);
            abs += s.mae() * double(s.n);
            sq += s.rmse() * s.rmse() * double(s.n);
            cr += s.crps() * double(s.n);
            CHECK(s.rmse() >= s.mae());
            CHECK(s.width90() > 0.0);
        }
        for (auto k : c.pit) pit += k;
        CHECK(double(c.overall.n) == n);
        CHECK(pit == c.overall.n_prob);
        CHECK(c.overall.mae() == doctest::Approx(abs / n).epsilon(1e-13));
        CHECK(c.overall.rmse() == doctest::Approx(std::sqrt(sq / n)).epsilon(1e-13));
        CHECK(c.overall.crps() == doctest::Approx(cr / n).epsilon(1e-13));
        CHECK(c.overall.rmse() >= c.overall.mae());
    }
    // recomputed directly from the records
    double abs = 0, cr = 0;
    std::size_t n = 0;
    for (const auto& r : recs)
        if (r.station == "A") {
            abs += std::abs(r.observed - r.point);
            cr += r.distribution->crps(r.observed);
            ++n;
        }
    const auto* a = rep.find("A", "TDD", 2);
    REQUIRE(a);
    CHECK(a->overall.mae() == doctest::Approx(abs / double(n)).epsilon(1e-12));
    CHECK(a->overall.crps() == doctest::Approx(cr / double(n)).epsilon(1e-10));
}

TEST_CASE("records drawn from their own distributions have a flat PIT histogram") {
    const auto recs = calibrated(10000, 20100601);
    ScoreOptions o;
    const auto rep = score(recs, "TDD", o);
    std::vector<std::size_t> pooled(10, 0);
    for (const auto& c : rep.cells)
        for (std::size_t i = 0; i < 10; ++i) pooled[i] += c.pit[i];
    const auto t = pit_chi_square(pooled);
    CHECK(t.n == 10000);
    CHECK(t.uniform_at(0.95));

    // overconfident forecasts pile into the outer bins
    const auto sharp = score(calibrated(10000, 20100601, 0.6), "TDD", o);
    std::vector<std::size_t> p2(10, 0);
    for (const auto& c : sharp.cells)
        for (std::size_t i = 0; i < 10; ++i) p2[i] += c.pit[i];
    CHECK_FALSE(pit_chi_square(p2).uniform_at(0.95));
    CHECK(p2[0] + p2[9] > pooled[0] + pooled[9]);
}

TEST_CASE("chi-square reference values") {
    // all counts equal: statistic 0, p = 1
    auto t = pit_chi_square(std::vector<std::size_t>(10, 50));
    CHECK(t.statistic == 0.0);
    CHECK(t.p_value == doctest::Approx(1.0));
    // just inside the 95% point of chi-square with 9 degrees of freedom, 16.919
    std::vector<std::size_t> c(10, 100);
    c[0] = 100 + 29;
    c[1] = 100 - 29;
    t = pit_chi_square(c);
    CHECK(t.statistic == doctest::Approx(16.82));
    CHECK(t.p_value > 0.05);
    CHECK(pit_bin(1.0, 10) == 9);
    CHECK(pit_bin(0.0, 10) == 0);
    CHECK(pit_bin(0.35, 10) == 3);
}

TEST_CASE("CRPS tends to the absolute error of the median as sigma shrinks") {
    auto recs = calibrated(500, 9);
    for (double s : {1e-2, 1e-4, 1e-6}) {
        double mae = 0;
        for (auto& r : recs) {
            r.distribution = predictive::TruncatedNormal(r.distribution->mu() < 0.5 ? 0.5 : r.distribution->mu(), s);
            r.point = r.distribution->median();
            mae += std::abs(r.observed - r.point);
        }
        mae /= double(recs.size());
        const auto rep = score(recs, "X");
        double crps = 0;
        for (const auto& c : rep.cells) crps += c.overall.crps() * double(c.overall.n);
        crps /= double(recs.size());
        CHECK(std::abs(crps - mae) < 2 * s);
    }
}

TEST_CASE("fallbacks can be excluded; unscorable sets are errors") {
    std::vector<ForecastRecord> recs(4);
    for (std::size_t i = 0; i < 4; ++i) {
        recs[i].station = "S";
        recs[i].issue_time = UtcHour{400000 + std::int64_t(i)};
        recs[i].point = 1.0;
        recs[i].observed = 2.0 + double(i);
        recs[i].fallback = i >= 2;
    }
    CHECK(score(recs, "V").cells[0].overall.n == 4);
    ScoreOptions o;
    o.include_fallbacks = false;
    const auto ex = score(recs, "V", o);
    CHECK(ex.cells[0].overall.n == 2);
    CHECK(ex.cells[0].overall.mae() == 1.5);
    CHECK(scores_csv(ex).find("excluded") != std::string::npos);

    for (auto& r : recs) r.observed = kMissing;
    CHECK_THROWS_AS(score(recs, "V"), EmptyReport);
    CHECK_THROWS_AS(score({}, "V"), EmptyReport);
}

TEST_CASE("relative reductions") {
    CHECK(*relative_reduction(1.08, 0.88) == doctest::Approx(18.518518518518519).epsilon(1e-14));
    CHECK(*relative_reduction(0.95, 0.95) == 0.0);
    CHECK(*relative_reduction(0.88, 0.95) < 0.0);
    CHECK_FALSE(relative_reduction(0.0, 0.5));
    CHECK_FALSE(relative_reduction(kMissing, 0.5));

    auto a = calibrated(400, 1), b = calibrated(400, 1);
    for (auto& r : b) r.point += 0.5;
    auto rep = score(a, "M");
    rep.merge(score(b, "BASE"));
    CHECK_THROWS_AS(rep.merge(score(b, "BASE")), InvalidInput);
    const auto red = relative_reductions(rep, "BASE", Metric::MAE);
    REQUIRE(red.size() == 2 * 2);  // one month plus overall per station
    for (const auto& r : red) {
        REQUIRE(r.percent);
        CHECK(*r.percent > 0.0);
        CHECK(r.variant == "M");
    }
    const auto self = relative_reductions(score(a, "M"), "M", Metric::MAE);
    CHECK(self.empty());
    auto twin = score(a, "M");
    twin.merge(score(a, "N"));
    for (const auto& r : relative_reductions(twin, "M", Metric::CRPS)) CHECK(*r.percent == 0.0);
}

TEST_CASE("lag correlations") {
    synth::SynthConfig cfg;
    cfg.days = 20;
    cfg.n_stations = 4;
    auto out = synth::generate(cfg);
    // make ST02 equal the geostrophic speed two hours earlier
    auto& s = out.network.stations[1];
    for (std::size_t t = 0; t < s.size(); ++t) s.speed[t] = t >= 2 ? out.truth.samples[t - 2].w_g : kMissing;
    const auto rows = lag_correlations(out.network, out.truth, "ST02", {0, 2}, 3);
    bool self = false, geo = false;
    for (const auto& r : rows) {
        CHECK(r.pairs >= 30);
        if (r.variable == "speed[ST02]" && r.horizon == 0 && r.lag == 0) {
            CHECK(r.r == doctest::Approx(1.0).epsilon(1e-12));
            self = true;
        }
        if (r.variable == "w_g" && r.horizon == 2 && r.lag == 0) {
            CHECK(r.r == doctest::Approx(1.0).epsilon(1e-12));
            geo = true;
        }
        if (!is_missing(r.r)) CHECK(std::abs(r.r) <= 1.0);
    }
    CHECK(self);
    CHECK(geo);
    CHECK(rows.size() == (4 * 3 + 3) * 2 * 4);

    cfg.days = 1;
    const auto tiny = synth::generate(cfg);
    for (const auto& r : lag_correlations(tiny.network, tiny.truth, "ST01", {6}, 0))
        CHECK(is_missing(r.r));
}

TEST_CASE("report renderings") {
    auto rep = score(calibrated(600, 4), "TDDGW-MD");
    auto pss = calibrated(600, 4);
    for (auto& r : pss) r.distribution.reset();
    rep.merge(score(pss, "PSS"));
    const auto table = text_table(rep);
    CHECK(table.find("Overall") != std::string::npos);
    CHECK(table.find("2010-01") != std::string::npos);
    CHECK(table.find("TDDGW-MD") != std::string::npos);
    CHECK(table.find("CRPS") != std::string::npos);
    const auto csv = scores_csv(rep);
    CHECK(csv.rfind("station,variant,horizon,period", 0) == 0);
    const auto pit = pit_csv(rep);
    // PSS contributes no PIT rows: two stations with ten bins each
    CHECK(std::count(pit.begin(), pit.end(), '\n') == 1 + 2 * 10);
    const auto red = reductions_csv(relative_reductions(rep, "PSS", Metric::MAE));
    CHECK(red.find("overall") != std::string::npos);
}
