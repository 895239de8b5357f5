#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "gwf/errors.hpp"
#include "gwf/normal.hpp"
#include "gwf/predictive.hpp"

using gwf::predictive::TruncatedNormal;
namespace normal = gwf::normal;

TEST_CASE("standard normal primitives agree with boost") {
    boost::math::normal_distribution<double> n01;
    for (double x = -8; x <= 8; x += 0.37) {
        CHECK(normal::cdf(x) == doctest::Approx(boost::math::cdf(n01, x)).epsilon(1e-14));
        CHECK(normal::log_cdf(x) == doctest::Approx(std::log(boost::math::cdf(n01, x))).epsilon(1e-13));
    }
    for (double p : {1e-300, 1e-100, 1e-20, 1e-8, 0.01, 0.2, 0.5, 0.7, 0.99, 1 - 1e-10}) {
        const double q = normal::quantile(p);
        const double ref = boost::math::quantile(n01, p);
        CHECK(std::abs(q - ref) <= 1e-13 * std::max(1.0, std::abs(ref)));
    }
    // the continued-fraction branch of log Phi, checked where Phi is still a normal double
    for (double x : {-30.0000001, -31.5, -35.0, -37.0})
        CHECK(normal::log_cdf(x) == doctest::Approx(std::log(boost::math::cdf(n01, x))).epsilon(1e-14));
    for (double x : {-10.0000001, -9.9999999, -12.0, -25.0})
        CHECK(normal::log_mills(x) ==
              doctest::Approx(std::log(boost::math::cdf(n01, x) / boost::math::pdf(n01, x))).epsilon(1e-12));
    for (double l : {-800.0, -2000.0, -1e5})
        CHECK(normal::log_cdf(normal::quantile_from_log(l)) == doctest::Approx(l).epsilon(1e-14));
}

TEST_CASE("cdf examples") {
    CHECK(TruncatedNormal(0, 1).cdf(0) == 0.0);
    CHECK(TruncatedNormal(3, 2).cdf(-1) == 0.0);
    CHECK(TruncatedNormal(0, 1).cdf(std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(TruncatedNormal(0, 1).cdf(1e6) == 1.0);
    // half-normal: 2 Phi(1) - 1
    CHECK(TruncatedNormal(0, 1).cdf(1.0) == doctest::Approx(0.682689492137085897).epsilon(1e-14));
    CHECK_THROWS_AS(TruncatedNormal(0, 0), gwf::InvalidDistribution);
    CHECK_THROWS_AS(TruncatedNormal(0, -1), gwf::InvalidDistribution);
}

TEST_CASE("cdf matches boost normal algebra where it is well conditioned") {
    boost::math::normal_distribution<double> n01;
    for (double mu : {-2.0, 0.0, 1.5, 6.0})
        for (double s : {0.3, 1.0, 2.5})
            for (double y : {0.1, 1.0, 3.0, 7.0}) {
                using boost::math::complement;
                const double mass = boost::math::cdf(complement(n01, -mu / s));
                const double ref = (mass - boost::math::cdf(complement(n01, (y - mu) / s))) / mass;
                CHECK(TruncatedNormal(mu, s).cdf(y) == doctest::Approx(ref).epsilon(1e-12));
            }
}

TEST_CASE("quantile and median examples") {
    // root-find oracle (mpmath) for mu = 5, sigma = 1
    CHECK(TruncatedNormal(5, 1).median() == doctest::Approx(5.00000035926446752).epsilon(1e-14));
    CHECK(TruncatedNormal(0, 1).median() == doctest::Approx(0.674489750196081743).epsilon(1e-14));
    const TruncatedNormal d(2.0, 1.7);
    CHECK(d.quantile(0.05) < d.median());
    CHECK(d.median() < d.quantile(0.95));
    CHECK_THROWS_AS(d.quantile(0.0), gwf::InvalidInput);
    CHECK_THROWS_AS(d.quantile(1.0), gwf::InvalidInput);
    CHECK_THROWS_AS(d.quantile(-0.2), gwf::InvalidInput);
}

TEST_CASE("median equals the closed-form median point forecast") {
    // the closed form loses digits once Phi(-mu/sigma) nears one, so mu/sigma >= -3 here
    for (double mu : {-3.0, -0.5, 0.0, 0.8, 4.0, 12.0})
        for (double s : {1.0, 3.0, 0.2}) {
            if (mu / s < -3.0) continue;
            const double closed = mu + s * normal::quantile(0.5 + 0.5 * normal::cdf(-mu / s));
            CHECK(TruncatedNormal(mu, s).median() == doctest::Approx(closed).epsilon(1e-10));
        }
}

TEST_CASE("deep lower tail is continuous across the branch switch") {
    const double s = 0.5;
    for (double eps : {1e-9, -1e-9}) {
        const TruncatedNormal lo(s * (-10.0 - eps), s), hi(s * (-10.0 + eps), s);
        for (double p : {0.05, 0.5, 0.95})
            CHECK(lo.quantile(p) == doctest::Approx(hi.quantile(p)).epsilon(1e-7));
        for (double y : {0.0, 0.01, 0.05, 0.3}) {
            CHECK(lo.cdf(y) == doctest::Approx(hi.cdf(y)).epsilon(1e-7));
            CHECK(lo.crps(y) == doctest::Approx(hi.crps(y)).epsilon(1e-7));
        }
    }
    // Far below the switch the law is exponential with rate |mu|/sigma^2.
    const TruncatedNormal d(-2.0, 1e-4);
    const double rate = 2.0 / 1e-8;
    CHECK(d.median() == doctest::Approx(std::log(2.0) / rate).epsilon(1e-6));
    CHECK(d.cdf(1.0 / rate) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-6));
    CHECK(d.crps(0.0) == doctest::Approx(0.5 / rate).epsilon(1e-6));
    for (int i = 1; i < 100; ++i) CHECK(std::abs(d.cdf(d.quantile(i / 100.0)) - i / 100.0) < 1e-12);
}

TEST_CASE("inversion property across a grid") {
    double worst = 0;
    for (double mu = -5; mu <= 15; mu += 1.25)
        for (double s = 0.1; s <= 5.0; s += 0.7) {
            const TruncatedNormal d(mu, s);
            for (int i = 1; i <= 99; ++i) {
                const double p = i / 100.0;
                worst = std::max(worst, std::abs(d.cdf(d.quantile(p)) - p));
            }
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("central interval") {
    const auto [lo, hi] = TruncatedNormal(5, 1).central_interval(0.9);
    // mpmath root-find on the truncated cdf
    CHECK(lo == doctest::Approx(3.35514901343938486).epsilon(1e-12));
    CHECK(hi == doctest::Approx(6.64485376591973024).epsilon(1e-12));
    CHECK(lo == doctest::Approx(5 - 1.6448536).epsilon(1e-6));
    const TruncatedNormal d(0.3, 2.0);
    const auto [a, b] = d.central_interval(0.5);
    const auto [c, e] = d.central_interval(0.9);
    CHECK(b - a >= 0);
    CHECK(b - a < e - c);
    CHECK_THROWS_AS(d.central_interval(1.0), gwf::InvalidInput);
}

TEST_CASE("closed-form CRPS against quadrature oracle") {
    // values from an independent mpmath quadrature
    CHECK(TruncatedNormal(0, 1).crps(0) == doctest::Approx(0.467389954510218138).epsilon(1e-12));
    CHECK(TruncatedNormal(2, 1.5).crps(3.1) == doctest::Approx(0.551322653326307729).epsilon(1e-12));
    CHECK(TruncatedNormal(-1, 0.7).crps(0.4) == doctest::Approx(0.0949172273397531989).epsilon(1e-12));

    CHECK(gwf::predictive::crps_numeric(TruncatedNormal(0, 1), 0) ==
          doctest::Approx(0.467389954510218138).epsilon(1e-10));

    for (double mu : {-5.0, -1.0, 0.0, 2.5, 9.0, 15.0})
        for (double s : {0.1, 0.9, 5.0})
            for (double y : {0.0, 0.5, 4.0, 20.0}) {
                const TruncatedNormal d(mu, s);
                CHECK(std::abs(d.crps(y) - gwf::predictive::crps_numeric(d, y)) < 1e-6);
            }
}

TEST_CASE("fast CRPS kernel agrees with the distribution method") {
    double worst = 0;
    for (double mu = -12; mu <= 20; mu += 0.7)
        for (double s : {1e-3, 0.05, 0.4, 1.0, 2.7, 6.0})
            for (double y : {0.0, 0.02, 0.9, 3.3, 11.0, 30.0}) {
                const double ref = TruncatedNormal(mu, s).crps(y);
                worst = std::max(worst, std::abs(gwf::predictive::crps_fast(mu, s, y) - ref) / std::max(1.0, ref));
            }
    CHECK(worst < 1e-11);
}

TEST_CASE("CRPS limits and sign") {
    // point-mass limit: |y - max(mu, 0)|
    for (double mu : {-2.0, 0.0, 3.0})
        for (double y : {0.0, 1.0, 5.0})
            CHECK(TruncatedNormal(mu, 1e-9).crps(y) == doctest::Approx(std::abs(y - std::max(mu, 0.0))).epsilon(1e-6));
    for (double mu = -4; mu <= 8; mu += 1.5)
        for (double y = 0; y <= 12; y += 1.1) CHECK(TruncatedNormal(mu, 0.8).crps(y) > 0);
    CHECK_THROWS_AS(TruncatedNormal(1, 1).crps(-0.1), gwf::InvalidInput);
}

TEST_CASE("CRPS is smallest near the median and grows without bound") {
    const TruncatedNormal d(1.2, 1.3);
    double best_y = 0, best = 1e300;
    for (double y = 0; y <= 10; y += 0.01)
        if (d.crps(y) < best) best = d.crps(y), best_y = y;
    CHECK(std::abs(best_y - d.median()) < 0.02);
    CHECK(d.crps(1e3) > d.crps(1e2));
    CHECK(d.crps(1e3) > 900);
}

TEST_CASE("density integrates to one") {
    for (double mu : {-5.0, 0.0, 3.0, 15.0})
        for (double s : {0.1, 1.0, 5.0})
            CHECK(std::abs(gwf::predictive::total_mass_numeric(TruncatedNormal(mu, s)) - 1.0) < 1e-8);
}
