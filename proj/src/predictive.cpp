#include "gwf/predictive.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "gwf/errors.hpp"
#include "gwf/normal.hpp"

namespace gwf::predictive {

namespace {

// Below this a = mu/sigma the ratios are formed through log(Phi/phi).
constexpr double kDeepTail = -10.0;

}  // namespace

TruncatedNormal::TruncatedNormal(double mu, double sigma) : mu_(mu), sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidDistribution("truncated normal needs a positive finite scale");
    if (!std::isfinite(mu)) throw InvalidDistribution("truncated normal needs a finite center");
    a_ = mu / sigma;
    deep_ = a_ < kDeepTail;
    log_mass_ = normal::log_cdf(a_);
    log_mills_a_ = normal::log_mills(a_);
}

// log phi((y - mu)/sigma) - log phi(a) for y >= 0, without forming either square.
double TruncatedNormal::log_phi_shift(double y) const {
    return -0.5 * (y / sigma_) * ((y - 2.0 * mu_) / sigma_);
}

double TruncatedNormal::log_density(double y) const {
    if (deep_) return log_phi_shift(y) - log_mills_a_;
    return normal::log_pdf((y - mu_) / sigma_) - log_mass_;
}

double TruncatedNormal::log_survival(double y) const {
    const double u = (mu_ - y) / sigma_;
    if (deep_) return log_phi_shift(y) + normal::log_mills(u) - log_mills_a_;
    return normal::log_cdf(u) - log_mass_;
}

double TruncatedNormal::pdf(double y) const {
    if (y < 0.0) return 0.0;
    return std::exp(log_density(y)) / sigma_;
}

double TruncatedNormal::survival(double y) const {
    if (y <= 0.0) return 1.0;
    return std::exp(log_survival(y));
}

double TruncatedNormal::cdf(double y) const {
    if (y <= 0.0) return 0.0;
    return -std::expm1(log_survival(y));
}

double TruncatedNormal::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw InvalidInput("quantile level must lie in (0, 1)");
    const double target = std::log1p(-p);
    if (!deep_) {
        // Solve Phi((mu - y)/sigma) = (1 - p) Phi(mu/sigma) in log space.
        const double b = normal::quantile_from_log(target + log_mass_);
        return std::max(0.0, mu_ - sigma_ * b);
    }
    // Newton in t = y/sigma on the concave log survival; after the first
    // step the iterates approach the root monotonically from above.
    double t = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double y = t * sigma_;
        const double g = log_survival(y) - target;
        const double slope = -std::exp(-normal::log_mills(a_ - t));
        const double step = g / slope;
        t -= step;
        if (std::abs(step) <= 1e-15 * t) break;
    }
    return std::max(0.0, t * sigma_);
}

std::pair<double, double> TruncatedNormal::central_interval(double level) const {
    if (!(level > 0.0 && level < 1.0)) throw InvalidInput("interval level must lie in (0, 1)");
    return {quantile(0.5 * (1.0 - level)), quantile(0.5 * (1.0 + level))};
}

double TruncatedNormal::crps(double y) const {
    if (!(y >= 0.0)) throw InvalidInput("CRPS observation must be a nonnegative wind speed");
    // sigma * [ z - 2z Phi(-z)/P + 2 phi(z)/P - Phi(sqrt2 a) / (sqrt(pi) P^2) ],
    // a = mu/sigma, z = (y - mu)/sigma, P = Phi(a); every ratio is formed in logs.
    const double z = (y - mu_) / sigma_;
    const double tail = std::exp(log_survival(y));
    const double dens = std::exp(log_density(y));
    const double log_pair =
        deep_ ? 0.91893853320467274 + normal::log_mills(std::numbers::sqrt2 * a_) - 2.0 * log_mills_a_
              : normal::log_cdf(std::numbers::sqrt2 * a_) - 2.0 * log_mass_;
    const double pair = std::exp(log_pair);
    const double v = z - 2.0 * z * tail + 2.0 * dens - pair * std::numbers::inv_sqrtpi;
    return std::max(0.0, sigma_ * v);
}

double crps(const TruncatedNormal& d, double y) { return d.crps(y); }

double crps_fast(double mu, double sigma, double y) {
    const double a = mu / sigma;
    if (a < -3.0) return TruncatedNormal(mu, sigma).crps(y);
    const double z = (y - mu) / sigma;
    const double mass = 0.5 * std::erfc(-a * (0.5 * std::numbers::sqrt2));
    const double tail = 0.5 * std::erfc(z * (0.5 * std::numbers::sqrt2));
    const double dens = 0.3989422804014327 * std::exp(-0.5 * z * z);
    const double pair = 0.5 * std::erfc(-a);
    const double v = z - 2.0 * z * tail / mass + 2.0 * dens / mass - pair * std::numbers::inv_sqrtpi / (mass * mass);
    return std::max(0.0, sigma * v);
}

namespace {

std::vector<double> breakpoints(const TruncatedNormal& d, double y, double upper) {
    std::vector<double> pts{0.0, upper};
    if (y > 0 && y < upper) pts.push_back(y);
    for (double p : {1e-9, 1e-4, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1 - 1e-4, 1 - 1e-9}) {
        const double q = d.quantile(p);
        if (q > 0 && q < upper) pts.push_back(q);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// Bisects until the Gauss-Kronrod error estimate of each piece is within
// its share of an absolute budget. Boost's estimate bottoms out near a few
// ulps regardless of width, so anything at that floor is accepted.
template <class F>
double integrate_adaptive(F& f, double a, double b, double budget, int depth) {
    constexpr double kFloor = 16 * std::numeric_limits<double>::epsilon();
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &err);
    if (depth == 0 || err <= std::max(budget, kFloor)) return v;
    const double m = 0.5 * (a + b);
    return integrate_adaptive(f, a, m, 0.5 * budget, depth - 1) + integrate_adaptive(f, m, b, 0.5 * budget, depth - 1);
}

template <class F>
double integrate_pieces(const std::vector<double>& pts, F&& f) {
    constexpr double kAbsTol = 1e-12;
    const double share = kAbsTol / double(pts.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += integrate_adaptive(f, pts[i], pts[i + 1], share, 16);
    return total;
}

double upper_limit(const TruncatedNormal& d, double y) {
    return std::max(y, std::max(d.mu(), 0.0) + 40.0 * d.sigma());
}

}  // namespace

double crps_numeric(const TruncatedNormal& d, double y) {
    if (!(y >= 0.0)) throw InvalidInput("CRPS observation must be a nonnegative wind speed");
    const double upper = upper_limit(d, y);
    const auto pts = breakpoints(d, y, upper);
    return integrate_pieces(pts, [&](double x) {
        if (x < y) {
            const double f = d.cdf(x);
            return f * f;
        }
        const double s = d.survival(x);
        return s * s;
    });
}

double total_mass_numeric(const TruncatedNormal& d) {
    const double upper = upper_limit(d, 0.0);
    const auto pts = breakpoints(d, 0.0, upper);
    return integrate_pieces(pts, [&](double x) { return d.pdf(x); });
}

}  // namespace gwf::predictive
