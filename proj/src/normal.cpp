#include "gwf/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace gwf::normal {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;   // 1/sqrt(2 pi)
constexpr double kLogSqrt2Pi = 0.91893853320467274;  // log(sqrt(2 pi))

double poly(const double* c, int n, double r) {
    double v = c[n - 1];
    for (int i = n - 2; i >= 0; --i) v = v * r + c[i];
    return v;
}

// Wichura (1988), algorithm AS 241, PPND16.
double ppnd16(double p) {
    static constexpr double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e+2,
                                    1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                    4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                    3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[8] = {1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                    5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                    3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                    5.2264952788528545610e+3};
    static constexpr double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                    5.76949722146069140550e0, 3.64784832476320460504e0,
                                    1.27045825245236838258e0, 2.41780725177450611770e-1,
                                    2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[8] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
                                    6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                    1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                    1.05075007164441684324e-9};
    static constexpr double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                    1.78482653991729133580e0, 2.96560571828504891230e-1,
                                    2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                    2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[8] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                    1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                    1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                    2.04426310338993978564e-15};

    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(a, 8, r) / poly(b, 8, r);
    }
    double r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double v;
    if (r <= 5.0) {
        r -= 1.6;
        v = poly(c, 8, r) / poly(d, 8, r);
    } else {
        r -= 5.0;
        v = poly(e, 8, r) / poly(f, 8, r);
    }
    return q < 0 ? -v : v;
}

}  // namespace

double pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_cdf(double x) {
    if (std::isnan(x)) return x;
    if (x == -std::numeric_limits<double>::infinity()) return x;
    if (x > 5.0) return std::log1p(-cdf(-x));
    if (x > -30.0) return std::log(cdf(x));
    return log_pdf(x) + log_mills(x);
}

double log_mills(double x) {
    if (x > -10.0) return log_cdf(x) - log_pdf(x);
    // Laplace continued fraction Phi(x)/phi(x) = 1/(t+1/(t+2/(t+3/(t+...)))), t = -x.
    const double t = -x;
    double v = t;
    for (int k = 60; k >= 1; --k) v = t + k / v;
    return -std::log(v);
}

double quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    double x = ppnd16(p);
    if (std::abs(x) < 37.0) {
        // Halley refinement; the error is taken on the smaller tail.
        const double err = x < 0 ? cdf(x) - p : (1.0 - p) - cdf(-x);
        const double u = err / pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double quantile_from_log(double log_p) {
    if (log_p >= 0.0) return std::numeric_limits<double>::infinity();
    if (log_p == -std::numeric_limits<double>::infinity()) return log_p;
    if (log_p > -700.0) {
        const double p = std::exp(log_p);
        if (p > 0.5) return -quantile(-std::expm1(log_p));
        return quantile(p);
    }
    // Deep lower tail: Newton on log Phi, started from the leading asymptote.
    const double l = -log_p;
    double x = -std::sqrt(2.0 * l - std::log(4.0 * std::numbers::pi * l));
    for (int it = 0; it < 50; ++it) {
        const double g = log_cdf(x) - log_p;
        const double slope = std::exp(log_pdf(x) - log_cdf(x));
        const double step = g / slope;
        x -= step;
        if (std::abs(step) <= 1e-15 * std::abs(x)) break;
    }
    return x;
}

}  // namespace gwf::normal
