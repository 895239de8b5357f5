#pragma once

namespace gwf::normal {

/// Standard normal density.
double pdf(double x);
double log_pdf(double x);

/// Standard normal CDF, via the complementary error function.
double cdf(double x);

/// log Phi(x), accurate far into the lower tail (a continued fraction
/// takes over below x = -30, where Phi(x) < 1e-197).
double log_cdf(double x);

/// log(Phi(x) / phi(x)). Lets ratios of lower-tail probabilities be formed
/// without the -x^2/2 terms, which cancel exactly.
double log_mills(double x);

/// Phi^{-1}(p) for p in (0, 1): Wichura's AS 241 rational approximation
/// followed by one Halley step against `cdf`. Absolute error below 1e-14
/// in the central region and relative error near machine precision in
/// the tails.
double quantile(double p);

/// The x with log Phi(x) == log_p, for log_p < 0. Covers probabilities
/// far below the smallest double.
double quantile_from_log(double log_p);

}  // namespace gwf::normal
