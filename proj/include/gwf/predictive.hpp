#pragma once

#include <utility>

namespace gwf::predictive {

/// Normal law N(mu, sigma^2) truncated to [0, inf). `mu` is the center
/// parameter and may be negative; `sigma` must be positive.
///
/// All evaluations go through log Phi so they stay accurate when mu/sigma
/// is far below zero (the mass then hugs the origin).
class TruncatedNormal {
public:
    TruncatedNormal(double mu, double sigma);

    double mu() const { return mu_; }
    double sigma() const { return sigma_; }

    double pdf(double y) const;
    double cdf(double y) const;
    /// P(Y > y)
    double survival(double y) const;

    /// Requires 0 < p < 1.
    double quantile(double p) const;
    double median() const { return quantile(0.5); }
    std::pair<double, double> central_interval(double level) const;

    /// Closed-form continuous ranked probability score for an observation y >= 0.
    double crps(double y) const;

private:
    double log_phi_shift(double y) const;
    double log_density(double y) const;
    double log_survival(double y) const;

    double mu_;
    double sigma_;
    double a_;
    bool deep_;
    double log_mass_;     // log Phi(mu / sigma), the untruncated mass on [0, inf)
    double log_mills_a_;  // log(Phi(a) / phi(a))
};

double crps(const TruncatedNormal& d, double y);

/// Same score without constructing the distribution. Uses plain Phi
/// arithmetic while Phi(mu/sigma) is not small and the log-space path
/// otherwise; meant for optimizer inner loops. Arguments are not checked.
double crps_fast(double mu, double sigma, double y);

/// The same score by adaptive Gauss-Kronrod quadrature of
/// integral (F(x) - 1{x >= y})^2 dx over [0, inf). Slow; used as an oracle.
double crps_numeric(const TruncatedNormal& d, double y);

/// Quadrature of the density over [0, inf); should be 1.
double total_mass_numeric(const TruncatedNormal& d);

}  // namespace gwf::predictive
