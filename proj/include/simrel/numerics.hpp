#pragma once

namespace simrel {

/// Standard normal CDF.
double normal_cdf(double x);

/// Chi-square CDF with dof degrees of freedom (regularized lower incomplete
/// gamma P(dof/2, x/2)); x <= 0 gives 0.
double chi_square_cdf(int dof, double x);

/// Inverse chi-square CDF: the x with P(chi2_dof <= x) = p, accurate to
/// better than 1e-10 in CDF space.  Requires p in (0,1), dof >= 1.
double chi_square_inverse_cdf(int dof, double p);

/// Wilson score interval for a binomial proportion.
struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
    double half_width = 0.5;  // (hi - lo) / 2
};
WilsonInterval wilson_interval(long successes, long trials, double z = 1.959963984540054);

}  // namespace simrel
