#include "simrel/numerics.hpp"

#include <cmath>
#include <limits>

#include "simrel/errors.hpp"

namespace simrel {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Regularized lower incomplete gamma P(a, x): series for x < a+1, Lentz
// continued fraction for the upper tail otherwise.
double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

}  // namespace

double chi_square_cdf(int dof, double x) {
    if (dof < 1) throw Error("chi_square_cdf: dof must be >= 1");
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * dof, 0.5 * x);
}

double chi_square_inverse_cdf(int dof, double p) {
    if (dof < 1) throw Error("chi_square_inverse_cdf: dof must be >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw Error("chi_square_inverse_cdf: p must lie strictly in (0,1)");
    // Bracket the quantile, then bisect; the CDF is strictly increasing.
    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(dof));
    while (chi_square_cdf(dof, hi) < p) {
        hi *= 2.0;
        if (hi > 1e300) return std::numeric_limits<double>::infinity();
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi_square_cdf(dof, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

WilsonInterval wilson_interval(long successes, long trials, double z) {
    if (trials <= 0) throw Error("wilson_interval: trials must be positive");
    if (successes < 0 || successes > trials)
        throw Error("wilson_interval: successes must lie in [0, trials]");
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double spread =
        z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    WilsonInterval w;
    w.lo = std::max(0.0, center - spread);
    w.hi = std::min(1.0, center + spread);
    w.half_width = 0.5 * (w.hi - w.lo);
    return w;
}

}  // namespace simrel
