#include "simrel/sprocedure.hpp"

#include <cmath>

#include "simrel/errors.hpp"

namespace simrel {

void SProcedureProblem::validate() const {
    if (d <= 0) throw DimensionError("S-procedure dimension must be positive");
    if (F1.rows() != d || F1.cols() != d || F2.rows() != d || F2.cols() != d)
        throw DimensionError("F1/F2 must be d x d");
    if (g1.size() != d || g2.size() != d) throw DimensionError("g1/g2 must be d-vectors");
    if (!is_symmetric(F1) || !is_symmetric(F2))
        throw DimensionError("F1/F2 must be symmetric within 1e-10 relative");
}

Mat bordered_matrix(const Mat& F, const Vec& g, double h) {
    const int d = static_cast<int>(F.rows());
    Mat Q(d + 1, d + 1);
    Q.topLeftCorner(d, d) = F;
    Q.topRightCorner(d, 1) = g;
    Q.bottomLeftCorner(1, d) = g.transpose();
    Q(d, d) = h;
    return Q;
}

namespace {
double min_eig_at(const SProcedureProblem& prob, double lambda) {
    const Mat Q = lambda * bordered_matrix(prob.F1, prob.g1, prob.h1) -
                  bordered_matrix(prob.F2, prob.g2, prob.h2);
    return min_eigenvalue(Q);
}

double applied_tol(const SProcedureProblem& prob, double lambda, double tol_psd) {
    if (tol_psd >= 0.0) return tol_psd;
    const Mat Q = lambda * bordered_matrix(prob.F1, prob.g1, prob.h1) -
                  bordered_matrix(prob.F2, prob.g2, prob.h2);
    return default_psd_tol(Q);
}
}  // namespace

SProcedureCheck check_sprocedure(const SProcedureProblem& prob, double lambda, double tol_psd) {
    prob.validate();
    if (lambda < 0.0) throw Error("S-procedure multiplier must be nonnegative");
    SProcedureCheck out;
    out.min_eig = min_eig_at(prob, lambda);
    out.tol = applied_tol(prob, lambda, tol_psd);
    out.pass = out.min_eig >= -out.tol;
    return out;
}

LambdaSearchResult search_lambda(const SProcedureProblem& prob, double tol_psd,
                                 double lambda_max) {
    prob.validate();
    // Golden-section search for the maximum of the concave map
    // lambda -> min_eig(lambda * Q1 - Q2).
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = lambda_max;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = min_eig_at(prob, x1);
    double f2 = min_eig_at(prob, x2);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * lambda_max; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = min_eig_at(prob, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = min_eig_at(prob, x1);
        }
    }
    LambdaSearchResult out;
    out.lambda = 0.5 * (a + b);
    out.min_eig = min_eig_at(prob, out.lambda);
    // The endpoints of a concave profile can dominate the interior bracket.
    const double f0 = min_eig_at(prob, 0.0);
    if (f0 > out.min_eig) {
        out.lambda = 0.0;
        out.min_eig = f0;
    }
    const double fmax = min_eig_at(prob, lambda_max);
    if (fmax > out.min_eig) {
        out.lambda = lambda_max;
        out.min_eig = fmax;
    }
    out.pass = out.min_eig >= -applied_tol(prob, out.lambda, tol_psd);
    return out;
}

}  // namespace simrel
