#pragma once

#include "simrel/linalg.hpp"

namespace simrel {

/// Pair of quadratic constraints over z in R^d,
///   q_j(z) = z' F_j z + 2 g_j' z + h_j,
/// for the S-procedure implication  q1(z) <= 0  =>  q2(z) <= 0.
struct SProcedureProblem {
    Mat F1;  // d x d symmetric
    Vec g1;
    double h1 = 0.0;
    Mat F2;  // d x d symmetric
    Vec g2;
    double h2 = 0.0;
    int d = 0;

    void validate() const;  // shapes and 1e-10-relative symmetry of F1, F2
};

/// Bordered (d+1) x (d+1) matrix [F g; g' h] representing q(z) = [z;1]'Q[z;1].
Mat bordered_matrix(const Mat& F, const Vec& g, double h);

struct SProcedureCheck {
    bool pass = false;
    double min_eig = 0.0;
    double tol = 0.0;  // the tol_psd actually applied
};

/// Forms lambda * [F1 g1; g1' h1] - [F2 g2; g2' h2] and passes iff its
/// smallest eigenvalue is >= -tol_psd.  A negative tol_psd requests the
/// scale-aware default 1e-8 * max(1, max |eigenvalue|).
SProcedureCheck check_sprocedure(const SProcedureProblem& prob, double lambda,
                                 double tol_psd = -1.0);

struct LambdaSearchResult {
    double lambda = 0.0;
    double min_eig = 0.0;
    bool pass = false;
};

/// Maximizes the smallest eigenvalue of the bordered matrix over
/// lambda in [0, lambda_max].  The bordered matrix is affine in lambda, so
/// its smallest eigenvalue (an infimum of affine functions of lambda) is
/// concave; a ternary/golden-section search therefore finds the global
/// maximizer.
LambdaSearchResult search_lambda(const SProcedureProblem& prob, double tol_psd = -1.0,
                                 double lambda_max = 1e4);

}  // namespace simrel
