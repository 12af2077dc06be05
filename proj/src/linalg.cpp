#include "simrel/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "simrel/errors.hpp"

namespace simrel {

bool is_symmetric(const Mat& A, double rel_tol) {
    if (A.rows() != A.cols()) return false;
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    return (A - A.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

namespace {

double offdiag_norm(const Mat& A) {
    double s = 0.0;
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            if (i != j) s += A(i, j) * A(i, j);
    return std::sqrt(s);
}

}  // namespace

std::vector<double> jacobi_eigenvalues(const Mat& A) {
    if (!is_symmetric(A))
        throw DimensionError("jacobi_eigenvalues: matrix is not symmetric");
    Mat S = 0.5 * (A + A.transpose());  // exact symmetrization of rounding fuzz
    const int n = static_cast<int>(S.rows());
    if (n == 0) return {};
    const double threshold = 1e-12 * std::max(1.0, S.norm());
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps && offdiag_norm(S) > threshold; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = S(p, q);
                if (std::abs(apq) == 0.0) continue;
                // Rotation angle zeroing S(p,q); stable tangent formula.
                const double theta = (S(q, q) - S(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double skp = S(k, p), skq = S(k, q);
                    S(k, p) = c * skp - s * skq;
                    S(k, q) = s * skp + c * skq;
                }
                for (int k = 0; k < n; ++k) {
                    const double spk = S(p, k), sqk = S(q, k);
                    S(p, k) = c * spk - s * sqk;
                    S(q, k) = s * spk + c * sqk;
                }
                S(p, q) = 0.0;
                S(q, p) = 0.0;
            }
        }
    }
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = S(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double min_eigenvalue(const Mat& A) { return jacobi_eigenvalues(A).front(); }

double max_abs_eigenvalue(const Mat& A) {
    const auto eig = jacobi_eigenvalues(A);
    return std::max(std::abs(eig.front()), std::abs(eig.back()));
}

double default_psd_tol(const Mat& A) {
    return 1e-8 * std::max(1.0, max_abs_eigenvalue(A));
}

}  // namespace simrel
