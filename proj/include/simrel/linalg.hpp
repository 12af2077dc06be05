#pragma once

#include <Eigen/Dense>
#include <vector>

namespace simrel {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// True when A is square and max|A - A^T| <= rel_tol * max(1, max|A|).
bool is_symmetric(const Mat& A, double rel_tol = 1e-10);

/// All eigenvalues of a symmetric matrix, ascending, computed by a cyclic
/// Jacobi rotation scheme (off-diagonal Frobenius norm driven below
/// 1e-12 * max(1, ||A||_F)).  Intended for the small dense matrices used in
/// the certification checks; asymmetric input is rejected.
std::vector<double> jacobi_eigenvalues(const Mat& A);

/// Smallest eigenvalue of a symmetric matrix (Jacobi).
double min_eigenvalue(const Mat& A);

/// Largest |eigenvalue| of a symmetric matrix (Jacobi).
double max_abs_eigenvalue(const Mat& A);

/// Default positive-semidefiniteness slack: 1e-8 * max(1, largest |eigenvalue|).
double default_psd_tol(const Mat& A);

}  // namespace simrel
