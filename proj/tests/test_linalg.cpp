#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "simrel/errors.hpp"
#include "simrel/linalg.hpp"

using simrel::Mat;

TEST_CASE("is_symmetric accepts exact and near-symmetric matrices") {
    Mat A(2, 2);
    A << 1.0, 2.0, 2.0, 3.0;
    CHECK(simrel::is_symmetric(A));
    A(0, 1) += 1e-12;  // within the 1e-10 relative band
    CHECK(simrel::is_symmetric(A));
    A(0, 1) = 2.1;
    CHECK_FALSE(simrel::is_symmetric(A));
    Mat R(2, 3);
    R.setZero();
    CHECK_FALSE(simrel::is_symmetric(R));
}

TEST_CASE("jacobi eigenvalues of a closed-form tridiagonal matrix") {
    // Eigenvalues of [[4,1,0],[1,3,1],[0,1,2]] are 3 and 3 +- sqrt(3).
    Mat A(3, 3);
    A << 4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0;
    const std::vector<double> eig = simrel::jacobi_eigenvalues(A);
    REQUIRE(eig.size() == 3);
    const double r3 = std::sqrt(3.0);
    CHECK(eig[0] == doctest::Approx(3.0 - r3).epsilon(1e-12));
    CHECK(eig[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(eig[2] == doctest::Approx(3.0 + r3).epsilon(1e-12));
}

TEST_CASE("jacobi eigenvalues: trace and Frobenius invariants on a random symmetric matrix") {
    Mat B(6, 6);
    // Deterministic pseudo-random fill, then symmetrize.
    double v = 0.123;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            v = std::fmod(4.0 * v * (1.0 - v) + 0.017, 1.0);  // logistic scramble
            B(i, j) = v - 0.5;
        }
    Mat S = 0.5 * (B + B.transpose());
    const std::vector<double> eig = simrel::jacobi_eigenvalues(S);
    double tr = 0.0, fro2 = 0.0;
    for (double e : eig) {
        tr += e;
        fro2 += e * e;
    }
    CHECK(tr == doctest::Approx(S.trace()).epsilon(1e-12));
    CHECK(fro2 == doctest::Approx(S.squaredNorm()).epsilon(1e-12));
    for (std::size_t k = 1; k < eig.size(); ++k) CHECK(eig[k - 1] <= eig[k]);
}

TEST_CASE("min / max-abs eigenvalue helpers") {
    Mat A(2, 2);
    A << 1.0, 2.0, 2.0, 1.0;  // eigenvalues -1 and 3
    CHECK(simrel::min_eigenvalue(A) == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK(simrel::max_abs_eigenvalue(A) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("default PSD tolerance is scale-aware") {
    Mat small = Mat::Identity(2, 2) * 0.001;
    CHECK(simrel::default_psd_tol(small) == doctest::Approx(1e-8));
    Mat big = Mat::Identity(2, 2) * 500.0;
    CHECK(simrel::default_psd_tol(big) == doctest::Approx(5e-6));
}

TEST_CASE("asymmetric input is rejected") {
    Mat A(2, 2);
    A << 1.0, 5.0, 0.0, 1.0;
    CHECK_THROWS_AS(simrel::jacobi_eigenvalues(A), simrel::DimensionError);
}

TEST_CASE("1x1 and diagonal matrices") {
    Mat one(1, 1);
    one << -7.5;
    CHECK(simrel::min_eigenvalue(one) == -7.5);
    Mat d = Mat::Zero(4, 4);
    d.diagonal() << 4.0, -2.0, 0.5, 9.0;
    const auto eig = simrel::jacobi_eigenvalues(d);
    CHECK(eig.front() == doctest::Approx(-2.0));
    CHECK(eig.back() == doctest::Approx(9.0));
}
