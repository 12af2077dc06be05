#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "simrel/errors.hpp"
#include "simrel/sprocedure.hpp"

using simrel::Mat;
using simrel::Vec;

namespace {

// 1-D window problem: q1(z) = z^2 - 1 <= 0 (|z| <= 1), q2(z) = a z^2 - b <= 0.
// lambda Q1 - Q2 = diag(lambda - a, b - lambda), so the multiplier is feasible
// exactly for lambda in [a, b].
simrel::SProcedureProblem window_problem(double a, double b) {
    simrel::SProcedureProblem p;
    p.d = 1;
    p.F1 = Mat::Constant(1, 1, 1.0);
    p.g1 = Vec::Zero(1);
    p.h1 = -1.0;
    p.F2 = Mat::Constant(1, 1, a);
    p.g2 = Vec::Zero(1);
    p.h2 = -b;
    return p;
}

}  // namespace

TEST_CASE("bordered matrix layout") {
    Mat F(2, 2);
    F << 1.0, 2.0, 2.0, 4.0;
    Vec g(2);
    g << 5.0, 6.0;
    const Mat Q = simrel::bordered_matrix(F, g, 7.0);
    REQUIRE(Q.rows() == 3);
    REQUIRE(Q.cols() == 3);
    CHECK(Q(0, 0) == 1.0);
    CHECK(Q(0, 1) == 2.0);
    CHECK(Q(1, 1) == 4.0);
    CHECK(Q(0, 2) == 5.0);
    CHECK(Q(2, 0) == 5.0);
    CHECK(Q(1, 2) == 6.0);
    CHECK(Q(2, 1) == 6.0);
    CHECK(Q(2, 2) == 7.0);
}

TEST_CASE("problem validation") {
    auto p = window_problem(0.3, 0.7);
    CHECK_NOTHROW(p.validate());

    auto bad_d = p;
    bad_d.d = 2;
    CHECK_THROWS_AS(bad_d.validate(), simrel::DimensionError);

    auto bad_g = p;
    bad_g.g1 = Vec::Zero(2);
    CHECK_THROWS_AS(bad_g.validate(), simrel::DimensionError);

    simrel::SProcedureProblem asym;
    asym.d = 2;
    asym.F1 = Mat::Zero(2, 2);
    asym.F1(0, 1) = 1.0;  // not symmetric
    asym.F2 = Mat::Identity(2, 2);
    asym.g1 = Vec::Zero(2);
    asym.g2 = Vec::Zero(2);
    CHECK_THROWS_AS(asym.validate(), simrel::DimensionError);
}

TEST_CASE("feasibility window of the 1-D problem") {
    const auto p = window_problem(0.3, 0.7);
    // Inside the window.
    auto mid = simrel::check_sprocedure(p, 0.5);
    CHECK(mid.pass);
    CHECK(mid.min_eig == doctest::Approx(0.2).epsilon(1e-12));
    // Window edges: min_eig is exactly 0.
    CHECK(simrel::check_sprocedure(p, 0.3).pass);
    CHECK(simrel::check_sprocedure(p, 0.7).pass);
    // Outside.
    auto low = simrel::check_sprocedure(p, 0.1);
    CHECK_FALSE(low.pass);
    CHECK(low.min_eig == doctest::Approx(-0.2).epsilon(1e-12));
    auto high = simrel::check_sprocedure(p, 0.9);
    CHECK_FALSE(high.pass);
    CHECK(high.min_eig == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("negative multiplier is rejected") {
    const auto p = window_problem(0.3, 0.7);
    CHECK_THROWS_AS(simrel::check_sprocedure(p, -0.01), simrel::Error);
}

TEST_CASE("tol_psd override controls the margin") {
    const auto p = window_problem(0.3, 0.7);
    auto strict = simrel::check_sprocedure(p, 0.1, 0.0);
    CHECK_FALSE(strict.pass);
    CHECK(strict.tol == 0.0);
    auto lax = simrel::check_sprocedure(p, 0.1, 0.25);
    CHECK(lax.pass);  // min_eig = -0.2 >= -0.25
    CHECK(lax.tol == 0.25);
}

TEST_CASE("lambda search finds the interior maximizer") {
    const auto p = window_problem(0.3, 0.7);
    const auto r = simrel::search_lambda(p);
    CHECK(r.pass);
    // min_eig(lambda) = min(lambda - 0.3, 0.7 - lambda) peaks at 0.5 with 0.2.
    CHECK(r.lambda == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.min_eig == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("lambda search falls back to the zero endpoint") {
    // q2(z) = -z^2 - 0.5 <= 0 holds unconditionally; the eigmin profile
    // min(lambda + 1, 0.5 - lambda) is maximized on [0, inf) at lambda = 0.
    simrel::SProcedureProblem p;
    p.d = 1;
    p.F1 = Mat::Constant(1, 1, 1.0);
    p.g1 = Vec::Zero(1);
    p.h1 = -1.0;
    p.F2 = Mat::Constant(1, 1, -1.0);
    p.g2 = Vec::Zero(1);
    p.h2 = -0.5;
    const auto r = simrel::search_lambda(p);
    CHECK(r.pass);
    CHECK(r.lambda == 0.0);
    CHECK(r.min_eig == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("lambda search falls back to the upper endpoint") {
    // Window [2, 1e9] truncated by lambda_max = 1e4: eigmin increases over the
    // whole search interval, so the best multiplier is the endpoint itself.
    const auto p = window_problem(2.0, 1e9);
    const auto r = simrel::search_lambda(p);
    CHECK(r.pass);
    CHECK(r.lambda == 1e4);
    CHECK(r.min_eig == doctest::Approx(1e4 - 2.0).epsilon(1e-12));
}

TEST_CASE("infeasible problem reports failure") {
    // Empty window: a = 1 > b = 0.25.  Best eigmin is -(a-b)/2 = -0.375 < 0.
    const auto p = window_problem(1.0, 0.25);
    const auto r = simrel::search_lambda(p);
    CHECK_FALSE(r.pass);
    CHECK(r.min_eig == doctest::Approx(-0.375).epsilon(1e-9));
    CHECK_FALSE(simrel::check_sprocedure(p, 0.625).pass);
}

TEST_CASE("identical constraints certify with unit multiplier") {
    // q1 = q2 = z^2 - 2z - 3 (z in [-1,3]); lambda = 1 gives the zero matrix.
    simrel::SProcedureProblem p;
    p.d = 1;
    p.F1 = Mat::Constant(1, 1, 1.0);
    p.g1 = Vec::Constant(1, -1.0);
    p.h1 = -3.0;
    p.F2 = p.F1;
    p.g2 = p.g1;
    p.h2 = p.h1;
    const auto c = simrel::check_sprocedure(p, 1.0);
    CHECK(c.pass);
    CHECK(std::abs(c.min_eig) <= 1e-12);
}
