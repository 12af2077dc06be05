#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "simrel/errors.hpp"
#include "simrel/relations.hpp"

using simrel::Mat;
using simrel::Vec;

namespace {

Mat m1(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return m;
}

simrel::NonlinearSystemTuple sine_sys(double f_coef) {
    simrel::NonlinearSystemTuple sys;
    sys.A = m1(0.5);
    sys.B = m1(1.0);
    sys.C = m1(1.0);
    sys.D = m1(0.0);
    sys.E = m1(0.2);
    sys.F = m1(f_coef);
    sys.R = m1(0.1);
    sys.phi = simrel::make_sine_phi(1.0);
    return sys;
}

simrel::InterfaceParams scalar_interface(double K, double Q, double S, double L1, double L2,
                                         double Rt) {
    simrel::InterfaceParams ifc;
    ifc.K = m1(K);
    ifc.Q = m1(Q);
    ifc.S = m1(S);
    ifc.L1 = m1(L1);
    ifc.L2 = m1(L2);
    ifc.Rtilde = m1(Rt);
    return ifc;
}

}  // namespace

TEST_CASE("state relation validation") {
    simrel::QuadraticStateRelation rel;
    rel.P = Mat::Identity(2, 2);
    rel.M = Mat::Identity(2, 2);
    rel.eps = 1.0;
    CHECK_NOTHROW(rel.validate());

    auto asym = rel;
    asym.M(0, 1) = 0.5;  // only upper triangle touched
    CHECK_THROWS_AS(asym.validate(), simrel::DimensionError);

    auto indef = rel;
    indef.M(0, 0) = -1.0;
    CHECK_THROWS_AS(indef.validate(), simrel::Error);

    auto flat = rel;
    flat.eps = 0.0;
    CHECK_THROWS_AS(flat.validate(), simrel::Error);

    auto badp = rel;
    badp.P = Mat::Identity(3, 2);
    CHECK_THROWS_AS(badp.validate(), simrel::DimensionError);
}

TEST_CASE("input relation validation") {
    simrel::QuadraticInputRelation rel;
    rel.Pw = m1(1.0);
    rel.Mw = m1(1.0);
    rel.eps_w = 0.5;
    CHECK_NOTHROW(rel.validate());

    auto flat = rel;
    flat.eps_w = -0.1;
    CHECK_THROWS_AS(flat.validate(), simrel::Error);

    auto indef = rel;
    indef.Mw = m1(0.0);
    CHECK_THROWS_AS(indef.validate(), simrel::Error);
}

TEST_CASE("quadratic form hand values") {
    simrel::QuadraticStateRelation rel;
    rel.P = Mat(2, 1);
    rel.P << 1.0, 1.0;
    rel.M = Mat::Zero(2, 2);
    rel.M(0, 0) = 2.0;
    rel.M(1, 1) = 1.0;
    rel.eps = 2.0;
    Vec x(2), xh(1);
    x << 1.0, 2.0;
    xh << 0.5;
    // d = (0.5, 1.5); form = 2*0.25 + 1*2.25 = 2.75.
    CHECK(rel.form(x, xh) == doctest::Approx(2.75).epsilon(1e-15));
    CHECK(simrel::state_in_relation(rel, x, xh));  // 2.75 <= 4

    Vec wrong = Vec::Zero(3);
    CHECK_THROWS_AS(rel.form(wrong, xh), simrel::DimensionError);
}

TEST_CASE("relation membership boundary is inclusive") {
    simrel::QuadraticStateRelation rel;
    rel.P = m1(1.0);
    rel.M = m1(1.0);
    rel.eps = 1.0;
    Vec x = Vec::Constant(1, 2.0), xh = Vec::Constant(1, 1.0);
    CHECK(simrel::state_in_relation(rel, x, xh));  // form == eps^2 exactly
    x(0) = 2.0 + 1e-9;
    CHECK_FALSE(simrel::state_in_relation(rel, x, xh));

    simrel::QuadraticInputRelation irel;
    irel.Pw = m1(1.0);
    irel.Mw = m1(4.0);
    irel.eps_w = 1.0;
    Vec w = Vec::Constant(1, 0.5), wh = Vec::Zero(1);
    CHECK(simrel::input_in_relation(irel, w, wh));  // 4*0.25 == 1
    w(0) = 0.5 + 1e-9;
    CHECK_FALSE(simrel::input_in_relation(irel, w, wh));
}

TEST_CASE("refine_input matches the hand-computed oracle") {
    // nu = K(x-P xh) + Q xh + Rt nuh + S wh + L1 sin(F x) - L2 sin(F P xh).
    const auto sys = sine_sys(0.7);
    const auto ifc = scalar_interface(-0.4, 0.2, 0.3, 0.5, 0.25, 1.1);
    simrel::QuadraticStateRelation rel;
    rel.P = m1(0.1);
    rel.M = m1(1.0);
    rel.eps = 1.0;
    Vec x = Vec::Constant(1, 0.8), xh = Vec::Constant(1, 2.0), wh = Vec::Constant(1, -0.4),
        nuh = Vec::Constant(1, 0.6);
    const Vec nu = simrel::refine_input(ifc, sys, rel, x, xh, wh, nuh);
    CHECK(nu(0) == doctest::Approx(0.93070732029938263).epsilon(1e-14));
}

TEST_CASE("refine_input validates dimensions") {
    const auto sys = sine_sys(0.7);
    const auto ifc = scalar_interface(-0.4, 0.2, 0.3, 0.5, 0.25, 1.1);
    simrel::QuadraticStateRelation rel;
    rel.P = m1(0.1);
    rel.M = m1(1.0);
    rel.eps = 1.0;
    Vec ok = Vec::Zero(1), wrong = Vec::Zero(2);
    CHECK_THROWS_AS(simrel::refine_input(ifc, sys, rel, wrong, ok, ok, ok),
                    simrel::DimensionError);
    CHECK_THROWS_AS(simrel::refine_input(ifc, sys, rel, ok, ok, wrong, ok),
                    simrel::DimensionError);
}

TEST_CASE("coupled_step feeds the same draw to both sides in shared mode") {
    const auto conc = sine_sys(0.7);
    auto absr = sine_sys(0.3);
    const auto ifc = scalar_interface(-0.4, 0.2, 0.3, 0.5, 0.25, 1.1);
    simrel::QuadraticStateRelation rel;
    rel.P = m1(0.1);
    rel.M = m1(1.0);
    rel.eps = 1.0;
    simrel::LiftedCoupling coupling;  // shared_noise by default

    simrel::NoiseSource src(11, 2, 1), mirror(11, 2, 1);
    Vec x = Vec::Constant(1, 0.8), xh = Vec::Constant(1, 2.0), w = Vec::Constant(1, 0.1),
        wh = Vec::Constant(1, -0.4), nuh = Vec::Constant(1, 0.6);
    const auto step = simrel::coupled_step(conc, absr, ifc, rel, coupling, x, xh, w, wh, nuh, src);

    const Vec z = mirror.draw();
    const Vec nu_expect = simrel::refine_input(ifc, conc, rel, x, xh, wh, nuh);
    CHECK(step.nu(0) == nu_expect(0));
    CHECK(step.x_next(0) == doctest::Approx(conc.step(x, nu_expect, w, z)(0)).epsilon(1e-15));
    CHECK(step.xhat_next(0) == doctest::Approx(absr.step(xh, nuh, wh, z)(0)).epsilon(1e-15));
}

TEST_CASE("shared mode rejects unequal noise dimensions") {
    const auto conc = sine_sys(0.7);
    auto absr = sine_sys(0.3);
    absr.R = Mat::Zero(1, 2);  // s_hat = 2 != s = 1
    const auto ifc = scalar_interface(-0.4, 0.2, 0.3, 0.5, 0.25, 1.1);
    simrel::QuadraticStateRelation rel;
    rel.P = m1(0.1);
    rel.M = m1(1.0);
    rel.eps = 1.0;
    simrel::LiftedCoupling coupling;
    simrel::NoiseSource src(11, 2, 1);
    Vec v1 = Vec::Zero(1);
    CHECK_THROWS_AS(
        simrel::coupled_step(conc, absr, ifc, rel, coupling, v1, v1, v1, v1, v1, src),
        simrel::DimensionError);
}

TEST_CASE("independent mode draws from a second source") {
    const auto conc = sine_sys(0.7);
    const auto absr = sine_sys(0.3);
    const auto ifc = scalar_interface(-0.4, 0.2, 0.3, 0.5, 0.25, 1.1);
    simrel::QuadraticStateRelation rel;
    rel.P = m1(0.1);
    rel.M = m1(1.0);
    rel.eps = 1.0;

    simrel::LiftedCoupling missing;
    missing.mode = simrel::CouplingMode::independent;
    simrel::NoiseSource src(11, 2, 1);
    Vec v1 = Vec::Zero(1);
    CHECK_THROWS_AS(
        simrel::coupled_step(conc, absr, ifc, rel, missing, v1, v1, v1, v1, v1, src),
        simrel::Error);

    simrel::NoiseSource second(11, 9, 1);
    simrel::NoiseSource src2(11, 2, 1), mirror(11, 2, 1), mirror2(11, 9, 1);
    simrel::LiftedCoupling coupling;
    coupling.mode = simrel::CouplingMode::independent;
    coupling.independent_source = &second;
    Vec x = Vec::Constant(1, 0.8), xh = Vec::Constant(1, 2.0), w = Vec::Constant(1, 0.1),
        wh = Vec::Constant(1, -0.4), nuh = Vec::Constant(1, 0.6);
    const auto step =
        simrel::coupled_step(conc, absr, ifc, rel, coupling, x, xh, w, wh, nuh, src2);

    const Vec z = mirror.draw(), zh = mirror2.draw();
    CHECK(z(0) != zh(0));
    const Vec nu_expect = simrel::refine_input(ifc, conc, rel, x, xh, wh, nuh);
    CHECK(step.x_next(0) == doctest::Approx(conc.step(x, nu_expect, w, z)(0)).epsilon(1e-15));
    CHECK(step.xhat_next(0) == doctest::Approx(absr.step(xh, nuh, wh, zh)(0)).epsilon(1e-15));
}
