#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "simrel/certification.hpp"
#include "simrel/errors.hpp"

using simrel::Mat;
using simrel::Vec;

namespace {

Mat m1(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return m;
}

// Scalar concrete/reduced pair with an analytically tractable certification
// problem (no nonlinearity, deadbeat interface).
struct ScalarPair {
    simrel::NonlinearSystemTuple conc, absr;
    simrel::QuadraticStateRelation rel;
    simrel::QuadraticInputRelation irel;
    simrel::InterfaceParams ifc;
    simrel::ChanceConstraintParams ccp;
};

ScalarPair make_pair() {
    ScalarPair sp;
    sp.conc.A = m1(0.5);
    sp.conc.B = m1(1.0);
    sp.conc.C = m1(0.1);
    sp.conc.D = m1(0.1);
    sp.conc.E = m1(0.0);
    sp.conc.F = m1(0.0);
    sp.conc.R = m1(0.05);
    sp.conc.phi = simrel::make_zero_phi();

    sp.absr.A = m1(0.5);
    sp.absr.B = m1(1.0);
    sp.absr.C = m1(0.01);
    sp.absr.D = m1(1.0);
    sp.absr.E = m1(0.0);
    sp.absr.F = m1(0.0);
    sp.absr.R = m1(0.5);
    sp.absr.phi = simrel::make_zero_phi();

    sp.rel.P = m1(0.1);
    sp.rel.M = m1(1.0);
    sp.rel.eps = 1.0;

    sp.irel.Pw = m1(1.0);
    sp.irel.Mw = m1(1.0);
    sp.irel.eps_w = 0.5;

    sp.ifc.K = m1(-0.5);
    sp.ifc.Q = m1(0.0);
    sp.ifc.S = m1(0.0);
    sp.ifc.L1 = m1(0.0);
    sp.ifc.L2 = m1(0.0);
    sp.ifc.Rtilde = m1(0.1);

    sp.ccp = simrel::make_chance_params(0.01, 0.1, 0.5, 0.05, 1);
    return sp;
}

const simrel::ConditionRecord* find_record(const std::vector<simrel::ConditionRecord>& recs,
                                            const std::string& name) {
    for (const auto& r : recs)
        if (r.name == name) return &r;
    return nullptr;
}

}  // namespace

TEST_CASE("chance parameters derive c_zeta from the chi-square quantile") {
    const auto ccp = simrel::make_chance_params(0.01, 0.1, 0.5, 0.05, 1);
    CHECK(ccp.c_zeta == doctest::Approx(6.634896601021213).epsilon(1e-9));
    CHECK(ccp.delta == 0.01);
    CHECK(ccp.dof == 1);

    const auto two = simrel::make_chance_params(0.001, 0.0, 0.0, 0.0, 2);
    CHECK(two.c_zeta == doctest::Approx(13.815510557964274).epsilon(1e-9));

    const auto manual = simrel::make_chance_params(0.01, 0.1, 0.5, 0.05, 1, 3.5);
    CHECK(manual.c_zeta == 3.5);

    CHECK_THROWS_AS(simrel::make_chance_params(0.0, 0.1, 0.5, 0.05, 1), simrel::Error);
    CHECK_THROWS_AS(simrel::make_chance_params(1.0, 0.1, 0.5, 0.05, 1), simrel::Error);
}

TEST_CASE("output dominance eigenvalue test") {
    Mat C(1, 3);
    C << 0.01, 0.01, 0.01;
    const auto ok = simrel::check_output_dominance(Mat::Identity(3, 3), C);
    CHECK(ok.pass);
    // C'C has the single nonzero eigenvalue 3e-4.
    CHECK(ok.residual == doctest::Approx(1.0 - 3e-4).epsilon(1e-10));

    Mat big(1, 3);
    big << 2.0, 0.0, 0.0;
    const auto bad = simrel::check_output_dominance(Mat::Identity(3, 3), big);
    CHECK_FALSE(bad.pass);
    CHECK(bad.residual == doctest::Approx(-3.0).epsilon(1e-10));

    CHECK_THROWS_AS(simrel::check_output_dominance(Mat::Identity(2, 2), C),
                    simrel::DimensionError);
}

TEST_CASE("structural equalities pass on consistent data and name the violator") {
    const auto sp = make_pair();
    const auto eq = simrel::check_structural_equalities(
        sp.conc, sp.absr, sp.rel.P, sp.irel.Pw, sp.ifc.Q, sp.ifc.S, sp.ifc.L1, sp.ifc.L2,
        1e-6);
    CHECK(eq.pass);
    CHECK(eq.max_residual <= 1e-15);
    REQUIRE(eq.per_equality.size() == 5);
    CHECK(eq.per_equality[0].name == "abstract_output_map");
    CHECK(eq.per_equality[1].name == "abstract_slope_map");
    CHECK(eq.per_equality[2].name == "drift_consistency");
    CHECK(eq.per_equality[3].name == "nonlinearity_consistency");
    CHECK(eq.per_equality[4].name == "internal_input_consistency");

    // Perturb Q: only the drift equality should break.
    const auto broken = simrel::check_structural_equalities(
        sp.conc, sp.absr, sp.rel.P, sp.irel.Pw, m1(0.01), sp.ifc.S, sp.ifc.L1, sp.ifc.L2,
        1e-6);
    CHECK_FALSE(broken.pass);
    const auto* drift = find_record(broken.per_equality, "drift_consistency");
    REQUIRE(drift != nullptr);
    CHECK_FALSE(drift->pass);
    CHECK(drift->residual == doctest::Approx(0.01).epsilon(1e-10));
    for (const auto& rec : broken.per_equality)
        if (rec.name != "drift_consistency") CHECK(rec.pass);
}

TEST_CASE("structural equalities demand all matrices") {
    const auto sp = make_pair();
    CHECK_THROWS_AS(simrel::check_structural_equalities(sp.conc, sp.absr, sp.rel.P,
                                                        sp.irel.Pw, Mat(), sp.ifc.S,
                                                        sp.ifc.L1, sp.ifc.L2, 1e-6),
                    simrel::PrerequisiteError);
}

TEST_CASE("assembled constraint pair has the documented block structure") {
    const auto sp = make_pair();
    const auto prob =
        simrel::assemble_sproc_matrices(sp.conc, sp.absr, sp.rel, sp.irel, sp.ifc, sp.ccp);
    REQUIRE(prob.d == 6);  // n + n + p + mhat + nhat + s with all dims 1

    // F1 = diag(M, 0, Mw, 1, 1, 1).
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const double expect = (i == j && i != 1) ? 1.0 : 0.0;
            CHECK(prob.F1(i, j) == expect);
        }

    // Propagation blocks: T = [A+BK, (B L1+E)F, D, B Rt - P B^, P, R - P R^]
    //                       = [0,    0,         0.1, 0,         0.1, 0].
    Vec t(6);
    t << 0.0, 0.0, 0.1, 0.0, 0.1, 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(prob.F2(i, j) == doctest::Approx(t(i) * t(j)).epsilon(1e-15));

    CHECK(prob.g1.isZero(0.0));
    CHECK(prob.g2.isZero(0.0));
    // h1 = -(eps^2 + eps_w^2 + c_nuhat + c_zeta + beta).
    CHECK(prob.h1 ==
          doctest::Approx(-(1.0 + 0.25 + 0.1 + 6.634896601021213 + 0.05)).epsilon(1e-9));
    CHECK(prob.h2 == -1.0);
}

TEST_CASE("certify_relation issues a certificate on the scalar pair") {
    const auto sp = make_pair();
    const auto out = simrel::certify_relation(sp.conc, sp.absr, sp.rel, sp.irel, sp.ifc,
                                              sp.ccp);
    CHECK(out.certified);
    REQUIRE(out.certificate.has_value());
    // Feasible multiplier window computed by hand scan: [0.01, 0.1245].
    CHECK(out.lambda >= 0.009);
    CHECK(out.lambda <= 0.126);
    CHECK(out.min_eig >= -1e-8);
    CHECK_FALSE(out.certificate->slope_bound_gt_one);

    const auto* sproc = find_record(out.conditions, "s_procedure");
    REQUIRE(sproc != nullptr);
    CHECK(sproc->pass);
    CHECK(sproc->detail.find("searched lambda*") == 0);
    CHECK(find_record(out.conditions, "output_dominance") != nullptr);
    CHECK(find_record(out.conditions, "chance_constraint") != nullptr);
}

TEST_CASE("fixed multiplier path respects the feasibility window") {
    const auto sp = make_pair();
    simrel::CertificationOptions opts;
    opts.fixed_lambda = 0.05;
    const auto inside = simrel::certify_relation(sp.conc, sp.absr, sp.rel, sp.irel, sp.ifc,
                                                 sp.ccp, opts);
    CHECK(inside.certified);
    CHECK(inside.lambda == 0.05);

    opts.fixed_lambda = 0.5;  // outside [0.01, 0.1245]
    const auto outside = simrel::certify_relation(sp.conc, sp.absr, sp.rel, sp.irel, sp.ifc,
                                                  sp.ccp, opts);
    CHECK_FALSE(outside.certified);
    CHECK_FALSE(outside.certificate.has_value());
    const auto* sproc = find_record(outside.conditions, "s_procedure");
    REQUIRE(sproc != nullptr);
    CHECK(sproc->detail.find("fixed lambda") == 0);
}

TEST_CASE("independent coupling cannot be certified") {
    const auto sp = make_pair();
    simrel::CertificationOptions opts;
    opts.coupling = simrel::CouplingMode::independent;
    CHECK_THROWS_AS(
        simrel::certify_relation(sp.conc, sp.absr, sp.rel, sp.irel, sp.ifc, sp.ccp, opts),
        simrel::Error);
}

TEST_CASE("failed dominance skips the S-procedure") {
    auto sp = make_pair();
    sp.conc.C = m1(2.0);  // M - C'C = -3 < 0
    const auto out = simrel::certify_relation(sp.conc, sp.absr, sp.rel, sp.irel, sp.ifc,
                                              sp.ccp);
    CHECK_FALSE(out.certified);
    const auto* dom = find_record(out.conditions, "output_dominance");
    REQUIRE(dom != nullptr);
    CHECK_FALSE(dom->pass);
    const auto* sproc = find_record(out.conditions, "s_procedure");
    REQUIRE(sproc != nullptr);
    CHECK_FALSE(sproc->pass);
    CHECK(sproc->detail.find("skipped") == 0);
}

TEST_CASE("rederive_interface solves the structural equalities") {
    const auto sp = make_pair();
    const auto ifc = simrel::rederive_interface(sp.conc, sp.absr, sp.rel.P, sp.irel.Pw,
                                                sp.rel.M);
    // B = 1, so the pseudo-inverse path reduces to the raw equalities.
    CHECK(ifc.Q(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(ifc.S(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(ifc.L1(0, 0) == 0.0);
    CHECK(ifc.L2(0, 0) == 0.0);
    CHECK(ifc.Rtilde(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(ifc.K(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));  // deadbeat default

    const auto with_k = simrel::rederive_interface(sp.conc, sp.absr, sp.rel.P, sp.irel.Pw,
                                                   sp.rel.M, m1(-0.25));
    CHECK(with_k.K(0, 0) == -0.25);

    // Re-derived gains satisfy the equalities they were solved from.
    const auto eq = simrel::check_structural_equalities(
        sp.conc, sp.absr, sp.rel.P, sp.irel.Pw, ifc.Q, ifc.S, ifc.L1, ifc.L2, 1e-10);
    CHECK(eq.pass);
}

TEST_CASE("rederive_interface uses the pseudo-inverse for tall input maps") {
    // n = 2, m = 1: B+ = B' / (B'B).
    simrel::NonlinearSystemTuple conc;
    conc.A = Mat(2, 2);
    conc.A << 0.5, 0.1, 0.0, 0.3;
    conc.B = Mat(2, 1);
    conc.B << 1.0, 0.5;
    conc.C = Mat(1, 2);
    conc.C << 1.0, 0.0;
    conc.D = Mat::Zero(2, 1);
    conc.E = Mat::Zero(2, 1);
    conc.F = Mat::Zero(1, 2);
    conc.R = Mat::Zero(2, 1);
    conc.phi = simrel::make_zero_phi();

    simrel::NonlinearSystemTuple absr;
    absr.A = m1(0.4);
    absr.B = m1(1.0);
    absr.C = m1(1.0);
    absr.D = m1(0.0);
    absr.E = m1(0.0);
    absr.F = m1(0.0);
    absr.R = m1(0.0);
    absr.phi = simrel::make_zero_phi();

    Mat P(2, 1);
    P << 1.0, 0.0;
    const auto ifc = simrel::rederive_interface(conc, absr, P, m1(1.0), Mat::Identity(2, 2));
    // B+ = [0.8, 0.4]; P A^ - A P = [0.4 - 0.5; -0] = [-0.1; 0]; Q = -0.08.
    CHECK(ifc.Q(0, 0) == doctest::Approx(-0.08).epsilon(1e-12));
    // Deadbeat K = -B+ A = -[0.8*0.5, 0.8*0.1 + 0.4*0.3] = -[0.4, 0.2].
    CHECK(ifc.K(0, 0) == doctest::Approx(-0.4).epsilon(1e-12));
    CHECK(ifc.K(0, 1) == doctest::Approx(-0.2).epsilon(1e-12));
}
