#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "simrel/errors.hpp"
#include "simrel/guarantees.hpp"

using simrel::Mat;
using simrel::Vec;

namespace {

Mat m1(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return m;
}

// Scalar subsystem with no external input (m = 0): x+ = a x + d w + 0.1 z.
simrel::NonlinearSystemTuple sub_no_input(double a, double d) {
    simrel::NonlinearSystemTuple sys;
    sys.A = m1(a);
    sys.B = Mat::Zero(1, 0);
    sys.C = m1(1.0);
    sys.D = m1(d);
    sys.E = m1(0.0);
    sys.F = m1(0.0);
    sys.R = m1(0.1);
    sys.phi = simrel::make_zero_phi();
    return sys;
}

simrel::NonlinearSystemTuple sub_with_input(double a, double d) {
    auto sys = sub_no_input(a, d);
    sys.B = m1(1.0);
    return sys;
}

simrel::NetworkTopology two_ring() {
    simrel::NetworkTopology topo;
    topo.n_subsystems = 2;
    simrel::NetworkEdge e01;
    e01.from = 0;
    e01.to = 1;
    e01.C = m1(0.7);
    e01.Chat = m1(0.7);
    simrel::NetworkEdge e10;
    e10.from = 1;
    e10.to = 0;
    e10.C = m1(0.9);
    e10.Chat = m1(0.9);
    topo.edges = {e01, e10};
    return topo;
}

simrel::RelationCertificate twin_cert(bool with_input) {
    simrel::RelationCertificate c;
    c.rel.P = m1(1.0);
    c.rel.M = m1(1.0);
    c.rel.eps = 0.5;
    c.delta = 0.01;
    if (with_input) {
        c.ifc.K = m1(0.0);
        c.ifc.Q = m1(0.0);
        c.ifc.S = m1(0.0);
        c.ifc.L1 = m1(0.0);
        c.ifc.L2 = m1(0.0);
        c.ifc.Rtilde = m1(1.0);
    } else {
        c.ifc.K = Mat::Zero(0, 1);
        c.ifc.Q = Mat::Zero(0, 1);
        c.ifc.S = Mat::Zero(0, 1);
        c.ifc.L1 = Mat::Zero(0, 1);
        c.ifc.L2 = Mat::Zero(0, 1);
        c.ifc.Rtilde = Mat::Zero(0, 0);
    }
    return c;
}

simrel::ComposedRelation twin_composed(bool with_input) {
    simrel::ComposedRelation comp;
    comp.certs = {twin_cert(with_input), twin_cert(with_input)};
    comp.eps = 1.0;
    comp.delta = 1.0 - 0.99 * 0.99;
    return comp;
}

simrel::EventTube box_tube(int T, double lo, double hi) {
    simrel::EventTube tube;
    for (int k = 0; k <= T; ++k) {
        simrel::OutputBox b;
        b.lower = Vec::Constant(2, lo);
        b.upper = Vec::Constant(2, hi);
        tube.boxes.push_back(b);
    }
    return tube;
}

}  // namespace

TEST_CASE("closeness constant against frozen oracles") {
    CHECK(simrel::gamma_of_horizon(0.003, 10) ==
          doctest::Approx(0.032509428381929939).epsilon(1e-14));
    CHECK(simrel::gamma_of_horizon(0.005, 5) ==
          doctest::Approx(0.029627490643734378).epsilon(1e-14));
    CHECK(simrel::gamma_of_horizon(0.001, 10) ==
          doctest::Approx(0.010945164670461582).epsilon(1e-14));
    CHECK(simrel::gamma_of_horizon(0.0039940039989999621, 10) ==
          doctest::Approx(0.043067109327986741).epsilon(1e-14));
    CHECK(simrel::gamma_of_horizon(0.01, 6) ==
          doctest::Approx(0.067934652093010084).epsilon(1e-14));
}

TEST_CASE("closeness constant boundaries and guards") {
    CHECK(simrel::gamma_of_horizon(0.0, 7) == 0.0);
    CHECK(simrel::gamma_of_horizon(1.0, 0) == 1.0);
    CHECK(simrel::gamma_of_horizon(0.25, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK_THROWS_AS(simrel::gamma_of_horizon(-0.1, 3), simrel::Error);
    CHECK_THROWS_AS(simrel::gamma_of_horizon(1.1, 3), simrel::Error);
    CHECK_THROWS_AS(simrel::gamma_of_horizon(0.1, -1), simrel::Error);

    const auto cert = simrel::make_closeness_certificate(2.5, 0.01, 6);
    CHECK(cert.eps == 2.5);
    CHECK(cert.delta == 0.01);
    CHECK(cert.horizon == 6);
    CHECK(cert.gamma == doctest::Approx(0.067934652093010084).epsilon(1e-14));
}

TEST_CASE("output box membership") {
    simrel::OutputBox b;
    b.lower = Vec::Constant(2, -1.0);
    b.upper = Vec::Constant(2, 1.0);
    Vec inside(2), edge(2), outside(2);
    inside << 0.0, 0.5;
    edge << 1.0, -1.0;
    outside << 0.0, 1.0001;
    CHECK(b.contains(inside));
    CHECK(b.contains(edge));  // faces are inclusive
    CHECK_FALSE(b.contains(outside));
    CHECK_THROWS_AS(b.contains(Vec::Zero(3)), simrel::DimensionError);

    b.empty = true;
    CHECK_FALSE(b.contains(inside));
}

TEST_CASE("tube validation") {
    simrel::EventTube none;
    CHECK_THROWS_AS(none.validate(), simrel::Error);

    auto tube = box_tube(3, 0.0, 1.0);
    CHECK(tube.horizon() == 3);
    CHECK_NOTHROW(tube.validate());

    auto crossed = tube;
    crossed.boxes[1].lower = Vec::Constant(2, 2.0);  // lower > upper, not flagged
    CHECK_THROWS_AS(crossed.validate(), simrel::Error);
    crossed.boxes[1].empty = true;
    CHECK_NOTHROW(crossed.validate());
}

TEST_CASE("tube expansion and contraction move every face by eps") {
    const auto tube = box_tube(2, 0.0, 1.0);
    const auto grown = simrel::expand_tube(tube, 0.25);
    const auto shrunk = simrel::contract_tube(tube, 0.25);
    for (int k = 0; k <= 2; ++k) {
        CHECK(grown.boxes[k].lower(0) == -0.25);
        CHECK(grown.boxes[k].upper(0) == 1.25);
        CHECK(shrunk.boxes[k].lower(0) == 0.25);
        CHECK(shrunk.boxes[k].upper(0) == 0.75);
        CHECK_FALSE(shrunk.boxes[k].empty);
    }
    // Over-contraction collapses to the empty event.
    const auto gone = simrel::contract_tube(tube, 0.6);
    for (int k = 0; k <= 2; ++k) {
        CHECK(gone.boxes[k].empty);
        CHECK_FALSE(gone.boxes[k].contains(Vec::Constant(2, 0.5)));
    }
    CHECK_THROWS_AS(simrel::expand_tube(tube, -0.1), simrel::Error);
    CHECK_THROWS_AS(simrel::contract_tube(tube, -0.1), simrel::Error);
}

TEST_CASE("probability transfer clamps to the unit interval") {
    const auto cert = simrel::make_closeness_certificate(1.0, 0.01, 9);  // gamma ~ 0.0956
    const auto mid = simrel::bound_event_probability(cert, 0.5, 0.6);
    CHECK(mid.lo == doctest::Approx(0.5 - cert.gamma).epsilon(1e-14));
    CHECK(mid.hi == doctest::Approx(0.6 + cert.gamma).epsilon(1e-14));

    const auto clamped = simrel::bound_event_probability(cert, 0.01, 0.99);
    CHECK(clamped.lo == 0.0);
    CHECK(clamped.hi == 1.0);

    CHECK_THROWS_AS(simrel::bound_event_probability(cert, -0.1, 0.5), simrel::Error);
    CHECK_THROWS_AS(simrel::bound_event_probability(cert, 0.5, 1.1), simrel::Error);

    // Crossed bounds (contracted above expanded beyond gamma) are rejected.
    const auto tight = simrel::make_closeness_certificate(1.0, 0.0, 5);  // gamma = 0
    CHECK_THROWS_AS(simrel::bound_event_probability(tight, 0.9, 0.1), simrel::Error);
}

TEST_CASE("two-step union bound is exact arithmetic") {
    simrel::TwoStepBound b;
    b.eps1 = 15.0;
    b.gamma1 = 0.8794;
    b.eps2 = 5.0;
    b.gamma2 = 0.0117;
    const auto c = simrel::two_step_union_bound(b);
    CHECK(c.eps_total == 20.0);
    CHECK(c.gamma_total == 0.8911);  // 0.8794 + 0.0117 is exact in doubles

    b.gamma1 = 0.7;
    b.gamma2 = 0.6;
    CHECK(simrel::two_step_union_bound(b).gamma_total == 1.0);
}

TEST_CASE("identical twins under shared noise retain the relation always") {
    simrel::InterconnectedSystem conc({sub_no_input(0.5, 0.2), sub_no_input(0.3, 0.6)},
                                      two_ring());
    simrel::InterconnectedSystem absr({sub_no_input(0.5, 0.2), sub_no_input(0.3, 0.6)},
                                      two_ring());
    const auto comp = twin_composed(false);
    Vec x0(2);
    x0 << 0.01, -0.02;

    simrel::ValidationOptions opts;
    opts.trials = 300;
    opts.horizon = 6;
    opts.seed = 5;
    const auto rep = simrel::monte_carlo_validate(conc, absr, comp, x0, x0, opts);
    CHECK(rep.trials == 300);
    CHECK(rep.horizon == 6);
    CHECK(rep.retained == 300);
    CHECK(rep.retention_freq == 1.0);
    CHECK(rep.retention_ok);
    CHECK(rep.max_deviation == 0.0);
    CHECK(rep.deviation_ok);
    CHECK(rep.sink_forfeits == 0);
    CHECK_FALSE(rep.tube_reported);
    CHECK(rep.theoretical_retention ==
          doctest::Approx(std::pow(1.0 - comp.delta, 7)).epsilon(1e-15));
}

TEST_CASE("random-ball nu-hat drives both sides identically") {
    simrel::InterconnectedSystem conc({sub_with_input(0.5, 0.2), sub_with_input(0.3, 0.6)},
                                      two_ring());
    simrel::InterconnectedSystem absr({sub_with_input(0.5, 0.2), sub_with_input(0.3, 0.6)},
                                      two_ring());
    const auto comp = twin_composed(true);
    Vec x0 = Vec::Zero(2);

    simrel::ValidationOptions opts;
    opts.trials = 200;
    opts.horizon = 5;
    opts.seed = 11;
    opts.nuhat_mode = simrel::NuHatMode::random_ball;
    opts.c_nuhat = 0.25;
    const auto rep = simrel::monte_carlo_validate(conc, absr, comp, x0, x0, opts);
    CHECK(rep.retained == 200);
    CHECK(rep.max_deviation == 0.0);
}

TEST_CASE("tube reporting with generous boxes") {
    simrel::InterconnectedSystem conc({sub_no_input(0.5, 0.2), sub_no_input(0.3, 0.6)},
                                      two_ring());
    simrel::InterconnectedSystem absr({sub_no_input(0.5, 0.2), sub_no_input(0.3, 0.6)},
                                      two_ring());
    const auto comp = twin_composed(false);
    Vec x0 = Vec::Zero(2);
    const auto tube = box_tube(4, -100.0, 100.0);

    simrel::ValidationOptions opts;
    opts.trials = 150;
    opts.horizon = 4;
    opts.seed = 2;
    opts.tube = &tube;
    const auto rep = simrel::monte_carlo_validate(conc, absr, comp, x0, x0, opts);
    CHECK(rep.tube_reported);
    CHECK(rep.event_freq_concrete == 1.0);
    CHECK(rep.event_freq_abstract_contracted == 1.0);
    CHECK(rep.event_freq_abstract_expanded == 1.0);
    CHECK(rep.event_ok);
    CHECK(rep.event_bounds.hi == 1.0);
    CHECK(rep.event_bounds.lo ==
          doctest::Approx(1.0 - simrel::gamma_of_horizon(comp.delta, 4)).epsilon(1e-14));

    const auto lines = simrel::format_validation_report(rep);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0].find("relation_retention ") == 0);
    CHECK(lines[0].find("verdict=pass") != std::string::npos);
    CHECK(lines[3].find("sink_forfeits count=0") == 0);
    CHECK(lines[4].find("tube_event_probability ") == 0);
}

TEST_CASE("companion quantization counts sink exits as retention loss") {
    simrel::InterconnectedSystem conc({sub_no_input(0.5, 0.2), sub_no_input(0.3, 0.6)},
                                      two_ring());
    simrel::InterconnectedSystem absr({sub_no_input(0.5, 0.2), sub_no_input(0.3, 0.6)},
                                      two_ring());
    const auto comp = twin_composed(false);
    Vec x0 = Vec::Zero(2);

    simrel::ValidationOptions opts;
    opts.trials = 200;
    opts.horizon = 5;
    opts.seed = 13;
    // A +-0.05 companion box around the origin: the 0.1-sigma noise channel
    // exits it with high probability, forfeiting the trial.
    opts.companion_partitions = {simrel::build_partition({-0.05}, {0.05}, {0.05}),
                                 simrel::build_partition({-0.05}, {0.05}, {0.05})};
    const auto rep = simrel::monte_carlo_validate(conc, absr, comp, x0, x0, opts);
    CHECK(rep.sink_forfeits > 0);
    CHECK(rep.retained <= rep.trials - rep.sink_forfeits);
    CHECK(rep.deviation_ok);  // retained runs stay within eps = 1
}

TEST_CASE("validation rejects malformed setups") {
    simrel::InterconnectedSystem conc({sub_no_input(0.5, 0.2), sub_no_input(0.3, 0.6)},
                                      two_ring());
    simrel::InterconnectedSystem absr({sub_no_input(0.5, 0.2), sub_no_input(0.3, 0.6)},
                                      two_ring());
    const auto comp = twin_composed(false);
    Vec x0 = Vec::Zero(2);

    simrel::ValidationOptions few;
    few.trials = 99;
    CHECK_THROWS_AS(simrel::monte_carlo_validate(conc, absr, comp, x0, x0, few),
                    simrel::Error);

    simrel::ValidationOptions bad_tube;
    bad_tube.trials = 100;
    bad_tube.horizon = 5;
    const auto tube = box_tube(2, -1.0, 1.0);  // horizon 2 != 5
    bad_tube.tube = &tube;
    CHECK_THROWS_AS(simrel::monte_carlo_validate(conc, absr, comp, x0, x0, bad_tube),
                    simrel::DimensionError);

    simrel::ValidationOptions ok;
    ok.trials = 100;
    CHECK_THROWS_AS(simrel::monte_carlo_validate(conc, absr, comp, Vec::Zero(3), x0, ok),
                    simrel::DimensionError);

    auto thin = comp;
    thin.certs.pop_back();
    CHECK_THROWS_AS(simrel::monte_carlo_validate(conc, absr, thin, x0, x0, ok),
                    simrel::PrerequisiteError);
}

TEST_CASE("thread count does not change the validation report") {
    simrel::InterconnectedSystem conc({sub_no_input(0.5, 0.2), sub_no_input(0.3, 0.6)},
                                      two_ring());
    simrel::InterconnectedSystem absr({sub_no_input(0.5, 0.2), sub_no_input(0.3, 0.6)},
                                      two_ring());
    const auto comp = twin_composed(false);
    Vec x0(2);
    x0 << 0.05, -0.05;
    const auto tube = box_tube(5, -3.0, 3.0);

    simrel::ValidationOptions one;
    one.trials = 400;
    one.horizon = 5;
    one.seed = 77;
    one.tube = &tube;
    auto four = one;
    four.threads = 4;
    one.threads = 1;

    const auto a = simrel::monte_carlo_validate(conc, absr, comp, x0, x0, one);
    const auto b = simrel::monte_carlo_validate(conc, absr, comp, x0, x0, four);
    CHECK(a.retained == b.retained);
    CHECK(a.max_deviation == b.max_deviation);
    CHECK(a.sink_forfeits == b.sink_forfeits);
    CHECK(a.event_freq_concrete == b.event_freq_concrete);
    CHECK(a.event_freq_abstract_contracted == b.event_freq_abstract_contracted);
    CHECK(a.event_freq_abstract_expanded == b.event_freq_abstract_expanded);
    const auto la = simrel::format_validation_report(a);
    const auto lb = simrel::format_validation_report(b);
    REQUIRE(la.size() == lb.size());
    for (std::size_t i = 0; i < la.size(); ++i) CHECK(la[i] == lb[i]);
}
