#include "simrel/guarantees.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "simrel/errors.hpp"
#include "simrel/parallel.hpp"
#include "simrel/relations.hpp"
#include "simrel/rng.hpp"

namespace simrel {

double gamma_of_horizon(double delta, int T) {
    if (delta < 0.0 || delta > 1.0) throw Error("delta must lie in [0,1]");
    if (T < 0) throw Error("horizon must be nonnegative");
    const double g = 1.0 - std::pow(1.0 - delta, T + 1);
    return std::min(1.0, std::max(0.0, g));
}

ClosenessCertificate make_closeness_certificate(double eps, double delta, int T) {
    ClosenessCertificate c;
    c.eps = eps;
    c.delta = delta;
    c.horizon = T;
    c.gamma = gamma_of_horizon(delta, T);
    return c;
}

bool OutputBox::contains(const Vec& y) const {
    if (empty) return false;
    if (y.size() != lower.size()) throw DimensionError("tube membership: dimension mismatch");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] < lower[i] || y[i] > upper[i]) return false;
    return true;
}

void EventTube::validate() const {
    if (boxes.empty()) throw Error("event tube must cover at least time step 0");
    for (const OutputBox& b : boxes) {
        if (b.lower.size() != b.upper.size())
            throw DimensionError("tube box lower/upper dimension mismatch");
        if (!b.empty)
            for (Eigen::Index i = 0; i < b.lower.size(); ++i)
                if (b.lower[i] > b.upper[i])
                    throw Error("tube box has lower > upper without empty flag");
    }
}

namespace {
EventTube adjust_tube(const EventTube& tube, double delta_per_face) {
    EventTube out = tube;
    for (OutputBox& b : out.boxes) {
        if (b.empty) continue;
        bool empty = false;
        for (Eigen::Index i = 0; i < b.lower.size(); ++i) {
            b.lower[i] -= delta_per_face;
            b.upper[i] += delta_per_face;
            if (b.lower[i] > b.upper[i]) empty = true;
        }
        if (empty) {
            b.empty = true;
            b.lower.setZero();
            b.upper.setZero();
        }
    }
    return out;
}
}  // namespace

EventTube expand_tube(const EventTube& tube, double eps) {
    if (eps < 0.0) throw Error("expansion radius must be nonnegative");
    return adjust_tube(tube, eps);
}

EventTube contract_tube(const EventTube& tube, double eps) {
    if (eps < 0.0) throw Error("contraction radius must be nonnegative");
    return adjust_tube(tube, -eps);
}

ProbabilityBounds bound_event_probability(const ClosenessCertificate& cert,
                                          double abstract_prob_contracted,
                                          double abstract_prob_expanded) {
    if (abstract_prob_contracted < 0.0 || abstract_prob_contracted > 1.0 ||
        abstract_prob_expanded < 0.0 || abstract_prob_expanded > 1.0)
        throw Error("abstract probabilities must lie in [0,1]");
    ProbabilityBounds b;
    b.lo = std::max(0.0, abstract_prob_contracted - cert.gamma);
    b.hi = std::min(1.0, abstract_prob_expanded + cert.gamma);
    if (b.lo > b.hi) throw Error("probability bounds crossed; inputs inconsistent");
    return b;
}

CombinedBound two_step_union_bound(const TwoStepBound& b) {
    CombinedBound out;
    out.eps_total = b.eps1 + b.eps2;
    out.gamma_total = std::min(1.0, b.gamma1 + b.gamma2);
    return out;
}

namespace {

struct TrialOutcome {
    bool retained = false;
    bool sink_forfeit = false;
    double max_dev = 0.0;        // over the whole horizon, retention runs only
    bool concrete_in_tube = false;
    bool abstract_in_contracted = false;
    bool abstract_in_expanded = false;
};

}  // namespace

ValidationReport monte_carlo_validate(const InterconnectedSystem& conc_net,
                                      const InterconnectedSystem& abs_net,
                                      const ComposedRelation& composed, const Vec& x0_full,
                                      const Vec& xhat0_full, const ValidationOptions& opts) {
    if (opts.trials < 100)
        throw Error("at least 100 trials required for meaningful intervals");
    if (opts.horizon < 0) throw Error("horizon must be nonnegative");
    const int N = conc_net.count();
    if (abs_net.count() != N)
        throw DimensionError("concrete and abstract networks must have equal subsystem count");
    if (static_cast<int>(composed.certs.size()) != N)
        throw PrerequisiteError("composed relation must carry one certificate per subsystem");
    if (!opts.companion_partitions.empty() &&
        static_cast<int>(opts.companion_partitions.size()) != N)
        throw DimensionError("companion partitions must match subsystem count");
    if (x0_full.size() != conc_net.n_total() || xhat0_full.size() != abs_net.n_total())
        throw DimensionError("initial state dimension mismatch");
    for (int i = 0; i < N; ++i) {
        if (conc_net.subsystem(i).s() != abs_net.subsystem(i).s())
            throw DimensionError("shared-noise validation needs equal noise dimensions");
        if (conc_net.subsystem(i).q() != abs_net.subsystem(i).q())
            throw DimensionError("output dimensions must match for deviation checks");
    }

    const int T = opts.horizon;
    EventTube contracted, expanded;
    if (opts.tube != nullptr) {
        opts.tube->validate();
        if (opts.tube->horizon() != T)
            throw DimensionError("tube horizon does not match validation horizon");
        contracted = contract_tube(*opts.tube, composed.eps);
        expanded = expand_tube(*opts.tube, composed.eps);
    }

    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(opts.trials));
    parallel_for_static(static_cast<std::size_t>(opts.trials), opts.threads,
                        [&](std::size_t trial) {
        const std::uint64_t base = NoiseSource::derive(opts.seed, trial);
        std::vector<NoiseSource> noise;
        noise.reserve(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i)
            noise.emplace_back(base, static_cast<std::uint64_t>(i),
                               conc_net.subsystem(i).s());
        NoiseSource aux(base, static_cast<std::uint64_t>(N), std::max(1, abs_net.m_total()));

        TrialOutcome& res = outcomes[trial];
        Vec x = x0_full;
        Vec xh = xhat0_full;
        bool in_relation = true;
        bool conc_tube = true, abs_con = true, abs_exp = true;
        double max_dev = 0.0;
        for (int k = 0; k <= T; ++k) {
            // Relation membership and output deviation at time k.
            Vec y(conc_net.q_total()), yh(abs_net.q_total());
            for (int i = 0; i < N; ++i) {
                const auto& sub = conc_net.subsystem(i);
                const auto& subh = abs_net.subsystem(i);
                const Vec xi = x.segment(conc_net.state_offset(i), sub.n());
                const Vec xhi = xh.segment(abs_net.state_offset(i), subh.n());
                if (!state_in_relation(composed.certs[static_cast<std::size_t>(i)].rel, xi, xhi))
                    in_relation = false;
                y.segment(conc_net.output_offset(i), sub.q()) = sub.output(xi);
                yh.segment(abs_net.output_offset(i), subh.q()) = subh.output(xhi);
            }
            max_dev = std::max(max_dev, (y - yh).norm());
            if (opts.tube != nullptr) {
                conc_tube = conc_tube && opts.tube->boxes[static_cast<std::size_t>(k)].contains(y);
                abs_con = abs_con && contracted.boxes[static_cast<std::size_t>(k)].contains(yh);
                abs_exp = abs_exp && expanded.boxes[static_cast<std::size_t>(k)].contains(yh);
            }
            if (k == T) break;

            // Choose nu-hat, refine, and advance both sides with shared noise.
            Vec nuhat_full;
            if (opts.nuhat_provider) {
                nuhat_full = opts.nuhat_provider(k, xh);
                if (nuhat_full.size() != abs_net.m_total())
                    throw DimensionError("nuhat provider returned wrong dimension");
            } else if (opts.nuhat_mode == NuHatMode::zero) {
                nuhat_full = Vec::Zero(abs_net.m_total());
            } else {
                nuhat_full = Vec(abs_net.m_total());
                for (int i = 0; i < N; ++i) {
                    const int mi = abs_net.subsystem(i).m();
                    if (mi == 0) continue;
                    // Uniform draw in the ball ||nuhat||^2 <= c_nuhat.
                    Vec dir(mi);
                    for (int j = 0; j < mi; ++j) dir[j] = aux.normal();
                    const double nrm = dir.norm();
                    if (nrm > 0.0) dir /= nrm;
                    const double radius = std::sqrt(std::max(0.0, opts.c_nuhat)) *
                                          std::pow(aux.uniform01(), 1.0 / mi);
                    nuhat_full.segment(abs_net.input_offset(i), mi) = radius * dir;
                }
            }

            Vec x_next(conc_net.n_total()), xh_next(abs_net.n_total());
            for (int i = 0; i < N; ++i) {
                const auto& sub = conc_net.subsystem(i);
                const auto& subh = abs_net.subsystem(i);
                const auto& cert = composed.certs[static_cast<std::size_t>(i)];
                const Vec xi = x.segment(conc_net.state_offset(i), sub.n());
                const Vec xhi = xh.segment(abs_net.state_offset(i), subh.n());
                const Vec wi = conc_net.internal_input(i, x);
                const Vec whi = abs_net.internal_input(i, xh);
                const Vec nuhi = nuhat_full.segment(abs_net.input_offset(i), subh.m());
                const Vec nui = refine_input(cert.ifc, sub, cert.rel, xi, xhi, whi, nuhi);
                const Vec z = noise[static_cast<std::size_t>(i)].draw();
                x_next.segment(conc_net.state_offset(i), sub.n()) =
                    sub.step(xi, nui, wi, z);
                Vec xh_step = subh.step(xhi, nuhi, whi, z);
                if (!opts.companion_partitions.empty()) {
                    const PiXResult q =
                        pi_x(opts.companion_partitions[static_cast<std::size_t>(i)], xh_step);
                    if (q.sink) {
                        res.sink_forfeit = true;
                        in_relation = false;
                    } else {
                        xh_step = q.representative;
                    }
                }
                xh_next.segment(abs_net.state_offset(i), subh.n()) = xh_step;
            }
            x = x_next;
            xh = xh_next;
            if (res.sink_forfeit) break;
        }
        res.retained = in_relation && !res.sink_forfeit;
        res.max_dev = max_dev;
        res.concrete_in_tube = conc_tube;
        res.abstract_in_contracted = abs_con;
        res.abstract_in_expanded = abs_exp;
    });

    // Sequential reduction keeps results identical across thread counts.
    ValidationReport rep;
    rep.trials = opts.trials;
    rep.horizon = T;
    rep.eps = composed.eps;
    rep.delta = composed.delta;
    rep.gamma = gamma_of_horizon(composed.delta, T);
    rep.theoretical_retention = std::pow(1.0 - composed.delta, T + 1);
    long conc_in = 0, abs_con_in = 0, abs_exp_in = 0;
    for (const TrialOutcome& o : outcomes) {
        if (o.sink_forfeit) ++rep.sink_forfeits;
        if (o.retained) {
            ++rep.retained;
            ++rep.deviation_runs;
            rep.max_deviation = std::max(rep.max_deviation, o.max_dev);
            if (o.max_dev <= composed.eps) ++rep.deviation_within_eps;
        }
        if (o.concrete_in_tube) ++conc_in;
        if (o.abstract_in_contracted) ++abs_con_in;
        if (o.abstract_in_expanded) ++abs_exp_in;
    }
    rep.retention_freq = static_cast<double>(rep.retained) / static_cast<double>(rep.trials);
    rep.retention_interval = wilson_interval(rep.retained, rep.trials);
    rep.retention_ok = rep.retention_freq >=
                       rep.theoretical_retention - 3.0 * rep.retention_interval.half_width;
    rep.deviation_ok = (rep.deviation_runs == 0) ||
                       (rep.deviation_within_eps == rep.deviation_runs);
    if (opts.tube != nullptr) {
        rep.tube_reported = true;
        rep.event_freq_concrete =
            static_cast<double>(conc_in) / static_cast<double>(rep.trials);
        rep.event_freq_abstract_contracted =
            static_cast<double>(abs_con_in) / static_cast<double>(rep.trials);
        rep.event_freq_abstract_expanded =
            static_cast<double>(abs_exp_in) / static_cast<double>(rep.trials);
        const ClosenessCertificate cert =
            make_closeness_certificate(composed.eps, composed.delta, T);
        rep.event_bounds = bound_event_probability(cert, rep.event_freq_abstract_contracted,
                                                   rep.event_freq_abstract_expanded);
        const double slack =
            3.0 * wilson_interval(conc_in, rep.trials).half_width +
            3.0 * std::max(wilson_interval(abs_con_in, rep.trials).half_width,
                           wilson_interval(abs_exp_in, rep.trials).half_width);
        rep.event_ok = rep.event_freq_concrete >= rep.event_bounds.lo - slack &&
                       rep.event_freq_concrete <= rep.event_bounds.hi + slack;
    }
    return rep;
}

std::vector<std::string> format_validation_report(const ValidationReport& rep) {
    std::vector<std::string> lines;
    char buf[256];
    auto push = [&lines, &buf](const char* name, double theo, double emp, double ilo,
                               double ihi, bool ok) {
        std::snprintf(buf, sizeof(buf), "%s theoretical=%.17g empirical=%.17g interval=[%.17g,%.17g] verdict=%s",
                      name, theo, emp, ilo, ihi, ok ? "pass" : "fail");
        lines.emplace_back(buf);
    };
    push("relation_retention", rep.theoretical_retention, rep.retention_freq,
         rep.retention_interval.lo, rep.retention_interval.hi, rep.retention_ok);
    push("output_deviation_within_eps", 1.0,
         rep.deviation_runs == 0
             ? 1.0
             : static_cast<double>(rep.deviation_within_eps) /
                   static_cast<double>(rep.deviation_runs),
         0.0, rep.eps, rep.deviation_ok);
    std::snprintf(buf, sizeof(buf), "max_output_deviation eps=%.17g observed=%.17g verdict=%s",
                  rep.eps, rep.max_deviation, rep.deviation_ok ? "pass" : "fail");
    lines.emplace_back(buf);
    std::snprintf(buf, sizeof(buf), "sink_forfeits count=%ld", rep.sink_forfeits);
    lines.emplace_back(buf);
    if (rep.tube_reported) {
        push("tube_event_probability", rep.event_bounds.lo, rep.event_freq_concrete,
             rep.event_bounds.lo, rep.event_bounds.hi, rep.event_ok);
        std::snprintf(buf, sizeof(buf),
                      "tube_abstract_frequencies contracted=%.17g expanded=%.17g",
                      rep.event_freq_abstract_contracted, rep.event_freq_abstract_expanded);
        lines.emplace_back(buf);
    }
    return lines;
}

}  // namespace simrel
