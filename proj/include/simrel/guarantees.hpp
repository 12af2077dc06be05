#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "simrel/grid.hpp"
#include "simrel/network.hpp"
#include "simrel/numerics.hpp"

namespace simrel {

/// Finite-horizon closeness constant: gamma = 1 - (1-delta)^(T+1).
struct ClosenessCertificate {
    double eps = 0.0;
    double delta = 0.0;
    int horizon = 0;
    double gamma = 0.0;
};

double gamma_of_horizon(double delta, int T);

ClosenessCertificate make_closeness_certificate(double eps, double delta, int T);

/// Axis-aligned box over the output space.
struct OutputBox {
    Vec lower;
    Vec upper;
    bool empty = false;

    bool contains(const Vec& y) const;
};

/// Per-time-step boxes, k = 0..T.
struct EventTube {
    std::vector<OutputBox> boxes;

    int horizon() const { return static_cast<int>(boxes.size()) - 1; }
    void validate() const;  // lower <= upper unless flagged empty
};

/// Inflates every face by eps per coordinate: a superset of the Euclidean
/// eps-expansion, hence sound for upper bounds (exact for scalar outputs).
EventTube expand_tube(const EventTube& tube, double eps);

/// Deflates every face by eps per coordinate: a subset of the Euclidean
/// eps-contraction, hence sound for lower bounds; over-contracted boxes
/// collapse to the empty event.
EventTube contract_tube(const EventTube& tube, double eps);

struct ProbabilityBounds {
    double lo = 0.0;
    double hi = 1.0;
};

/// Transfers abstract-side event probabilities to the concrete system:
/// lo = max(0, p_contracted - gamma), hi = min(1, p_expanded + gamma).
ProbabilityBounds bound_event_probability(const ClosenessCertificate& cert,
                                          double abstract_prob_contracted,
                                          double abstract_prob_expanded);

struct TwoStepBound {
    double eps1 = 0.0, gamma1 = 0.0;
    double eps2 = 0.0, gamma2 = 0.0;
};

struct CombinedBound {
    double eps_total = 0.0;
    double gamma_total = 0.0;
};

/// Union bound over two chained simulation relations:
/// (eps1 + eps2, min(1, gamma1 + gamma2)).
CombinedBound two_step_union_bound(const TwoStepBound& b);

enum class NuHatMode { zero, random_ball };

struct ValidationOptions {
    long trials = 10000;
    int horizon = 10;
    std::uint64_t seed = 0;
    int threads = 1;
    NuHatMode nuhat_mode = NuHatMode::zero;
    double c_nuhat = 0.0;  // squared radius of the nu-hat ball per subsystem
    /// Overrides nuhat_mode when set: stacked nu-hat for the whole network.
    std::function<Vec(int /*k*/, const Vec& /*xhat_full*/)> nuhat_provider;
    /// When nonempty (one partition per subsystem), the abstract companion is
    /// quantized through the representative map each step; leaving the box
    /// forfeits the trial's guarantee (counted and treated as retention loss).
    std::vector<GridPartition> companion_partitions;
    const EventTube* tube = nullptr;  // optional event-frequency reporting
};

struct ValidationReport {
    long trials = 0;
    int horizon = 0;
    double theoretical_retention = 0.0;  // (1-delta)^(T+1)
    long retained = 0;
    double retention_freq = 0.0;
    WilsonInterval retention_interval{};
    bool retention_ok = false;  // freq >= theoretical - 3 * half-width
    long deviation_runs = 0;    // retention runs examined
    long deviation_within_eps = 0;
    double max_deviation = 0.0;
    bool deviation_ok = false;  // all retention runs within eps
    long sink_forfeits = 0;
    bool tube_reported = false;
    double event_freq_concrete = 0.0;
    double event_freq_abstract_contracted = 0.0;
    double event_freq_abstract_expanded = 0.0;
    ProbabilityBounds event_bounds{};
    bool event_ok = false;  // concrete frequency within bounds +- 3 Wilson half-widths
    double gamma = 0.0;
    double eps = 0.0;
    double delta = 0.0;
};

/// Coupled Monte Carlo validation of a composed relation: rolls the concrete
/// and abstract networks side by side under shared per-subsystem noise with
/// interface-refined concrete inputs, and reports (i) full-horizon relation
/// retention against (1-delta)^(T+1), (ii) output deviation against eps on
/// retention runs, and (iii) tube event frequencies against the transferred
/// bounds.  Trials below 100 are rejected.  Deterministic for a fixed seed
/// regardless of thread count.
ValidationReport monte_carlo_validate(const InterconnectedSystem& conc_net,
                                      const InterconnectedSystem& abs_net,
                                      const ComposedRelation& composed, const Vec& x0_full,
                                      const Vec& xhat0_full, const ValidationOptions& opts);

/// One metric per line: name, theoretical, empirical, interval, verdict.
std::vector<std::string> format_validation_report(const ValidationReport& rep);

}  // namespace simrel
