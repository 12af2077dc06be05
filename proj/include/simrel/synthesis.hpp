#pragma once

#include <string>
#include <vector>

#include "simrel/certification.hpp"
#include "simrel/finite_mdp.hpp"
#include "simrel/guarantees.hpp"
#include "simrel/relations.hpp"

namespace simrel {

enum class SpecKind { safety, reachability };

/// Specification container for the finite-horizon DP: per-step sets of
/// "good" state indices (safe states or target states).  The sink is never a
/// member.
struct SpecHorizon {
    SpecKind kind = SpecKind::safety;
    int horizon = 0;
    std::vector<std::vector<char>> member;  // [k][state], k = 0..horizon, length n_states+1

    void validate(const FiniteMdp& mdp) const;
};

/// Time-varying deterministic policy on the finite abstraction: for every
/// (k, state) a pair of input indices.  The sink maps to the fixed pair
/// (0, 0).
struct FinitePolicy {
    int horizon = 0;
    long n_states = 0;  // excludes sink
    int n_w = 0;
    int n_nu = 0;
    std::vector<int> w_choice;   // [(k * (n_states+1)) + state]
    std::vector<int> nu_choice;

    int w_at(int k, long state) const;
    int nu_at(int k, long state) const;
};

struct DpResult {
    std::vector<std::vector<double>> value;  // [k][state], k = 0..horizon
    FinitePolicy policy;
};

/// Backward recursion for maximum probability of staying inside the safe
/// sets through the horizon.  Argmax ties break to the lexicographically
/// lowest (w, nu) index pair.
DpResult dp_safety(const FiniteMdp& mdp, const SpecHorizon& spec);

/// Backward recursion for maximum probability of reaching the target sets at
/// some step within the horizon (value 1 once inside).
DpResult dp_reach(const FiniteMdp& mdp, const SpecHorizon& spec);

/// Marks the abstraction states whose outputs lie inside the tube box at
/// each step; used to turn an output-space tube into DP safe sets.
SpecHorizon safe_sets_from_tube(const FiniteMdp& mdp, const EventTube& tube,
                                SpecKind kind = SpecKind::safety);

/// Probability that the chain under the fixed policy stays in the per-step
/// sets: exact forward propagation with masking (the policy evaluation
/// counterpart of dp_safety).
double tube_probability_under_policy(const FiniteMdp& mdp, const SpecHorizon& spec,
                                     const FinitePolicy& policy, long start_state);

/// Transfers an abstract DP value computed on the eps-contracted
/// specification down to the concrete system: max(0, v_hat - gamma).
double guarantee_transfer(double v_hat, const ClosenessCertificate& cert);

/// Concrete controller refining an abstract policy through the interface
/// function.  Maintains the finite abstraction as an internal companion
/// state advanced with the shared noise realization:
///  - co_simulation: the caller feeds the realized noise after each step;
///  - reconstruction: the caller feeds the observed next concrete state and
///    the controller solves R varsigma = x' - drift(x, nu, w) by least
///    squares (requires full column rank R).
/// A companion that leaves the abstraction box is flagged as guarantee
/// forfeiture; control continues with the sink's fixed input.
class RefinedController {
  public:
    enum class Mode { co_simulation, reconstruction };

    RefinedController(const FiniteMdp& mdp, const FinitePolicy& policy,
                      NonlinearSystemTuple conc, NonlinearSystemTuple absr,
                      QuadraticStateRelation rel, QuadraticInputRelation input_rel,
                      InterfaceParams ifc, Mode mode);

    void reset(const Vec& xhat0);

    /// Chooses nu for step k from the companion cell's policy entry; the
    /// measured internal input selects the companion's w-representative as
    /// the nearest representative of pinv(Pw) * w.
    Vec act(int k, const Vec& x, const Vec& w_measured);

    /// Companion update, co_simulation mode.
    void advance_with_noise(const Vec& varsigma);

    /// Companion update, reconstruction mode.
    void advance_with_observation(const Vec& x, const Vec& nu, const Vec& w,
                                  const Vec& x_next);

    bool forfeited() const { return forfeited_; }
    long companion_cell() const { return cell_; }
    const Vec& companion() const { return xhat_; }
    Mode mode() const { return mode_; }

  private:
    void quantize(const Vec& xhat_raw);

    const FiniteMdp& mdp_;
    const FinitePolicy& policy_;
    NonlinearSystemTuple conc_, absr_;
    QuadraticStateRelation rel_;
    QuadraticInputRelation input_rel_;
    InterfaceParams ifc_;
    Mode mode_;
    Mat pinv_Pw_, pinv_R_;
    Vec xhat_;
    long cell_ = 0;
    bool forfeited_ = false;
    Vec pending_what_, pending_nuhat_;
    bool pending_ = false;
};

/// Dense-table text serialization: header then one "k state w nu" line per
/// entry.
void write_policy(const FinitePolicy& policy, const std::string& path);
FinitePolicy read_policy(const std::string& path);

}  // namespace simrel
