#pragma once

#include <string>
#include <vector>

#include "simrel/certification.hpp"
#include "simrel/linalg.hpp"
#include "simrel/sprocedure.hpp"
#include "simrel/system.hpp"

namespace simrel {

/// Directed interconnection edge: the internal output y = C x of subsystem
/// `from` feeds one slot of subsystem `to`'s internal input w.  Chat is the
/// matching reduced-side output map (yhat = Chat xhat).  A receiver's w
/// vector is the concatenation of its incoming edges in edge-list order.
struct NetworkEdge {
    int from = 0;
    int to = 0;
    Mat C;     // slot_dim x n_from
    Mat Chat;  // slot_dim_hat x nhat_from
};

struct NetworkTopology {
    int n_subsystems = 0;
    std::vector<NetworkEdge> edges;

    std::vector<int> incoming_edges(int subsystem) const;  // indices in list order
};

struct InterconnectionReport {
    bool pass = true;
    std::vector<std::string> issues;
};

/// Verifies every edge's output dimension matches the receiver's input slot
/// (concrete side; reduced side too when `reduced` is supplied).  Report
/// only; never throws on mismatch.
InterconnectionReport check_interconnection_constraint(
    const NetworkTopology& topo, const std::vector<NonlinearSystemTuple>& systems,
    const std::vector<NonlinearSystemTuple>* reduced = nullptr);

/// Interconnection of N subsystems: internal inputs are substituted with
/// internal outputs (w_ji = y_ij) each step, leaving a system with stacked
/// external inputs, outputs, and block-independent noise.
class InterconnectedSystem {
  public:
    InterconnectedSystem(std::vector<NonlinearSystemTuple> subs, NetworkTopology topo);

    int count() const { return static_cast<int>(subs_.size()); }
    const NonlinearSystemTuple& subsystem(int i) const { return subs_.at(static_cast<std::size_t>(i)); }
    const NetworkTopology& topology() const { return topo_; }

    int n_total() const { return n_total_; }
    int m_total() const { return m_total_; }
    int q_total() const { return q_total_; }
    int s_total() const { return s_total_; }

    int state_offset(int i) const { return state_off_.at(static_cast<std::size_t>(i)); }
    int input_offset(int i) const { return input_off_.at(static_cast<std::size_t>(i)); }
    int output_offset(int i) const { return output_off_.at(static_cast<std::size_t>(i)); }
    int noise_offset(int i) const { return noise_off_.at(static_cast<std::size_t>(i)); }

    /// g_i(x): subsystem i's internal input under the current full state.
    Vec internal_input(int i, const Vec& x_full) const;

    Vec step(const Vec& x_full, const Vec& nu_full, const Vec& varsigma_full) const;
    Vec output(const Vec& x_full) const;

    /// Rewired linear drift: blocks A_ii = A_i, A_ij = D_i(slot j) * C_edge.
    Mat composed_A() const;
    Mat composed_B() const;  // blkdiag(B_i)
    Mat composed_C() const;  // blkdiag(C_i)
    Mat composed_R() const;  // blkdiag(R_i)

    /// Collapses to a single tuple with no internal inputs; requires every
    /// subsystem nonlinearity to vanish (zero tag or zero E).
    NonlinearSystemTuple to_tuple() const;

  private:
    std::vector<NonlinearSystemTuple> subs_;
    NetworkTopology topo_;
    std::vector<int> state_off_, input_off_, output_off_, noise_off_;
    std::vector<std::vector<int>> slot_off_;  // per receiver, per incoming edge
    int n_total_ = 0, m_total_ = 0, q_total_ = 0, s_total_ = 0;
};

/// One source subsystem feeding a receiver: its state relation (M, P, eps)
/// and its internal output maps on both sides.
struct CompositionalitySource {
    Mat M;
    Mat P;
    double eps = 0.0;
    Mat C_int;     // concrete internal output rows for this receiver slot
    Mat Chat_int;  // reduced internal output rows
};

struct CompositionalityResult {
    bool pass = false;
    double min_eig = 0.0;
    double tol = 0.0;
};

/// Assembles the receiver-side compositionality condition as an S-procedure
/// problem.  With stacked variable z = [x_1; xhat_1; ...] the premise matrix
/// is block-diagonal in [[M, -M P], [-P' M, P' M P]] with h1 = -sum eps_i^2
/// (ball aggregation of the per-source constraints); the conclusion matrix is
/// J' Mw J with J = [..., C_i, ..., -Pw Chat_block_i, ...] and h2 = -eps_w^2.
SProcedureProblem compositionality_problem(
    const std::vector<CompositionalitySource>& sources, const Mat& Mw, const Mat& Pw,
    double eps_w);

/// Checks the assembled condition at a fixed multiplier: passes iff
/// lambda * Q1 - Q2 >= -tol_psd in the bordered form.
CompositionalityResult check_compositionality_condition(
    const std::vector<CompositionalitySource>& sources, const Mat& Mw, const Mat& Pw,
    double eps_w, double lambda, double tol_psd = -1.0);

/// Composite relation over the network: conjunction of per-subsystem
/// relations with eps = sum eps_i and delta = 1 - prod(1 - delta_i).
struct ComposedRelation {
    std::vector<RelationCertificate> certs;
    double eps = 0.0;
    double delta = 0.0;
    std::vector<ConditionRecord> evidence;  // one record per receiving subsystem
};

/// Folds per-subsystem certificates into the network-level relation.  Every
/// subsystem with incoming edges must have a passed compositionality record
/// in `evidence` named "compositionality_<index>"; missing or failed
/// evidence raises PrerequisiteError.
ComposedRelation compose_relations(const std::vector<RelationCertificate>& certs,
                                   const NetworkTopology& topo,
                                   const std::vector<ConditionRecord>& evidence);

}  // namespace simrel
