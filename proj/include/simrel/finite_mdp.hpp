#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simrel/grid.hpp"
#include "simrel/system.hpp"

namespace simrel {

/// Finite MDP abstraction of a reduced-order tuple.  States are the grid
/// cells plus a trailing absorbing sink that collects the Gaussian mass
/// truncated by the compact box.  The transition tensor is stored flat:
///   prob(state s, internal input w, external input u, successor t)
///   = tensor[((s * W + w) * U + u) * (S + 1) + t]
/// with S = cell count (so successor S is the sink), W/U the input counts.
struct FiniteMdp {
    GridPartition partition;
    std::vector<Vec> w_reps;   // internal-input representatives (may be a single zero)
    std::vector<Vec> nu_reps;  // external-input representatives
    Mat C_out;                 // output map on representatives
    long initial_state = 0;
    std::vector<double> tensor;

    long n_states() const { return partition.cell_total(); }  // excludes sink
    long sink_state() const { return n_states(); }
    int n_w() const { return static_cast<int>(w_reps.size()); }
    int n_nu() const { return static_cast<int>(nu_reps.size()); }

    double prob(long s, int w, int u, long t) const;
    /// Row view start offset for (s, w, u).
    std::size_t row_offset(long s, int w, int u) const;

    Vec output_of(long s) const;  // C_out * representative; sink -> empty guardrail
};

struct TransitionRowResult {
    std::vector<double> probs;     // length n_states + 1 (sink last)
    double standard_error = 0.0;   // 0 for exact rows
    bool exact = true;
};

/// One tensor row: Gaussian measure of each cell under
/// N(mean, R R') with mean = A x + E phi(F x) + D w + B nu evaluated on the
/// reduced tuple.  Diagonal covariance in grid coordinates integrates exactly
/// (products of 1-d normal CDF differences); R = 0 degenerates to a point
/// mass on the cell of the mean; anything else falls back to seeded Monte
/// Carlo with the reported standard error.
TransitionRowResult transition_row(const NonlinearSystemTuple& absr, const GridPartition& part,
                                   const Vec& xhat_rep, const Vec& what, const Vec& nuhat,
                                   std::uint64_t seed = 0, int mc_samples = 10000);

struct MdpBuildOptions {
    std::uint64_t seed = 0;
    int mc_samples = 10000;          // per row, Monte Carlo fallback only
    int threads = 1;
    std::size_t memory_cap_bytes = 2ull << 30;  // refuse larger tensors
};

/// Assembles the full tensor (parallel across rows, deterministic per-row
/// seeds), sets the initial state to the cell of x0, and audits
/// row-stochasticity to 1e-9.  Throws ResourceError when the tensor estimate
/// exceeds the cap.
FiniteMdp build_finite_mdp(const NonlinearSystemTuple& absr, const GridPartition& part,
                           const std::vector<Vec>& w_reps, const std::vector<Vec>& nu_reps,
                           const Vec& x0, const MdpBuildOptions& opts = {});

/// Interchange text format: header lines (dims, grid, labels) followed by
/// sparse "from w u to prob" records, probabilities as 17-significant-digit
/// decimals.  read_finite_mdp round-trips write_finite_mdp exactly.
void write_finite_mdp(const FiniteMdp& mdp, const std::string& path);
FiniteMdp read_finite_mdp(const std::string& path);

}  // namespace simrel
