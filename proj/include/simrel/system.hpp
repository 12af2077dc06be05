#pragma once

#include <functional>
#include <vector>

#include "simrel/linalg.hpp"
#include "simrel/nonlinearity.hpp"
#include "simrel/rng.hpp"

namespace simrel {

/// Discrete-time stochastic system with an additive scalar-channel
/// nonlinearity:
///
///   x+ = A x + B nu + D w + E phi(F x) + R varsigma
///   y  = C x
///
/// Dimensions: x in R^n, nu in R^m, w in R^p (internal input), y in R^q,
/// varsigma in R^s (noise).  phi acts componentwise on the scalar F x
/// (F is 1 x n in this toolkit; E is n x 1).
struct NonlinearSystemTuple {
    Mat A, B, C, D, E, F, R;
    NonlinearityDescriptor phi;

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int p() const { return static_cast<int>(D.cols()); }
    int q() const { return static_cast<int>(C.rows()); }
    int s() const { return static_cast<int>(R.cols()); }

    /// Throws DimensionError if the matrix shapes are inconsistent.
    void validate() const;

    Vec output(const Vec& x) const { return C * x; }

    /// One transition with explicit noise realization.
    Vec step(const Vec& x, const Vec& nu, const Vec& w, const Vec& varsigma) const;

    /// Absorbs a linear slope offset `a` into A (A <- A + a*E*F) and shifts
    /// phi so its slope band starts at zero.  Preserves the transition map.
    NonlinearSystemTuple shift_slope_to_zero() const;
};

/// A simulated path; all sequences indexed 0..T (states) and 0..T-1 (inputs,
/// noise).
struct TrajectorySample {
    std::vector<Vec> states;
    std::vector<Vec> outputs;
    std::vector<Vec> inputs_nu;
    std::vector<Vec> inputs_w;
    std::vector<Vec> noise;
};

using InputProvider = std::function<Vec(int /*t*/, const Vec& /*x*/)>;

/// Rolls the system forward T steps, drawing noise from `noise_src`.
TrajectorySample simulate_trajectory(const NonlinearSystemTuple& sys, const Vec& x0,
                                     const InputProvider& nu_of, const InputProvider& w_of,
                                     int T, NoiseSource& noise_src);

/// Re-runs a trajectory under recorded noise; used to cross-check replay
/// determinism and for coupled (shared-noise) rollouts.
TrajectorySample replay_trajectory(const NonlinearSystemTuple& sys, const Vec& x0,
                                   const InputProvider& nu_of, const InputProvider& w_of,
                                   const std::vector<Vec>& noise);

}  // namespace simrel
