#pragma once

#include <optional>

#include "simrel/linalg.hpp"
#include "simrel/rng.hpp"
#include "simrel/system.hpp"

namespace simrel {

/// Quadratic state relation between a concrete state x (R^n) and an abstract
/// state x_hat (R^n_hat): membership is (x - P x_hat)' M (x - P x_hat) <= eps^2.
struct QuadraticStateRelation {
    Mat P;       // n x n_hat
    Mat M;       // n x n symmetric positive definite
    double eps = 0.0;

    void validate() const;  // symmetry within 1e-10 relative, eigmin > 0, eps > 0
    double form(const Vec& x, const Vec& xhat) const;
};

/// Quadratic internal-input relation: (w - Pw w_hat)' Mw (w - Pw w_hat) <= eps_w^2.
struct QuadraticInputRelation {
    Mat Pw;      // p x p_hat
    Mat Mw;      // p x p symmetric positive definite
    double eps_w = 0.0;

    void validate() const;
    double form(const Vec& w, const Vec& what) const;
};

/// Parameters of the interface function
///   nu = K(x - P x_hat) + Q x_hat + Rtilde nu_hat + S w_hat
///        + L1 phi(F x) - L2 phi(F P x_hat).
struct InterfaceParams {
    Mat K;       // m x n
    Mat Q;       // m x n_hat
    Mat S;       // m x p_hat
    Mat L1;      // m x 1
    Mat L2;      // m x 1
    Mat Rtilde;  // m x m_hat
};

enum class CouplingMode { shared_noise, independent };

/// Operational representation of the lifted noise measure: a coupled sampler.
/// In shared_noise mode one draw feeds both systems; in independent mode the
/// abstract side uses its own source.
struct LiftedCoupling {
    CouplingMode mode = CouplingMode::shared_noise;
    NoiseSource* independent_source = nullptr;  // required iff mode == independent
};

bool state_in_relation(const QuadraticStateRelation& rel, const Vec& x, const Vec& xhat);
bool input_in_relation(const QuadraticInputRelation& rel, const Vec& w, const Vec& what);

/// Evaluates the interface function; `sys` supplies phi and F of the concrete
/// system, `rel` supplies P.
Vec refine_input(const InterfaceParams& ifc, const NonlinearSystemTuple& sys,
                 const QuadraticStateRelation& rel, const Vec& x, const Vec& xhat,
                 const Vec& what, const Vec& nuhat);

struct CoupledStepResult {
    Vec x_next;
    Vec xhat_next;
    Vec nu;  // realized concrete input from the interface
};

/// Advances the coupled pair one step: the concrete system under the refined
/// input, the abstract system under (nu_hat, w_hat); noise is shared or drawn
/// independently according to the coupling mode.
CoupledStepResult coupled_step(const NonlinearSystemTuple& conc, const NonlinearSystemTuple& absr,
                               const InterfaceParams& ifc, const QuadraticStateRelation& rel,
                               LiftedCoupling& coupling, const Vec& x, const Vec& xhat,
                               const Vec& w, const Vec& what, const Vec& nuhat,
                               NoiseSource& noise_src);

}  // namespace simrel
