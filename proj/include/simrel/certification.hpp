#pragma once

#include <optional>
#include <string>
#include <vector>

#include "simrel/linalg.hpp"
#include "simrel/relations.hpp"
#include "simrel/sprocedure.hpp"
#include "simrel/system.hpp"

namespace simrel {

/// Parameters of the chance-constraint side of the certification:
/// delta in (0,1); c_zeta bounds the noise-channel energy at confidence
/// 1-delta; c_nuhat bounds the abstract external input; beta is the state
/// discretization term.  c_zeta is auto-derived from (dof, delta) when not
/// supplied.
struct ChanceConstraintParams {
    double delta = 0.0;
    double c_zeta = 0.0;
    double c_nuhat = 0.0;
    double eps_w = 0.0;
    double beta = 0.0;
    int dof = 1;
};

/// Builds chance-constraint parameters, deriving c_zeta from the chi-square
/// inverse CDF at 1-delta unless an explicit override >= 0 is given.
ChanceConstraintParams make_chance_params(double delta, double c_nuhat, double eps_w,
                                          double beta, int dof, double c_zeta_override = -1.0);

/// One audited condition with a pass flag and a scalar residual.
struct ConditionRecord {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    std::string detail;
};

/// Issued only when every condition passed; bundles the relation data, the
/// interface, the multiplier, tolerances, and the audit trail.
struct RelationCertificate {
    QuadraticStateRelation rel;
    QuadraticInputRelation input_rel;
    InterfaceParams ifc;
    double delta = 0.0;
    double lambda = 0.0;
    double c_zeta = 0.0;
    double c_nuhat = 0.0;
    double beta = 0.0;
    int dof = 1;
    double tol_psd = 0.0;
    double tol_eq = 0.0;
    bool slope_bound_gt_one = false;  // advisory: slope-channel bound not encoded in F1
    std::vector<ConditionRecord> evidence;
};

struct DominanceCheck {
    bool pass = false;
    double residual = 0.0;  // smallest eigenvalue of M - C'C
};

/// Output dominance M >= C'C: passes iff eigmin(M - C'C) >= -tol_psd
/// (negative tol_psd selects the scale-aware default).
DominanceCheck check_output_dominance(const Mat& M, const Mat& C, double tol_psd = -1.0);

struct EqualityCheck {
    bool pass = false;
    double max_residual = 0.0;
    std::vector<ConditionRecord> per_equality;
};

/// Verifies the five structural equalities tying the reduced tuple to the
/// concrete one through (P, Pw) and the interface gains:
///   C_r^ = C P,  F_r^ = F P,  A P = P A_r^ - B Q,
///   E = P E_r^ - B (L1 - L2),  D Pw = P D_r^ - B S.
/// Each residual is the max over entries of |lhs-rhs| / max(1, |lhs|, |rhs|).
EqualityCheck check_structural_equalities(const NonlinearSystemTuple& conc,
                                          const NonlinearSystemTuple& absr, const Mat& P,
                                          const Mat& Pw, const Mat& Q, const Mat& S,
                                          const Mat& L1, const Mat& L2, double tol_eq);

/// Assembles the quadratic-constraint pair certifying one-step containment of
/// the deviation dynamics.  Variable-block ordering:
///   (x - P xhat) [n] | slope channel [n] | (w - Pw what) [p] | nuhat [mhat]
///   | quantization channel [nhat] | noise channel [s].
/// F1 = blkdiag(M, 0, Mw, I, I, I); F2 = T' M T with
///   T = [A+BK, (B L1 + E) F, D, B Rtilde - P B_r^, P, R - P R_r^];
/// g1 = g2 = 0; h1 = -(eps^2 + eps_w^2 + c_nuhat + c_zeta + beta);
/// h2 = -eps^2.
SProcedureProblem assemble_sproc_matrices(const NonlinearSystemTuple& conc,
                                          const NonlinearSystemTuple& absr,
                                          const QuadraticStateRelation& rel,
                                          const QuadraticInputRelation& input_rel,
                                          const InterfaceParams& ifc,
                                          const ChanceConstraintParams& ccp);

struct CertificationOptions {
    double tol_psd = -1.0;  // negative: scale-aware default
    double tol_eq = 1e-6;
    std::optional<double> fixed_lambda;  // empty: search
    double lambda_max = 1e4;
    CouplingMode coupling = CouplingMode::shared_noise;
};

struct CertificationOutcome {
    bool certified = false;
    std::optional<RelationCertificate> certificate;
    std::vector<ConditionRecord> conditions;
    double lambda = 0.0;
    double min_eig = 0.0;
};

/// Runs the full condition pipeline: output dominance, structural equalities,
/// chance-constraint derivation, matrix assembly, and the multiplier check
/// (fixed lambda or concave search).  Only shared-noise coupling is
/// certifiable; independent coupling is rejected.  No partial certificates.
CertificationOutcome certify_relation(const NonlinearSystemTuple& conc,
                                      const NonlinearSystemTuple& absr,
                                      const QuadraticStateRelation& rel,
                                      const QuadraticInputRelation& input_rel,
                                      const InterfaceParams& ifc,
                                      const ChanceConstraintParams& ccp,
                                      const CertificationOptions& opts = {});

/// Reconstructs interface gains from the structural equalities (pseudo-inverse
/// of B throughout):
///   Q = B+ (P A_r^ - A P),  S = B+ (P D_r^ - D Pw),  L1 = -B+ E,
///   L2 = -B+ (P E_r^),  Rtilde = (B' M B)^-1 B' M P B_r^,  K = -B+ A.
/// An explicit K (nonzero size) overrides the deadbeat default.
InterfaceParams rederive_interface(const NonlinearSystemTuple& conc,
                                   const NonlinearSystemTuple& absr, const Mat& P,
                                   const Mat& Pw, const Mat& M, const Mat& K_opt = Mat());

}  // namespace simrel
