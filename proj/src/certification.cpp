#include "simrel/certification.hpp"

#include <cmath>
#include <cstdio>

#include "simrel/errors.hpp"
#include "simrel/numerics.hpp"

namespace simrel {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

/// Max over entries of |L - R| / max(1, |L|, |R|): relative where entries are
/// large, absolute where they are near zero.
double matrix_residual(const Mat& lhs, const Mat& rhs) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < lhs.rows(); ++i)
        for (Eigen::Index j = 0; j < lhs.cols(); ++j) {
            const double a = lhs(i, j), b = rhs(i, j);
            const double scale = std::max(1.0, std::max(std::abs(a), std::abs(b)));
            worst = std::max(worst, std::abs(a - b) / scale);
        }
    return worst;
}

Mat pinv(const Mat& B) {
    return B.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace

ChanceConstraintParams make_chance_params(double delta, double c_nuhat, double eps_w,
                                          double beta, int dof, double c_zeta_override) {
    if (!(delta > 0.0 && delta < 1.0))
        throw Error("delta must lie in (0,1); got " + fmt(delta));
    ChanceConstraintParams ccp;
    ccp.delta = delta;
    ccp.c_nuhat = c_nuhat;
    ccp.eps_w = eps_w;
    ccp.beta = beta;
    ccp.dof = dof;
    ccp.c_zeta = (c_zeta_override >= 0.0) ? c_zeta_override
                                          : chi_square_inverse_cdf(dof, 1.0 - delta);
    return ccp;
}

DominanceCheck check_output_dominance(const Mat& M, const Mat& C, double tol_psd) {
    if (M.rows() != M.cols()) throw DimensionError("M must be square");
    if (C.cols() != M.rows()) throw DimensionError("C column count must match M");
    if (!is_symmetric(M)) throw DimensionError("M must be symmetric within 1e-10 relative");
    const Mat G = M - C.transpose() * C;
    DominanceCheck out;
    out.residual = min_eigenvalue(G);
    const double tol = (tol_psd >= 0.0) ? tol_psd : default_psd_tol(G);
    out.pass = out.residual >= -tol;
    return out;
}

EqualityCheck check_structural_equalities(const NonlinearSystemTuple& conc,
                                          const NonlinearSystemTuple& absr, const Mat& P,
                                          const Mat& Pw, const Mat& Q, const Mat& S,
                                          const Mat& L1, const Mat& L2, double tol_eq) {
    std::vector<std::string> missing;
    auto need = [&missing](const Mat& m, const char* name) {
        if (m.size() == 0) missing.emplace_back(name);
    };
    need(P, "P");
    need(Pw, "Pw");
    need(Q, "Q");
    need(S, "S");
    need(L1, "L1");
    need(L2, "L2");
    if (!missing.empty()) {
        std::string msg = "structural equality check missing matrices:";
        for (const auto& n : missing) msg += " " + n;
        throw PrerequisiteError(msg);
    }

    EqualityCheck out;
    auto add = [&out, tol_eq](const std::string& name, const Mat& lhs, const Mat& rhs,
                              const std::string& detail) {
        if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols())
            throw DimensionError("structural equality '" + name + "': shape mismatch");
        ConditionRecord rec;
        rec.name = name;
        rec.residual = matrix_residual(lhs, rhs);
        rec.pass = rec.residual <= tol_eq;
        rec.detail = detail + " (residual " + fmt(rec.residual) + ")";
        out.per_equality.push_back(std::move(rec));
    };

    add("abstract_output_map", absr.C, conc.C * P, "C_r^ = C P");
    add("abstract_slope_map", absr.F, conc.F * P, "F_r^ = F P");
    add("drift_consistency", conc.A * P, P * absr.A - conc.B * Q, "A P = P A_r^ - B Q");
    add("nonlinearity_consistency", conc.E, P * absr.E - conc.B * (L1 - L2),
        "E = P E_r^ - B (L1 - L2)");
    add("internal_input_consistency", conc.D * Pw, P * absr.D - conc.B * S,
        "D Pw = P D_r^ - B S");

    out.pass = true;
    out.max_residual = 0.0;
    for (const auto& rec : out.per_equality) {
        out.pass = out.pass && rec.pass;
        out.max_residual = std::max(out.max_residual, rec.residual);
    }
    return out;
}

SProcedureProblem assemble_sproc_matrices(const NonlinearSystemTuple& conc,
                                          const NonlinearSystemTuple& absr,
                                          const QuadraticStateRelation& rel,
                                          const QuadraticInputRelation& input_rel,
                                          const InterfaceParams& ifc,
                                          const ChanceConstraintParams& ccp) {
    const int n = conc.n();
    const int p = conc.p();
    const int mhat = absr.m();
    const int nhat = absr.n();
    const int s = conc.s();
    if (rel.P.rows() != n || rel.P.cols() != nhat)
        throw DimensionError("P must be n x nhat for the assembled problem");
    if (input_rel.Pw.rows() != p) throw DimensionError("Pw must have p rows");
    if (ifc.K.rows() != conc.m() || ifc.K.cols() != n)
        throw DimensionError("K must be m x n");
    if (ifc.Rtilde.cols() != mhat) throw DimensionError("Rtilde must have mhat columns");
    if (absr.R.rows() != nhat) throw DimensionError("R_r^ must have nhat rows");
    if (conc.R.cols() != absr.R.cols())
        throw DimensionError("shared-noise assembly requires equal noise dimensions");

    const int d = n + n + p + mhat + nhat + s;
    const Mat& M = rel.M;

    // Deviation propagation blocks, one per variable block.
    std::vector<Mat> T;
    T.push_back(conc.A + conc.B * ifc.K);                    // state deviation
    T.push_back((conc.B * ifc.L1 + conc.E) * conc.F);        // slope channel
    T.push_back(conc.D);                                     // internal-input deviation
    T.push_back(conc.B * ifc.Rtilde - rel.P * absr.B);       // abstract external input
    T.push_back(rel.P);                                      // quantization channel
    T.push_back(conc.R - rel.P * absr.R);                    // noise channel

    SProcedureProblem prob;
    prob.d = d;
    prob.F1 = Mat::Zero(d, d);
    prob.F2 = Mat::Zero(d, d);
    prob.g1 = Vec::Zero(d);
    prob.g2 = Vec::Zero(d);

    const std::vector<int> dims = {n, n, p, mhat, nhat, s};
    std::vector<int> offs(dims.size(), 0);
    for (std::size_t i = 1; i < dims.size(); ++i) offs[i] = offs[i - 1] + dims[i - 1];

    prob.F1.block(offs[0], offs[0], n, n) = M;
    // slope-channel diagonal block stays zero (not encoded in F1)
    if (p > 0) prob.F1.block(offs[2], offs[2], p, p) = input_rel.Mw;
    if (mhat > 0) prob.F1.block(offs[3], offs[3], mhat, mhat) = Mat::Identity(mhat, mhat);
    if (nhat > 0) prob.F1.block(offs[4], offs[4], nhat, nhat) = Mat::Identity(nhat, nhat);
    if (s > 0) prob.F1.block(offs[5], offs[5], s, s) = Mat::Identity(s, s);

    for (std::size_t i = 0; i < T.size(); ++i)
        for (std::size_t j = 0; j < T.size(); ++j) {
            if (dims[i] == 0 || dims[j] == 0) continue;
            prob.F2.block(offs[i], offs[j], dims[i], dims[j]) =
                T[i].transpose() * M * T[j];
        }
    // Symmetrize against floating-point drift in the cross blocks.
    prob.F2 = 0.5 * (prob.F2 + prob.F2.transpose()).eval();

    prob.h1 = -(rel.eps * rel.eps + ccp.eps_w * ccp.eps_w + ccp.c_nuhat + ccp.c_zeta +
                ccp.beta);
    prob.h2 = -(rel.eps * rel.eps);
    prob.validate();
    return prob;
}

CertificationOutcome certify_relation(const NonlinearSystemTuple& conc,
                                      const NonlinearSystemTuple& absr,
                                      const QuadraticStateRelation& rel,
                                      const QuadraticInputRelation& input_rel,
                                      const InterfaceParams& ifc,
                                      const ChanceConstraintParams& ccp,
                                      const CertificationOptions& opts) {
    if (opts.coupling != CouplingMode::shared_noise)
        throw Error("certification requires shared-noise coupling; "
                    "independent coupling is simulation-only");
    if (!(ccp.delta > 0.0 && ccp.delta < 1.0))
        throw Error("delta must lie in (0,1): chance constraint degenerates otherwise");
    conc.validate();
    absr.validate();
    rel.validate();
    input_rel.validate();

    CertificationOutcome out;
    auto record = [&out](const std::string& name, bool pass, double residual,
                         const std::string& detail) {
        out.conditions.push_back({name, pass, residual, detail});
    };

    const DominanceCheck dom = check_output_dominance(rel.M, conc.C, opts.tol_psd);
    record("output_dominance", dom.pass, dom.residual,
           "eigmin(M - C'C) = " + fmt(dom.residual));

    const EqualityCheck eq = check_structural_equalities(conc, absr, rel.P, input_rel.Pw,
                                                         ifc.Q, ifc.S, ifc.L1, ifc.L2,
                                                         opts.tol_eq);
    for (const auto& rec : eq.per_equality) out.conditions.push_back(rec);

    record("chance_constraint", true, ccp.c_zeta,
           "c_zeta = chi2_inv(" + std::to_string(ccp.dof) + ", 1 - " + fmt(ccp.delta) +
               ") = " + fmt(ccp.c_zeta));

    bool sproc_pass = false;
    double sproc_eig = 0.0;
    double lambda_used = 0.0;
    if (dom.pass && eq.pass) {
        const SProcedureProblem prob =
            assemble_sproc_matrices(conc, absr, rel, input_rel, ifc, ccp);
        if (opts.fixed_lambda.has_value()) {
            lambda_used = *opts.fixed_lambda;
            const SProcedureCheck chk = check_sprocedure(prob, lambda_used, opts.tol_psd);
            sproc_pass = chk.pass;
            sproc_eig = chk.min_eig;
            record("s_procedure", chk.pass, chk.min_eig,
                   "fixed lambda = " + fmt(lambda_used) + ", eigmin = " + fmt(chk.min_eig));
        } else {
            const LambdaSearchResult sr = search_lambda(prob, opts.tol_psd, opts.lambda_max);
            lambda_used = sr.lambda;
            sproc_pass = sr.pass;
            sproc_eig = sr.min_eig;
            record("s_procedure", sr.pass, sr.min_eig,
                   "searched lambda* = " + fmt(sr.lambda) + ", eigmin = " + fmt(sr.min_eig));
        }
    } else {
        record("s_procedure", false, 0.0,
               "skipped: prerequisite condition failed");
    }
    out.lambda = lambda_used;
    out.min_eig = sproc_eig;

    out.certified = dom.pass && eq.pass && sproc_pass;
    if (out.certified) {
        RelationCertificate cert;
        cert.rel = rel;
        cert.input_rel = input_rel;
        cert.ifc = ifc;
        cert.delta = ccp.delta;
        cert.lambda = lambda_used;
        cert.c_zeta = ccp.c_zeta;
        cert.c_nuhat = ccp.c_nuhat;
        cert.beta = ccp.beta;
        cert.dof = ccp.dof;
        cert.tol_psd = opts.tol_psd;
        cert.tol_eq = opts.tol_eq;
        cert.slope_bound_gt_one = conc.phi.slope_hi > 1.0;
        cert.evidence = out.conditions;
        out.certificate = std::move(cert);
    }
    return out;
}

InterfaceParams rederive_interface(const NonlinearSystemTuple& conc,
                                   const NonlinearSystemTuple& absr, const Mat& P,
                                   const Mat& Pw, const Mat& M, const Mat& K_opt) {
    const Mat Bp = pinv(conc.B);
    InterfaceParams ifc;
    ifc.Q = Bp * (P * absr.A - conc.A * P);
    ifc.S = Bp * (P * absr.D - conc.D * Pw);
    ifc.L1 = -Bp * conc.E;
    ifc.L2 = -Bp * (P * absr.E);
    const Mat BtMB = conc.B.transpose() * M * conc.B;
    ifc.Rtilde = BtMB.ldlt().solve(conc.B.transpose() * M * P * absr.B);
    ifc.K = (K_opt.size() > 0) ? K_opt : Mat(-Bp * conc.A);
    return ifc;
}

}  // namespace simrel
