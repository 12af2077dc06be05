#include "simrel/relations.hpp"

#include "simrel/errors.hpp"

namespace simrel {

void QuadraticStateRelation::validate() const {
    if (M.rows() != M.cols()) throw DimensionError("M must be square");
    if (P.rows() != M.rows()) throw DimensionError("P row count must match M");
    if (!is_symmetric(M)) throw DimensionError("M must be symmetric within 1e-10 relative");
    if (!(eps > 0.0)) throw Error("eps must be > 0");
    if (!(min_eigenvalue(M) > 0.0)) throw Error("M must be positive definite");
}

double QuadraticStateRelation::form(const Vec& x, const Vec& xhat) const {
    if (x.size() != P.rows() || xhat.size() != P.cols())
        throw DimensionError("state relation: dimension mismatch");
    const Vec d = x - P * xhat;
    return d.dot(M * d);
}

void QuadraticInputRelation::validate() const {
    if (Mw.rows() != Mw.cols()) throw DimensionError("Mw must be square");
    if (Pw.rows() != Mw.rows()) throw DimensionError("Pw row count must match Mw");
    if (!is_symmetric(Mw)) throw DimensionError("Mw must be symmetric within 1e-10 relative");
    if (!(eps_w > 0.0)) throw Error("eps_w must be > 0");
    if (!(min_eigenvalue(Mw) > 0.0)) throw Error("Mw must be positive definite");
}

double QuadraticInputRelation::form(const Vec& w, const Vec& what) const {
    if (w.size() != Pw.rows() || what.size() != Pw.cols())
        throw DimensionError("input relation: dimension mismatch");
    const Vec d = w - Pw * what;
    return d.dot(Mw * d);
}

bool state_in_relation(const QuadraticStateRelation& rel, const Vec& x, const Vec& xhat) {
    return rel.form(x, xhat) <= rel.eps * rel.eps;
}

bool input_in_relation(const QuadraticInputRelation& rel, const Vec& w, const Vec& what) {
    return rel.form(w, what) <= rel.eps_w * rel.eps_w;
}

Vec refine_input(const InterfaceParams& ifc, const NonlinearSystemTuple& sys,
                 const QuadraticStateRelation& rel, const Vec& x, const Vec& xhat,
                 const Vec& what, const Vec& nuhat) {
    if (x.size() != rel.P.rows() || xhat.size() != rel.P.cols())
        throw DimensionError("refine_input: state dimensions do not match P");
    if (ifc.K.cols() != x.size() || ifc.Q.cols() != xhat.size())
        throw DimensionError("refine_input: K/Q column mismatch");
    if (ifc.S.cols() != what.size() || ifc.Rtilde.cols() != nuhat.size())
        throw DimensionError("refine_input: S/Rtilde column mismatch");
    const double fx = (sys.F * x)(0);
    const double fpx = (sys.F * (rel.P * xhat))(0);
    Vec nu = ifc.K * (x - rel.P * xhat) + ifc.Q * xhat;
    if (nuhat.size() > 0) nu += ifc.Rtilde * nuhat;
    if (what.size() > 0) nu += ifc.S * what;
    nu += ifc.L1 * sys.phi.eval(fx) - ifc.L2 * sys.phi.eval(fpx);
    return nu;
}

CoupledStepResult coupled_step(const NonlinearSystemTuple& conc, const NonlinearSystemTuple& absr,
                               const InterfaceParams& ifc, const QuadraticStateRelation& rel,
                               LiftedCoupling& coupling, const Vec& x, const Vec& xhat,
                               const Vec& w, const Vec& what, const Vec& nuhat,
                               NoiseSource& noise_src) {
    CoupledStepResult out;
    out.nu = refine_input(ifc, conc, rel, x, xhat, what, nuhat);
    if (coupling.mode == CouplingMode::shared_noise) {
        if (conc.s() != absr.s())
            throw DimensionError("shared-noise coupling requires equal noise dimensions");
        const Vec z = noise_src.draw();
        out.x_next = conc.step(x, out.nu, w, z);
        out.xhat_next = absr.step(xhat, nuhat, what, z);
    } else {
        if (coupling.independent_source == nullptr)
            throw Error("independent coupling requires a second noise source");
        const Vec z = noise_src.draw();
        const Vec zhat = coupling.independent_source->draw();
        out.x_next = conc.step(x, out.nu, w, z);
        out.xhat_next = absr.step(xhat, nuhat, what, zhat);
    }
    return out;
}

}  // namespace simrel
