#include "simrel/network.hpp"

#include <cmath>

#include "simrel/errors.hpp"

namespace simrel {

std::vector<int> NetworkTopology::incoming_edges(int subsystem) const {
    std::vector<int> out;
    for (std::size_t k = 0; k < edges.size(); ++k)
        if (edges[k].to == subsystem) out.push_back(static_cast<int>(k));
    return out;
}

InterconnectionReport check_interconnection_constraint(
    const NetworkTopology& topo, const std::vector<NonlinearSystemTuple>& systems,
    const std::vector<NonlinearSystemTuple>* reduced) {
    InterconnectionReport rep;
    auto fail = [&rep](const std::string& msg) {
        rep.pass = false;
        rep.issues.push_back(msg);
    };
    if (static_cast<int>(systems.size()) != topo.n_subsystems)
        fail("system count does not match topology");
    for (std::size_t k = 0; k < topo.edges.size(); ++k) {
        const NetworkEdge& e = topo.edges[k];
        const std::string tag =
            "edge " + std::to_string(k) + " (" + std::to_string(e.from) + " -> " +
            std::to_string(e.to) + ")";
        if (e.from < 0 || e.from >= topo.n_subsystems || e.to < 0 ||
            e.to >= topo.n_subsystems) {
            fail(tag + ": endpoint out of range");
            continue;
        }
        if (e.from == e.to) fail(tag + ": self-loop not allowed");
        if (e.from < static_cast<int>(systems.size()) &&
            e.C.cols() != systems[static_cast<std::size_t>(e.from)].n())
            fail(tag + ": C columns do not match source state dimension");
        if (reduced != nullptr && e.from < static_cast<int>(reduced->size()) &&
            e.Chat.size() > 0 &&
            e.Chat.cols() != (*reduced)[static_cast<std::size_t>(e.from)].n())
            fail(tag + ": Chat columns do not match reduced source state dimension");
    }
    // Per receiver, slots must tile the internal input exactly.
    for (int i = 0; i < topo.n_subsystems && i < static_cast<int>(systems.size()); ++i) {
        int rows = 0;
        for (int k : topo.incoming_edges(i)) rows += static_cast<int>(topo.edges[static_cast<std::size_t>(k)].C.rows());
        if (rows != systems[static_cast<std::size_t>(i)].p())
            fail("subsystem " + std::to_string(i) + ": incoming edge rows (" +
                 std::to_string(rows) + ") do not tile its internal input dimension (" +
                 std::to_string(systems[static_cast<std::size_t>(i)].p()) + ")");
        if (reduced != nullptr && i < static_cast<int>(reduced->size())) {
            int hrows = 0;
            for (int k : topo.incoming_edges(i))
                hrows += static_cast<int>(topo.edges[static_cast<std::size_t>(k)].Chat.rows());
            if (hrows != (*reduced)[static_cast<std::size_t>(i)].p())
                fail("subsystem " + std::to_string(i) +
                     ": incoming reduced edge rows do not tile its internal input dimension");
        }
    }
    return rep;
}

InterconnectedSystem::InterconnectedSystem(std::vector<NonlinearSystemTuple> subs,
                                           NetworkTopology topo)
    : subs_(std::move(subs)), topo_(std::move(topo)) {
    if (static_cast<int>(subs_.size()) != topo_.n_subsystems)
        throw DimensionError("subsystem count does not match topology");
    const InterconnectionReport rep = check_interconnection_constraint(topo_, subs_);
    if (!rep.pass) {
        std::string msg = "interconnection constraint violated:";
        for (const auto& s : rep.issues) msg += "\n  " + s;
        throw DimensionError(msg);
    }
    const int N = count();
    state_off_.resize(static_cast<std::size_t>(N));
    input_off_.resize(static_cast<std::size_t>(N));
    output_off_.resize(static_cast<std::size_t>(N));
    noise_off_.resize(static_cast<std::size_t>(N));
    slot_off_.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        subs_[static_cast<std::size_t>(i)].validate();
        state_off_[static_cast<std::size_t>(i)] = n_total_;
        input_off_[static_cast<std::size_t>(i)] = m_total_;
        output_off_[static_cast<std::size_t>(i)] = q_total_;
        noise_off_[static_cast<std::size_t>(i)] = s_total_;
        n_total_ += subs_[static_cast<std::size_t>(i)].n();
        m_total_ += subs_[static_cast<std::size_t>(i)].m();
        q_total_ += subs_[static_cast<std::size_t>(i)].q();
        s_total_ += subs_[static_cast<std::size_t>(i)].s();
        int slot = 0;
        for (int k : topo_.incoming_edges(i)) {
            slot_off_[static_cast<std::size_t>(i)].push_back(slot);
            slot += static_cast<int>(topo_.edges[static_cast<std::size_t>(k)].C.rows());
        }
    }
}

Vec InterconnectedSystem::internal_input(int i, const Vec& x_full) const {
    const NonlinearSystemTuple& sub = subsystem(i);
    Vec w = Vec::Zero(sub.p());
    const std::vector<int> inc = topo_.incoming_edges(i);
    for (std::size_t slot = 0; slot < inc.size(); ++slot) {
        const NetworkEdge& e = topo_.edges[static_cast<std::size_t>(inc[slot])];
        const NonlinearSystemTuple& src = subsystem(e.from);
        const Vec xj = x_full.segment(state_offset(e.from), src.n());
        w.segment(slot_off_[static_cast<std::size_t>(i)][slot], e.C.rows()) = e.C * xj;
    }
    return w;
}

Vec InterconnectedSystem::step(const Vec& x_full, const Vec& nu_full,
                               const Vec& varsigma_full) const {
    if (x_full.size() != n_total_ || nu_full.size() != m_total_ ||
        varsigma_full.size() != s_total_)
        throw DimensionError("interconnected step: stacked vector dimension mismatch");
    Vec next(n_total_);
    for (int i = 0; i < count(); ++i) {
        const NonlinearSystemTuple& sub = subsystem(i);
        const Vec xi = x_full.segment(state_offset(i), sub.n());
        const Vec nui = nu_full.segment(input_offset(i), sub.m());
        const Vec zi = varsigma_full.segment(noise_offset(i), sub.s());
        next.segment(state_offset(i), sub.n()) =
            sub.step(xi, nui, internal_input(i, x_full), zi);
    }
    return next;
}

Vec InterconnectedSystem::output(const Vec& x_full) const {
    Vec y(q_total_);
    for (int i = 0; i < count(); ++i) {
        const NonlinearSystemTuple& sub = subsystem(i);
        y.segment(output_offset(i), sub.q()) =
            sub.output(x_full.segment(state_offset(i), sub.n()));
    }
    return y;
}

Mat InterconnectedSystem::composed_A() const {
    Mat A = Mat::Zero(n_total_, n_total_);
    for (int i = 0; i < count(); ++i) {
        const NonlinearSystemTuple& sub = subsystem(i);
        A.block(state_offset(i), state_offset(i), sub.n(), sub.n()) = sub.A;
        const std::vector<int> inc = topo_.incoming_edges(i);
        for (std::size_t slot = 0; slot < inc.size(); ++slot) {
            const NetworkEdge& e = topo_.edges[static_cast<std::size_t>(inc[slot])];
            const NonlinearSystemTuple& src = subsystem(e.from);
            // w-slot columns of D_i times the edge's output map.
            A.block(state_offset(i), state_offset(e.from), sub.n(), src.n()) +=
                sub.D.middleCols(slot_off_[static_cast<std::size_t>(i)][slot], e.C.rows()) *
                e.C;
        }
    }
    return A;
}

namespace {
Mat blkdiag(const std::vector<NonlinearSystemTuple>& subs, Mat NonlinearSystemTuple::*field) {
    int rows = 0, cols = 0;
    for (const auto& s : subs) {
        rows += static_cast<int>((s.*field).rows());
        cols += static_cast<int>((s.*field).cols());
    }
    Mat out = Mat::Zero(rows, cols);
    int r = 0, c = 0;
    for (const auto& s : subs) {
        const Mat& m = s.*field;
        out.block(r, c, m.rows(), m.cols()) = m;
        r += static_cast<int>(m.rows());
        c += static_cast<int>(m.cols());
    }
    return out;
}
}  // namespace

Mat InterconnectedSystem::composed_B() const { return blkdiag(subs_, &NonlinearSystemTuple::B); }
Mat InterconnectedSystem::composed_C() const { return blkdiag(subs_, &NonlinearSystemTuple::C); }
Mat InterconnectedSystem::composed_R() const { return blkdiag(subs_, &NonlinearSystemTuple::R); }

NonlinearSystemTuple InterconnectedSystem::to_tuple() const {
    for (const auto& s : subs_)
        if (!(s.phi.tag == PhiTag::zero || s.E.cwiseAbs().maxCoeff() == 0.0))
            throw PrerequisiteError(
                "to_tuple requires all subsystem nonlinearities to vanish; "
                "use step() for the nonlinear interconnection");
    NonlinearSystemTuple t;
    t.A = composed_A();
    t.B = composed_B();
    t.C = composed_C();
    t.D = Mat::Zero(n_total_, 0);
    t.E = Mat::Zero(n_total_, 1);
    t.F = Mat::Zero(1, n_total_);
    t.R = composed_R();
    t.phi = make_zero_phi();
    t.validate();
    return t;
}

SProcedureProblem compositionality_problem(
    const std::vector<CompositionalitySource>& sources, const Mat& Mw, const Mat& Pw,
    double eps_w) {
    if (sources.empty()) throw PrerequisiteError("compositionality check needs at least one source");
    int zdim = 0;
    int wrows = 0, what_rows = 0;
    for (const auto& s : sources) {
        zdim += static_cast<int>(s.P.rows() + s.P.cols());
        wrows += static_cast<int>(s.C_int.rows());
        what_rows += static_cast<int>(s.Chat_int.rows());
    }
    if (Mw.rows() != wrows || Mw.cols() != wrows)
        throw DimensionError("Mw dimension does not match stacked internal-output rows");
    if (Pw.rows() != wrows || Pw.cols() != what_rows)
        throw DimensionError("Pw shape does not match stacked output maps");

    Mat F1 = Mat::Zero(zdim, zdim);
    Mat J = Mat::Zero(wrows, zdim);
    double h1 = 0.0;
    int zoff = 0, woff = 0, hoff = 0;
    for (const auto& s : sources) {
        const int n = static_cast<int>(s.P.rows());
        const int nh = static_cast<int>(s.P.cols());
        if (s.M.rows() != n || s.M.cols() != n)
            throw DimensionError("source M dimension does not match P");
        if (s.C_int.cols() != n || s.Chat_int.cols() != nh)
            throw DimensionError("source output map columns do not match state dimensions");
        F1.block(zoff, zoff, n, n) = s.M;
        F1.block(zoff, zoff + n, n, nh) = -s.M * s.P;
        F1.block(zoff + n, zoff, nh, n) = -s.P.transpose() * s.M;
        F1.block(zoff + n, zoff + n, nh, nh) = s.P.transpose() * s.M * s.P;
        h1 -= s.eps * s.eps;
        J.block(woff, zoff, s.C_int.rows(), n) = s.C_int;
        J.block(0, zoff + n, wrows, nh) -= Pw.middleCols(hoff, s.Chat_int.rows()) * s.Chat_int;
        zoff += n + nh;
        woff += static_cast<int>(s.C_int.rows());
        hoff += static_cast<int>(s.Chat_int.rows());
    }

    SProcedureProblem prob;
    prob.d = zdim;
    prob.F1 = 0.5 * (F1 + F1.transpose());
    prob.F2 = J.transpose() * Mw * J;
    prob.F2 = 0.5 * (prob.F2 + prob.F2.transpose()).eval();
    prob.g1 = Vec::Zero(zdim);
    prob.g2 = Vec::Zero(zdim);
    prob.h1 = h1;
    prob.h2 = -(eps_w * eps_w);
    return prob;
}

CompositionalityResult check_compositionality_condition(
    const std::vector<CompositionalitySource>& sources, const Mat& Mw, const Mat& Pw,
    double eps_w, double lambda, double tol_psd) {
    if (lambda < 0.0) throw Error("compositionality multiplier must be nonnegative");
    const SProcedureProblem prob = compositionality_problem(sources, Mw, Pw, eps_w);
    const SProcedureCheck chk = check_sprocedure(prob, lambda, tol_psd);
    CompositionalityResult out;
    out.pass = chk.pass;
    out.min_eig = chk.min_eig;
    out.tol = chk.tol;
    return out;
}

ComposedRelation compose_relations(const std::vector<RelationCertificate>& certs,
                                   const NetworkTopology& topo,
                                   const std::vector<ConditionRecord>& evidence) {
    if (static_cast<int>(certs.size()) != topo.n_subsystems)
        throw PrerequisiteError("certificate count does not match topology");
    ComposedRelation out;
    out.certs = certs;
    out.evidence = evidence;
    double eps = 0.0;
    double keep = 1.0;
    for (const auto& c : certs) {
        eps += c.rel.eps;
        keep *= (1.0 - c.delta);
    }
    out.eps = eps;
    out.delta = 1.0 - keep;
    for (int i = 0; i < topo.n_subsystems; ++i) {
        if (topo.incoming_edges(i).empty()) continue;
        const std::string want = "compositionality_" + std::to_string(i);
        bool found = false;
        for (const auto& rec : evidence)
            if (rec.name == want) {
                found = true;
                if (!rec.pass)
                    throw PrerequisiteError("compositionality evidence failed for subsystem " +
                                            std::to_string(i));
            }
        if (!found)
            throw PrerequisiteError("missing compositionality evidence for subsystem " +
                                    std::to_string(i));
    }
    return out;
}

}  // namespace simrel
