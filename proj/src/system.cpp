#include "simrel/system.hpp"

#include <string>

#include "simrel/errors.hpp"

namespace simrel {

namespace {
void require(bool ok, const std::string& what) {
    if (!ok) throw DimensionError(what);
}
}  // namespace

void NonlinearSystemTuple::validate() const {
    const int N = n();
    require(A.rows() == N && A.cols() == N, "A must be square n x n");
    require(B.rows() == N, "B must have n rows");
    require(C.cols() == N, "C must have n columns");
    require(D.rows() == N, "D must have n rows");
    require(E.rows() == N && E.cols() == 1, "E must be n x 1");
    require(F.rows() == 1 && F.cols() == N, "F must be 1 x n");
    require(R.rows() == N, "R must have n rows");
    require(N >= 1 && m() >= 0 && p() >= 0 && q() >= 1 && s() >= 0,
            "dimensions must be positive (q >= 1, n >= 1)");
}

Vec NonlinearSystemTuple::step(const Vec& x, const Vec& nu, const Vec& w,
                               const Vec& varsigma) const {
    require(x.size() == n(), "state has wrong dimension");
    require(nu.size() == m(), "external input has wrong dimension");
    require(w.size() == p(), "internal input has wrong dimension");
    require(varsigma.size() == s(), "noise has wrong dimension");
    const double arg = (F * x)(0);
    Vec next = A * x + E * phi.eval(arg);
    if (m() > 0) next += B * nu;
    if (p() > 0) next += D * w;
    if (s() > 0) next += R * varsigma;
    return next;
}

NonlinearSystemTuple NonlinearSystemTuple::shift_slope_to_zero() const {
    const double a = phi.slope_lo;
    NonlinearSystemTuple out = *this;
    out.A = A + a * (E * F);
    out.phi = phi.shifted_by(a);
    return out;
}

TrajectorySample simulate_trajectory(const NonlinearSystemTuple& sys, const Vec& x0,
                                     const InputProvider& nu_of, const InputProvider& w_of,
                                     int T, NoiseSource& noise_src) {
    if (noise_src.dim() != sys.s())
        throw DimensionError("noise source dimension does not match system noise dimension");
    TrajectorySample tr;
    tr.states.reserve(T + 1);
    tr.outputs.reserve(T + 1);
    tr.inputs_nu.reserve(T);
    tr.inputs_w.reserve(T);
    tr.noise.reserve(T);
    Vec x = x0;
    tr.states.push_back(x);
    tr.outputs.push_back(sys.output(x));
    for (int t = 0; t < T; ++t) {
        const Vec nu = nu_of ? nu_of(t, x) : Vec::Zero(sys.m());
        const Vec w = w_of ? w_of(t, x) : Vec::Zero(sys.p());
        const Vec z = noise_src.draw();
        x = sys.step(x, nu, w, z);
        tr.inputs_nu.push_back(nu);
        tr.inputs_w.push_back(w);
        tr.noise.push_back(z);
        tr.states.push_back(x);
        tr.outputs.push_back(sys.output(x));
    }
    return tr;
}

TrajectorySample replay_trajectory(const NonlinearSystemTuple& sys, const Vec& x0,
                                   const InputProvider& nu_of, const InputProvider& w_of,
                                   const std::vector<Vec>& noise) {
    TrajectorySample tr;
    const int T = static_cast<int>(noise.size());
    tr.states.reserve(T + 1);
    tr.outputs.reserve(T + 1);
    Vec x = x0;
    tr.states.push_back(x);
    tr.outputs.push_back(sys.output(x));
    for (int t = 0; t < T; ++t) {
        const Vec nu = nu_of ? nu_of(t, x) : Vec::Zero(sys.m());
        const Vec w = w_of ? w_of(t, x) : Vec::Zero(sys.p());
        x = sys.step(x, nu, w, noise[static_cast<std::size_t>(t)]);
        tr.inputs_nu.push_back(nu);
        tr.inputs_w.push_back(w);
        tr.noise.push_back(noise[static_cast<std::size_t>(t)]);
        tr.states.push_back(x);
        tr.outputs.push_back(sys.output(x));
    }
    return tr;
}

}  // namespace simrel
