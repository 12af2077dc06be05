#include "simrel/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "simrel/errors.hpp"

namespace simrel {

void SpecHorizon::validate(const FiniteMdp& mdp) const {
    if (horizon < 0) throw Error("specification horizon must be nonnegative");
    if (static_cast<int>(member.size()) != horizon + 1)
        throw DimensionError("specification sets must cover steps 0..horizon");
    for (const auto& step : member) {
        if (static_cast<long>(step.size()) != mdp.n_states() + 1)
            throw DimensionError("specification set length must be n_states + 1");
        if (step.back() != 0) throw Error("sink must never satisfy the specification");
    }
}

int FinitePolicy::w_at(int k, long state) const {
    return w_choice.at(static_cast<std::size_t>(k) * static_cast<std::size_t>(n_states + 1) +
                       static_cast<std::size_t>(state));
}

int FinitePolicy::nu_at(int k, long state) const {
    return nu_choice.at(static_cast<std::size_t>(k) * static_cast<std::size_t>(n_states + 1) +
                        static_cast<std::size_t>(state));
}

namespace {

DpResult dp_backward(const FiniteMdp& mdp, const SpecHorizon& spec, bool reach) {
    spec.validate(mdp);
    const long S = mdp.n_states();
    const int T = spec.horizon;
    const int W = mdp.n_w();
    const int U = mdp.n_nu();

    DpResult out;
    out.value.assign(static_cast<std::size_t>(T) + 1,
                     std::vector<double>(static_cast<std::size_t>(S) + 1, 0.0));
    out.policy.horizon = T;
    out.policy.n_states = S;
    out.policy.n_w = W;
    out.policy.n_nu = U;
    out.policy.w_choice.assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(S + 1), 0);
    out.policy.nu_choice.assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(S + 1), 0);

    for (long s = 0; s <= S; ++s)
        out.value[static_cast<std::size_t>(T)][static_cast<std::size_t>(s)] =
            spec.member[static_cast<std::size_t>(T)][static_cast<std::size_t>(s)] ? 1.0 : 0.0;

    for (int k = T - 1; k >= 0; --k) {
        const auto& next = out.value[static_cast<std::size_t>(k) + 1];
        auto& cur = out.value[static_cast<std::size_t>(k)];
        for (long s = 0; s <= S; ++s) {
            const bool good = spec.member[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
            if (reach && good) {
                cur[static_cast<std::size_t>(s)] = 1.0;  // target already reached
                continue;
            }
            if (!reach && !good) {
                cur[static_cast<std::size_t>(s)] = 0.0;  // safety violated now
                continue;
            }
            if (s == S) {
                cur[static_cast<std::size_t>(s)] = reach ? next.back() : 0.0;
                continue;
            }
            double best = -1.0;
            int best_w = 0, best_u = 0;
            for (int w = 0; w < W; ++w)
                for (int u = 0; u < U; ++u) {
                    const std::size_t off = mdp.row_offset(s, w, u);
                    double v = 0.0;
                    for (long t = 0; t <= S; ++t)
                        v += mdp.tensor[off + static_cast<std::size_t>(t)] *
                             next[static_cast<std::size_t>(t)];
                    if (v > best) {  // strict: keeps the lowest (w,u) on ties
                        best = v;
                        best_w = w;
                        best_u = u;
                    }
                }
            cur[static_cast<std::size_t>(s)] = best;
            const std::size_t pi =
                static_cast<std::size_t>(k) * static_cast<std::size_t>(S + 1) +
                static_cast<std::size_t>(s);
            out.policy.w_choice[pi] = best_w;
            out.policy.nu_choice[pi] = best_u;
        }
    }
    return out;
}

}  // namespace

DpResult dp_safety(const FiniteMdp& mdp, const SpecHorizon& spec) {
    if (spec.kind != SpecKind::safety) throw Error("dp_safety needs a safety specification");
    return dp_backward(mdp, spec, /*reach=*/false);
}

DpResult dp_reach(const FiniteMdp& mdp, const SpecHorizon& spec) {
    if (spec.kind != SpecKind::reachability)
        throw Error("dp_reach needs a reachability specification");
    return dp_backward(mdp, spec, /*reach=*/true);
}

SpecHorizon safe_sets_from_tube(const FiniteMdp& mdp, const EventTube& tube, SpecKind kind) {
    tube.validate();
    SpecHorizon spec;
    spec.kind = kind;
    spec.horizon = tube.horizon();
    spec.member.assign(static_cast<std::size_t>(spec.horizon) + 1,
                       std::vector<char>(static_cast<std::size_t>(mdp.n_states()) + 1, 0));
    for (int k = 0; k <= spec.horizon; ++k) {
        const OutputBox& box = tube.boxes[static_cast<std::size_t>(k)];
        if (box.empty) continue;
        for (long s = 0; s < mdp.n_states(); ++s)
            if (box.contains(mdp.output_of(s)))
                spec.member[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)] = 1;
    }
    return spec;
}

double tube_probability_under_policy(const FiniteMdp& mdp, const SpecHorizon& spec,
                                     const FinitePolicy& policy, long start_state) {
    spec.validate(mdp);
    if (policy.horizon != spec.horizon)
        throw DimensionError("policy horizon does not match specification");
    const long S = mdp.n_states();
    if (start_state < 0 || start_state > S) throw DimensionError("start state out of range");
    std::vector<double> dist(static_cast<std::size_t>(S) + 1, 0.0);
    dist[static_cast<std::size_t>(start_state)] = 1.0;
    double reached = 0.0;
    for (int k = 0; k <= spec.horizon; ++k) {
        // Mask to the step's set (safety) or absorb mass in targets (reach).
        for (long s = 0; s <= S; ++s) {
            const bool good = spec.member[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
            if (spec.kind == SpecKind::safety) {
                if (!good) dist[static_cast<std::size_t>(s)] = 0.0;
            } else if (good) {
                reached += dist[static_cast<std::size_t>(s)];
                dist[static_cast<std::size_t>(s)] = 0.0;
            }
        }
        if (k == spec.horizon) break;
        std::vector<double> next(static_cast<std::size_t>(S) + 1, 0.0);
        for (long s = 0; s <= S; ++s) {
            const double mass = dist[static_cast<std::size_t>(s)];
            if (mass == 0.0) continue;
            if (s == S) {
                next[static_cast<std::size_t>(S)] += mass;
                continue;
            }
            const std::size_t off =
                mdp.row_offset(s, policy.w_at(k, s), policy.nu_at(k, s));
            for (long t = 0; t <= S; ++t)
                next[static_cast<std::size_t>(t)] +=
                    mass * mdp.tensor[off + static_cast<std::size_t>(t)];
        }
        dist = std::move(next);
    }
    if (spec.kind == SpecKind::reachability) return reached;
    double stay = 0.0;
    for (double m : dist) stay += m;
    return stay;
}

double guarantee_transfer(double v_hat, const ClosenessCertificate& cert) {
    return std::max(0.0, v_hat - cert.gamma);
}

RefinedController::RefinedController(const FiniteMdp& mdp, const FinitePolicy& policy,
                                     NonlinearSystemTuple conc, NonlinearSystemTuple absr,
                                     QuadraticStateRelation rel,
                                     QuadraticInputRelation input_rel, InterfaceParams ifc,
                                     Mode mode)
    : mdp_(mdp),
      policy_(policy),
      conc_(std::move(conc)),
      absr_(std::move(absr)),
      rel_(std::move(rel)),
      input_rel_(std::move(input_rel)),
      ifc_(std::move(ifc)),
      mode_(mode) {
    if (policy_.n_states != mdp_.n_states())
        throw DimensionError("policy state count does not match abstraction");
    pinv_Pw_ = input_rel_.Pw.completeOrthogonalDecomposition().pseudoInverse();
    if (mode_ == Mode::reconstruction) {
        if (conc_.R.cols() == 0 ||
            conc_.R.completeOrthogonalDecomposition().rank() != conc_.R.cols())
            throw PrerequisiteError(
                "reconstruction mode requires R with full column rank; use co_simulation");
        pinv_R_ = conc_.R.completeOrthogonalDecomposition().pseudoInverse();
    }
    xhat_ = Vec::Zero(absr_.n());
    quantize(xhat_);
}

void RefinedController::reset(const Vec& xhat0) {
    forfeited_ = false;
    pending_ = false;
    quantize(xhat0);
}

void RefinedController::quantize(const Vec& xhat_raw) {
    const PiXResult q = pi_x(mdp_.partition, xhat_raw);
    if (q.sink) {
        forfeited_ = true;
        cell_ = mdp_.sink_state();
        // Keep the raw state for diagnostics; policy falls back to (0,0).
        xhat_ = xhat_raw;
    } else {
        cell_ = q.cell;
        xhat_ = q.representative;
    }
}

Vec RefinedController::act(int k, const Vec& x, const Vec& w_measured) {
    if (k < 0 || k >= policy_.horizon)
        throw DimensionError("controller step outside policy horizon");
    // Companion internal input: nearest representative of pinv(Pw) * w.
    const Vec target = pinv_Pw_ * w_measured;
    int w_idx = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < mdp_.n_w(); ++i) {
        const double dist = (mdp_.w_reps[static_cast<std::size_t>(i)] - target).norm();
        if (dist < best) {  // strict: lowest index wins ties
            best = dist;
            w_idx = i;
        }
    }
    const int nu_idx = forfeited_ ? 0 : policy_.nu_at(k, cell_);
    pending_what_ = mdp_.w_reps[static_cast<std::size_t>(w_idx)];
    pending_nuhat_ = mdp_.nu_reps[static_cast<std::size_t>(nu_idx)];
    pending_ = true;
    return refine_input(ifc_, conc_, rel_, x, xhat_, pending_what_, pending_nuhat_);
}

void RefinedController::advance_with_noise(const Vec& varsigma) {
    if (!pending_) throw PrerequisiteError("advance called before act");
    const Vec next = absr_.step(xhat_, pending_nuhat_, pending_what_, varsigma);
    pending_ = false;
    const bool was_forfeited = forfeited_;
    quantize(next);
    forfeited_ = forfeited_ || was_forfeited;
}

void RefinedController::advance_with_observation(const Vec& x, const Vec& nu, const Vec& w,
                                                 const Vec& x_next) {
    if (mode_ != Mode::reconstruction)
        throw PrerequisiteError("observation-based advance requires reconstruction mode");
    const double arg = (conc_.F * x)(0);
    Vec drift = conc_.A * x + conc_.E * conc_.phi.eval(arg);
    if (conc_.m() > 0) drift += conc_.B * nu;
    if (conc_.p() > 0) drift += conc_.D * w;
    const Vec varsigma = pinv_R_ * (x_next - drift);
    advance_with_noise(varsigma);
}

void write_policy(const FinitePolicy& policy, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << "simrel-policy 1\n";
    os << "horizon " << policy.horizon << '\n';
    os << "states " << policy.n_states << '\n';
    os << "w_count " << policy.n_w << '\n';
    os << "nu_count " << policy.n_nu << '\n';
    for (int k = 0; k < policy.horizon; ++k)
        for (long s = 0; s <= policy.n_states; ++s)
            os << k << ' ' << s << ' ' << policy.w_at(k, s) << ' ' << policy.nu_at(k, s)
               << '\n';
    os << "end\n";
    if (!os) throw Error("write failure on '" + path + "'");
}

FinitePolicy read_policy(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "' for reading");
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(is, line))
            throw ParseError(std::string("policy file: missing ") + what);
        return std::istringstream(line);
    };
    {
        auto iss = next_line("header");
        std::string magic;
        int ver = 0;
        iss >> magic >> ver;
        if (magic != "simrel-policy" || ver != 1)
            throw ParseError("policy file: bad header '" + line + "'");
    }
    FinitePolicy p;
    auto read_kv = [&next_line](const char* key, auto& out) {
        auto iss = next_line(key);
        std::string k;
        iss >> k >> out;
        if (k != key) throw ParseError(std::string("policy file: expected ") + key);
    };
    read_kv("horizon", p.horizon);
    read_kv("states", p.n_states);
    read_kv("w_count", p.n_w);
    read_kv("nu_count", p.n_nu);
    const std::size_t entries =
        static_cast<std::size_t>(p.horizon) * static_cast<std::size_t>(p.n_states + 1);
    p.w_choice.assign(entries, 0);
    p.nu_choice.assign(entries, 0);
    for (std::size_t e = 0; e < entries; ++e) {
        auto iss = next_line("entry");
        int k = 0, w = 0, u = 0;
        long s = 0;
        if (!(iss >> k >> s >> w >> u)) throw ParseError("policy file: malformed entry");
        if (k < 0 || k >= p.horizon || s < 0 || s > p.n_states)
            throw ParseError("policy file: entry out of range");
        const std::size_t idx =
            static_cast<std::size_t>(k) * static_cast<std::size_t>(p.n_states + 1) +
            static_cast<std::size_t>(s);
        p.w_choice[idx] = w;
        p.nu_choice[idx] = u;
    }
    {
        auto iss = next_line("end");
        std::string k;
        iss >> k;
        if (k != "end") throw ParseError("policy file: missing end marker");
    }
    return p;
}

}  // namespace simrel
