// simrel: batch front end for certification, composition, abstraction,
// synthesis, and Monte Carlo validation of reduced-order relation pipelines.
//
// Exit codes: 0 success, 1 certification/validation failure, 2 parse error,
// 3 missing prerequisite artifact, 4 resource-cap refusal.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "simrel/certification.hpp"
#include "simrel/errors.hpp"
#include "simrel/finite_mdp.hpp"
#include "simrel/grid.hpp"
#include "simrel/guarantees.hpp"
#include "simrel/model_io.hpp"
#include "simrel/network.hpp"
#include "simrel/rng.hpp"
#include "simrel/sprocedure.hpp"
#include "simrel/synthesis.hpp"

namespace fs = std::filesystem;
using simrel::CertificationOutcome;
using simrel::ComposedRelation;
using simrel::ConditionRecord;
using simrel::EventTube;
using simrel::FiniteMdp;
using simrel::NetworkModel;
using simrel::OutputBox;
using simrel::Vec;

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class StageTimer {
  public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }
    std::string line(const std::string& stage) const {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "# timing %s %.3fs", stage.c_str(), seconds());
        return buf;
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

struct Flags {
    std::uint64_t seed = 0;
    long trials = 10000;
    int horizon = -1;  // negative: use the model's spec horizon, else 10
    double tol_psd = 0.0;
    bool has_tol_psd = false;
    double tol_eq = 0.0;
    bool has_tol_eq = false;
    double lambda = 0.0;
    bool has_lambda = false;
    int dof = 0;
    bool has_dof = false;
    int threads = 1;
    std::string out_dir = "out";
};

void apply_overrides(NetworkModel& model, const Flags& flags) {
    for (auto& sub : model.subsystems) {
        if (flags.has_tol_psd) sub.tol_psd = flags.tol_psd;
        if (flags.has_tol_eq) sub.tol_eq = flags.tol_eq;
        if (flags.has_dof) sub.dof = flags.dof;
        if (flags.has_lambda) {
            sub.lambda_search = false;
            sub.lambda_fixed = flags.lambda;
        }
    }
}

int resolve_horizon(const NetworkModel& model, const Flags& flags) {
    if (flags.horizon >= 0) return flags.horizon;
    if (model.spec.present) return model.spec.horizon;
    return 10;
}

void write_text(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream os(path);
    if (!os) throw simrel::Error("cannot open '" + path.string() + "' for writing");
    for (const auto& l : lines) os << l << "\n";
    if (!os) throw simrel::Error("write failure on '" + path.string() + "'");
}

fs::path certificate_path(const fs::path& out, const std::string& name) {
    return out / ("certificate_" + name + ".json");
}
fs::path mdp_path(const fs::path& out, const std::string& name) {
    return out / ("mdp_" + name + ".txt");
}
fs::path policy_path(const fs::path& out, const std::string& name) {
    return out / ("policy_" + name + ".txt");
}

// ---------------------------------------------------------------------------
// Stage: per-subsystem certification.

struct CertifyStage {
    std::vector<CertificationOutcome> outcomes;
    bool all_certified = true;
    std::vector<std::string> lines;  // human-readable summary
};

CertifyStage run_certification(const NetworkModel& model) {
    CertifyStage st;
    for (const auto& sub : model.subsystems) {
        auto opts = sub.certification_options();
        opts.coupling = model.coupling;
        CertificationOutcome out =
            simrel::certify_relation(sub.dynamics, sub.reduced, sub.relation,
                                     sub.input_relation, sub.interface,
                                     sub.chance_params(), opts);
        std::string line = "subsystem " + sub.name + ": " +
                           (out.certified ? "certified" : "refused") +
                           " lambda=" + g17(out.lambda) +
                           " min_eigenvalue=" + g17(out.min_eig);
        st.lines.push_back(line);
        for (const auto& rec : out.conditions)
            if (!rec.pass)
                st.lines.push_back("  failed condition: " + rec.name + " residual=" +
                                   g17(rec.residual) +
                                   (rec.detail.empty() ? "" : " (" + rec.detail + ")"));
        st.all_certified = st.all_certified && out.certified;
        st.outcomes.push_back(std::move(out));
    }
    return st;
}

std::vector<simrel::RelationCertificate> certificates_of(const CertifyStage& st) {
    std::vector<simrel::RelationCertificate> certs;
    for (const auto& out : st.outcomes) certs.push_back(*out.certificate);
    return certs;
}

// ---------------------------------------------------------------------------
// Stage: compositionality evidence + composition.

struct ComposeStage {
    std::vector<ConditionRecord> evidence;
    bool all_pass = true;
    std::vector<std::string> lines;
    ComposedRelation composed;  // valid only when all_pass
};

ComposeStage run_composition(const NetworkModel& model,
                             const std::vector<simrel::RelationCertificate>& certs) {
    ComposeStage st;
    for (int i = 0; i < model.topology.n_subsystems; ++i) {
        const std::vector<int> incoming = model.topology.incoming_edges(i);
        if (incoming.empty()) continue;
        std::vector<simrel::CompositionalitySource> sources;
        for (int k : incoming) {
            const auto& edge = model.topology.edges[static_cast<std::size_t>(k)];
            simrel::CompositionalitySource src;
            src.M = certs[static_cast<std::size_t>(edge.from)].rel.M;
            src.P = certs[static_cast<std::size_t>(edge.from)].rel.P;
            src.eps = certs[static_cast<std::size_t>(edge.from)].rel.eps;
            src.C_int = edge.C;
            src.Chat_int = edge.Chat;
            sources.push_back(std::move(src));
        }
        const auto& recv = certs[static_cast<std::size_t>(i)];
        const simrel::SProcedureProblem prob = simrel::compositionality_problem(
            sources, recv.input_rel.Mw, recv.input_rel.Pw, recv.input_rel.eps_w);
        const simrel::LambdaSearchResult found =
            simrel::search_lambda(prob, model.subsystems[static_cast<std::size_t>(i)].tol_psd);
        ConditionRecord rec;
        rec.name = "compositionality_" + std::to_string(i);
        rec.pass = found.pass;
        rec.residual = found.min_eig;
        rec.detail = "lambda=" + g17(found.lambda);
        st.lines.push_back("receiver " + model.subsystems[static_cast<std::size_t>(i)].name +
                           ": compositionality " + (rec.pass ? "pass" : "FAIL") +
                           " lambda=" + g17(found.lambda) +
                           " min_eigenvalue=" + g17(found.min_eig));
        st.all_pass = st.all_pass && rec.pass;
        st.evidence.push_back(std::move(rec));
    }
    if (st.all_pass)
        st.composed = simrel::compose_relations(certs, model.topology, st.evidence);
    return st;
}

// ---------------------------------------------------------------------------
// Stage: finite abstractions.

struct AbstractStage {
    std::vector<int> indices;  // subsystems with abstraction settings
    std::vector<FiniteMdp> mdps;
    std::vector<std::string> lines;
};

AbstractStage run_abstraction(const NetworkModel& model, const Flags& flags) {
    AbstractStage st;
    for (std::size_t i = 0; i < model.subsystems.size(); ++i) {
        const auto& sub = model.subsystems[i];
        if (!sub.has_abstraction) continue;
        const simrel::GridPartition part =
            simrel::build_partition(sub.box_lower, sub.box_upper, sub.widths);
        simrel::MdpBuildOptions opts;
        opts.seed = simrel::NoiseSource::derive(flags.seed, i);
        opts.threads = flags.threads;
        FiniteMdp mdp = simrel::build_finite_mdp(sub.reduced, part, sub.w_grid,
                                                 sub.nu_grid, sub.x0, opts);
        std::string line = "subsystem " + sub.name + ": " +
                           std::to_string(mdp.n_states()) + " cells (+sink), " +
                           std::to_string(mdp.n_w()) + " internal x " +
                           std::to_string(mdp.n_nu()) +
                           " external inputs, beta=" + g17(part.beta);
        if (part.extended) line += " (box extended to fit widths)";
        st.lines.push_back(line);
        if (part.beta > sub.beta && sub.beta > 0.0)
            st.lines.push_back("  warning: partition beta " + g17(part.beta) +
                               " exceeds the certified beta " + g17(sub.beta));
        st.indices.push_back(static_cast<int>(i));
        st.mdps.push_back(std::move(mdp));
    }
    if (st.indices.empty())
        throw simrel::PrerequisiteError(
            "model has no abstraction settings; nothing to abstract");
    return st;
}

// ---------------------------------------------------------------------------
// Stage: synthesis (per-subsystem DP on the contracted tube slot).

EventTube slice_tube(const EventTube& tube, int offset, int dim) {
    EventTube out;
    for (const OutputBox& b : tube.boxes) {
        OutputBox sl;
        sl.empty = b.empty;
        if (b.empty) {
            sl.lower = Vec::Zero(dim);
            sl.upper = Vec::Zero(dim);
        } else {
            sl.lower = b.lower.segment(offset, dim);
            sl.upper = b.upper.segment(offset, dim);
        }
        out.boxes.push_back(std::move(sl));
    }
    return out;
}

/// Materializes the specification tube at the requested horizon.  Uniform
/// specs rebuild at any horizon; explicit box lists must match it.
EventTube spec_tube_at(const NetworkModel& model, int horizon) {
    if (!model.spec.present)
        throw simrel::PrerequisiteError("model has no specification block");
    if (model.spec.uniform) {
        int q_total = 0;
        for (const auto& s : model.subsystems) q_total += s.dynamics.q();
        EventTube tube;
        OutputBox box;
        box.lower = Vec::Constant(q_total, -model.spec.half_width);
        box.upper = Vec::Constant(q_total, model.spec.half_width);
        tube.boxes.assign(static_cast<std::size_t>(horizon) + 1, box);
        return tube;
    }
    EventTube tube = model.spec.tube;
    if (tube.horizon() != horizon)
        throw simrel::PrerequisiteError(
            "explicit tube horizon " + std::to_string(tube.horizon()) +
            " does not match requested horizon " + std::to_string(horizon));
    return tube;
}

struct SynthesizeStage {
    std::vector<simrel::FinitePolicy> policies;  // parallel to AbstractStage.indices
    std::vector<std::string> lines;
};

SynthesizeStage run_synthesis(const NetworkModel& model, const AbstractStage& abs_stage,
                              double composed_eps, double composed_delta, int horizon) {
    if (abs_stage.indices.size() != model.subsystems.size())
        throw simrel::PrerequisiteError(
            "synthesis needs abstraction settings for every subsystem");
    const EventTube tube = spec_tube_at(model, horizon);
    const simrel::ClosenessCertificate closeness =
        simrel::make_closeness_certificate(composed_eps, composed_delta, horizon);
    SynthesizeStage st;
    st.lines.push_back(std::string("kind=") +
                       (model.spec.kind == simrel::SpecKind::safety ? "safety"
                                                                    : "reachability") +
                       " horizon=" + std::to_string(horizon) + " eps=" + g17(composed_eps) +
                       " delta=" + g17(composed_delta) + " gamma=" + g17(closeness.gamma));
    int out_off = 0;
    for (std::size_t j = 0; j < abs_stage.indices.size(); ++j) {
        const auto& sub = model.subsystems[static_cast<std::size_t>(abs_stage.indices[j])];
        const FiniteMdp& mdp = abs_stage.mdps[j];
        const int q = sub.reduced.q();
        const EventTube slot = slice_tube(tube, out_off, q);
        out_off += q;
        const EventTube contracted = simrel::contract_tube(slot, composed_eps);
        const simrel::SpecHorizon sets =
            simrel::safe_sets_from_tube(mdp, contracted, model.spec.kind);
        const simrel::DpResult dp = model.spec.kind == simrel::SpecKind::safety
                                        ? simrel::dp_safety(mdp, sets)
                                        : simrel::dp_reach(mdp, sets);
        const double vhat =
            dp.value[0][static_cast<std::size_t>(mdp.initial_state)];
        const double transferred = simrel::guarantee_transfer(vhat, closeness);
        st.lines.push_back("subsystem " + sub.name + ": abstract_value=" + g17(vhat) +
                           " transferred_lower_bound=" + g17(transferred));
        st.policies.push_back(dp.policy);
    }
    return st;
}

// ---------------------------------------------------------------------------
// Stage: coupled Monte Carlo validation.

struct ValidateStage {
    simrel::ValidationReport report;
    std::vector<std::string> lines;
    bool ok = true;
};

ValidateStage run_validation(const NetworkModel& model, const ComposedRelation& composed,
                             const Flags& flags, int horizon) {
    simrel::InterconnectedSystem conc(model.concrete_tuples(), model.topology);
    simrel::InterconnectedSystem absn(model.reduced_tuples(), model.reduced_topology());

    Vec xhat0 = Vec::Zero(absn.n_total());
    Vec x0 = Vec::Zero(conc.n_total());
    for (int i = 0; i < conc.count(); ++i) {
        const auto& sub = model.subsystems[static_cast<std::size_t>(i)];
        xhat0.segment(absn.state_offset(i), sub.reduced.n()) = sub.x0;
        x0.segment(conc.state_offset(i), sub.dynamics.n()) = sub.relation.P * sub.x0;
    }

    simrel::ValidationOptions opts;
    opts.trials = flags.trials;
    opts.horizon = horizon;
    opts.seed = flags.seed;
    opts.threads = flags.threads;
    opts.nuhat_mode = simrel::NuHatMode::random_ball;
    opts.c_nuhat = model.subsystems.front().c_nuhat;
    for (const auto& sub : model.subsystems)
        opts.c_nuhat = std::min(opts.c_nuhat, sub.c_nuhat);

    bool all_abs = true;
    for (const auto& sub : model.subsystems) all_abs = all_abs && sub.has_abstraction;
    if (all_abs)
        for (const auto& sub : model.subsystems)
            opts.companion_partitions.push_back(
                simrel::build_partition(sub.box_lower, sub.box_upper, sub.widths));

    EventTube tube;
    if (model.spec.present) {
        tube = spec_tube_at(model, horizon);
        opts.tube = &tube;
    }

    ValidateStage st;
    st.report = simrel::monte_carlo_validate(conc, absn, composed, x0, xhat0, opts);
    st.lines.push_back("trials=" + std::to_string(st.report.trials) +
                       " horizon=" + std::to_string(st.report.horizon) +
                       " seed=" + std::to_string(flags.seed) +
                       " gamma=" + g17(st.report.gamma));
    for (const auto& l : simrel::format_validation_report(st.report)) st.lines.push_back(l);
    st.ok = st.report.retention_ok && st.report.deviation_ok &&
            (!st.report.tube_reported || st.report.event_ok);
    return st;
}

// ---------------------------------------------------------------------------
// Artifact helpers shared by the commands.

void write_certificates(const fs::path& out, const NetworkModel& model,
                        const CertifyStage& st) {
    for (std::size_t i = 0; i < model.subsystems.size(); ++i) {
        const std::string text = simrel::serialize_certification_outcome(
            model.subsystems[i].name, st.outcomes[i]);
        std::ofstream os(certificate_path(out, model.subsystems[i].name));
        if (!os) throw simrel::Error("cannot write certificate file");
        os << text;
    }
}

/// Reads eps/delta back from a previously composed artifact.
std::pair<double, double> read_composed(const fs::path& out) {
    const fs::path path = out / "composed.json";
    if (!fs::exists(path))
        throw simrel::PrerequisiteError("missing " + path.string() +
                                        "; run the compose command first");
    std::ifstream is(path);
    nlohmann::json j;
    is >> j;
    return {j.at("eps").get<double>(), j.at("delta").get<double>()};
}

void require_certificates(const fs::path& out, const NetworkModel& model) {
    for (const auto& sub : model.subsystems) {
        const fs::path path = certificate_path(out, sub.name);
        if (!fs::exists(path))
            throw simrel::PrerequisiteError("missing " + path.string() +
                                            "; run the certify command first");
        std::ifstream is(path);
        nlohmann::json j;
        try {
            is >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw simrel::ParseError(path.string() + ": " + e.what());
        }
        if (!j.value("certified", false))
            throw simrel::PrerequisiteError(
                "certificate for subsystem '" + sub.name +
                "' records a refusal; re-run certify after fixing the model");
    }
}

// ---------------------------------------------------------------------------
// Commands.

int cmd_certify(const NetworkModel& model, const Flags& flags) {
    const StageTimer timer;
    const CertifyStage st = run_certification(model);
    write_certificates(flags.out_dir, model, st);
    for (const auto& l : st.lines) std::cout << l << "\n";
    std::cout << timer.line("certify") << "\n";
    return st.all_certified ? 0 : 1;
}

int cmd_compose(const NetworkModel& model, const Flags& flags) {
    const StageTimer timer;
    require_certificates(flags.out_dir, model);
    const CertifyStage cert_st = run_certification(model);
    if (!cert_st.all_certified)
        throw simrel::PrerequisiteError(
            "stored certificates are stale: the model no longer certifies");
    const ComposeStage st = run_composition(model, certificates_of(cert_st));
    for (const auto& l : st.lines) std::cout << l << "\n";
    if (!st.all_pass) {
        std::cout << "composition refused: compositionality condition failed\n";
        std::cout << timer.line("compose") << "\n";
        return 1;
    }
    const int horizon = resolve_horizon(model, flags);
    const simrel::ClosenessCertificate closeness =
        simrel::make_closeness_certificate(st.composed.eps, st.composed.delta, horizon);
    std::vector<std::string> cert_files;
    for (const auto& sub : model.subsystems)
        cert_files.push_back("certificate_" + sub.name + ".json");
    std::ofstream os(fs::path(flags.out_dir) / "composed.json");
    if (!os) throw simrel::Error("cannot write composed.json");
    os << simrel::serialize_composed_relation(st.composed, cert_files, closeness);
    std::cout << "composed eps=" << g17(st.composed.eps)
              << " delta=" << g17(st.composed.delta) << " horizon=" << horizon
              << " gamma=" << g17(closeness.gamma) << "\n";
    std::cout << timer.line("compose") << "\n";
    return 0;
}

int cmd_abstract(const NetworkModel& model, const Flags& flags) {
    const StageTimer timer;
    const AbstractStage st = run_abstraction(model, flags);
    for (std::size_t j = 0; j < st.indices.size(); ++j)
        simrel::write_finite_mdp(
            st.mdps[j],
            mdp_path(flags.out_dir,
                     model.subsystems[static_cast<std::size_t>(st.indices[j])].name)
                .string());
    for (const auto& l : st.lines) std::cout << l << "\n";
    std::cout << timer.line("abstract") << "\n";
    return 0;
}

int cmd_synthesize(const NetworkModel& model, const Flags& flags) {
    const StageTimer timer;
    const auto [eps, delta] = read_composed(flags.out_dir);
    AbstractStage abs_st;
    for (std::size_t i = 0; i < model.subsystems.size(); ++i) {
        const auto& sub = model.subsystems[i];
        if (!sub.has_abstraction)
            throw simrel::PrerequisiteError(
                "synthesis needs abstraction settings for every subsystem");
        const fs::path path = mdp_path(flags.out_dir, sub.name);
        if (!fs::exists(path))
            throw simrel::PrerequisiteError("missing " + path.string() +
                                            "; run the abstract command first");
        abs_st.indices.push_back(static_cast<int>(i));
        abs_st.mdps.push_back(simrel::read_finite_mdp(path.string()));
    }
    const int horizon = resolve_horizon(model, flags);
    const SynthesizeStage st = run_synthesis(model, abs_st, eps, delta, horizon);
    for (std::size_t j = 0; j < st.policies.size(); ++j)
        simrel::write_policy(
            st.policies[j],
            policy_path(flags.out_dir,
                        model.subsystems[static_cast<std::size_t>(abs_st.indices[j])].name)
                .string());
    std::vector<std::string> lines = st.lines;
    lines.push_back(timer.line("synthesize"));
    write_text(fs::path(flags.out_dir) / "synthesis.txt", lines);
    for (const auto& l : lines) std::cout << l << "\n";
    return 0;
}

int cmd_simulate(const NetworkModel& model, const Flags& flags) {
    const StageTimer timer;
    read_composed(flags.out_dir);  // ordering contract only; values recomputed below
    const CertifyStage cert_st = run_certification(model);
    if (!cert_st.all_certified)
        throw simrel::PrerequisiteError(
            "stored composition is stale: the model no longer certifies");
    const ComposeStage comp_st = run_composition(model, certificates_of(cert_st));
    if (!comp_st.all_pass)
        throw simrel::PrerequisiteError(
            "stored composition is stale: the compositionality condition now fails");
    const int horizon = resolve_horizon(model, flags);
    const ValidateStage st = run_validation(model, comp_st.composed, flags, horizon);
    std::vector<std::string> lines = st.lines;
    lines.push_back(timer.line("simulate"));
    write_text(fs::path(flags.out_dir) / "validation.txt", lines);
    for (const auto& l : lines) std::cout << l << "\n";
    return st.ok ? 0 : 1;
}

int cmd_report(const NetworkModel& model, const Flags& flags) {
    const StageTimer total;
    std::vector<std::string> rep;
    rep.push_back("simrel pipeline report");
    rep.push_back("seed=" + std::to_string(flags.seed));
    bool ok = true;

    {
        const StageTimer t;
        const CertifyStage st = run_certification(model);
        write_certificates(flags.out_dir, model, st);
        rep.push_back("");
        rep.push_back("[certification]");
        rep.insert(rep.end(), st.lines.begin(), st.lines.end());
        rep.push_back(t.line("certify"));
        if (!st.all_certified) {
            rep.push_back("pipeline stopped: certification failed");
            write_text(fs::path(flags.out_dir) / "report.txt", rep);
            for (const auto& l : rep) std::cout << l << "\n";
            return 1;
        }

        const StageTimer tc;
        const ComposeStage comp = run_composition(model, certificates_of(st));
        rep.push_back("");
        rep.push_back("[composition]");
        rep.insert(rep.end(), comp.lines.begin(), comp.lines.end());
        const int horizon = resolve_horizon(model, flags);
        if (!comp.all_pass) {
            rep.push_back("pipeline stopped: compositionality condition failed");
            write_text(fs::path(flags.out_dir) / "report.txt", rep);
            for (const auto& l : rep) std::cout << l << "\n";
            return 1;
        }
        const simrel::ClosenessCertificate closeness = simrel::make_closeness_certificate(
            comp.composed.eps, comp.composed.delta, horizon);
        rep.push_back("composed eps=" + g17(comp.composed.eps) +
                      " delta=" + g17(comp.composed.delta) +
                      " horizon=" + std::to_string(horizon) +
                      " gamma=" + g17(closeness.gamma));
        std::vector<std::string> cert_files;
        for (const auto& sub : model.subsystems)
            cert_files.push_back("certificate_" + sub.name + ".json");
        std::ofstream os(fs::path(flags.out_dir) / "composed.json");
        if (!os) throw simrel::Error("cannot write composed.json");
        os << simrel::serialize_composed_relation(comp.composed, cert_files, closeness);
        rep.push_back(tc.line("compose"));

        bool all_abs = true;
        for (const auto& sub : model.subsystems) all_abs = all_abs && sub.has_abstraction;
        if (all_abs) {
            const StageTimer ta;
            const AbstractStage abs_st = run_abstraction(model, flags);
            for (std::size_t j = 0; j < abs_st.indices.size(); ++j)
                simrel::write_finite_mdp(
                    abs_st.mdps[j],
                    mdp_path(flags.out_dir,
                             model.subsystems[static_cast<std::size_t>(abs_st.indices[j])]
                                 .name)
                        .string());
            rep.push_back("");
            rep.push_back("[abstraction]");
            rep.insert(rep.end(), abs_st.lines.begin(), abs_st.lines.end());
            rep.push_back(ta.line("abstract"));

            if (model.spec.present) {
                const StageTimer ts;
                const SynthesizeStage syn = run_synthesis(
                    model, abs_st, comp.composed.eps, comp.composed.delta, horizon);
                for (std::size_t j = 0; j < syn.policies.size(); ++j)
                    simrel::write_policy(
                        syn.policies[j],
                        policy_path(
                            flags.out_dir,
                            model.subsystems[static_cast<std::size_t>(abs_st.indices[j])]
                                .name)
                            .string());
                std::vector<std::string> syn_lines = syn.lines;
                syn_lines.push_back(ts.line("synthesize"));
                write_text(fs::path(flags.out_dir) / "synthesis.txt", syn_lines);
                rep.push_back("");
                rep.push_back("[synthesis]");
                rep.insert(rep.end(), syn.lines.begin(), syn.lines.end());
                rep.push_back(ts.line("synthesize"));
            }
        }

        const StageTimer tv;
        const ValidateStage val = run_validation(model, comp.composed, flags, horizon);
        std::vector<std::string> val_lines = val.lines;
        val_lines.push_back(tv.line("simulate"));
        write_text(fs::path(flags.out_dir) / "validation.txt", val_lines);
        rep.push_back("");
        rep.push_back("[validation]");
        rep.insert(rep.end(), val.lines.begin(), val.lines.end());
        rep.push_back(tv.line("simulate"));
        ok = ok && val.ok;
    }

    rep.push_back("");
    rep.push_back(std::string("pipeline verdict: ") + (ok ? "pass" : "fail"));
    rep.push_back(total.line("total"));
    write_text(fs::path(flags.out_dir) / "report.txt", rep);
    for (const auto& l : rep) std::cout << l << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certification, composition, abstraction, synthesis, and validation "
                 "of approximate probabilistic simulation relations"};
    app.require_subcommand(1);

    Flags flags;
    std::string model_path;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("model", model_path, "network model file (JSON)")->required();
        sub->add_option("--seed", flags.seed, "base RNG seed");
        sub->add_option("--trials", flags.trials, "Monte Carlo validation trials")
            ->check(CLI::PositiveNumber);
        sub->add_option("--horizon", flags.horizon,
                        "finite horizon (default: the model's specification horizon)");
        sub->add_option("--tol-psd", flags.tol_psd,
                        "PSD tolerance override (default: scale-aware)");
        sub->add_option("--tol-eq", flags.tol_eq,
                        "structural-equality tolerance override");
        sub->add_option("--lambda", flags.lambda,
                        "fixed S-procedure multiplier (default: search)");
        sub->add_option("--dof", flags.dof, "chi-square degrees of freedom override");
        sub->add_option("--threads", flags.threads, "worker pool size")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out-dir", flags.out_dir, "artifact directory");
    };

    CLI::App* sc[6] = {
        app.add_subcommand("certify", "check each subsystem's candidate relation"),
        app.add_subcommand("compose", "fold certificates into a network relation"),
        app.add_subcommand("abstract", "build finite abstractions of the reduced models"),
        app.add_subcommand("synthesize", "solve the DP and transfer the guarantee"),
        app.add_subcommand("simulate", "coupled Monte Carlo validation"),
        app.add_subcommand("report", "run the whole pipeline and write a summary"),
    };
    for (CLI::App* s : sc) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    for (CLI::App* s : sc) {
        if (!s->parsed()) continue;
        flags.has_tol_psd = s->count("--tol-psd") > 0;
        flags.has_tol_eq = s->count("--tol-eq") > 0;
        flags.has_lambda = s->count("--lambda") > 0;
        flags.has_dof = s->count("--dof") > 0;
    }

    try {
        fs::create_directories(flags.out_dir);
        NetworkModel model = simrel::parse_network_model(model_path);
        apply_overrides(model, flags);
        if (sc[0]->parsed()) return cmd_certify(model, flags);
        if (sc[1]->parsed()) return cmd_compose(model, flags);
        if (sc[2]->parsed()) return cmd_abstract(model, flags);
        if (sc[3]->parsed()) return cmd_synthesize(model, flags);
        if (sc[4]->parsed()) return cmd_simulate(model, flags);
        return cmd_report(model, flags);
    } catch (const simrel::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const simrel::PrerequisiteError& e) {
        std::cerr << "prerequisite error: " << e.what() << "\n";
        return 3;
    } catch (const simrel::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 4;
    } catch (const simrel::DimensionError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
