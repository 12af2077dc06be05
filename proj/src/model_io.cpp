#include "simrel/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "simrel/errors.hpp"

namespace simrel {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ParseError(where + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (allowed.count(it.key()) == 0) fail(where + "/" + it.key(), "unknown key");
}

const json& require_key(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing required key '") + key + "'");
    return *it;
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

Mat as_matrix(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected a matrix (array of rows)");
    const std::size_t rows = v.size();
    std::size_t cols = 0;
    if (rows > 0) {
        if (!v[0].is_array()) fail(where + "/0", "expected a row (array of numbers)");
        cols = v[0].size();
    }
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string wi = where + "/" + std::to_string(i);
        if (!v[i].is_array()) fail(wi, "expected a row (array of numbers)");
        if (v[i].size() != cols) fail(wi, "ragged matrix: row length mismatch");
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                as_number(v[i][j], wi + "/" + std::to_string(j));
    }
    return m;
}

Vec as_vector(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected a vector (array of numbers)");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = as_number(v[i], where + "/" + std::to_string(i));
    return out;
}

std::vector<double> as_double_list(const json& v, const std::string& where) {
    const Vec x = as_vector(v, where);
    return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<Vec> as_vector_list(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of vectors");
    std::vector<Vec> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_vector(v[i], where + "/" + std::to_string(i)));
    return out;
}

NonlinearityDescriptor parse_phi(const json& v, const std::string& where) {
    reject_unknown_keys(v, {"tag", "scale", "linear_coef", "points", "slope_lo", "slope_hi"},
                        where);
    NonlinearityDescriptor d;
    d.tag = phi_tag_from_string(as_string(require_key(v, "tag", where), where + "/tag"));
    if (v.contains("scale")) d.scale = as_number(v["scale"], where + "/scale");
    if (v.contains("linear_coef"))
        d.linear_coef = as_number(v["linear_coef"], where + "/linear_coef");
    if (v.contains("points")) {
        const Mat pts = as_matrix(v["points"], where + "/points");
        if (pts.cols() != 2) fail(where + "/points", "knots must be [s, value] pairs");
        for (Eigen::Index i = 0; i < pts.rows(); ++i)
            d.points.emplace_back(pts(i, 0), pts(i, 1));
    }
    switch (d.tag) {
        case PhiTag::zero: d = make_zero_phi(); break;
        case PhiTag::identity_scaled: {
            const double lc = d.linear_coef;
            d = make_identity_phi(d.scale);
            d.linear_coef = lc;
            d.slope_lo += lc;
            d.slope_hi += lc;
            break;
        }
        case PhiTag::sine: {
            const double lc = d.linear_coef;
            d = make_sine_phi(d.scale);
            d.linear_coef = lc;
            d.slope_lo += lc;
            d.slope_hi += lc;
            break;
        }
        case PhiTag::piecewise_linear: {
            const double lc = d.linear_coef;
            auto pts = d.points;
            d = make_piecewise_phi(std::move(pts));
            d.linear_coef = lc;
            d.slope_lo += lc;
            d.slope_hi += lc;
            break;
        }
    }
    if (v.contains("slope_lo")) d.slope_lo = as_number(v["slope_lo"], where + "/slope_lo");
    if (v.contains("slope_hi")) d.slope_hi = as_number(v["slope_hi"], where + "/slope_hi");
    return d;
}

NonlinearSystemTuple parse_tuple(const json& v, const std::string& where) {
    reject_unknown_keys(v, {"A", "B", "C", "D", "E", "F", "R", "phi"}, where);
    NonlinearSystemTuple t;
    t.A = as_matrix(require_key(v, "A", where), where + "/A");
    const int n = static_cast<int>(t.A.rows());
    t.B = v.contains("B") ? as_matrix(v["B"], where + "/B") : Mat::Zero(n, 0);
    t.C = as_matrix(require_key(v, "C", where), where + "/C");
    t.D = v.contains("D") ? as_matrix(v["D"], where + "/D") : Mat::Zero(n, 0);
    t.E = v.contains("E") ? as_matrix(v["E"], where + "/E") : Mat::Zero(n, 1);
    t.F = v.contains("F") ? as_matrix(v["F"], where + "/F") : Mat::Zero(1, n);
    t.R = v.contains("R") ? as_matrix(v["R"], where + "/R") : Mat::Zero(n, 0);
    t.phi = v.contains("phi") ? parse_phi(v["phi"], where + "/phi") : make_zero_phi();
    try {
        t.validate();
    } catch (const DimensionError& e) {
        fail(where, e.what());
    }
    return t;
}

SubsystemModel parse_subsystem(const json& v, const std::string& where) {
    reject_unknown_keys(v,
                        {"name", "dynamics", "reduced", "relation", "input_relation",
                         "interface", "certification", "abstraction"},
                        where);
    SubsystemModel sub;
    sub.name = as_string(require_key(v, "name", where), where + "/name");
    sub.dynamics = parse_tuple(require_key(v, "dynamics", where), where + "/dynamics");
    sub.reduced = parse_tuple(require_key(v, "reduced", where), where + "/reduced");

    {
        const std::string w = where + "/relation";
        const json& r = require_key(v, "relation", where);
        reject_unknown_keys(r, {"P", "M", "eps"}, w);
        sub.relation.P = as_matrix(require_key(r, "P", w), w + "/P");
        sub.relation.M = as_matrix(require_key(r, "M", w), w + "/M");
        sub.relation.eps = as_number(require_key(r, "eps", w), w + "/eps");
    }
    {
        const std::string w = where + "/input_relation";
        const json& r = require_key(v, "input_relation", where);
        reject_unknown_keys(r, {"Pw", "Mw", "eps_w"}, w);
        sub.input_relation.Pw = as_matrix(require_key(r, "Pw", w), w + "/Pw");
        sub.input_relation.Mw = as_matrix(require_key(r, "Mw", w), w + "/Mw");
        sub.input_relation.eps_w = as_number(require_key(r, "eps_w", w), w + "/eps_w");
    }
    {
        const std::string w = where + "/interface";
        const json& r = require_key(v, "interface", where);
        reject_unknown_keys(r, {"K", "Q", "S", "L1", "L2", "Rtilde"}, w);
        sub.interface.K = as_matrix(require_key(r, "K", w), w + "/K");
        sub.interface.Q = as_matrix(require_key(r, "Q", w), w + "/Q");
        sub.interface.S = as_matrix(require_key(r, "S", w), w + "/S");
        sub.interface.L1 = as_matrix(require_key(r, "L1", w), w + "/L1");
        sub.interface.L2 = as_matrix(require_key(r, "L2", w), w + "/L2");
        sub.interface.Rtilde = as_matrix(require_key(r, "Rtilde", w), w + "/Rtilde");
    }
    {
        const std::string w = where + "/certification";
        const json& r = require_key(v, "certification", where);
        reject_unknown_keys(
            r, {"delta", "c_nuhat", "beta", "dof", "lambda", "tol_psd", "tol_eq", "c_zeta"},
            w);
        sub.delta = as_number(require_key(r, "delta", w), w + "/delta");
        sub.c_nuhat = as_number(require_key(r, "c_nuhat", w), w + "/c_nuhat");
        if (r.contains("beta")) sub.beta = as_number(r["beta"], w + "/beta");
        if (r.contains("dof")) sub.dof = as_int(r["dof"], w + "/dof");
        if (r.contains("lambda")) {
            const json& lam = r["lambda"];
            if (lam.is_string()) {
                if (lam.get<std::string>() != "search")
                    fail(w + "/lambda", "expected a number or the string \"search\"");
                sub.lambda_search = true;
            } else {
                sub.lambda_search = false;
                sub.lambda_fixed = as_number(lam, w + "/lambda");
            }
        }
        if (r.contains("tol_psd")) sub.tol_psd = as_number(r["tol_psd"], w + "/tol_psd");
        if (r.contains("tol_eq")) sub.tol_eq = as_number(r["tol_eq"], w + "/tol_eq");
        if (r.contains("c_zeta")) sub.c_zeta_override = as_number(r["c_zeta"], w + "/c_zeta");
    }
    if (v.contains("abstraction")) {
        const std::string w = where + "/abstraction";
        const json& r = v["abstraction"];
        reject_unknown_keys(r, {"box_lower", "box_upper", "widths", "w_grid", "nu_grid", "x0"},
                            w);
        sub.has_abstraction = true;
        sub.box_lower = as_double_list(require_key(r, "box_lower", w), w + "/box_lower");
        sub.box_upper = as_double_list(require_key(r, "box_upper", w), w + "/box_upper");
        sub.widths = as_double_list(require_key(r, "widths", w), w + "/widths");
        sub.w_grid = as_vector_list(require_key(r, "w_grid", w), w + "/w_grid");
        sub.nu_grid = as_vector_list(require_key(r, "nu_grid", w), w + "/nu_grid");
        sub.x0 = as_vector(require_key(r, "x0", w), w + "/x0");
    } else {
        sub.x0 = Vec::Zero(sub.reduced.n());
    }
    return sub;
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json phi_to_json(const NonlinearityDescriptor& d) {
    json out;
    out["tag"] = to_string(d.tag);
    if (d.tag == PhiTag::identity_scaled || d.tag == PhiTag::sine) out["scale"] = d.scale;
    if (d.linear_coef != 0.0) out["linear_coef"] = d.linear_coef;
    if (d.tag == PhiTag::piecewise_linear) {
        json pts = json::array();
        for (const auto& [s, val] : d.points) pts.push_back(json::array({s, val}));
        out["points"] = std::move(pts);
    }
    out["slope_lo"] = d.slope_lo;
    out["slope_hi"] = d.slope_hi;
    return out;
}

json tuple_to_json(const NonlinearSystemTuple& t) {
    json out;
    out["A"] = matrix_to_json(t.A);
    if (t.B.cols() > 0) out["B"] = matrix_to_json(t.B);
    out["C"] = matrix_to_json(t.C);
    if (t.D.cols() > 0) out["D"] = matrix_to_json(t.D);
    if (t.E.cwiseAbs().maxCoeff() != 0.0 || t.phi.tag != PhiTag::zero)
        out["E"] = matrix_to_json(t.E);
    if (t.F.cwiseAbs().maxCoeff() != 0.0 || t.phi.tag != PhiTag::zero)
        out["F"] = matrix_to_json(t.F);
    if (t.R.cols() > 0) out["R"] = matrix_to_json(t.R);
    if (t.phi.tag != PhiTag::zero) out["phi"] = phi_to_json(t.phi);
    return out;
}

json condition_to_json(const ConditionRecord& rec) {
    json out;
    out["name"] = rec.name;
    out["pass"] = rec.pass;
    out["residual"] = rec.residual;
    out["detail"] = rec.detail;
    return out;
}

std::pair<int, int> line_col_of_offset(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

ChanceConstraintParams SubsystemModel::chance_params() const {
    const int effective_dof = (dof > 0) ? dof : std::max(1, dynamics.s());
    return make_chance_params(delta, c_nuhat, input_relation.eps_w, beta, effective_dof,
                              c_zeta_override);
}

CertificationOptions SubsystemModel::certification_options() const {
    CertificationOptions opts;
    opts.tol_psd = tol_psd;
    opts.tol_eq = (tol_eq >= 0.0) ? tol_eq : 1e-6;
    if (!lambda_search) opts.fixed_lambda = lambda_fixed;
    return opts;
}

std::vector<NonlinearSystemTuple> NetworkModel::concrete_tuples() const {
    std::vector<NonlinearSystemTuple> out;
    out.reserve(subsystems.size());
    for (const auto& s : subsystems) out.push_back(s.dynamics);
    return out;
}

std::vector<NonlinearSystemTuple> NetworkModel::reduced_tuples() const {
    std::vector<NonlinearSystemTuple> out;
    out.reserve(subsystems.size());
    for (const auto& s : subsystems) out.push_back(s.reduced);
    return out;
}

NetworkTopology NetworkModel::reduced_topology() const {
    NetworkTopology topo = topology;
    for (NetworkEdge& e : topo.edges) e.C = e.Chat;
    return topo;
}

EventTube NetworkModel::spec_tube() const {
    if (!spec.present) throw PrerequisiteError("model has no specification block");
    if (!spec.uniform) return spec.tube;
    int q_total = 0;
    for (const auto& s : subsystems) q_total += s.dynamics.q();
    EventTube tube;
    OutputBox box;
    box.lower = Vec::Constant(q_total, -spec.half_width);
    box.upper = Vec::Constant(q_total, spec.half_width);
    tube.boxes.assign(static_cast<std::size_t>(spec.horizon) + 1, box);
    return tube;
}

NetworkModel parse_network_model_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                         ": " + e.what());
    }
    const std::string where = origin;
    if (!root.is_object()) fail(where, "top level must be an object");
    reject_unknown_keys(root, {"format_version", "coupling", "subsystems", "topology", "spec"},
                        where);
    NetworkModel model;
    model.format_version =
        as_int(require_key(root, "format_version", where), where + "/format_version");
    if (model.format_version != 1)
        fail(where + "/format_version", "unsupported format version");
    if (root.contains("coupling")) {
        const std::string c = as_string(root["coupling"], where + "/coupling");
        if (c == "shared_noise")
            model.coupling = CouplingMode::shared_noise;
        else if (c == "independent")
            model.coupling = CouplingMode::independent;
        else
            fail(where + "/coupling", "expected \"shared_noise\" or \"independent\"");
    }
    const json& subs = require_key(root, "subsystems", where);
    if (!subs.is_array() || subs.empty())
        fail(where + "/subsystems", "expected a nonempty array");
    for (std::size_t i = 0; i < subs.size(); ++i)
        model.subsystems.push_back(
            parse_subsystem(subs[i], where + "/subsystems/" + std::to_string(i)));
    model.topology.n_subsystems = static_cast<int>(model.subsystems.size());
    if (root.contains("topology")) {
        const std::string w = where + "/topology";
        const json& topo = root["topology"];
        reject_unknown_keys(topo, {"edges"}, w);
        if (topo.contains("edges")) {
            const json& edges = topo["edges"];
            if (!edges.is_array()) fail(w + "/edges", "expected an array");
            for (std::size_t k = 0; k < edges.size(); ++k) {
                const std::string we = w + "/edges/" + std::to_string(k);
                const json& e = edges[k];
                reject_unknown_keys(e, {"from", "to", "C", "Chat"}, we);
                NetworkEdge edge;
                edge.from = as_int(require_key(e, "from", we), we + "/from");
                edge.to = as_int(require_key(e, "to", we), we + "/to");
                edge.C = as_matrix(require_key(e, "C", we), we + "/C");
                edge.Chat = as_matrix(require_key(e, "Chat", we), we + "/Chat");
                model.topology.edges.push_back(std::move(edge));
            }
        }
    }
    if (root.contains("spec")) {
        const std::string w = where + "/spec";
        const json& sp = root["spec"];
        reject_unknown_keys(sp, {"kind", "horizon", "half_width", "boxes"}, w);
        model.spec.present = true;
        const std::string kind = as_string(require_key(sp, "kind", w), w + "/kind");
        if (kind == "safety")
            model.spec.kind = SpecKind::safety;
        else if (kind == "reachability")
            model.spec.kind = SpecKind::reachability;
        else
            fail(w + "/kind", "expected \"safety\" or \"reachability\"");
        model.spec.horizon = as_int(require_key(sp, "horizon", w), w + "/horizon");
        if (model.spec.horizon < 0) fail(w + "/horizon", "horizon must be nonnegative");
        if (sp.contains("half_width") == sp.contains("boxes"))
            fail(w, "exactly one of half_width / boxes is required");
        if (sp.contains("half_width")) {
            model.spec.uniform = true;
            model.spec.half_width = as_number(sp["half_width"], w + "/half_width");
        } else {
            const json& boxes = sp["boxes"];
            if (!boxes.is_array() ||
                static_cast<int>(boxes.size()) != model.spec.horizon + 1)
                fail(w + "/boxes", "expected horizon+1 boxes");
            for (std::size_t k = 0; k < boxes.size(); ++k) {
                const std::string wb = w + "/boxes/" + std::to_string(k);
                reject_unknown_keys(boxes[k], {"lower", "upper"}, wb);
                OutputBox box;
                box.lower = as_vector(require_key(boxes[k], "lower", wb), wb + "/lower");
                box.upper = as_vector(require_key(boxes[k], "upper", wb), wb + "/upper");
                model.spec.tube.boxes.push_back(std::move(box));
            }
        }
    }
    return model;
}

NetworkModel parse_network_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "' for reading");
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_network_model_text(buf.str(), path);
}

std::string serialize_network_model(const NetworkModel& model) {
    json root;
    root["format_version"] = model.format_version;
    root["coupling"] =
        model.coupling == CouplingMode::shared_noise ? "shared_noise" : "independent";
    json subs = json::array();
    for (const auto& s : model.subsystems) {
        json js;
        js["name"] = s.name;
        js["dynamics"] = tuple_to_json(s.dynamics);
        js["reduced"] = tuple_to_json(s.reduced);
        js["relation"] = {{"P", matrix_to_json(s.relation.P)},
                          {"M", matrix_to_json(s.relation.M)},
                          {"eps", s.relation.eps}};
        js["input_relation"] = {{"Pw", matrix_to_json(s.input_relation.Pw)},
                                {"Mw", matrix_to_json(s.input_relation.Mw)},
                                {"eps_w", s.input_relation.eps_w}};
        js["interface"] = {{"K", matrix_to_json(s.interface.K)},
                           {"Q", matrix_to_json(s.interface.Q)},
                           {"S", matrix_to_json(s.interface.S)},
                           {"L1", matrix_to_json(s.interface.L1)},
                           {"L2", matrix_to_json(s.interface.L2)},
                           {"Rtilde", matrix_to_json(s.interface.Rtilde)}};
        json cert;
        cert["delta"] = s.delta;
        cert["c_nuhat"] = s.c_nuhat;
        if (s.beta != 0.0) cert["beta"] = s.beta;
        if (s.dof > 0) cert["dof"] = s.dof;
        if (s.lambda_search)
            cert["lambda"] = "search";
        else
            cert["lambda"] = s.lambda_fixed;
        if (s.tol_psd >= 0.0) cert["tol_psd"] = s.tol_psd;
        if (s.tol_eq >= 0.0) cert["tol_eq"] = s.tol_eq;
        if (s.c_zeta_override >= 0.0) cert["c_zeta"] = s.c_zeta_override;
        js["certification"] = std::move(cert);
        if (s.has_abstraction) {
            json ab;
            ab["box_lower"] = json(s.box_lower);
            ab["box_upper"] = json(s.box_upper);
            ab["widths"] = json(s.widths);
            json wg = json::array();
            for (const Vec& v : s.w_grid) wg.push_back(vector_to_json(v));
            ab["w_grid"] = std::move(wg);
            json ng = json::array();
            for (const Vec& v : s.nu_grid) ng.push_back(vector_to_json(v));
            ab["nu_grid"] = std::move(ng);
            ab["x0"] = vector_to_json(s.x0);
            js["abstraction"] = std::move(ab);
        }
        subs.push_back(std::move(js));
    }
    root["subsystems"] = std::move(subs);
    json edges = json::array();
    for (const auto& e : model.topology.edges)
        edges.push_back({{"from", e.from},
                         {"to", e.to},
                         {"C", matrix_to_json(e.C)},
                         {"Chat", matrix_to_json(e.Chat)}});
    root["topology"] = {{"edges", std::move(edges)}};
    if (model.spec.present) {
        json sp;
        sp["kind"] = model.spec.kind == SpecKind::safety ? "safety" : "reachability";
        sp["horizon"] = model.spec.horizon;
        if (model.spec.uniform) {
            sp["half_width"] = model.spec.half_width;
        } else {
            json boxes = json::array();
            for (const auto& b : model.spec.tube.boxes)
                boxes.push_back(
                    {{"lower", vector_to_json(b.lower)}, {"upper", vector_to_json(b.upper)}});
            sp["boxes"] = std::move(boxes);
        }
        root["spec"] = std::move(sp);
    }
    return root.dump(2) + "\n";
}

void write_network_model(const NetworkModel& model, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << serialize_network_model(model);
    if (!os) throw Error("write failure on '" + path + "'");
}

std::string serialize_certification_outcome(const std::string& subsystem_name,
                                            const CertificationOutcome& outcome) {
    json root;
    root["format_version"] = 1;
    root["subsystem"] = subsystem_name;
    root["certified"] = outcome.certified;
    root["lambda"] = outcome.lambda;
    root["min_eigenvalue"] = outcome.min_eig;
    json conds = json::array();
    for (const auto& rec : outcome.conditions) conds.push_back(condition_to_json(rec));
    root["conditions"] = std::move(conds);
    if (outcome.certificate.has_value()) {
        const RelationCertificate& c = *outcome.certificate;
        json jc;
        jc["eps"] = c.rel.eps;
        jc["eps_w"] = c.input_rel.eps_w;
        jc["delta"] = c.delta;
        jc["lambda"] = c.lambda;
        jc["c_zeta"] = c.c_zeta;
        jc["c_nuhat"] = c.c_nuhat;
        jc["beta"] = c.beta;
        jc["dof"] = c.dof;
        jc["slope_bound_gt_one"] = c.slope_bound_gt_one;
        jc["P"] = matrix_to_json(c.rel.P);
        jc["M"] = matrix_to_json(c.rel.M);
        jc["Pw"] = matrix_to_json(c.input_rel.Pw);
        jc["Mw"] = matrix_to_json(c.input_rel.Mw);
        jc["K"] = matrix_to_json(c.ifc.K);
        jc["Q"] = matrix_to_json(c.ifc.Q);
        jc["S"] = matrix_to_json(c.ifc.S);
        jc["L1"] = matrix_to_json(c.ifc.L1);
        jc["L2"] = matrix_to_json(c.ifc.L2);
        jc["Rtilde"] = matrix_to_json(c.ifc.Rtilde);
        root["certificate"] = std::move(jc);
    }
    return root.dump(2) + "\n";
}

std::string serialize_composed_relation(const ComposedRelation& composed,
                                        const std::vector<std::string>& cert_files,
                                        const ClosenessCertificate& closeness) {
    json root;
    root["format_version"] = 1;
    root["eps"] = composed.eps;
    root["delta"] = composed.delta;
    root["horizon"] = closeness.horizon;
    root["gamma"] = closeness.gamma;
    json certs = json::array();
    for (std::size_t i = 0; i < composed.certs.size(); ++i) {
        json jc;
        jc["eps"] = composed.certs[i].rel.eps;
        jc["delta"] = composed.certs[i].delta;
        if (i < cert_files.size()) jc["certificate_file"] = cert_files[i];
        certs.push_back(std::move(jc));
    }
    root["subsystems"] = std::move(certs);
    json ev = json::array();
    for (const auto& rec : composed.evidence) ev.push_back(condition_to_json(rec));
    root["compositionality_evidence"] = std::move(ev);
    return root.dump(2) + "\n";
}

}  // namespace simrel
