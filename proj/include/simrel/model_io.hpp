#pragma once

#include <string>
#include <vector>

#include "simrel/certification.hpp"
#include "simrel/guarantees.hpp"
#include "simrel/network.hpp"
#include "simrel/relations.hpp"
#include "simrel/synthesis.hpp"
#include "simrel/system.hpp"

namespace simrel {

/// One subsystem of a network model file: the concrete tuple, its reduced
/// counterpart, candidate relation/interface parameters, certification
/// settings, and optional abstraction settings.
struct SubsystemModel {
    std::string name;
    NonlinearSystemTuple dynamics;
    NonlinearSystemTuple reduced;
    QuadraticStateRelation relation;
    QuadraticInputRelation input_relation;
    InterfaceParams interface;

    // certification settings
    double delta = 0.0;
    double c_nuhat = 0.0;
    double beta = 0.0;
    int dof = 0;               // 0: default to the noise dimension
    bool lambda_search = true;
    double lambda_fixed = 0.0;
    double tol_psd = -1.0;     // negative: scale-aware default
    double tol_eq = -1.0;      // negative: default 1e-6
    double c_zeta_override = -1.0;

    // abstraction settings (optional)
    bool has_abstraction = false;
    std::vector<double> box_lower, box_upper, widths;
    std::vector<Vec> w_grid, nu_grid;
    Vec x0;  // reduced-side initial state

    ChanceConstraintParams chance_params() const;
    CertificationOptions certification_options() const;
};

/// Optional specification block: a per-step output tube, either uniform
/// (half_width) or explicit boxes.
struct SpecModel {
    bool present = false;
    SpecKind kind = SpecKind::safety;
    int horizon = 0;
    bool uniform = false;
    double half_width = 0.0;
    EventTube tube;  // materialized boxes (built from half_width when uniform)
};

struct NetworkModel {
    int format_version = 1;
    CouplingMode coupling = CouplingMode::shared_noise;
    std::vector<SubsystemModel> subsystems;
    NetworkTopology topology;
    SpecModel spec;

    std::vector<NonlinearSystemTuple> concrete_tuples() const;
    std::vector<NonlinearSystemTuple> reduced_tuples() const;
    /// Topology with the reduced-side output maps installed as edge maps.
    NetworkTopology reduced_topology() const;
    /// Materializes the spec tube over the stacked output space.
    EventTube spec_tube() const;
};

/// Parses a model file; unknown keys, shape errors, and malformed JSON raise
/// ParseError with a JSON-pointer location (and line/column for syntax
/// errors).
NetworkModel parse_network_model(const std::string& path);
NetworkModel parse_network_model_text(const std::string& text, const std::string& origin);

/// Canonical serialization (sorted keys, two-space indent, 17-digit
/// round-trip numbers); parse-then-serialize is idempotent.
std::string serialize_network_model(const NetworkModel& model);
void write_network_model(const NetworkModel& model, const std::string& path);

/// Certificate / outcome files: full parameter dump plus the audit trail.
std::string serialize_certification_outcome(const std::string& subsystem_name,
                                            const CertificationOutcome& outcome);

/// Composed-relation summary with provenance links to per-subsystem
/// certificate files.
std::string serialize_composed_relation(const ComposedRelation& composed,
                                        const std::vector<std::string>& cert_files,
                                        const ClosenessCertificate& closeness);

}  // namespace simrel
