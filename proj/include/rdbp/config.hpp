#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdbp/equilibrium.hpp"
#include "rdbp/sim.hpp"
#include "rdbp/transport.hpp"

namespace rdbp {

// Configuration or input-file problem; the message names the offending field.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ControlConfig {
    double p = 2.0;
    int quad_points = 512;
    std::vector<ClaimDistribution> candidates;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;  // mandatory in the file; no entropy defaults
    std::int64_t horizon = 300;
    std::int64_t runs = 1;
    std::int64_t population_cap = 1'000'000;
    CapMode cap_mode = CapMode::DownSample;
    std::int64_t diagnostic_window = 50;
    std::vector<SubPopulationSpec> subpopulations;
    std::vector<std::int64_t> initial_counts;
    SearchDomain solver;
    std::optional<ControlConfig> control;
};

// --- JSON <-> domain types ------------------------------------------------

ClaimDistribution claim_from_json_string(const std::string& text);  // for CLI flags
// One sub-population object: {label, offspring, resource, claims}.
SubPopulationSpec subpop_from_json_string(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

std::string summary_to_json(const MonteCarloSummary& summary, const ExperimentConfig& cfg);
std::string solutions_to_json(const SolveResult& result);
std::string brs_to_json(const struct BrsCheckResult& result);
std::string control_to_json(const std::vector<ControlCandidate>& ranking);
std::string plan_sidecar_json(const TransportPlan& plan, bool monge);

// --- CSV ---------------------------------------------------------------

// Trace rows ordered by (run_id, t). Two sub-populations use the canonical
// header run_id,t,gamma_h,gamma_i,descendants_h,descendants_i,
// resources_total,tau_t,alpha_t,served_h,served_i; other counts get one
// column group per label. alpha is an empty field when Gamma_h = 0.
std::string trace_to_csv(const std::vector<TrajectoryOutcome>& outcomes,
                         const std::vector<SubPopulationSpec>& specs);

// Transport instance file: cell (0,0) blank, first row = b, first column = a,
// body = cost matrix.
struct TransportInstance {
    DiscreteMarginal a;
    DiscreteMarginal b;
    CostMatrix cost;
};
TransportInstance read_transport_csv(const std::string& path);
std::string flows_to_csv(const TransportPlan& plan);

// Write-to-temporary-then-rename; no partial output files.
void atomic_write(const std::string& path, const std::string& content);

// Exact decimal formatting helpers (round-trip doubles).
std::string fmt_double(double x);

}  // namespace rdbp
