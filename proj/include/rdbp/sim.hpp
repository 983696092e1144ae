#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rdbp/society.hpp"

namespace rdbp {

// State and step outputs for one generation. counts is Gamma_t (the parents
// that produced this step); served becomes Gamma_{t+1} before any capping.
struct GenerationRecord {
    std::int64_t t = 0;
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> descendants;
    std::vector<std::int64_t> served;
    double resources_total = 0.0;
    double consumed = 0.0;
    double threshold = 0.0;                 // tau_t
    std::optional<double> ratio;            // alpha_t = Gamma_i / Gamma_h, absent when Gamma_h = 0
};

enum class CapMode {
    DownSample,  // binomial thinning preserving proportions and per-capita laws
    Halt,        // stop the run, flag the cap
};

struct TrajectoryOptions {
    std::int64_t population_cap = 1'000'000;
    CapMode cap_mode = CapMode::DownSample;
    bool keep_trace = true;
};

struct TrajectoryOutcome {
    enum class Status { AllSurvived, Extinct };
    Status status = Status::AllSurvived;
    std::string extinct_label;                    // first sub-population to hit zero
    std::int64_t extinct_generation = -1;
    std::optional<std::int64_t> capped_at;        // first generation the cap applied
    bool halted_at_cap = false;
    std::vector<std::int64_t> final_counts;  // Gamma at exit, after any thinning
    GenerationRecord final_record;
    std::vector<GenerationRecord> trace;
};

TrajectoryOutcome run_trajectory(const std::vector<SubPopulationSpec>& specs,
                                 const std::vector<std::int64_t>& initial_counts,
                                 std::int64_t horizon, std::uint64_t seed,
                                 const TrajectoryOptions& opts = {});

// |consumed - R_t| / Gamma_t^h: per-home-capita slack of the empirical
// balance. Home is sub-population 0. Signals when Gamma_t^h = 0.
double balance_residual(const GenerationRecord& record);

// |1/(1+alpha_{t+1}) - D_h F_h(tau_t) / (D_h F_h(tau_t) + D_i F_i(tau_t))|,
// with realized descendant counts and threshold. Both home counts must be
// positive.
double ratio_recursion_check(const GenerationRecord& at_t, const GenerationRecord& at_t_plus_1,
                             const ClaimDistribution& claims_h, const ClaimDistribution& claims_i);

struct QuantileStats {
    double mean = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

struct RunStats {
    std::int64_t run_id = 0;
    std::uint64_t seed = 0;
    bool jointly_survived = false;
    std::string extinct_label;
    std::int64_t extinct_generation = -1;
    std::vector<std::int64_t> final_counts;
    std::optional<double> alpha_final;
    double tau_final = 0.0;
    double tau_mean_window = 0.0;  // over the trailing diagnostic window
    double tau_sd_window = 0.0;
    std::optional<std::int64_t> capped_at;
    std::int64_t balance_samples = 0;    // generations with Gamma_h >= balance_gamma_min
    std::int64_t balance_below_tol = 0;  // of those, residual < balance_tol
};

struct MonteCarloOptions {
    TrajectoryOptions trajectory;
    std::int64_t diagnostic_window = 50;
    double balance_gamma_min = 1e5;
    double balance_tol = 1e-3;
};

struct MonteCarloSummary {
    std::int64_t runs = 0;
    std::int64_t horizon = 0;
    std::uint64_t base_seed = 0;
    double joint_survival_fraction = 0.0;
    // Conditional on joint survival; absent (nullopt) when no run survives.
    std::optional<QuantileStats> alpha_stats;
    std::optional<QuantileStats> tau_stats;
    std::vector<RunStats> per_run;
};

// Independent trajectories with seeds base_seed + run index; aggregation is
// order-independent, so the summary is a pure function of the inputs.
MonteCarloSummary monte_carlo(const std::vector<SubPopulationSpec>& specs,
                              const std::vector<std::int64_t>& initial_counts,
                              std::int64_t horizon, std::int64_t runs, std::uint64_t base_seed,
                              const MonteCarloOptions& opts = {},
                              std::vector<TrajectoryOutcome>* outcomes = nullptr);

}  // namespace rdbp
