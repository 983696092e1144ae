// rdbp: simulation and solver laboratory for resource-dependent branching
// processes with interacting sub-populations.
//
// Subcommands: simulate, equilibrium, brs,
//              transport {nw | check-monge | oracle | quantile-cost | control}.
// Exit codes: 0 success, 1 runtime/I-O failure, 2 validation failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rdbp/brs.hpp"
#include "rdbp/config.hpp"

namespace {

using namespace rdbp;

void emit(const std::optional<std::string>& path, const std::string& content) {
    if (path)
        atomic_write(*path, content);
    else
        std::cout << content;
}

int cmd_simulate(const std::string& config_path, const std::optional<std::string>& out_trace,
                 const std::optional<std::string>& out_summary,
                 std::optional<std::uint64_t> seed_override, std::optional<std::int64_t> runs_override,
                 std::optional<std::int64_t> horizon_override) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (runs_override) cfg.runs = *runs_override;
    if (horizon_override) cfg.horizon = *horizon_override;
    if (cfg.runs < 1) throw ConfigError("runs: must be >= 1");
    if (cfg.horizon < 1) throw ConfigError("horizon: must be >= 1");

    MonteCarloOptions opts;
    opts.trajectory.population_cap = cfg.population_cap;
    opts.trajectory.cap_mode = cfg.cap_mode;
    opts.diagnostic_window = cfg.diagnostic_window;

    std::vector<TrajectoryOutcome> outcomes;
    MonteCarloSummary summary = monte_carlo(cfg.subpopulations, cfg.initial_counts, cfg.horizon,
                                            cfg.runs, cfg.seed, opts,
                                            out_trace ? &outcomes : nullptr);
    if (out_trace) emit(out_trace, trace_to_csv(outcomes, cfg.subpopulations));
    emit(out_summary, summary_to_json(summary, cfg));
    return 0;
}

int cmd_equilibrium(const std::string& config_path, const std::optional<std::string>& out_json) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (cfg.subpopulations.size() != 2)
        throw ConfigError("subpopulations: equilibrium solving needs exactly 2 sub-populations");
    SolveResult result = solve_equilibrium(cfg.subpopulations[0], cfg.subpopulations[1], cfg.solver);
    emit(out_json, solutions_to_json(result));
    return 0;
}

int cmd_brs(const std::string& dist_json, std::int64_t n, double budget, std::int64_t runs,
            std::uint64_t seed, const std::optional<std::string>& out_json) {
    const ClaimDistribution dist = claim_from_json_string(dist_json);
    if (runs < 100) throw ConfigError("runs: must be >= 100");
    BrsCheckResult result = brs_check(dist, n, budget, runs, seed);
    emit(out_json, brs_to_json(result));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"resource-dependent branching process laboratory"};
    app.require_subcommand(1);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "run Monte Carlo trajectories");
    std::string sim_config;
    std::optional<std::string> sim_trace, sim_summary;
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::int64_t> sim_runs, sim_horizon;
    sim_cmd->add_option("--config", sim_config, "experiment config JSON")->required();
    sim_cmd->add_option("--out", sim_trace, "trace CSV path");
    sim_cmd->add_option("--summary", sim_summary, "summary JSON path (default stdout)");
    sim_cmd->add_option("--seed", sim_seed, "override config seed");
    sim_cmd->add_option("--runs", sim_runs, "override config runs");
    sim_cmd->add_option("--horizon", sim_horizon, "override config horizon");

    // equilibrium
    auto* eq_cmd = app.add_subcommand("equilibrium", "solve the (tau, alpha) system");
    std::string eq_config;
    std::optional<std::string> eq_out;
    eq_cmd->add_option("--config", eq_config, "experiment config JSON")->required();
    eq_cmd->add_option("--out", eq_out, "solution JSON path (default stdout)");

    // brs
    auto* brs_cmd = app.add_subcommand("brs", "BRS-inequality bound and Monte Carlo check");
    std::string brs_dist;
    std::int64_t brs_n = 0, brs_runs = 10000;
    double brs_budget = 0.0;
    std::uint64_t brs_seed = 0;
    std::optional<std::string> brs_out;
    brs_cmd->add_option("--dist", brs_dist, "claim distribution JSON")->required();
    brs_cmd->add_option("--n", brs_n, "number of i.i.d. claims")->required();
    brs_cmd->add_option("--budget", brs_budget, "budget s")->required();
    brs_cmd->add_option("--runs", brs_runs, "Monte Carlo runs (>= 100)");
    brs_cmd->add_option("--seed", brs_seed, "RNG seed")->required();
    brs_cmd->add_option("--out", brs_out, "output JSON path (default stdout)");

    // transport
    auto* tr_cmd = app.add_subcommand("transport", "transportation-problem tools");
    tr_cmd->require_subcommand(1);

    auto* nw_cmd = tr_cmd->add_subcommand("nw", "northwest-corner / cumulative-min plan");
    std::string nw_input;
    std::optional<std::string> nw_out, nw_json;
    bool nw_normalize = false;
    nw_cmd->add_option("--input", nw_input, "instance CSV (first row b, first column a, body cost)")
        ->required();
    nw_cmd->add_option("--out", nw_out, "flow matrix CSV path (default stdout)");
    nw_cmd->add_option("--json", nw_json, "sidecar JSON path {cost, monge, sparsity}");
    nw_cmd->add_flag("--normalize", nw_normalize, "rescale b to a's total when unbalanced");

    auto* monge_cmd = tr_cmd->add_subcommand("check-monge", "test the Monge condition");
    std::string monge_input;
    double monge_tol = 1e-12;
    monge_cmd->add_option("--input", monge_input, "instance CSV")->required();
    monge_cmd->add_option("--tol", monge_tol, "inequality slack");

    auto* oracle_cmd = tr_cmd->add_subcommand("oracle", "exact small-instance optimum");
    std::string oracle_input;
    double oracle_unit = 1.0;
    oracle_cmd->add_option("--input", oracle_input, "instance CSV")->required();
    oracle_cmd->add_option("--mass-unit", oracle_unit, "integer mass unit");

    auto* qc_cmd = tr_cmd->add_subcommand("quantile-cost", "comonotone coupling cost");
    std::string qc_src, qc_dst;
    double qc_p = 2.0;
    int qc_points = 512;
    qc_cmd->add_option("--src", qc_src, "source distribution JSON")->required();
    qc_cmd->add_option("--dst", qc_dst, "target distribution JSON")->required();
    qc_cmd->add_option("--p", qc_p, "cost exponent (>= 1)");
    qc_cmd->add_option("--points", qc_points, "quadrature nodes");

    auto* ctl_cmd = tr_cmd->add_subcommand("control", "rank admissible demand distributions");
    std::string ctl_config;
    std::optional<std::string> ctl_out;
    ctl_cmd->add_option("--config", ctl_config, "config JSON with a 'control' section")->required();
    ctl_cmd->add_option("--out", ctl_out, "ranking JSON path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed())
            return cmd_simulate(sim_config, sim_trace, sim_summary, sim_seed, sim_runs, sim_horizon);
        if (eq_cmd->parsed()) return cmd_equilibrium(eq_config, eq_out);
        if (brs_cmd->parsed()) return cmd_brs(brs_dist, brs_n, brs_budget, brs_runs, brs_seed, brs_out);
        if (tr_cmd->parsed()) {
            if (nw_cmd->parsed()) {
                TransportInstance inst = read_transport_csv(nw_input);
                TransportPlan plan = northwest_plan(inst.a, inst.b, &inst.cost, nw_normalize);
                emit(nw_out, flows_to_csv(plan));
                if (nw_json) emit(nw_json, plan_sidecar_json(plan, check_monge(inst.cost)));
                return 0;
            }
            if (monge_cmd->parsed()) {
                TransportInstance inst = read_transport_csv(monge_input);
                std::cout << (check_monge(inst.cost, monge_tol) ? "true" : "false") << "\n";
                return 0;
            }
            if (oracle_cmd->parsed()) {
                TransportInstance inst = read_transport_csv(oracle_input);
                std::cout << fmt_double(brute_force_optimal(inst.a, inst.b, inst.cost, oracle_unit))
                          << "\n";
                return 0;
            }
            if (qc_cmd->parsed()) {
                const ClaimDistribution src = claim_from_json_string(qc_src);
                const ClaimDistribution dst = claim_from_json_string(qc_dst);
                std::cout << fmt_double(quantile_coupling_cost(src, dst, qc_p, qc_points)) << "\n";
                return 0;
            }
            if (ctl_cmd->parsed()) {
                ExperimentConfig cfg = load_experiment_config(ctl_config);
                if (!cfg.control) throw ConfigError("control: section required for this command");
                if (cfg.subpopulations.size() != 2)
                    throw ConfigError("subpopulations: control needs exactly 2 sub-populations");
                auto ranking = control_search(cfg.subpopulations[0].claims, cfg.control->candidates,
                                              cfg.subpopulations[0], cfg.subpopulations[1],
                                              cfg.control->p, cfg.solver, cfg.control->quad_points);
                emit(ctl_out, control_to_json(ranking));
                return 0;
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
