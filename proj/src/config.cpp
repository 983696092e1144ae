#include "rdbp/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdbp/brs.hpp"

#include <json.hpp>

namespace rdbp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
}

double need_number(const json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number()) fail(field, "missing or not a number");
    return j[field].get<double>();
}

std::int64_t need_integer(const json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number_integer())
        fail(field, "missing or not an integer");
    return j[field].get<std::int64_t>();
}

std::string need_string(const json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_string()) fail(field, "missing or not a string");
    return j[field].get<std::string>();
}

ClaimDistribution claim_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "must be an object with a 'family' field");
    const std::string family = need_string(j, "family");
    try {
        if (family == "uniform")
            return ClaimDistribution(Uniform{need_number(j, "lower"), need_number(j, "upper")});
        if (family == "exponential") return ClaimDistribution(Exponential{need_number(j, "rate")});
        if (family == "lognormal")
            return ClaimDistribution(LogNormal{need_number(j, "mu"), need_number(j, "sigma")});
        if (family == "point_mass") return ClaimDistribution(PointMass{need_number(j, "value")});
        if (family == "finite_discrete") {
            if (!j.contains("atoms") || !j.contains("probs"))
                fail(where, "finite_discrete needs 'atoms' and 'probs' arrays");
            return ClaimDistribution(FiniteDiscrete{j["atoms"].get<std::vector<double>>(),
                                                    j["probs"].get<std::vector<double>>()});
        }
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    fail(where + ".family", "unknown claim family '" + family + "'");
}

OffspringDistribution offspring_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "must be an object with a 'family' field");
    const std::string family = need_string(j, "family");
    try {
        if (family == "poisson") return OffspringDistribution(PoissonOffspring{need_number(j, "mean")});
        if (family == "geometric")
            return OffspringDistribution(GeometricOffspring{need_number(j, "mean")});
        if (family == "deterministic")
            return OffspringDistribution(DeterministicOffspring{need_integer(j, "count")});
        if (family == "finite_pmf") {
            if (!j.contains("counts") || !j.contains("probs"))
                fail(where, "finite_pmf needs 'counts' and 'probs' arrays");
            return OffspringDistribution(FinitePmfOffspring{
                j["counts"].get<std::vector<std::int64_t>>(), j["probs"].get<std::vector<double>>()});
        }
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    fail(where + ".family", "unknown offspring family '" + family + "'");
}

ResourceModel resource_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "must be an object with a 'family' field");
    const std::string family = need_string(j, "family");
    try {
        if (family == "deterministic")
            return ResourceModel(DeterministicResource{need_number(j, "value")});
        if (family == "gamma")
            return ResourceModel(GammaResource{need_number(j, "shape"), need_number(j, "scale")});
        if (family == "uniform")
            return ResourceModel(UniformResource{need_number(j, "lower"), need_number(j, "upper")});
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    fail(where + ".family", "unknown resource family '" + family + "'");
}

json claim_to_json(const ClaimDistribution& d) {
    json j;
    j["family"] = d.family_name();
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                j["lower"] = v.lower;
                j["upper"] = v.upper;
            } else if constexpr (std::is_same_v<T, Exponential>) {
                j["rate"] = v.rate;
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                j["mu"] = v.mu;
                j["sigma"] = v.sigma;
            } else if constexpr (std::is_same_v<T, PointMass>) {
                j["value"] = v.value;
            } else {
                j["atoms"] = v.atoms;
                j["probs"] = v.probs;
            }
        },
        d.variant());
    return j;
}

}  // namespace

namespace {

SubPopulationSpec subpop_from_json(const json& sj, const std::string& where) {
    SubPopulationSpec spec;
    spec.label = need_string(sj, "label");
    if (!sj.contains("offspring")) fail(where + ".offspring", "required");
    spec.offspring = offspring_from_json(sj["offspring"], where + ".offspring");
    if (!sj.contains("resource")) fail(where + ".resource", "required");
    spec.resource = resource_from_json(sj["resource"], where + ".resource");
    if (!sj.contains("claims")) fail(where + ".claims", "required");
    spec.claims = claim_from_json(sj["claims"], where + ".claims");
    return spec;
}

}  // namespace

ClaimDistribution claim_from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("distribution spec: not valid JSON: " + text);
    return claim_from_json(j, "dist");
}

SubPopulationSpec subpop_from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("subpopulation spec: not valid JSON: " + text);
    return subpop_from_json(j, "subpopulation");
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);

    ExperimentConfig cfg;
    // Reproducibility is contractual: a missing seed is a validation error.
    if (!j.contains("seed") || !j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0)
        fail("seed", "required nonnegative integer (no entropy defaults)");
    cfg.seed = j["seed"].get<std::uint64_t>();

    if (j.contains("horizon")) cfg.horizon = need_integer(j, "horizon");
    if (cfg.horizon < 1) fail("horizon", "must be >= 1");
    if (j.contains("runs")) cfg.runs = need_integer(j, "runs");
    if (cfg.runs < 1) fail("runs", "must be >= 1");
    if (j.contains("population_cap")) cfg.population_cap = need_integer(j, "population_cap");
    if (cfg.population_cap < 1) fail("population_cap", "must be >= 1");
    if (j.contains("diagnostic_window"))
        cfg.diagnostic_window = need_integer(j, "diagnostic_window");
    if (cfg.diagnostic_window < 1) fail("diagnostic_window", "must be >= 1");
    if (j.contains("cap_mode")) {
        const std::string mode = need_string(j, "cap_mode");
        if (mode == "downsample")
            cfg.cap_mode = CapMode::DownSample;
        else if (mode == "halt")
            cfg.cap_mode = CapMode::Halt;
        else
            fail("cap_mode", "must be 'downsample' or 'halt'");
    }

    if (!j.contains("subpopulations") || !j["subpopulations"].is_array() ||
        j["subpopulations"].empty())
        fail("subpopulations", "required nonempty array");
    std::int64_t total0 = 0;
    for (std::size_t k = 0; k < j["subpopulations"].size(); ++k) {
        const json& sj = j["subpopulations"][k];
        const std::string where = "subpopulations[" + std::to_string(k) + "]";
        SubPopulationSpec spec = subpop_from_json(sj, where);
        const std::int64_t init = need_integer(sj, "initial_count");
        if (init < 0) fail(where + ".initial_count", "must be >= 0");
        total0 += init;
        cfg.subpopulations.push_back(std::move(spec));
        cfg.initial_counts.push_back(init);
    }
    if (total0 > cfg.population_cap)
        fail("population_cap", "smaller than the total initial population");

    if (j.contains("solver")) {
        const json& sv = j["solver"];
        if (sv.contains("upper")) cfg.solver.upper = need_number(sv, "upper");
        if (sv.contains("grid_points"))
            cfg.solver.grid_points = static_cast<int>(need_integer(sv, "grid_points"));
        if (sv.contains("bisection_tol")) cfg.solver.bisection_tol = need_number(sv, "bisection_tol");
        if (cfg.solver.grid_points < 2) fail("solver.grid_points", "must be >= 2");
    }

    if (j.contains("control")) {
        const json& cj = j["control"];
        ControlConfig ctl;
        if (cj.contains("p")) ctl.p = need_number(cj, "p");
        if (ctl.p < 1.0) fail("control.p", "must be >= 1");
        if (cj.contains("quad_points"))
            ctl.quad_points = static_cast<int>(need_integer(cj, "quad_points"));
        if (!cj.contains("candidates") || !cj["candidates"].is_array() || cj["candidates"].empty())
            fail("control.candidates", "required nonempty array of distributions");
        for (std::size_t k = 0; k < cj["candidates"].size(); ++k)
            ctl.candidates.push_back(
                claim_from_json(cj["candidates"][k], "control.candidates[" + std::to_string(k) + "]"));
        cfg.control = std::move(ctl);
    }
    return cfg;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

json stats_to_json(const QuantileStats& s) {
    return json{{"mean", s.mean}, {"median", s.median}, {"q25", s.q25}, {"q75", s.q75}};
}

}  // namespace

std::string summary_to_json(const MonteCarloSummary& summary, const ExperimentConfig& cfg) {
    json j;
    j["runs"] = summary.runs;
    j["horizon"] = summary.horizon;
    j["base_seed"] = summary.base_seed;
    j["population_cap"] = cfg.population_cap;
    j["cap_mode"] = cfg.cap_mode == CapMode::DownSample ? "downsample" : "halt";
    j["joint_survival_fraction"] = summary.joint_survival_fraction;
    j["conditional_ratio_stats"] =
        summary.alpha_stats ? stats_to_json(*summary.alpha_stats) : json(nullptr);
    j["conditional_threshold_stats"] =
        summary.tau_stats ? stats_to_json(*summary.tau_stats) : json(nullptr);
    json runs = json::array();
    for (const RunStats& r : summary.per_run) {
        json rj;
        rj["run_id"] = r.run_id;
        rj["seed"] = r.seed;
        rj["jointly_survived"] = r.jointly_survived;
        rj["extinct_label"] = r.extinct_label;
        rj["extinct_generation"] = r.extinct_generation;
        rj["final_counts"] = r.final_counts;
        rj["alpha_final"] = r.alpha_final ? json(*r.alpha_final) : json(nullptr);
        rj["tau_final"] = r.tau_final;
        rj["tau_mean_window"] = r.tau_mean_window;
        rj["tau_sd_window"] = r.tau_sd_window;
        rj["capped_at"] = r.capped_at ? json(*r.capped_at) : json(nullptr);
        rj["balance_samples"] = r.balance_samples;
        rj["balance_below_tol"] = r.balance_below_tol;
        runs.push_back(std::move(rj));
    }
    j["per_run"] = std::move(runs);
    return j.dump(2) + "\n";
}

std::string solutions_to_json(const SolveResult& result) {
    json arr = json::array();
    for (const EquilibriumSolution& s : result.solutions) {
        json sj;
        sj["tau"] = s.tau;
        sj["alpha"] = s.alpha ? json(*s.alpha) : json("any");
        sj["effective_mean"] = s.effective_mean;
        switch (s.classification) {
            case Criticality::Strict: sj["classification"] = "strict"; break;
            case Criticality::Critical: sj["classification"] = "critical"; break;
            case Criticality::Inadmissible: sj["classification"] = "inadmissible"; break;
        }
        sj["residuals"] = {{"equation", s.equation_residual}, {"constraint", s.constraint_residual}};
        arr.push_back(std::move(sj));
    }
    json j;
    j["solutions"] = std::move(arr);
    j["dropped_roots"] = result.dropped_roots;
    return j.dump(2) + "\n";
}

std::string brs_to_json(const BrsCheckResult& result) {
    json j;
    j["n"] = result.bound.n;
    j["budget"] = result.bound.budget;
    j["tau_star"] = result.bound.tau_star;
    j["bound"] = result.bound.bound;
    j["estimate"] = result.mc_estimate;
    j["ci"] = result.ci_halfwidth;
    j["runs"] = result.runs;
    return j.dump(2) + "\n";
}

std::string control_to_json(const std::vector<ControlCandidate>& ranking) {
    json arr = json::array();
    for (const ControlCandidate& c : ranking) {
        json cj;
        cj["grid_index"] = c.grid_index;
        cj["candidate"] = claim_to_json(c.demand.candidate);
        cj["tau_tilde"] = c.demand.tau_tilde;
        cj["alpha_tilde"] = c.demand.alpha_tilde;
        cj["effective_mean"] = c.demand.effective_mean;
        cj["transport_cost"] = c.transport_cost;
        arr.push_back(std::move(cj));
    }
    return json{{"admissible", std::move(arr)}}.dump(2) + "\n";
}

std::string plan_sidecar_json(const TransportPlan& plan, bool monge) {
    json j;
    j["cost"] = plan.total_cost;
    j["monge"] = monge;
    j["sparsity"] = plan.positive_entries(1e-15);
    return j.dump(2) + "\n";
}

std::string trace_to_csv(const std::vector<TrajectoryOutcome>& outcomes,
                         const std::vector<SubPopulationSpec>& specs) {
    std::ostringstream os;
    const std::size_t s = specs.size();
    if (s == 2) {
        os << "run_id,t,gamma_h,gamma_i,descendants_h,descendants_i,resources_total,tau_t,"
              "alpha_t,served_h,served_i\n";
    } else {
        os << "run_id,t";
        for (const auto& sp : specs) os << ",gamma_" << sp.label;
        for (const auto& sp : specs) os << ",descendants_" << sp.label;
        os << ",resources_total,tau_t";
        for (const auto& sp : specs) os << ",served_" << sp.label;
        os << "\n";
    }
    for (std::size_t run = 0; run < outcomes.size(); ++run) {
        for (const GenerationRecord& r : outcomes[run].trace) {
            os << run << ',' << r.t;
            if (s == 2) {
                os << ',' << r.counts[0] << ',' << r.counts[1] << ',' << r.descendants[0] << ','
                   << r.descendants[1] << ',' << fmt_double(r.resources_total) << ','
                   << fmt_double(r.threshold) << ',';
                if (r.ratio) os << fmt_double(*r.ratio);  // empty field when Gamma_h = 0
                os << ',' << r.served[0] << ',' << r.served[1];
            } else {
                for (std::size_t k = 0; k < s; ++k) os << ',' << r.counts[k];
                for (std::size_t k = 0; k < s; ++k) os << ',' << r.descendants[k];
                os << ',' << fmt_double(r.resources_total) << ',' << fmt_double(r.threshold);
                for (std::size_t k = 0; k < s; ++k) os << ',' << r.served[k];
            }
            os << '\n';
        }
    }
    return os.str();
}

TransportInstance read_transport_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open transport CSV: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    if (rows.size() < 2 || rows[0].size() < 2)
        throw ConfigError("transport CSV: need a header row with b and at least one body row");

    TransportInstance inst;
    const std::size_t n = rows[0].size() - 1;
    auto parse = [&](const std::string& cell, const char* what) {
        try {
            return std::stod(cell);
        } catch (...) {
            throw ConfigError(std::string("transport CSV: bad ") + what + " value '" + cell + "'");
        }
    };
    for (std::size_t jcol = 1; jcol <= n; ++jcol)
        inst.b.masses.push_back(parse(rows[0][jcol], "b"));
    const std::size_t m = rows.size() - 1;
    inst.cost.rows = m;
    inst.cost.cols = n;
    for (std::size_t i = 1; i <= m; ++i) {
        if (rows[i].size() != n + 1)
            throw ConfigError("transport CSV: row " + std::to_string(i) + " has wrong width");
        inst.a.masses.push_back(parse(rows[i][0], "a"));
        for (std::size_t jcol = 1; jcol <= n; ++jcol)
            inst.cost.entries.push_back(parse(rows[i][jcol], "cost"));
    }
    return inst;
}

std::string flows_to_csv(const TransportPlan& plan) {
    std::ostringstream os;
    for (std::size_t i = 0; i < plan.rows; ++i) {
        for (std::size_t j = 0; j < plan.cols; ++j) {
            if (j) os << ',';
            os << fmt_double(plan.at(i, j));
        }
        os << '\n';
    }
    return os.str();
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out.good()) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace rdbp
