// Python bindings for the rdbp core. Distributions are constructed from the
// same JSON objects the CLI configs use; results come back as plain dicts so
// the Python side needs no extra wrapper types.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rdbp/brs.hpp"
#include "rdbp/config.hpp"

namespace py = pybind11;
using namespace rdbp;

namespace {

py::object opt_to_py(const std::optional<double>& v) {
    if (v) return py::float_(*v);
    return py::none();
}

py::dict record_to_dict(const GenerationRecord& rec) {
    py::dict d;
    d["t"] = rec.t;
    d["counts"] = rec.counts;
    d["descendants"] = rec.descendants;
    d["served"] = rec.served;
    d["resources_total"] = rec.resources_total;
    d["consumed"] = rec.consumed;
    d["threshold"] = rec.threshold;
    d["ratio"] = opt_to_py(rec.ratio);
    return d;
}

py::dict outcome_to_dict(const TrajectoryOutcome& out) {
    py::dict d;
    d["status"] = out.status == TrajectoryOutcome::Status::Extinct ? "extinct" : "all_survived";
    d["extinct_label"] = out.extinct_label;
    d["extinct_generation"] = out.extinct_generation;
    d["capped_at"] = out.capped_at ? py::cast(*out.capped_at) : py::none();
    d["halted_at_cap"] = out.halted_at_cap;
    d["final_counts"] = out.final_counts;
    d["final"] = record_to_dict(out.final_record);
    py::list trace;
    for (const auto& rec : out.trace) trace.append(record_to_dict(rec));
    d["trace"] = trace;
    return d;
}

std::string classification_name(Criticality c) {
    switch (c) {
        case Criticality::Strict: return "strict";
        case Criticality::Critical: return "critical";
        default: return "inadmissible";
    }
}

ClaimDistribution claim_from_dict(const py::dict& d) {
    return claim_from_json_string(py::str(py::module_::import("json").attr("dumps")(d)));
}

SubPopulationSpec spec_from_dict(const py::dict& d) {
    // Round-trip through the JSON config parser so validation and error
    // messages match the CLI exactly.
    return subpop_from_json_string(py::str(py::module_::import("json").attr("dumps")(d)));
}

}  // namespace

PYBIND11_MODULE(_rdbp, m) {
    m.doc() = "resource-dependent branching processes: simulation, equilibria, BRS, transport";

    py::class_<ClaimDistribution>(m, "ClaimDistribution")
        .def(py::init([](const py::dict& d) { return claim_from_dict(d); }))
        .def("cdf", &ClaimDistribution::cdf)
        .def("partial_mean", &ClaimDistribution::partial_mean)
        .def("quantile", &ClaimDistribution::quantile)
        .def("mean", &ClaimDistribution::mean)
        .def("density", &ClaimDistribution::density)
        .def("absolutely_continuous", &ClaimDistribution::absolutely_continuous)
        .def("sup_support", &ClaimDistribution::sup_support)
        .def("family_name", &ClaimDistribution::family_name)
        .def("sample", [](const ClaimDistribution& self, std::uint64_t seed, std::size_t n) {
            Rng rng(seed);
            std::vector<double> out(n);
            for (auto& x : out) x = self.sample(rng);
            return out;
        }, py::arg("seed"), py::arg("n") = 1);

    py::class_<SubPopulationSpec>(m, "SubPopulationSpec")
        .def(py::init([](const py::dict& d) { return spec_from_dict(d); }))
        .def_readonly("label", &SubPopulationSpec::label)
        .def_property_readonly("offspring_mean",
                               [](const SubPopulationSpec& s) { return s.offspring.mean(); })
        .def_property_readonly("resource_mean",
                               [](const SubPopulationSpec& s) { return s.resource.mean(); })
        .def_property_readonly("claims", [](const SubPopulationSpec& s) { return s.claims; });

    m.def("allocate_weakest_first",
          [](const std::vector<std::vector<double>>& claims, double budget) {
              AllocationResult r = allocate_weakest_first(claims, budget);
              py::dict d;
              d["served_counts"] = r.served_counts;
              d["threshold"] = r.threshold;
              d["consumed"] = r.consumed;
              d["budget"] = r.budget;
              return d;
          },
          py::arg("claims_by_subpop"), py::arg("budget"),
          "serve claims in ascending order while the running sum fits the budget");

    m.def("run_trajectory",
          [](const std::vector<SubPopulationSpec>& specs, const std::vector<std::int64_t>& init,
             std::int64_t horizon, std::uint64_t seed, std::int64_t population_cap,
             const std::string& cap_mode, bool keep_trace) {
              TrajectoryOptions opts;
              opts.population_cap = population_cap;
              if (cap_mode == "halt")
                  opts.cap_mode = CapMode::Halt;
              else if (cap_mode == "downsample")
                  opts.cap_mode = CapMode::DownSample;
              else
                  throw std::invalid_argument("cap_mode: expected 'downsample' or 'halt'");
              opts.keep_trace = keep_trace;
              return outcome_to_dict(run_trajectory(specs, init, horizon, seed, opts));
          },
          py::arg("specs"), py::arg("initial_counts"), py::arg("horizon"), py::arg("seed"),
          py::arg("population_cap") = 1'000'000, py::arg("cap_mode") = "downsample",
          py::arg("keep_trace") = true);

    m.def("monte_carlo",
          [](const std::vector<SubPopulationSpec>& specs, const std::vector<std::int64_t>& init,
             std::int64_t horizon, std::int64_t runs, std::uint64_t base_seed,
             std::int64_t population_cap, std::int64_t diagnostic_window) {
              MonteCarloOptions opts;
              opts.trajectory.population_cap = population_cap;
              opts.trajectory.keep_trace = true;
              opts.diagnostic_window = diagnostic_window;
              MonteCarloSummary s = monte_carlo(specs, init, horizon, runs, base_seed, opts);
              py::dict d;
              d["runs"] = s.runs;
              d["horizon"] = s.horizon;
              d["base_seed"] = s.base_seed;
              d["joint_survival_fraction"] = s.joint_survival_fraction;
              auto stats = [](const std::optional<QuantileStats>& q) -> py::object {
                  if (!q) return py::none();
                  py::dict sd;
                  sd["mean"] = q->mean;
                  sd["median"] = q->median;
                  sd["q25"] = q->q25;
                  sd["q75"] = q->q75;
                  return sd;
              };
              d["alpha_stats"] = stats(s.alpha_stats);
              d["tau_stats"] = stats(s.tau_stats);
              py::list per_run;
              for (const auto& r : s.per_run) {
                  py::dict rd;
                  rd["run_id"] = r.run_id;
                  rd["seed"] = r.seed;
                  rd["jointly_survived"] = r.jointly_survived;
                  rd["extinct_label"] = r.extinct_label;
                  rd["extinct_generation"] = r.extinct_generation;
                  rd["final_counts"] = r.final_counts;
                  rd["alpha_final"] = opt_to_py(r.alpha_final);
                  rd["tau_final"] = r.tau_final;
                  rd["tau_mean_window"] = r.tau_mean_window;
                  rd["tau_sd_window"] = r.tau_sd_window;
                  per_run.append(rd);
              }
              d["per_run"] = per_run;
              return d;
          },
          py::arg("specs"), py::arg("initial_counts"), py::arg("horizon"), py::arg("runs"),
          py::arg("base_seed"), py::arg("population_cap") = 1'000'000,
          py::arg("diagnostic_window") = 50);

    m.def("solve_equilibrium",
          [](const SubPopulationSpec& spec_h, const SubPopulationSpec& spec_i,
             std::optional<double> upper, int grid_points, double bisection_tol) {
              SearchDomain dom;
              dom.upper = upper;
              dom.grid_points = grid_points;
              dom.bisection_tol = bisection_tol;
              SolveResult res = solve_equilibrium(spec_h, spec_i, dom);
              py::list sols;
              for (const auto& s : res.solutions) {
                  py::dict sd;
                  sd["tau"] = s.tau;
                  sd["alpha"] = opt_to_py(s.alpha);
                  sd["any_positive_alpha"] = s.any_positive_alpha();
                  sd["effective_mean"] = s.effective_mean;
                  sd["classification"] = classification_name(s.classification);
                  sd["equation_residual"] = s.equation_residual;
                  sd["constraint_residual"] = s.constraint_residual;
                  sols.append(sd);
              }
              py::dict d;
              d["solutions"] = sols;
              d["dropped_roots"] = res.dropped_roots;
              return d;
          },
          py::arg("spec_h"), py::arg("spec_i"), py::arg("upper") = py::none(),
          py::arg("grid_points") = 4096, py::arg("bisection_tol") = 1e-12);

    m.def("greedy_count", &greedy_count, py::arg("claims"), py::arg("budget"));
    m.def("brs_tau", &brs_tau, py::arg("dist"), py::arg("n"), py::arg("budget"));
    m.def("brs_check",
          [](const ClaimDistribution& dist, std::int64_t n, double budget, std::int64_t runs,
             std::uint64_t seed) {
              BrsCheckResult r = brs_check(dist, n, budget, runs, seed);
              py::dict d;
              d["n"] = r.bound.n;
              d["budget"] = r.bound.budget;
              d["tau_star"] = r.bound.tau_star;
              d["bound"] = r.bound.bound;
              d["estimate"] = r.mc_estimate;
              d["ci_halfwidth"] = r.ci_halfwidth;
              d["runs"] = r.runs;
              return d;
          },
          py::arg("dist"), py::arg("n"), py::arg("budget"), py::arg("runs"), py::arg("seed"));

    m.def("check_monge",
          [](const std::vector<std::vector<double>>& cost, double tol) {
              CostMatrix c;
              c.rows = cost.size();
              c.cols = c.rows ? cost[0].size() : 0;
              for (const auto& row : cost) {
                  if (row.size() != c.cols)
                      throw std::invalid_argument("cost: ragged rows");
                  c.entries.insert(c.entries.end(), row.begin(), row.end());
              }
              return check_monge(c, tol);
          },
          py::arg("cost"), py::arg("tol") = 1e-12);

    m.def("northwest_plan",
          [](const std::vector<double>& a, const std::vector<double>& b,
             const std::optional<std::vector<std::vector<double>>>& cost, bool normalize) {
              DiscreteMarginal ma{a, {}};
              DiscreteMarginal mb{b, {}};
              CostMatrix c;
              const CostMatrix* cp = nullptr;
              if (cost) {
                  c.rows = cost->size();
                  c.cols = c.rows ? (*cost)[0].size() : 0;
                  for (const auto& row : *cost) {
                      if (row.size() != c.cols)
                          throw std::invalid_argument("cost: ragged rows");
                      c.entries.insert(c.entries.end(), row.begin(), row.end());
                  }
                  cp = &c;
              }
              TransportPlan plan = northwest_plan(ma, mb, cp, normalize);
              py::list flows;
              for (std::size_t i = 0; i < plan.rows; ++i) {
                  py::list row;
                  for (std::size_t j = 0; j < plan.cols; ++j) row.append(plan.at(i, j));
                  flows.append(row);
              }
              py::dict d;
              d["flows"] = flows;
              d["total_cost"] = plan.total_cost;
              d["positive_entries"] = plan.positive_entries(1e-15);
              return d;
          },
          py::arg("a"), py::arg("b"), py::arg("cost") = py::none(),
          py::arg("normalize") = false);

    m.def("quantile_coupling_cost", &quantile_coupling_cost, py::arg("src"), py::arg("dst"),
          py::arg("p"), py::arg("quad_points") = 512);

    m.def("control_search",
          [](const ClaimDistribution& source, const std::vector<ClaimDistribution>& grid,
             const SubPopulationSpec& spec_h, const SubPopulationSpec& spec_i, double p,
             int quad_points) {
              auto ranking = control_search(source, grid, spec_h, spec_i, p, {}, quad_points);
              py::list out;
              for (const auto& c : ranking) {
                  py::dict cd;
                  cd["grid_index"] = c.grid_index;
                  cd["family"] = c.demand.candidate.family_name();
                  cd["tau"] = c.demand.tau_tilde;
                  cd["alpha"] = c.demand.alpha_tilde;
                  cd["effective_mean"] = c.demand.effective_mean;
                  cd["transport_cost"] = c.transport_cost;
                  out.append(cd);
              }
              return out;
          },
          py::arg("source"), py::arg("grid"), py::arg("spec_h"), py::arg("spec_i"),
          py::arg("p") = 2.0, py::arg("quad_points") = 512);
}
