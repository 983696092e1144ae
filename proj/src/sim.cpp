#include "rdbp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rdbp {

namespace {

std::int64_t binomial_draw(std::int64_t n, double p, Rng& rng) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p < 0.05) {
        // Geometric waiting times between successes.
        const double log_q = std::log1p(-p);
        std::int64_t kept = 0, i = 0;
        for (;;) {
            const double u = uniform01_open_left(rng);
            i += static_cast<std::int64_t>(std::floor(std::log(u) / log_q)) + 1;
            if (i > n) break;
            ++kept;
        }
        return kept;
    }
    std::int64_t kept = 0;
    for (std::int64_t i = 0; i < n; ++i) kept += uniform01(rng) < p ? 1 : 0;
    return kept;
}

double quantile_of_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

QuantileStats stats_of(std::vector<double> values) {
    QuantileStats s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    s.median = quantile_of_sorted(values, 0.5);
    s.q25 = quantile_of_sorted(values, 0.25);
    s.q75 = quantile_of_sorted(values, 0.75);
    return s;
}

}  // namespace

TrajectoryOutcome run_trajectory(const std::vector<SubPopulationSpec>& specs,
                                 const std::vector<std::int64_t>& initial_counts,
                                 std::int64_t horizon, std::uint64_t seed,
                                 const TrajectoryOptions& opts) {
    if (horizon < 1) throw std::invalid_argument("run_trajectory: horizon must be >= 1");
    if (initial_counts.size() != specs.size())
        throw std::invalid_argument("run_trajectory: initial_counts/specs size mismatch");
    std::int64_t total0 = 0;
    for (std::int64_t c : initial_counts) {
        if (c < 0) throw std::invalid_argument("run_trajectory: negative initial count");
        total0 += c;
    }
    if (opts.population_cap < total0)
        throw std::invalid_argument("run_trajectory: population_cap below initial population");

    const std::size_t s = specs.size();
    Rng rng(seed);
    TrajectoryOutcome out;
    std::vector<std::int64_t> counts = initial_counts;

    for (std::size_t k = 0; k < s; ++k)
        if (counts[k] == 0 && out.extinct_generation < 0) {
            out.status = TrajectoryOutcome::Status::Extinct;
            out.extinct_label = specs[k].label;
            out.extinct_generation = 0;
        }

    for (std::int64_t t = 0; t < horizon; ++t) {
        GenerationStep step = step_generation(counts, specs, rng);

        GenerationRecord rec;
        rec.t = t;
        rec.counts = counts;
        rec.descendants = step.descendants;
        rec.served = step.allocation.served_counts;
        rec.resources_total = step.resources_total;
        rec.consumed = step.allocation.consumed;
        rec.threshold = step.allocation.threshold;
        if (s >= 2 && counts[0] > 0)
            rec.ratio = static_cast<double>(counts[1]) / static_cast<double>(counts[0]);

        counts = step.allocation.served_counts;

        for (std::size_t k = 0; k < s; ++k)
            if (counts[k] == 0 && out.extinct_generation < 0) {
                out.status = TrajectoryOutcome::Status::Extinct;
                out.extinct_label = specs[k].label;
                out.extinct_generation = t + 1;
            }

        const std::int64_t total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});

        if (opts.keep_trace) out.trace.push_back(rec);
        out.final_record = std::move(rec);

        if (total == 0) break;  // joint extinction is absorbing

        if (total > opts.population_cap) {
            if (!out.capped_at) out.capped_at = t + 1;
            if (opts.cap_mode == CapMode::Halt) {
                out.halted_at_cap = true;
                break;
            }
            const double p =
                static_cast<double>(opts.population_cap) / static_cast<double>(total);
            for (std::size_t k = 0; k < s; ++k) counts[k] = binomial_draw(counts[k], p, rng);
            // Thinning can empty a tiny sub-population; that is extinction too.
            for (std::size_t k = 0; k < s; ++k)
                if (counts[k] == 0 && out.extinct_generation < 0) {
                    out.status = TrajectoryOutcome::Status::Extinct;
                    out.extinct_label = specs[k].label;
                    out.extinct_generation = t + 1;
                }
            if (std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) == 0) break;
        }
    }
    out.final_counts = std::move(counts);
    return out;
}

double balance_residual(const GenerationRecord& record) {
    if (record.counts.empty() || record.counts[0] <= 0)
        throw std::invalid_argument("balance_residual: home count must be positive");
    return std::abs(record.consumed - record.resources_total) /
           static_cast<double>(record.counts[0]);
}

double ratio_recursion_check(const GenerationRecord& at_t, const GenerationRecord& at_t_plus_1,
                             const ClaimDistribution& claims_h,
                             const ClaimDistribution& claims_i) {
    if (at_t.counts.empty() || at_t.counts[0] <= 0 || at_t_plus_1.counts.empty() ||
        at_t_plus_1.counts[0] <= 0)
        throw std::invalid_argument("ratio_recursion_check: home counts must be positive");
    if (at_t.descendants.size() < 2)
        throw std::invalid_argument("ratio_recursion_check: needs two sub-populations");

    const double alpha_next = static_cast<double>(at_t_plus_1.counts[1]) /
                              static_cast<double>(at_t_plus_1.counts[0]);
    const double lhs = 1.0 / (1.0 + alpha_next);
    const double wh = static_cast<double>(at_t.descendants[0]) * claims_h.cdf(at_t.threshold);
    const double wi = static_cast<double>(at_t.descendants[1]) * claims_i.cdf(at_t.threshold);
    if (wh + wi == 0.0)
        throw std::invalid_argument("ratio_recursion_check: no service mass at tau_t");
    return std::abs(lhs - wh / (wh + wi));
}

MonteCarloSummary monte_carlo(const std::vector<SubPopulationSpec>& specs,
                              const std::vector<std::int64_t>& initial_counts,
                              std::int64_t horizon, std::int64_t runs, std::uint64_t base_seed,
                              const MonteCarloOptions& opts,
                              std::vector<TrajectoryOutcome>* outcomes) {
    if (runs < 1) throw std::invalid_argument("monte_carlo: runs must be >= 1");

    MonteCarloSummary summary;
    summary.runs = runs;
    summary.horizon = horizon;
    summary.base_seed = base_seed;

    std::vector<double> surv_alpha, surv_tau;
    std::int64_t survived = 0;

    for (std::int64_t run = 0; run < runs; ++run) {
        TrajectoryOptions topts = opts.trajectory;
        topts.keep_trace = true;  // window diagnostics need the trace
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(run);
        TrajectoryOutcome o = run_trajectory(specs, initial_counts, horizon, seed, topts);

        RunStats rs;
        rs.run_id = run;
        rs.seed = seed;
        rs.extinct_label = o.extinct_label;
        rs.extinct_generation = o.extinct_generation;
        rs.final_counts = o.final_counts;
        rs.capped_at = o.capped_at;
        rs.tau_final = o.final_record.threshold;
        rs.jointly_survived =
            o.status == TrajectoryOutcome::Status::AllSurvived &&
            std::all_of(rs.final_counts.begin(), rs.final_counts.end(),
                        [](std::int64_t c) { return c > 0; });
        if (!rs.final_counts.empty() && rs.final_counts[0] > 0 && rs.final_counts.size() >= 2)
            rs.alpha_final = static_cast<double>(rs.final_counts[1]) /
                             static_cast<double>(rs.final_counts[0]);

        const auto& trace = o.trace;
        const std::size_t window =
            std::min<std::size_t>(trace.size(), static_cast<std::size_t>(opts.diagnostic_window));
        if (window > 0) {
            double sum = 0.0, sum_sq = 0.0;
            for (std::size_t i = trace.size() - window; i < trace.size(); ++i) {
                sum += trace[i].threshold;
                sum_sq += trace[i].threshold * trace[i].threshold;
            }
            const double n = static_cast<double>(window);
            rs.tau_mean_window = sum / n;
            rs.tau_sd_window = std::sqrt(std::max(0.0, sum_sq / n - (sum / n) * (sum / n)));
        }
        for (const auto& rec : trace) {
            if (rec.counts.empty() || static_cast<double>(rec.counts[0]) < opts.balance_gamma_min)
                continue;
            ++rs.balance_samples;
            if (balance_residual(rec) < opts.balance_tol) ++rs.balance_below_tol;
        }

        if (rs.jointly_survived) {
            ++survived;
            if (rs.alpha_final) surv_alpha.push_back(*rs.alpha_final);
            surv_tau.push_back(rs.tau_final);
        }
        summary.per_run.push_back(std::move(rs));
        if (outcomes)
            outcomes->push_back(std::move(o));
    }

    summary.joint_survival_fraction =
        static_cast<double>(survived) / static_cast<double>(runs);
    if (survived > 0) {
        summary.alpha_stats = stats_of(std::move(surv_alpha));
        summary.tau_stats = stats_of(std::move(surv_tau));
    }
    return summary;
}

}  // namespace rdbp
