#include "rdbp/society.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdbp {

namespace {

// Below this size a plain sort is faster than the bucket pass.
constexpr std::size_t kSortCutoff = 4096;

AllocationResult allocate_sorted(std::vector<Claimant>& claimants, double budget,
                                 std::size_t n_subpops) {
    std::sort(claimants.begin(), claimants.end());
    AllocationResult out;
    out.budget = budget;
    out.served_counts.assign(n_subpops, 0);
    double running = 0.0;
    for (const Claimant& c : claimants) {
        if (running + c.claim > budget) break;
        running += c.claim;
        ++out.served_counts[static_cast<std::size_t>(c.subpop)];
        out.threshold = c.claim;
    }
    out.consumed = running;
    return out;
}

}  // namespace

AllocationResult allocate_weakest_first(std::vector<Claimant> claimants, double budget,
                                        std::size_t n_subpops) {
    if (budget < 0.0) throw std::invalid_argument("allocate_weakest_first: negative budget");
    return allocate_sorted(claimants, budget, n_subpops);
}

AllocationResult allocate_weakest_first(const std::vector<std::vector<double>>& claims_by_subpop,
                                        double budget) {
    if (budget < 0.0) throw std::invalid_argument("allocate_weakest_first: negative budget");
    const std::size_t s = claims_by_subpop.size();
    std::size_t n_total = 0;
    double max_claim = 0.0;
    for (const auto& v : claims_by_subpop) {
        n_total += v.size();
        for (double c : v) max_claim = std::max(max_claim, c);
    }

    if (n_total <= kSortCutoff || max_claim <= 0.0) {
        std::vector<Claimant> claimants;
        claimants.reserve(n_total);
        for (std::size_t k = 0; k < s; ++k)
            for (std::size_t i = 0; i < claims_by_subpop[k].size(); ++i)
                claimants.push_back({static_cast<std::int32_t>(k), claims_by_subpop[k][i],
                                     static_cast<std::int64_t>(i)});
        return allocate_sorted(claimants, budget, s);
    }

    // Bucket pass: claims are partitioned by value into B buckets; whole
    // buckets are served until the budget boundary, then the boundary bucket
    // is resolved by an exact sort. Result matches the plain sorted greedy.
    // Each bucket holds [sum, max, count_0..count_{s-1}] interleaved so one
    // claim touches one cache line; counts are exact as doubles (< 2^53).
    constexpr std::size_t B = 1u << 15;
    const double scale = static_cast<double>(B) / max_claim;
    auto bucket_of = [&](double c) {
        auto j = static_cast<std::size_t>(c * scale);
        return std::min(j, B - 1);
    };

    const std::size_t stride = 2 + s;
    std::vector<double> table(B * stride, 0.0);
    for (std::size_t k = 0; k < s; ++k)
        for (double c : claims_by_subpop[k]) {
            double* cell = &table[bucket_of(c) * stride];
            cell[0] += c;
            if (c > cell[1]) cell[1] = c;
            cell[2 + k] += 1.0;
        }

    AllocationResult out;
    out.budget = budget;
    out.served_counts.assign(s, 0);

    double running = 0.0;
    double threshold = 0.0;
    std::size_t boundary = B;
    for (std::size_t j = 0; j < B; ++j) {
        const double* cell = &table[j * stride];
        if (cell[1] == 0.0 && cell[0] == 0.0) {
            bool empty = true;
            for (std::size_t k = 0; empty && k < s; ++k) empty = cell[2 + k] == 0.0;
            if (empty) continue;
        }
        if (running + cell[0] > budget) {
            boundary = j;
            break;
        }
        running += cell[0];
        threshold = std::max(threshold, cell[1]);
        for (std::size_t k = 0; k < s; ++k)
            out.served_counts[k] += static_cast<std::int64_t>(cell[2 + k]);
    }

    if (boundary == B) {
        out.consumed = running;
        out.threshold = threshold;
        return out;
    }

    // Resolve the boundary bucket (and, in the rare case sequential rounding
    // lets it through entirely, later nonempty buckets) by exact greedy.
    std::vector<Claimant> tail;
    for (std::size_t j = boundary; j < B; ++j) {
        const double* cell = &table[j * stride];
        bool empty = true;
        for (std::size_t k = 0; empty && k < s; ++k) empty = cell[2 + k] == 0.0;
        if (empty) continue;
        tail.clear();
        for (std::size_t k = 0; k < s; ++k)
            for (std::size_t i = 0; i < claims_by_subpop[k].size(); ++i)
                if (bucket_of(claims_by_subpop[k][i]) == j)
                    tail.push_back({static_cast<std::int32_t>(k), claims_by_subpop[k][i],
                                    static_cast<std::int64_t>(i)});
        std::sort(tail.begin(), tail.end());
        bool stopped = false;
        for (const Claimant& c : tail) {
            if (running + c.claim > budget) {
                stopped = true;
                break;
            }
            running += c.claim;
            ++out.served_counts[static_cast<std::size_t>(c.subpop)];
            threshold = std::max(threshold, c.claim);
        }
        if (stopped) break;
    }
    out.consumed = running;
    out.threshold = threshold;
    return out;
}

GenerationStep step_generation(const std::vector<std::int64_t>& counts,
                               const std::vector<SubPopulationSpec>& specs, Rng& rng) {
    if (counts.size() != specs.size())
        throw std::invalid_argument("step_generation: counts/specs size mismatch");
    const std::size_t s = specs.size();
    GenerationStep step;
    step.descendants.assign(s, 0);

    for (std::size_t k = 0; k < s; ++k) {
        if (counts[k] < 0) throw std::invalid_argument("step_generation: negative count");
        if (counts[k] == 0) continue;  // absorbing: no descendants, no resources
        step.descendants[k] = specs[k].offspring.sample_total(counts[k], rng);
        step.resources_total += specs[k].resource.sample_total(counts[k], rng);
    }

    std::vector<std::vector<double>> claims(s);
    for (std::size_t k = 0; k < s; ++k) {
        const std::int64_t d = step.descendants[k];
        if (d == 0) continue;
        auto& v = claims[k];
        v.resize(static_cast<std::size_t>(d));
        // Inverse-transform sampling; the two hot families are inlined.
        if (const auto* u = std::get_if<Uniform>(&specs[k].claims.variant())) {
            const double a = u->lower, w = u->upper - u->lower;
            for (double& c : v) c = a + w * uniform01(rng);
        } else if (const auto* e = std::get_if<Exponential>(&specs[k].claims.variant())) {
            const double inv_rate = 1.0 / e->rate;
            for (double& c : v) c = exp_ziggurat_draw(rng) * inv_rate;
        } else {
            for (double& c : v) c = specs[k].claims.sample(rng);
        }
    }

    step.allocation = allocate_weakest_first(claims, step.resources_total);
    return step;
}

}  // namespace rdbp
