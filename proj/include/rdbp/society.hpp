#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdbp/dists.hpp"

namespace rdbp {

// One sub-population: natality m, resource production r, claim law F.
struct SubPopulationSpec {
    std::string label;
    OffspringDistribution offspring;
    ResourceModel resource;
    ClaimDistribution claims;
};

struct Claimant {
    std::int32_t subpop = 0;
    double claim = 0.0;
    std::int64_t birth_index = 0;  // position within the subpop's descendant list

    // Deterministic service order: ascending claim, ties broken by
    // (subpop, birth_index).
    friend bool operator<(const Claimant& a, const Claimant& b) {
        if (a.claim != b.claim) return a.claim < b.claim;
        if (a.subpop != b.subpop) return a.subpop < b.subpop;
        return a.birth_index < b.birth_index;
    }
};

struct AllocationResult {
    std::vector<std::int64_t> served_counts;  // per sub-population
    double threshold = 0.0;                   // largest served claim (tau_t)
    double consumed = 0.0;                    // sum of served claims
    double budget = 0.0;
};

// Weakest-first society: serve claims in ascending order while the running
// sum stays within the budget. Stops at the first claim that does not fit.
AllocationResult allocate_weakest_first(std::vector<Claimant> claimants, double budget,
                                        std::size_t n_subpops);

// Same rule, taking each sub-population's claims as a separate vector
// (birth index = position). This is the form step_generation produces.
AllocationResult allocate_weakest_first(const std::vector<std::vector<double>>& claims_by_subpop,
                                        double budget);

// One generation of the joint dynamics: parents (counts) reproduce and
// produce resources, descendants submit claims to the shared pool, the
// weakest-first rule decides who forms the next generation. A zero count is
// absorbing: no descendants, no resources.
struct GenerationStep {
    std::vector<std::int64_t> descendants;  // D_t per subpop
    double resources_total = 0.0;           // R_t
    AllocationResult allocation;            // served counts become Gamma_{t+1}
};

GenerationStep step_generation(const std::vector<std::int64_t>& counts,
                               const std::vector<SubPopulationSpec>& specs, Rng& rng);

}  // namespace rdbp
