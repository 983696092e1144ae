#pragma once

#include <cstdint>
#include <vector>

#include "rdbp/dists.hpp"

namespace rdbp {

// Budget-equation bound on the maximal number of n i.i.d. claims selectable
// within budget s: E[N(n, s)] <= n F(tau*), with n integral_0^{tau*} x dF = s.
struct BrsBound {
    std::int64_t n = 0;
    double budget = 0.0;
    double tau_star = 0.0;
    double bound = 0.0;  // n * F(tau_star)
};

// Maximum number of claims with sum <= budget (ascending greedy; the greedy
// count equals the exhaustive maximum).
std::int64_t greedy_count(std::vector<double> claims, double budget);

// tau* solving n * partial_mean(tau) = budget, as a generalized inverse;
// sup support when n * mean <= budget.
double brs_tau(const ClaimDistribution& dist, std::int64_t n, double budget);

BrsBound brs_bound(const ClaimDistribution& dist, std::int64_t n, double budget);

struct BrsCheckResult {
    BrsBound bound;
    double mc_estimate = 0.0;   // Monte Carlo mean of greedy_count
    double ci_halfwidth = 0.0;  // 99% normal-approximation half-width
    std::int64_t runs = 0;
};

// Monte Carlo verification of the inequality: mean greedy_count over draws of
// n i.i.d. claims, against the analytic bound.
BrsCheckResult brs_check(const ClaimDistribution& dist, std::int64_t n, double budget,
                         std::int64_t runs, std::uint64_t seed);

}  // namespace rdbp
