#include "rdbp/brs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdbp {

std::int64_t greedy_count(std::vector<double> claims, double budget) {
    std::sort(claims.begin(), claims.end());
    std::int64_t count = 0;
    double running = 0.0;
    for (double c : claims) {
        if (c < 0.0) throw std::invalid_argument("greedy_count: claims must be nonnegative");
        if (running + c > budget) break;
        running += c;
        ++count;
    }
    return count;
}

double brs_tau(const ClaimDistribution& dist, std::int64_t n, double budget) {
    if (n < 1) throw std::invalid_argument("brs_tau: n must be >= 1");
    if (budget < 0.0) throw std::invalid_argument("brs_tau: budget must be nonnegative");
    const double nn = static_cast<double>(n);
    if (nn * dist.mean() <= budget) return dist.sup_support();
    if (budget == 0.0) return 0.0;

    // Generalized inverse of the nondecreasing map tau -> n M(tau). An upper
    // bracket always exists because n * mean > budget was excluded above.
    double hi = 1.0;
    const double cap = dist.sup_support();
    while (nn * dist.partial_mean(std::min(hi, cap)) < budget && hi < cap) hi *= 2.0;
    hi = std::min(hi, cap);
    double lo = 0.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (nn * dist.partial_mean(mid) >= budget)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

BrsBound brs_bound(const ClaimDistribution& dist, std::int64_t n, double budget) {
    BrsBound b;
    b.n = n;
    b.budget = budget;
    b.tau_star = brs_tau(dist, n, budget);
    const double nn = static_cast<double>(n);
    b.bound = nn * dist.mean() <= budget ? nn : nn * dist.cdf(b.tau_star);
    return b;
}

BrsCheckResult brs_check(const ClaimDistribution& dist, std::int64_t n, double budget,
                         std::int64_t runs, std::uint64_t seed) {
    if (runs < 100) throw std::invalid_argument("brs_check: runs must be >= 100");
    BrsCheckResult out;
    out.bound = brs_bound(dist, n, budget);
    out.runs = runs;

    Rng rng(seed);
    std::vector<double> claims(static_cast<std::size_t>(n));
    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t r = 0; r < runs; ++r) {
        for (double& c : claims) c = dist.sample(rng);
        const auto count = static_cast<double>(greedy_count(claims, budget));
        sum += count;
        sum_sq += count * count;
    }
    const double nr = static_cast<double>(runs);
    out.mc_estimate = sum / nr;
    const double var = std::max(0.0, (sum_sq - sum * sum / nr) / (nr - 1.0));
    out.ci_halfwidth = 2.5758293035489004 * std::sqrt(var / nr);  // 99% two-sided normal
    return out;
}

}  // namespace rdbp
