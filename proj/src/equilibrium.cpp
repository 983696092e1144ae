#include "rdbp/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdbp {

namespace {

constexpr double kClassificationTol = 1e-9;
constexpr double kIdenticallyZeroTol = 1e-12;

double phi(const SubPopulationSpec& h, const SubPopulationSpec& i, double tau) {
    return h.offspring.mean() * h.claims.cdf(tau) - i.offspring.mean() * i.claims.cdf(tau);
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if ((flo <= 0.0) == (fmid <= 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Criticality classify(double effective_mean) {
    if (std::abs(effective_mean - 1.0) <= kClassificationTol) return Criticality::Critical;
    return effective_mean > 1.0 ? Criticality::Strict : Criticality::Inadmissible;
}

}  // namespace

double resolve_upper(const SubPopulationSpec& spec_h, const SubPopulationSpec& spec_i,
                     const SearchDomain& domain) {
    if (domain.upper) {
        if (*domain.upper <= 0.0) throw std::invalid_argument("search domain: upper must be > 0");
        return *domain.upper;
    }
    const double qh = spec_h.claims.quantile(1.0 - 1e-6);
    const double qi = spec_i.claims.quantile(1.0 - 1e-6);
    double upper = std::max(qh, qi);
    upper = std::min(upper, std::max(spec_h.claims.sup_support(), spec_i.claims.sup_support()));
    if (!(upper > 0.0) || !std::isfinite(upper))
        throw std::invalid_argument("search domain: could not derive a finite upper end");
    return upper;
}

ConstraintRootsResult constraint_roots(const SubPopulationSpec& spec_h,
                                       const SubPopulationSpec& spec_i,
                                       const SearchDomain& domain) {
    if (!spec_h.claims.absolutely_continuous() || !spec_i.claims.absolutely_continuous())
        throw std::invalid_argument(
            "constraint_roots: claim laws must be absolutely continuous "
            "(uniform, exponential or lognormal)");
    if (domain.grid_points < 2)
        throw std::invalid_argument("constraint_roots: grid_points must be >= 2");

    const double upper = resolve_upper(spec_h, spec_i, domain);
    const int n = domain.grid_points;

    ConstraintRootsResult out;
    bool all_zero = true;
    double prev_tau = 0.0;
    double prev_phi = 0.0;  // phi(0) = 0 for nonnegative-support laws
    for (int g = 1; g <= n; ++g) {
        const double tau = upper * static_cast<double>(g) / static_cast<double>(n);
        const double value = phi(spec_h, spec_i, tau);
        if (std::abs(value) > kIdenticallyZeroTol) all_zero = false;
        // Sign change (or exact grid hit) between adjacent points; tau = 0
        // itself is excluded as a root.
        if (g > 1 && ((prev_phi < 0.0 && value > 0.0) || (prev_phi > 0.0 && value < 0.0))) {
            const double root = bisect([&](double t) { return phi(spec_h, spec_i, t); }, prev_tau,
                                       tau, domain.bisection_tol);
            out.roots.push_back(root);
        } else if (value == 0.0 && std::abs(prev_phi) > kIdenticallyZeroTol) {
            out.roots.push_back(tau);
        }
        prev_tau = tau;
        prev_phi = value;
    }
    if (all_zero) {
        out.roots.clear();
        out.identically_zero = true;
    }
    return out;
}

SolveResult solve_equilibrium(const SubPopulationSpec& spec_h, const SubPopulationSpec& spec_i,
                              const SearchDomain& domain) {
    const double m_h = spec_h.offspring.mean();
    const double m_i = spec_i.offspring.mean();
    const double r_h = spec_h.resource.mean();
    const double r_i = spec_i.resource.mean();

    ConstraintRootsResult roots = constraint_roots(spec_h, spec_i, domain);
    SolveResult out;

    if (roots.identically_zero) {
        // Identical effective service laws: the constraint holds everywhere and
        // the equation collapses to m_h M_h(tau) (1 + alpha ...) scaling; solve
        // m_h M_h(tau) + alpha m_i M_i(tau) = r_h + alpha r_i at alpha-free
        // tau via the alpha = 1 section, which is equivalent here.
        const double upper = resolve_upper(spec_h, spec_i, domain);
        auto g = [&](double tau) {
            return m_h * spec_h.claims.partial_mean(tau) + m_i * spec_i.claims.partial_mean(tau) -
                   r_h - r_i;
        };
        if (g(upper) >= 0.0) {
            const double tau = bisect(g, 0.0, upper, domain.bisection_tol);
            EquilibriumSolution sol;
            sol.tau = tau;
            sol.alpha = std::nullopt;  // any positive alpha
            sol.effective_mean = m_h * spec_h.claims.cdf(tau);
            sol.classification = classify(sol.effective_mean);
            auto [eq_res, con_res] = verify(sol, spec_h, spec_i);
            sol.equation_residual = eq_res;
            sol.constraint_residual = con_res;
            out.solutions.push_back(sol);
        }
        return out;
    }

    for (double tau : roots.roots) {
        const double mh_M = m_h * spec_h.claims.partial_mean(tau);
        const double mi_M = m_i * spec_i.claims.partial_mean(tau);
        const double numer = r_h - mh_M;        // alpha (mi_M - r_i) = r_h - mh_M
        const double denom = mi_M - r_i;

        EquilibriumSolution sol;
        sol.tau = tau;
        sol.effective_mean = 0.5 * (m_h * spec_h.claims.cdf(tau) + m_i * spec_i.claims.cdf(tau));

        if (denom == 0.0 && numer == 0.0) {
            sol.alpha = std::nullopt;  // degenerate at this root: any alpha solves
        } else if (denom == 0.0) {
            out.dropped_roots.push_back(tau);  // no finite alpha at this root
            continue;
        } else {
            const double alpha = numer / denom;
            if (!(alpha > 0.0) || !std::isfinite(alpha)) continue;  // outside (0, inf)
            sol.alpha = alpha;
        }
        sol.classification = classify(sol.effective_mean);
        auto [eq_res, con_res] = verify(sol, spec_h, spec_i);
        sol.equation_residual = eq_res;
        sol.constraint_residual = con_res;
        out.solutions.push_back(sol);
    }
    std::sort(out.solutions.begin(), out.solutions.end(),
              [](const auto& a, const auto& b) { return a.tau < b.tau; });
    return out;
}

std::pair<double, double> verify(const EquilibriumSolution& solution,
                                 const SubPopulationSpec& spec_h,
                                 const SubPopulationSpec& spec_i) {
    const double m_h = spec_h.offspring.mean();
    const double m_i = spec_i.offspring.mean();
    const double r_h = spec_h.resource.mean();
    const double r_i = spec_i.resource.mean();
    const double tau = solution.tau;
    const double alpha = solution.alpha.value_or(1.0);

    const double eq = m_h * spec_h.claims.partial_mean(tau) +
                      alpha * m_i * spec_i.claims.partial_mean(tau) - (r_h + alpha * r_i);
    const double con = m_h * spec_h.claims.cdf(tau) - m_i * spec_i.claims.cdf(tau);
    return {std::abs(eq), std::abs(con)};
}

}  // namespace rdbp
