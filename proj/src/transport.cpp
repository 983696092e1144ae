#include "rdbp/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rdbp {

namespace {

constexpr double kBalanceTol = 1e-9;

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlNodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                  0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                  0.2223810344533745, 0.1012285362903763};

}  // namespace

double DiscreteMarginal::total() const {
    return std::accumulate(masses.begin(), masses.end(), 0.0);
}

void DiscreteMarginal::validate() const {
    require(!masses.empty(), "marginal: must be nonempty");
    for (double m : masses)
        require(m >= 0.0 && std::isfinite(m), "marginal: masses must be nonnegative and finite");
    require(total() > 0.0, "marginal: total mass must be positive");
    if (!labels.empty()) {
        require(labels.size() == masses.size(), "marginal: labels/masses size mismatch");
        for (std::size_t i = 1; i < labels.size(); ++i)
            require(labels[i] > labels[i - 1], "marginal: labels must be strictly ascending");
    }
}

void CostMatrix::validate() const {
    require(rows >= 1 && cols >= 1 && entries.size() == rows * cols,
            "cost matrix: inconsistent dimensions");
    for (double c : entries)
        require(c >= 0.0 && std::isfinite(c), "cost matrix: entries must be nonnegative finite");
}

std::size_t TransportPlan::positive_entries(double tol) const {
    return static_cast<std::size_t>(
        std::count_if(flows.begin(), flows.end(), [tol](double x) { return x > tol; }));
}

bool check_monge(const CostMatrix& cost, double tol) {
    cost.validate();
    for (std::size_t i = 0; i + 1 < cost.rows; ++i)
        for (std::size_t j = 0; j + 1 < cost.cols; ++j)
            if (cost.at(i, j) + cost.at(i + 1, j + 1) >
                cost.at(i, j + 1) + cost.at(i + 1, j) + tol)
                return false;
    return true;
}

TransportPlan northwest_plan(const DiscreteMarginal& a, const DiscreteMarginal& b,
                             const CostMatrix* cost, bool normalize) {
    a.validate();
    b.validate();
    std::vector<double> bm = b.masses;
    const double ta = a.total();
    double tb = b.total();
    if (std::abs(ta - tb) > kBalanceTol) {
        require(normalize, "northwest_plan: unbalanced marginals (pass normalize to rescale b)");
        const double scale = ta / tb;
        for (double& m : bm) m *= scale;
        tb = ta;
    }
    const std::size_t m = a.masses.size(), n = bm.size();
    if (cost) {
        cost->validate();
        require(cost->rows == m && cost->cols == n, "northwest_plan: cost dimensions mismatch");
    }

    // Cumulative coupling X_ij = min(A_i, B_j), flows by inclusion-exclusion
    // differencing. Equivalent to the classical northwest-corner traversal.
    std::vector<double> A(m), B(n);
    std::partial_sum(a.masses.begin(), a.masses.end(), A.begin());
    std::partial_sum(bm.begin(), bm.end(), B.begin());

    TransportPlan plan;
    plan.rows = m;
    plan.cols = n;
    plan.flows.assign(m * n, 0.0);
    auto cum = [&](std::size_t i, std::size_t j) { return std::min(A[i], B[j]); };
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double x = cum(i, j);
            if (i > 0) x -= cum(i - 1, j);
            if (j > 0) x -= cum(i, j - 1);
            if (i > 0 && j > 0) x += cum(i - 1, j - 1);
            plan.flows[i * n + j] = std::max(0.0, x);
        }

    plan.row_marginals.assign(m, 0.0);
    plan.col_marginals.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            plan.row_marginals[i] += plan.flows[i * n + j];
            plan.col_marginals[j] += plan.flows[i * n + j];
        }
    if (cost)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                plan.total_cost += plan.flows[i * n + j] * cost->at(i, j);
    return plan;
}

namespace {

struct BruteState {
    std::size_t m, n;
    const CostMatrix* cost;
    double mass_unit;
    std::vector<std::int64_t> row_left, col_left;
    double best = std::numeric_limits<double>::infinity();

    // Fill cells in row-major order; remaining row/col unit counts bound the
    // search, partial cost prunes.
    void recurse(std::size_t cell, double cost_so_far) {
        if (cost_so_far >= best) return;
        if (cell == m * n) {
            // Feasible only when everything is placed.
            for (std::int64_t r : row_left)
                if (r != 0) return;
            best = cost_so_far;
            return;
        }
        const std::size_t i = cell / n, j = cell % n;
        const std::int64_t max_units = std::min(row_left[i], col_left[j]);
        // Last column of a row must absorb the row remainder if nothing
        // else can; enumeration handles that implicitly by trying all counts.
        for (std::int64_t u = max_units; u >= 0; --u) {
            row_left[i] -= u;
            col_left[j] -= u;
            const double add = static_cast<double>(u) * mass_unit * cost->at(i, j);
            // Prune: a row cannot finish if its remainder exceeds what the
            // remaining columns of this row can take.
            std::int64_t capacity = 0;
            for (std::size_t jj = j + 1; jj < n; ++jj) capacity += col_left[jj];
            if (row_left[i] <= capacity) recurse(cell + 1, cost_so_far + add);
            row_left[i] += u;
            col_left[j] += u;
        }
    }
};

std::vector<std::int64_t> to_units(const std::vector<double>& masses, double unit) {
    std::vector<std::int64_t> out;
    out.reserve(masses.size());
    for (double mss : masses) {
        const double q = mss / unit;
        const auto r = static_cast<std::int64_t>(std::llround(q));
        require(std::abs(q - static_cast<double>(r)) <= 1e-9,
                "brute_force_optimal: marginal not an integer multiple of mass_unit");
        out.push_back(r);
    }
    return out;
}

}  // namespace

double brute_force_optimal(const DiscreteMarginal& a, const DiscreteMarginal& b,
                           const CostMatrix& cost, double mass_unit) {
    a.validate();
    b.validate();
    cost.validate();
    require(mass_unit > 0.0, "brute_force_optimal: mass_unit must be positive");
    const std::size_t m = a.masses.size(), n = b.masses.size();
    require(cost.rows == m && cost.cols == n, "brute_force_optimal: cost dimensions mismatch");
    require(m + n <= 8, "brute_force_optimal: m + n must be <= 8");

    BruteState st;
    st.m = m;
    st.n = n;
    st.cost = &cost;
    st.mass_unit = mass_unit;
    st.row_left = to_units(a.masses, mass_unit);
    st.col_left = to_units(b.masses, mass_unit);
    const std::int64_t total_a = std::accumulate(st.row_left.begin(), st.row_left.end(),
                                                 std::int64_t{0});
    const std::int64_t total_b = std::accumulate(st.col_left.begin(), st.col_left.end(),
                                                 std::int64_t{0});
    require(total_a == total_b, "brute_force_optimal: unbalanced marginals");
    require(total_a <= 14, "brute_force_optimal: total units must be <= 14");

    st.recurse(0, 0.0);
    return st.best;
}

double quantile_coupling_cost(const ClaimDistribution& src, const ClaimDistribution& dst,
                              double p, int quad_points) {
    require(p >= 1.0, "quantile_coupling_cost: p must be >= 1");
    require(quad_points >= 8, "quantile_coupling_cost: need at least 8 quadrature points");

    const double lo = 1e-9, hi = 1.0 - 1e-9;
    const int panels = quad_points / 8;
    const double width = (hi - lo) / static_cast<double>(panels);
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = lo + width * static_cast<double>(k);
        const double mid = a + 0.5 * width, half = 0.5 * width;
        for (int g = 0; g < 8; ++g) {
            const double u = mid + half * kGlNodes[g];
            const double diff = std::abs(src.quantile(u) - dst.quantile(u));
            acc += kGlWeights[g] * half * std::pow(diff, p);
        }
    }
    return acc;
}

std::optional<AdmissibleDemand> admissible_demand(const ClaimDistribution& candidate,
                                                  const SubPopulationSpec& spec_h,
                                                  const SubPopulationSpec& spec_i,
                                                  const SearchDomain& domain) {
    if (!candidate.absolutely_continuous()) return std::nullopt;
    SubPopulationSpec tilde = spec_h;
    tilde.claims = candidate;
    const SolveResult res = solve_equilibrium(tilde, spec_i, domain);
    for (const EquilibriumSolution& sol : res.solutions) {
        // Strict only: the admissibility side condition is a strict inequality.
        if (sol.classification != Criticality::Strict) continue;
        if (!sol.alpha) continue;
        AdmissibleDemand d{candidate, sol.tau, *sol.alpha, sol.effective_mean};
        return d;
    }
    return std::nullopt;
}

std::vector<ControlCandidate> control_search(const ClaimDistribution& source,
                                             const std::vector<ClaimDistribution>& grid,
                                             const SubPopulationSpec& spec_h,
                                             const SubPopulationSpec& spec_i, double p,
                                             const SearchDomain& domain, int quad_points) {
    require(!grid.empty(), "control_search: candidate grid must be nonempty");
    std::vector<ControlCandidate> out;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto demand = admissible_demand(grid[g], spec_h, spec_i, domain);
        if (!demand) continue;
        ControlCandidate c;
        c.grid_index = g;
        c.demand = std::move(*demand);
        c.transport_cost = quantile_coupling_cost(source, grid[g], p, quad_points);
        out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return x.transport_cost < y.transport_cost;
    });
    return out;
}

}  // namespace rdbp
