#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rdbp/dists.hpp"
#include "rdbp/equilibrium.hpp"

namespace rdbp {

// Row or column marginal of the discrete transportation problem.
struct DiscreteMarginal {
    std::vector<double> masses;           // a_i or b_j, nonnegative, total > 0
    std::vector<double> labels;           // optional support points, strictly ascending

    double total() const;
    void validate() const;  // throws std::invalid_argument
};

struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries;  // row-major, nonnegative finite

    double at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
    void validate() const;
};

struct TransportPlan {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> flows;  // row-major
    std::vector<double> row_marginals;
    std::vector<double> col_marginals;
    double total_cost = 0.0;  // 0 when built without a cost matrix

    double at(std::size_t i, std::size_t j) const { return flows[i * cols + j]; }
    std::size_t positive_entries(double tol = 0.0) const;
};

// Monge condition via adjacent 2x2 submatrices:
//   c[i][j] + c[i+1][j+1] <= c[i][j+1] + c[i+1][j] + tol.
// Equivalent to the full quadrangle condition over all i < i', j < j' (the
// adjacent inequalities telescope); the full checker lives in the test suite
// as the oracle.
bool check_monge(const CostMatrix& cost, double tol = 1e-12);

// Northwest-corner plan: cumulative flows equal min(A_i, B_j) of the
// cumulative marginals, the discrete form of F*(x,y) = min(F_h(x), F~(y)).
// Marginals must balance within 1e-9 unless normalize is set, which rescales
// b to a's total. Optimal whenever the cost matrix is Monge.
TransportPlan northwest_plan(const DiscreteMarginal& a, const DiscreteMarginal& b,
                             const CostMatrix* cost = nullptr, bool normalize = false);

// Exact reference solver by exhaustive enumeration of integer flow tables
// (branch-and-bound on partial cost). Marginals must be integer multiples of
// mass_unit with at most 14 total units and m + n <= 8.
double brute_force_optimal(const DiscreteMarginal& a, const DiscreteMarginal& b,
                           const CostMatrix& cost, double mass_unit);

// Comonotone (equal-quantile) coupling cost
//   integral_0^1 |Q_src(u) - Q_dst(u)|^p du
// by composite Gauss-Legendre quadrature, endpoints clipped to
// [1e-9, 1 - 1e-9].
double quantile_coupling_cost(const ClaimDistribution& src, const ClaimDistribution& dst,
                              double p, int quad_points = 512);

// A candidate demand distribution admitted by the equilibrium system with the
// candidate in place of the home claim law; Strict classification only.
struct AdmissibleDemand {
    ClaimDistribution candidate;
    double tau_tilde = 0.0;
    double alpha_tilde = 0.0;
    double effective_mean = 0.0;
};

std::optional<AdmissibleDemand> admissible_demand(const ClaimDistribution& candidate,
                                                  const SubPopulationSpec& spec_h,
                                                  const SubPopulationSpec& spec_i,
                                                  const SearchDomain& domain = {});

struct ControlCandidate {
    std::size_t grid_index = 0;
    AdmissibleDemand demand;
    double transport_cost = 0.0;
};

// Filters a candidate grid by admissibility and ranks the admissible ones by
// quantile-coupling cost from the source law, ascending.
std::vector<ControlCandidate> control_search(const ClaimDistribution& source,
                                             const std::vector<ClaimDistribution>& grid,
                                             const SubPopulationSpec& spec_h,
                                             const SubPopulationSpec& spec_i, double p,
                                             const SearchDomain& domain = {},
                                             int quad_points = 512);

}  // namespace rdbp
