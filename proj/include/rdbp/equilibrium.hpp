#pragma once

#include <optional>
#include <vector>

#include "rdbp/society.hpp"

namespace rdbp {

// Scan interval for the constraint function  phi(tau) = m_h F_h(tau) - m_i F_i(tau).
// The default upper end covers the union of both claim supports up to the
// 1 - 1e-6 quantile.
struct SearchDomain {
    std::optional<double> upper;  // defaulted from the claim laws when absent
    int grid_points = 4096;
    double bisection_tol = 1e-12;
};

enum class Criticality {
    Strict,        // effective mean > 1
    Critical,      // |effective mean - 1| <= classification tolerance
    Inadmissible,  // effective mean < 1
};

struct EquilibriumSolution {
    double tau = 0.0;
    // alpha absent means the degenerate continuum: any positive alpha solves
    // the equation (identical effective laws on both sides).
    std::optional<double> alpha;
    double effective_mean = 0.0;  // m_h F_h(tau) = m_i F_i(tau)
    Criticality classification = Criticality::Inadmissible;
    double equation_residual = 0.0;
    double constraint_residual = 0.0;

    bool any_positive_alpha() const { return !alpha.has_value(); }
};

struct ConstraintRootsResult {
    std::vector<double> roots;
    bool identically_zero = false;  // phi vanishes on the whole grid
};

double resolve_upper(const SubPopulationSpec& spec_h, const SubPopulationSpec& spec_i,
                     const SearchDomain& domain);

// All sign-change roots of phi on the grid, refined by bisection. Requires
// absolutely continuous claim laws on both sides; tau = 0 is excluded.
ConstraintRootsResult constraint_roots(const SubPopulationSpec& spec_h,
                                       const SubPopulationSpec& spec_i,
                                       const SearchDomain& domain = {});

struct SolveResult {
    std::vector<EquilibriumSolution> solutions;  // sorted by tau ascending
    // Constraint roots where the equation is affine-degenerate in alpha with
    // no finite solution (zero slope, nonzero residual).
    std::vector<double> dropped_roots;
};

// Finds all (tau, alpha) of the limiting system
//   m_h M_h(tau) + alpha m_i M_i(tau) = r_h + alpha r_i
//   m_h F_h(tau) = m_i F_i(tau)
// For each constraint root the equation is affine in alpha and solved
// exactly; the identically-zero constraint case instead solves
// m M(tau) = r by bisection and admits any positive alpha.
SolveResult solve_equilibrium(const SubPopulationSpec& spec_h, const SubPopulationSpec& spec_i,
                              const SearchDomain& domain = {});

// Independent re-evaluation of both equations at a candidate solution;
// returns (equation residual, constraint residual). For the degenerate
// continuum the equation residual is checked at alpha = 1.
std::pair<double, double> verify(const EquilibriumSolution& solution,
                                 const SubPopulationSpec& spec_h,
                                 const SubPopulationSpec& spec_i);

}  // namespace rdbp
