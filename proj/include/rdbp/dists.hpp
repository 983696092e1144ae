#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "rdbp/rng.hpp"

namespace rdbp {

// ---------------------------------------------------------------------------
// Claim-size distributions (the F, F_h, F_i of the equilibrium equations).
// All families live on [0, inf). Uniform/Exponential/LogNormal are absolutely
// continuous; PointMass and FiniteDiscrete exist for transport marginals and
// BRS experiments and are rejected by the equilibrium solver.
// ---------------------------------------------------------------------------

struct Uniform {
    double lower = 0.0;
    double upper = 1.0;
};

struct Exponential {
    double rate = 1.0;
};

struct LogNormal {
    double mu = 0.0;
    double sigma = 1.0;
};

struct PointMass {
    double value = 0.0;
};

struct FiniteDiscrete {
    std::vector<double> atoms;  // strictly ascending, nonnegative
    std::vector<double> probs;  // simplex weights, same length
};

class ClaimDistribution {
  public:
    using Variant = std::variant<Uniform, Exponential, LogNormal, PointMass, FiniteDiscrete>;

    ClaimDistribution() : v_(Uniform{}) {}
    ClaimDistribution(Variant v);  // validates parameters, throws std::invalid_argument

    double cdf(double x) const;
    // M(tau) = integral of x dF(x) over [0, tau]; closed form per family.
    double partial_mean(double tau) const;
    // Generalized inverse: inf { x : F(x) >= u }.
    double quantile(double u) const;
    double mean() const;
    // Density of the absolutely continuous families; 0 elsewhere.
    double density(double x) const;
    double sample(Rng& rng) const;

    bool absolutely_continuous() const;
    double sup_support() const;  // +inf for unbounded families

    const Variant& variant() const { return v_; }
    std::string family_name() const;

  private:
    Variant v_;
    std::vector<double> cum_;  // FiniteDiscrete cumulative weights
};

// ---------------------------------------------------------------------------
// Offspring laws (natality). p0 is exposed because extinction reasoning
// needs the probability of zero offspring.
// ---------------------------------------------------------------------------

struct PoissonOffspring {
    double mean = 1.0;
};

struct GeometricOffspring {
    double mean = 1.0;  // success prob p = 1/(1+mean), support {0,1,...}
};

struct DeterministicOffspring {
    std::int64_t count = 1;
};

struct FinitePmfOffspring {
    std::vector<std::int64_t> counts;
    std::vector<double> probs;
};

class OffspringDistribution {
  public:
    using Variant =
        std::variant<PoissonOffspring, GeometricOffspring, DeterministicOffspring, FinitePmfOffspring>;

    OffspringDistribution() : v_(DeterministicOffspring{}) {}
    OffspringDistribution(Variant v);

    double mean() const;
    double p0() const;
    std::int64_t sample(Rng& rng) const;
    // Sum of n independent draws. Uses the exact convolution law where the
    // family is closed under it (Poisson, Deterministic, Geometric -> negative
    // binomial); falls back to n individual draws otherwise.
    std::int64_t sample_total(std::int64_t n, Rng& rng) const;

    const Variant& variant() const { return v_; }
    std::string family_name() const;

  private:
    Variant v_;
    std::vector<double> cum_;
};

// ---------------------------------------------------------------------------
// Resource production laws (the r_h, r_i side).
// ---------------------------------------------------------------------------

struct DeterministicResource {
    double value = 0.0;
};

struct GammaResource {
    double shape = 1.0;
    double scale = 1.0;
};

struct UniformResource {
    double lower = 0.0;
    double upper = 1.0;
};

class ResourceModel {
  public:
    using Variant = std::variant<DeterministicResource, GammaResource, UniformResource>;

    ResourceModel() : v_(DeterministicResource{}) {}
    ResourceModel(Variant v);

    double mean() const;
    double sample(Rng& rng) const;
    // Sum of n independent draws; exact convolution for Deterministic and
    // Gamma, individual draws for Uniform.
    double sample_total(std::int64_t n, Rng& rng) const;

    const Variant& variant() const { return v_; }
    std::string family_name() const;

  private:
    Variant v_;
};

// ---------------------------------------------------------------------------
// Numeric helpers shared across modules.
// ---------------------------------------------------------------------------

double normal_cdf(double x);
double normal_quantile(double u);

// Adaptive Simpson on [a, b]; fallback path for families without a
// closed-form partial expectation, and the quadrature oracle in tests.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 60);

// Draws used internally and by ResourceModel.
double gamma_draw(double shape, double scale, Rng& rng);
std::int64_t poisson_draw(double mean, Rng& rng);

// Standard Exponential(1) via the 256-layer ziggurat; exact in law and much
// faster than the inverse transform on the simulation hot path.
double exp_ziggurat_draw(Rng& rng);

}  // namespace rdbp
