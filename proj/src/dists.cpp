#include "rdbp/dists.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rdbp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

// ----------------------------------------------------------------------------
// ClaimDistribution
// ----------------------------------------------------------------------------

ClaimDistribution::ClaimDistribution(Variant v) : v_(std::move(v)) {
    std::visit(
        [this](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                require(d.lower >= 0.0 && d.upper > d.lower, "uniform: need 0 <= lower < upper");
            } else if constexpr (std::is_same_v<T, Exponential>) {
                require(d.rate > 0.0, "exponential: rate must be positive");
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                require(d.sigma > 0.0 && std::isfinite(d.mu), "lognormal: sigma must be positive");
            } else if constexpr (std::is_same_v<T, PointMass>) {
                require(d.value >= 0.0, "point_mass: value must be nonnegative");
            } else {
                require(!d.atoms.empty() && d.atoms.size() == d.probs.size(),
                        "finite_discrete: atoms/probs must be nonempty and equal length");
                double total = 0.0;
                for (std::size_t i = 0; i < d.atoms.size(); ++i) {
                    require(d.atoms[i] >= 0.0, "finite_discrete: atoms must be nonnegative");
                    require(i == 0 || d.atoms[i] > d.atoms[i - 1],
                            "finite_discrete: atoms must be strictly ascending");
                    require(d.probs[i] >= 0.0, "finite_discrete: probs must be nonnegative");
                    total += d.probs[i];
                    cum_.push_back(total);
                }
                require(std::abs(total - 1.0) <= 1e-9, "finite_discrete: probs must sum to 1");
                cum_.back() = 1.0;
            }
        },
        v_);
}

double ClaimDistribution::cdf(double x) const {
    return std::visit(
        [&, x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                if (x < d.lower) return 0.0;
                if (x >= d.upper) return 1.0;
                return (x - d.lower) / (d.upper - d.lower);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return x <= 0.0 ? 0.0 : -std::expm1(-d.rate * x);
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return x <= 0.0 ? 0.0 : normal_cdf((std::log(x) - d.mu) / d.sigma);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return x >= d.value ? 1.0 : 0.0;
            } else {
                auto it = std::upper_bound(d.atoms.begin(), d.atoms.end(), x);
                if (it == d.atoms.begin()) return 0.0;
                return cum_[static_cast<std::size_t>(it - d.atoms.begin()) - 1];
            }
        },
        v_);
}

double ClaimDistribution::partial_mean(double tau) const {
    if (tau < 0.0) throw std::invalid_argument("partial_mean: tau must be nonnegative");
    return std::visit(
        [&, tau](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                if (tau <= d.lower) return 0.0;
                const double t = std::min(tau, d.upper);
                return (t * t - d.lower * d.lower) / (2.0 * (d.upper - d.lower));
            } else if constexpr (std::is_same_v<T, Exponential>) {
                if (tau == 0.0) return 0.0;
                if (std::isinf(tau)) return 1.0 / d.rate;
                // integral of x * rate * exp(-rate x) over [0, tau]
                return -std::expm1(-d.rate * tau) / d.rate - tau * std::exp(-d.rate * tau);
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                if (tau <= 0.0) return 0.0;
                const double full = std::exp(d.mu + 0.5 * d.sigma * d.sigma);
                if (std::isinf(tau)) return full;
                return full * normal_cdf((std::log(tau) - d.mu - d.sigma * d.sigma) / d.sigma);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return tau >= d.value ? d.value : 0.0;
            } else {
                double acc = 0.0;
                for (std::size_t i = 0; i < d.atoms.size() && d.atoms[i] <= tau; ++i)
                    acc += d.atoms[i] * d.probs[i];
                return acc;
            }
        },
        v_);
}

double ClaimDistribution::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("quantile: u must lie in [0,1]");
    return std::visit(
        [&, u](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return d.lower + u * (d.upper - d.lower);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return u == 1.0 ? kInf : -std::log1p(-u) / d.rate;
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                if (u == 0.0) return 0.0;
                if (u == 1.0) return kInf;
                return std::exp(d.mu + d.sigma * normal_quantile(u));
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return d.value;
            } else {
                auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
                if (it == cum_.end()) return d.atoms.back();
                return d.atoms[static_cast<std::size_t>(it - cum_.begin())];
            }
        },
        v_);
}

double ClaimDistribution::mean() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return 0.5 * (d.lower + d.upper);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return 1.0 / d.rate;
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return std::exp(d.mu + 0.5 * d.sigma * d.sigma);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return d.value;
            } else {
                double acc = 0.0;
                for (std::size_t i = 0; i < d.atoms.size(); ++i) acc += d.atoms[i] * d.probs[i];
                return acc;
            }
        },
        v_);
}

double ClaimDistribution::density(double x) const {
    return std::visit(
        [&, x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return (x >= d.lower && x <= d.upper) ? 1.0 / (d.upper - d.lower) : 0.0;
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return x < 0.0 ? 0.0 : d.rate * std::exp(-d.rate * x);
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                if (x <= 0.0) return 0.0;
                const double z = (std::log(x) - d.mu) / d.sigma;
                return std::exp(-0.5 * z * z) / (x * d.sigma * std::sqrt(2.0 * M_PI));
            } else {
                return 0.0;  // atomic families carry no density
            }
        },
        v_);
}

double ClaimDistribution::sample(Rng& rng) const {
    // Inverse transform for every family; ties the sampler's law to quantile().
    return quantile(uniform01(rng));
}

bool ClaimDistribution::absolutely_continuous() const {
    return std::holds_alternative<Uniform>(v_) || std::holds_alternative<Exponential>(v_) ||
           std::holds_alternative<LogNormal>(v_);
}

double ClaimDistribution::sup_support() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) return d.upper;
            else if constexpr (std::is_same_v<T, PointMass>) return d.value;
            else if constexpr (std::is_same_v<T, FiniteDiscrete>) return d.atoms.back();
            else return kInf;
        },
        v_);
}

std::string ClaimDistribution::family_name() const {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) return "uniform";
            else if constexpr (std::is_same_v<T, Exponential>) return "exponential";
            else if constexpr (std::is_same_v<T, LogNormal>) return "lognormal";
            else if constexpr (std::is_same_v<T, PointMass>) return "point_mass";
            else return "finite_discrete";
        },
        v_);
}

// ----------------------------------------------------------------------------
// OffspringDistribution
// ----------------------------------------------------------------------------

OffspringDistribution::OffspringDistribution(Variant v) : v_(std::move(v)) {
    std::visit(
        [this](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PoissonOffspring>) {
                require(d.mean > 0.0 && std::isfinite(d.mean), "poisson: mean must be positive");
            } else if constexpr (std::is_same_v<T, GeometricOffspring>) {
                require(d.mean > 0.0 && std::isfinite(d.mean), "geometric: mean must be positive");
            } else if constexpr (std::is_same_v<T, DeterministicOffspring>) {
                require(d.count >= 0, "deterministic: count must be nonnegative");
            } else {
                require(!d.counts.empty() && d.counts.size() == d.probs.size(),
                        "finite_pmf: counts/probs must be nonempty and equal length");
                double total = 0.0;
                for (std::size_t i = 0; i < d.counts.size(); ++i) {
                    require(d.counts[i] >= 0, "finite_pmf: counts must be nonnegative");
                    require(i == 0 || d.counts[i] > d.counts[i - 1],
                            "finite_pmf: counts must be strictly ascending");
                    require(d.probs[i] >= 0.0, "finite_pmf: probs must be nonnegative");
                    total += d.probs[i];
                    cum_.push_back(total);
                }
                require(std::abs(total - 1.0) <= 1e-9, "finite_pmf: probs must sum to 1");
                cum_.back() = 1.0;
            }
        },
        v_);
}

double OffspringDistribution::mean() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PoissonOffspring>) return d.mean;
            else if constexpr (std::is_same_v<T, GeometricOffspring>) return d.mean;
            else if constexpr (std::is_same_v<T, DeterministicOffspring>)
                return static_cast<double>(d.count);
            else {
                double acc = 0.0;
                for (std::size_t i = 0; i < d.counts.size(); ++i)
                    acc += static_cast<double>(d.counts[i]) * d.probs[i];
                return acc;
            }
        },
        v_);
}

double OffspringDistribution::p0() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PoissonOffspring>) return std::exp(-d.mean);
            else if constexpr (std::is_same_v<T, GeometricOffspring>) return 1.0 / (1.0 + d.mean);
            else if constexpr (std::is_same_v<T, DeterministicOffspring>)
                return d.count == 0 ? 1.0 : 0.0;
            else
                return d.counts.front() == 0 ? d.probs.front() : 0.0;
        },
        v_);
}

std::int64_t OffspringDistribution::sample(Rng& rng) const {
    return std::visit(
        [&](const auto& d) -> std::int64_t {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PoissonOffspring>) {
                return poisson_draw(d.mean, rng);
            } else if constexpr (std::is_same_v<T, GeometricOffspring>) {
                // P(k) = p (1-p)^k with p = 1/(1+m); inverse transform.
                const double log_q = std::log(d.mean / (1.0 + d.mean));
                return static_cast<std::int64_t>(std::log1p(-uniform01(rng)) / log_q);
            } else if constexpr (std::is_same_v<T, DeterministicOffspring>) {
                return d.count;
            } else {
                const double u = uniform01(rng);
                auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
                if (it == cum_.end()) return d.counts.back();
                return d.counts[static_cast<std::size_t>(it - cum_.begin())];
            }
        },
        v_);
}

std::int64_t OffspringDistribution::sample_total(std::int64_t n, Rng& rng) const {
    if (n <= 0) return 0;
    return std::visit(
        [&](const auto& d) -> std::int64_t {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PoissonOffspring>) {
                return poisson_draw(static_cast<double>(n) * d.mean, rng);
            } else if constexpr (std::is_same_v<T, DeterministicOffspring>) {
                return n * d.count;
            } else if constexpr (std::is_same_v<T, GeometricOffspring>) {
                // Negative binomial as a gamma-mixed Poisson.
                const double p = 1.0 / (1.0 + d.mean);
                const double lambda = gamma_draw(static_cast<double>(n), (1.0 - p) / p, rng);
                return poisson_draw(lambda, rng);
            } else {
                std::int64_t total = 0;
                for (std::int64_t i = 0; i < n; ++i) total += sample(rng);
                return total;
            }
        },
        v_);
}

std::string OffspringDistribution::family_name() const {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PoissonOffspring>) return "poisson";
            else if constexpr (std::is_same_v<T, GeometricOffspring>) return "geometric";
            else if constexpr (std::is_same_v<T, DeterministicOffspring>) return "deterministic";
            else return "finite_pmf";
        },
        v_);
}

// ----------------------------------------------------------------------------
// ResourceModel
// ----------------------------------------------------------------------------

ResourceModel::ResourceModel(Variant v) : v_(std::move(v)) {
    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DeterministicResource>) {
                require(d.value >= 0.0, "resource: value must be nonnegative");
            } else if constexpr (std::is_same_v<T, GammaResource>) {
                require(d.shape > 0.0 && d.scale > 0.0, "gamma: shape and scale must be positive");
            } else {
                require(d.lower >= 0.0 && d.upper > d.lower,
                        "uniform resource: need 0 <= lower < upper");
            }
        },
        v_);
}

double ResourceModel::mean() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DeterministicResource>) return d.value;
            else if constexpr (std::is_same_v<T, GammaResource>) return d.shape * d.scale;
            else return 0.5 * (d.lower + d.upper);
        },
        v_);
}

double ResourceModel::sample(Rng& rng) const {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DeterministicResource>) return d.value;
            else if constexpr (std::is_same_v<T, GammaResource>)
                return gamma_draw(d.shape, d.scale, rng);
            else
                return d.lower + (d.upper - d.lower) * uniform01(rng);
        },
        v_);
}

double ResourceModel::sample_total(std::int64_t n, Rng& rng) const {
    if (n <= 0) return 0.0;
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DeterministicResource>) {
                return static_cast<double>(n) * d.value;
            } else if constexpr (std::is_same_v<T, GammaResource>) {
                return gamma_draw(static_cast<double>(n) * d.shape, d.scale, rng);
            } else {
                double total = 0.0;
                for (std::int64_t i = 0; i < n; ++i)
                    total += d.lower + (d.upper - d.lower) * uniform01(rng);
                return total;
            }
        },
        v_);
}

std::string ResourceModel::family_name() const {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DeterministicResource>) return "deterministic";
            else if constexpr (std::is_same_v<T, GammaResource>) return "gamma";
            else return "uniform";
        },
        v_);
}

// ----------------------------------------------------------------------------
// Numeric helpers
// ----------------------------------------------------------------------------

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        if (u == 0.0) return -kInf;
        if (u == 1.0) return kInf;
        throw std::invalid_argument("normal_quantile: u must lie in [0,1]");
    }
    // Acklam's rational approximation, then one Halley refinement against
    // erfc-based normal_cdf. Absolute error ~1e-15 over (0,1).
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (u < plow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - plow) {
        const double q = u - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - u;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    const double w = e / pdf;
    return x - w / (1.0 + 0.5 * x * w);
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    return simpson_rec(f, a, fa, b, fb, m, fm, simpson(a, fa, b, fb, fm), tol, max_depth);
}

std::int64_t poisson_draw(double mean, Rng& rng) {
    if (mean <= 0.0) return 0;
    if (mean < 12.0) {
        // Knuth's product method.
        const double limit = std::exp(-mean);
        double prod = uniform01(rng);
        std::int64_t k = 0;
        while (prod > limit) {
            prod *= uniform01(rng);
            ++k;
        }
        return k;
    }
    // PTRS transformed-rejection sampler (Hoermann 1993), exact for mean >= ~10.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        double u = uniform01(rng) - 0.5;
        double v = uniform01(rng);
        double us = 0.5 - std::abs(u);
        double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mean - mean - std::lgamma(k + 1.0))
            return static_cast<std::int64_t>(k);
    }
}

double gamma_draw(double shape, double scale, Rng& rng) {
    // Marsaglia-Tsang squeeze; boost by u^(1/shape) for shape < 1.
    if (shape < 1.0) {
        const double u = uniform01_open_left(rng);
        return gamma_draw(shape + 1.0, scale, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal_quantile(uniform01_open(rng));
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01_open_left(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

namespace {

// 256-layer ziggurat tables for the standard exponential (Marsaglia-Tsang).
// xt[0] = v e^r is the virtual base layer, xt[1] = r, xt[256] = 0; layers
// have equal area v.
struct ExpZiggurat {
    static constexpr int kLayers = 256;
    double xt[kLayers + 1];
    double yt[kLayers + 1];

    ExpZiggurat() {
        const double r = 7.69711747013104972;
        const double v = 0.0039496598225815571993;
        xt[0] = v * std::exp(r);
        xt[1] = r;
        yt[0] = 0.0;  // unused
        yt[1] = std::exp(-r);
        for (int i = 2; i < kLayers; ++i) {
            xt[i] = -std::log(yt[i - 1] + v / xt[i - 1]);
            yt[i] = std::exp(-xt[i]);
        }
        xt[kLayers] = 0.0;
        yt[kLayers] = 1.0;
    }
};

const ExpZiggurat kExpZig{};

}  // namespace

double exp_ziggurat_draw(Rng& rng) {
    for (;;) {
        const std::uint64_t bits = rng();
        const int i = static_cast<int>(bits & 255u);
        const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
        const double x = u * kExpZig.xt[i];
        if (x < kExpZig.xt[i + 1]) return x;
        if (i == 0) return kExpZig.xt[1] + exp_ziggurat_draw(rng);  // tail restart
        const double y =
            kExpZig.yt[i] + uniform01(rng) * (kExpZig.yt[i + 1] - kExpZig.yt[i]);
        if (y < std::exp(-x)) return x;
    }
}

}  // namespace rdbp
