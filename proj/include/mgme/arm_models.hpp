#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mgme {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent sub-stream seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

// Deterministic stream keyed by (master seed, tags...). Streams with distinct
// tag tuples are statistically independent for all practical purposes.
Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

enum class ArmFamily {
    Gaussian,
    Rademacher,
    SymmetricBetaShifted,
    // Inverse-CDF sampling from an equally spaced quantile table.
    Custom,
};

struct ArmSpec {
    ArmFamily family = ArmFamily::Gaussian;
    double mean = 0.0;
    double variance = 1.0;
    // Beta: {alpha}. Custom: quantile values at levels 0, 1/(m-1), ..., 1.
    std::vector<double> family_params;

    static ArmSpec gaussian(double mean, double variance);
    static ArmSpec rademacher(double mean);
    // mean + (2 * Beta(alpha, alpha) - 1); support [mean - 1, mean + 1], variance 1/(2 alpha + 1).
    static ArmSpec symmetric_beta(double mean, double alpha);
    // Mean and variance are computed from the piecewise-linear quantile function.
    static ArmSpec custom(std::vector<double> quantiles);
    // Zero-noise stub (single-point quantile table).
    static ArmSpec constant(double value);
};

// Throws ConfigError if the spec violates its family's invariants.
void validate(const ArmSpec& arm);

double sample_reward(const ArmSpec& arm, Rng& rng);

enum class NoiseKind {
    GSG,            // general subgaussian with known proxy
    SSG,            // strictly subgaussian
    GaussianExact,  // chi-square radii
};

struct NoiseRegime {
    NoiseKind kind = NoiseKind::GSG;
    double sigma_sq_proxy = 1.0;  // used only for GSG
};

enum class ContextFamily {
    UniformHypercube,  // U[-sqrt3, sqrt3]^d, identity second moment
    Custom,            // uniform over a finite support list
};

struct ContextSpec {
    int dimension = 1;
    double support_bound = 0.0;
    double lambda_min = 1.0;
    ContextFamily family = ContextFamily::UniformHypercube;
    std::vector<Eigen::VectorXd> support;  // Custom only

    static ContextSpec uniform_hypercube(int dimension);
    static ContextSpec custom(std::vector<Eigen::VectorXd> support);
};

void validate(const ContextSpec& spec);

Eigen::VectorXd sample_context(const ContextSpec& spec, Rng& rng);

// beta' c + eta with eta ~ noise_arm. Dimensions must agree.
double reward_with_context(const Eigen::VectorXd& beta, const Eigen::VectorXd& context,
                           const ArmSpec& noise_arm, Rng& rng);

}  // namespace mgme
