#include "mgme/arm_models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mgme/error.hpp"

namespace mgme {

namespace {

const double kSqrt3 = std::sqrt(3.0);

// Mean and variance of X = Q(U) where Q linearly interpolates the table.
void quantile_table_moments(const std::vector<double>& q, double& mean, double& variance) {
    if (q.size() == 1) {
        mean = q.front();
        variance = 0.0;
        return;
    }
    const double w = 1.0 / static_cast<double>(q.size() - 1);
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
        const double a = q[i];
        const double b = q[i + 1];
        m1 += w * 0.5 * (a + b);
        m2 += w * (a * a + a * b + b * b) / 3.0;
    }
    mean = m1;
    variance = std::max(0.0, m2 - m1 * m1);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = mix_seed(master);
    for (auto t : tags) h = mix_seed(h ^ mix_seed(t + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

ArmSpec ArmSpec::gaussian(double mean, double variance) {
    ArmSpec a{ArmFamily::Gaussian, mean, variance, {}};
    validate(a);
    return a;
}

ArmSpec ArmSpec::rademacher(double mean) {
    return ArmSpec{ArmFamily::Rademacher, mean, 1.0, {}};
}

ArmSpec ArmSpec::symmetric_beta(double mean, double alpha) {
    ArmSpec a{ArmFamily::SymmetricBetaShifted, mean, 0.0, {alpha}};
    if (!(alpha > 0.0)) throw ConfigError("symmetric beta shape must be positive");
    a.variance = 1.0 / (2.0 * alpha + 1.0);
    return a;
}

ArmSpec ArmSpec::custom(std::vector<double> quantiles) {
    ArmSpec a{ArmFamily::Custom, 0.0, 0.0, std::move(quantiles)};
    validate(a);
    quantile_table_moments(a.family_params, a.mean, a.variance);
    return a;
}

ArmSpec ArmSpec::constant(double value) { return custom({value}); }

void validate(const ArmSpec& arm) {
    if (!std::isfinite(arm.mean)) throw ConfigError("arm mean must be finite");
    switch (arm.family) {
    case ArmFamily::Gaussian:
        if (!(arm.variance > 0.0) || !std::isfinite(arm.variance))
            throw ConfigError("gaussian arm needs a positive finite variance");
        break;
    case ArmFamily::Rademacher:
        if (arm.variance != 1.0) throw ConfigError("rademacher arm has variance 1");
        break;
    case ArmFamily::SymmetricBetaShifted: {
        if (arm.family_params.size() != 1 || !(arm.family_params[0] > 0.0))
            throw ConfigError("symmetric beta needs one positive shape parameter");
        const double expected = 1.0 / (2.0 * arm.family_params[0] + 1.0);
        if (std::abs(arm.variance - expected) > 1e-12 * expected)
            throw ConfigError("symmetric beta variance must equal 1/(2 alpha + 1)");
        break;
    }
    case ArmFamily::Custom:
        if (arm.family_params.empty()) throw ConfigError("custom arm needs a quantile table");
        if (!std::is_sorted(arm.family_params.begin(), arm.family_params.end()))
            throw ConfigError("custom quantile table must be nondecreasing");
        break;
    }
}

double sample_reward(const ArmSpec& arm, Rng& rng) {
    switch (arm.family) {
    case ArmFamily::Gaussian: {
        if (!(arm.variance > 0.0)) throw ConfigError("gaussian arm needs a positive variance");
        std::normal_distribution<double> dist(arm.mean, std::sqrt(arm.variance));
        return dist(rng);
    }
    case ArmFamily::Rademacher: {
        std::bernoulli_distribution coin(0.5);
        return arm.mean + (coin(rng) ? 1.0 : -1.0);
    }
    case ArmFamily::SymmetricBetaShifted: {
        const double alpha = arm.family_params.at(0);
        if (!(alpha > 0.0)) throw ConfigError("symmetric beta shape must be positive");
        std::gamma_distribution<double> g(alpha, 1.0);
        const double x = g(rng);
        const double y = g(rng);
        const double b = x / (x + y);
        return arm.mean + (2.0 * b - 1.0);
    }
    case ArmFamily::Custom: {
        const auto& q = arm.family_params;
        if (q.empty()) throw ConfigError("custom arm needs a quantile table");
        if (q.size() == 1) return q.front();
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const double pos = u01(rng) * static_cast<double>(q.size() - 1);
        const auto i = std::min(static_cast<std::size_t>(pos), q.size() - 2);
        const double frac = pos - static_cast<double>(i);
        return q[i] + frac * (q[i + 1] - q[i]);
    }
    }
    throw ConfigError("unknown arm family");
}

ContextSpec ContextSpec::uniform_hypercube(int dimension) {
    if (dimension < 1) throw ConfigError("context dimension must be positive");
    ContextSpec s;
    s.dimension = dimension;
    s.support_bound = std::sqrt(3.0 * dimension);
    s.lambda_min = 1.0;
    s.family = ContextFamily::UniformHypercube;
    return s;
}

ContextSpec ContextSpec::custom(std::vector<Eigen::VectorXd> support) {
    if (support.empty()) throw ConfigError("custom context support is empty");
    ContextSpec s;
    s.family = ContextFamily::Custom;
    s.dimension = static_cast<int>(support.front().size());
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(s.dimension, s.dimension);
    for (const auto& c : support) {
        if (c.size() != s.dimension) throw ConfigError("custom context support has mixed dimensions");
        s.support_bound = std::max(s.support_bound, c.norm());
        second += c * c.transpose();
    }
    second /= static_cast<double>(support.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(second, Eigen::EigenvaluesOnly);
    s.lambda_min = eig.eigenvalues().minCoeff();
    s.support = std::move(support);
    validate(s);
    return s;
}

void validate(const ContextSpec& spec) {
    if (spec.dimension < 1) throw ConfigError("context dimension must be positive");
    if (!(spec.lambda_min > 0.0)) throw ConfigError("context second moment must be positive definite");
    if (spec.family == ContextFamily::Custom && spec.support.empty())
        throw ConfigError("custom context support is empty");
}

Eigen::VectorXd sample_context(const ContextSpec& spec, Rng& rng) {
    switch (spec.family) {
    case ContextFamily::UniformHypercube: {
        std::uniform_real_distribution<double> u(-kSqrt3, kSqrt3);
        Eigen::VectorXd c(spec.dimension);
        for (int i = 0; i < spec.dimension; ++i) c[i] = u(rng);
        return c;
    }
    case ContextFamily::Custom: {
        std::uniform_int_distribution<std::size_t> pick(0, spec.support.size() - 1);
        return spec.support[pick(rng)];
    }
    }
    throw ConfigError("unknown context family");
}

double reward_with_context(const Eigen::VectorXd& beta, const Eigen::VectorXd& context,
                           const ArmSpec& noise_arm, Rng& rng) {
    if (beta.size() != context.size())
        throw ContractViolation("beta has dimension " + std::to_string(beta.size()) +
                                " but context has " + std::to_string(context.size()));
    return beta.dot(context) + sample_reward(noise_arm, rng);
}

}  // namespace mgme
