#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mgme/arm_models.hpp"
#include "mgme/error.hpp"
#include "mgme/policies.hpp"

using namespace mgme;

namespace {

struct Moments {
    double mean = 0, var = 0, m4 = 0;
};

Moments draw_moments(const ArmSpec& arm, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample_reward(arm, rng);
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= n;
    for (double x : xs) {
        const double d = x - m.mean;
        m.var += d * d;
        m.m4 += d * d * d * d;
    }
    m.var /= n - 1;
    m.m4 /= n;
    return m;
}

}  // namespace

TEST(ArmModels, GaussianZeroVarianceRejected) {
    EXPECT_THROW(ArmSpec::gaussian(0.0, 0.0), ConfigError);
    EXPECT_THROW(ArmSpec::gaussian(0.0, -1.0), ConfigError);
}

TEST(ArmModels, BetaShapeMustBePositive) {
    EXPECT_THROW(ArmSpec::symmetric_beta(0.0, 0.0), ConfigError);
    ArmSpec bad = ArmSpec::symmetric_beta(0.0, 2.0);
    bad.variance = 0.3;
    EXPECT_THROW(validate(bad), ConfigError);
}

TEST(ArmModels, RademacherSupport) {
    const auto arm = ArmSpec::rademacher(0.0);
    Rng rng(3);
    std::set<double> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(sample_reward(arm, rng));
    EXPECT_EQ(seen, (std::set<double>{-1.0, 1.0}));
    EXPECT_EQ(arm.variance, 1.0);
}

TEST(ArmModels, GaussianMomentsMatchCltTolerance) {
    const auto m = draw_moments(ArmSpec::gaussian(0.0, 2.0), 1'000'000, 11);
    EXPECT_NEAR(m.mean, 0.0, 0.01);
    EXPECT_NEAR(m.var, 2.0, 0.02);
}

TEST(ArmModels, FamilyMomentsWithinFourStandardErrors) {
    const int n = 1'000'000;
    for (const auto& arm : {ArmSpec::gaussian(1.5, 3.0), ArmSpec::rademacher(-2.0), ArmSpec::symmetric_beta(0.5, 2.0),
                            ArmSpec::symmetric_beta(0.0, 0.5)}) {
        const auto m = draw_moments(arm, n, 17);
        const double se_mean = std::sqrt(arm.variance / n);
        // Var of the sample variance is (m4 - s^4)/n; use the empirical m4.
        const double se_var = std::sqrt((m.m4 - arm.variance * arm.variance) / n);
        EXPECT_NEAR(m.mean, arm.mean, 4 * se_mean);
        EXPECT_NEAR(m.var, arm.variance, 4 * std::max(se_var, 1e-12));
        // Strictly subgaussian families: E[(X - mu)^4] <= 3 sigma^4.
        EXPECT_LE(m.m4, 3 * arm.variance * arm.variance * (1 + 0.02));
    }
}

TEST(ArmModels, SymmetricBetaSupportAndVariance) {
    const double alpha = 3.0;
    const auto arm = ArmSpec::symmetric_beta(2.0, alpha);
    EXPECT_DOUBLE_EQ(arm.variance, 1.0 / (2 * alpha + 1));
    Rng rng(5);
    for (int i = 0; i < 10000; ++i) {
        const double x = sample_reward(arm, rng);
        EXPECT_GE(x, 1.0);
        EXPECT_LE(x, 3.0);
    }
}

TEST(ArmModels, CustomQuantileTableMoments) {
    // Linear quantile function on [0, 1] is the uniform distribution.
    const auto arm = ArmSpec::custom({0.0, 1.0});
    EXPECT_NEAR(arm.mean, 0.5, 1e-12);
    EXPECT_NEAR(arm.variance, 1.0 / 12.0, 1e-12);
    const auto m = draw_moments(arm, 200000, 23);
    EXPECT_NEAR(m.mean, 0.5, 4 * std::sqrt(arm.variance / 200000));
    EXPECT_THROW(ArmSpec::custom({1.0, 0.0}), ConfigError);
}

TEST(ArmModels, ConstantStubHasZeroVariance) {
    const auto arm = ArmSpec::constant(4.0);
    EXPECT_EQ(arm.variance, 0.0);
    Rng rng(1);
    EXPECT_EQ(sample_reward(arm, rng), 4.0);
}

TEST(ArmModels, SeededDeterminism) {
    const auto arm = ArmSpec::gaussian(0.0, 1.0);
    Rng a = make_stream(42, {1, 2}), b = make_stream(42, {1, 2}), c = make_stream(42, {1, 3});
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = sample_reward(arm, a);
        EXPECT_EQ(x, sample_reward(arm, b));
        differs |= x != sample_reward(arm, c);
    }
    EXPECT_TRUE(differs);
}

TEST(ArmModels, ArmStreamsIndependentOfPullOrder) {
    const std::vector<ArmSpec> arms{ArmSpec::gaussian(0, 1), ArmSpec::gaussian(0, 2)};
    ArmEnvironment e1(arms, 9), e2(arms, 9);
    std::vector<double> a0, b0;
    for (int i = 0; i < 5; ++i) a0.push_back(e1.pull(0));
    for (int i = 0; i < 5; ++i) {
        e2.pull(1);
        b0.push_back(e2.pull(0));
    }
    EXPECT_EQ(a0, b0);
}

TEST(ArmModels, HypercubeContextsInBounds) {
    const auto spec = ContextSpec::uniform_hypercube(4);
    EXPECT_EQ(spec.lambda_min, 1.0);
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
        const auto c = sample_context(spec, rng);
        ASSERT_EQ(c.size(), 4);
        EXPECT_LE(c.cwiseAbs().maxCoeff(), std::sqrt(3.0));
        EXPECT_LE(c.norm(), spec.support_bound + 1e-12);
    }
}

TEST(ArmModels, HypercubeSecondMomentIsOne) {
    const auto spec = ContextSpec::uniform_hypercube(1);
    Rng rng(8);
    double s = 0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) s += sample_context(spec, rng).squaredNorm();
    EXPECT_NEAR(s / n, 1.0, 0.01);
}

TEST(ArmModels, HypercubeEmpiricalSecondMomentIsIdentity) {
    const auto spec = ContextSpec::uniform_hypercube(4);
    Rng rng(10);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const auto c = sample_context(spec, rng);
        m += c * c.transpose();
    }
    m /= n;
    EXPECT_LT((m - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(ArmModels, ContextDeterminism) {
    const auto spec = ContextSpec::uniform_hypercube(3);
    Rng a(77), b(77);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_context(spec, a), sample_context(spec, b));
}

TEST(ArmModels, CustomContextLambdaMin) {
    Eigen::VectorXd e1(2), e2(2);
    e1 << 1, 0;
    e2 << 0, 2;
    const auto spec = ContextSpec::custom({e1, e2});
    // Second moment diag(1/2, 2).
    EXPECT_NEAR(spec.lambda_min, 0.5, 1e-12);
    EXPECT_NEAR(spec.support_bound, 2.0, 1e-12);
    EXPECT_THROW(ContextSpec::custom({e1}), ConfigError);
}

TEST(ArmModels, RewardWithContext) {
    Rng rng(1);
    const auto off = ArmSpec::constant(0.0);
    Eigen::VectorXd beta(2), c(2);
    beta << 1, 2;
    c << 3, 1;
    EXPECT_DOUBLE_EQ(reward_with_context(beta, c, off, rng), 5.0);
    Eigen::VectorXd b1(1), c1(1);
    b1 << 1;
    c1 << -1;
    EXPECT_DOUBLE_EQ(reward_with_context(b1, c1, off, rng), -1.0);
    EXPECT_THROW(reward_with_context(beta, c1, off, rng), ContractViolation);
}

TEST(ArmModels, RewardWithZeroBetaIsNoise) {
    Rng rng(4);
    const auto noise = ArmSpec::gaussian(0.0, 1.0);
    const Eigen::VectorXd beta = Eigen::VectorXd::Zero(3);
    const auto spec = ContextSpec::uniform_hypercube(3);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = reward_with_context(beta, sample_context(spec, rng), noise, rng);
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    EXPECT_NEAR(mean, 0.0, 4 * std::sqrt(1.0 / n));
    EXPECT_NEAR(s2 / n - mean * mean, 1.0, 4 * std::sqrt(2.0 / n));
}
