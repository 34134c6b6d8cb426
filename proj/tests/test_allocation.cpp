#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mgme/allocation.hpp"
#include "mgme/error.hpp"

using namespace mgme;

namespace {

using Counts = std::vector<std::int64_t>;
const NormOrder kInf = NormOrder::infinity();

// Reference objective written out directly.
double ref_objective(const Counts& n, const std::vector<double>& v, double p) {
    if (std::isinf(p)) {
        double m = 0;
        for (std::size_t k = 0; k < n.size(); ++k) m = std::max(m, v[k] / double(n[k]));
        return m;
    }
    double s = 0;
    for (std::size_t k = 0; k < n.size(); ++k) s += std::pow(v[k] / double(n[k]), p);
    return std::pow(s, 1 / p);
}

// Plain nested-loop search over K = 3 positive splits.
double brute_best3(const std::vector<double>& v, double p, std::int64_t t) {
    double best = INFINITY;
    for (std::int64_t a = 1; a < t; ++a)
        for (std::int64_t b = 1; a + b < t; ++b) best = std::min(best, ref_objective({a, b, t - a - b}, v, p));
    return best;
}

std::int64_t sum(const Counts& c) { return std::accumulate(c.begin(), c.end(), std::int64_t{0}); }

}  // namespace

TEST(Norm, QOfP) {
    EXPECT_EQ(q_of_p(kInf), 2.0);
    EXPECT_EQ(q_of_p(NormOrder(1)), 1.0);
    EXPECT_EQ(q_of_p(NormOrder(3)), 1.5);
    EXPECT_THROW(NormOrder(0.5), ConfigError);
}

TEST(Optimal, Examples) {
    auto plan = optimal_allocation({{1, 1, 1, 1}}, NormOrder(2), 100);
    EXPECT_EQ(plan.counts, (Counts{25, 25, 25, 25}));
    plan = optimal_allocation({{1, 4}}, kInf, 10);
    EXPECT_NEAR(plan.fractions[0], 0.2, 1e-15);
    EXPECT_NEAR(plan.fractions[1], 0.8, 1e-15);
    EXPECT_EQ(plan.counts, (Counts{2, 8}));
    plan = optimal_allocation({{1, 4}}, NormOrder(1), 9);
    EXPECT_NEAR(plan.fractions[0], 1.0 / 3, 1e-15);
    EXPECT_EQ(plan.counts, (Counts{3, 6}));
    EXPECT_EQ(plan.horizon, 9);
}

TEST(Optimal, ScaleEquivariance) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 10);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> v(4);
        for (auto& x : v) x = u(rng);
        const double c = u(rng);
        auto scaled = v;
        for (auto& x : scaled) x *= c;
        for (const auto& p : {NormOrder(1), NormOrder(2.5), kInf}) {
            const auto a = optimal_fractions(v, p), b = optimal_fractions(scaled, p);
            for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
        }
    }
}

TEST(Objective, Examples) {
    EXPECT_DOUBLE_EQ(objective_rp(Counts{2, 8}, std::vector<double>{1, 4}, kInf), 0.5);
    EXPECT_DOUBLE_EQ(objective_rp(Counts{3, 6}, std::vector<double>{1, 4}, NormOrder(1)), 1.0);
    for (const auto& p : {NormOrder(1), NormOrder(3), kInf})
        EXPECT_DOUBLE_EQ(objective_rp(Counts{40}, std::vector<double>{2}, p), 2.0 / 40);
    EXPECT_THROW(objective_rp(Counts{0, 5}, std::vector<double>{1, 1}, kInf), ContractViolation);
}

TEST(Objective, OptimalValueMatchesClosedForm) {
    EXPECT_DOUBLE_EQ(optimal_value(std::vector<double>{1, 4}, kInf, 10), 0.5);
    EXPECT_DOUBLE_EQ(optimal_value(std::vector<double>{1, 4}, NormOrder(1), 9), 1.0);
}

TEST(Regret, Examples) {
    const VarianceProfile prof{{1, 4}, {}, {}};
    EXPECT_NEAR(regret(Counts{5, 5}, prof.variances, kInf), 0.3, 1e-15);
    const auto plan = optimal_allocation(prof, kInf, 10);
    EXPECT_NEAR(regret(plan, prof, kInf), 0.0, 1e-15);
}

TEST(Regret, NonNegativeForIntegerPlans) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.1, 5);
    for (int i = 0; i < 2000; ++i) {
        const int k = 1 + i % 5;
        std::vector<double> v(k);
        for (auto& x : v) x = u(rng);
        const std::int64_t t = k + static_cast<std::int64_t>(rng() % 200);
        Counts c(k, 1);
        for (std::int64_t r = t - k; r > 0; --r) ++c[rng() % k];
        for (const auto& p : {NormOrder(1), NormOrder(2), kInf}) EXPECT_GE(regret(c, v, p), -1e-12);
    }
}

TEST(Weights, Plugin) {
    auto w = plugin_weights(std::vector<double>{1, 4}, 2);
    EXPECT_NEAR(w[0], 0.2, 1e-15);
    w = plugin_weights(std::vector<double>{1, 4}, 1);
    EXPECT_NEAR(w[0], 1.0 / 3, 1e-15);
    EXPECT_NEAR(w[1], 2.0 / 3, 1e-15);
    w = plugin_weights(std::vector<double>{3, 3, 3}, 1.5);
    for (double x : w) EXPECT_NEAR(x, 1.0 / 3, 1e-15);
    EXPECT_THROW(plugin_weights(std::vector<double>{0, 0}, 2), DegenerateInput);
}

TEST(Weights, Adaptive) {
    EXPECT_NEAR(adaptive_weight(1, std::vector<double>{4}, 2), 0.2, 1e-15);
    EXPECT_EQ(adaptive_weight(0, std::vector<double>{4, 2}, 2), 0.0);
    EXPECT_NEAR(adaptive_weight(2.5, std::vector<double>{2.5, 2.5, 2.5}, 1), 0.25, 1e-15);
}

TEST(Weights, PessimismAndMonotonicity) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 5000; ++i) {
        const int k = 2 + i % 4;
        const double q = std::array{1.0, 4.0 / 3, 2.0}[i % 3];
        std::vector<double> v(k);
        for (auto& x : v) x = 0.1 + 5 * u(rng);
        const auto star = optimal_fractions(v, NormOrder(q >= 2 ? INFINITY : q / (2 - q)));
        std::vector<double> ucb;
        for (int j = 1; j < k; ++j) ucb.push_back(v[j] * (1 + u(rng)));
        const double lcb = v[0] * u(rng);
        const double w = adaptive_weight(lcb, ucb, q);
        EXPECT_LE(w, star[0] + 1e-12);
        EXPECT_GE(adaptive_weight(lcb + u(rng), ucb, q), w);
        auto more = ucb;
        more[0] += u(rng);
        EXPECT_LE(adaptive_weight(lcb, more, q), w);
    }
}

TEST(Weights, Phase3Ucb) {
    auto w = phase3_ucb_weights(std::vector<double>{2, 8}, 2);
    EXPECT_NEAR(w[0], 0.2, 1e-15);
    w = phase3_ucb_weights(std::vector<double>{1.5, 1.5}, 2);
    EXPECT_NEAR(w[0], 0.5, 1e-15);
    w = phase3_ucb_weights(std::vector<double>{1 + 0.7, 1 + 0.7, 1 + 0.7}, 1);
    for (double x : w) EXPECT_NEAR(x, 1.0 / 3, 1e-15);
}

TEST(Tau, Examples) {
    EXPECT_EQ(tau_nonadaptive(1, 2.5, 4, 850, 2), 100);
    EXPECT_EQ(tau_nonadaptive(2, 2, 4, 400, 2), 100);
    EXPECT_EQ(tau_nonadaptive(1, 3, 1, 77, 2), 77);
    EXPECT_THROW(tau_nonadaptive(3, 2, 2, 100, 2), ConfigError);
    // Lower clamp keeps the variance estimator defined.
    EXPECT_EQ(tau_nonadaptive(0.001, 100, 4, 20, 2), 2);
}

TEST(Tau, NeverExceedsOptimalCounts) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 4);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> v(3);
        for (auto& x : v) x = u(rng);
        const double lb = *std::min_element(v.begin(), v.end());
        const double proxy = *std::max_element(v.begin(), v.end());
        const auto t = static_cast<std::int64_t>(100 + rng() % 10000);
        const auto star = optimal_fractions(v, kInf);
        const auto tau = tau_nonadaptive(lb, proxy, 3, t, 2);
        for (double s : star) EXPECT_LE(double(tau), s * double(t) + 1e-9);
    }
}

TEST(Rounding, Examples) {
    EXPECT_EQ(round_allocation(std::vector<double>{0.5, 0.5}, 10, std::vector<double>{1, 1}), (Counts{5, 5}));
    EXPECT_EQ(round_allocation(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 10, std::vector<double>{4, 3, 2, 1}),
              (Counts{3, 3, 2, 2}));
    const double third = 1.0 / 3;
    EXPECT_EQ(round_allocation(std::vector<double>{third, third, third}, 10, std::vector<double>{1, 1, 1}),
              (Counts{4, 3, 3}));
    // Floors (3, 13, 13): the leftover round goes to the arm with the largest sigma^2 / n.
    EXPECT_EQ(optimal_allocation({{1, 4, 4}, {}, {}}, NormOrder::infinity(), 30).counts, (Counts{4, 13, 13}));
}

TEST(Rounding, SumsToHorizon) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 1000; ++i) {
        const int k = 1 + i % 7;
        std::vector<double> f(k), pr(k);
        for (auto& x : f) x = u(rng) + 1e-3;
        const double s = std::accumulate(f.begin(), f.end(), 0.0);
        for (auto& x : f) x /= s;
        for (auto& x : pr) x = u(rng);
        const auto t = static_cast<std::int64_t>(rng() % 5000);
        const auto c = round_allocation(f, t, pr);
        EXPECT_EQ(sum(c), t);
        for (std::size_t j = 0; j < c.size(); ++j) EXPECT_GE(c[j], 0);
    }
}

TEST(Rounding, BruteForceOptimalityGrid) {
    const std::int64_t t = 30;
    for (double a : {1, 2, 4})
        for (double b : {1, 2, 4})
            for (double c : {1, 2, 4}) {
                const std::vector<double> v{a, b, c};
                for (double p : {1.0, 2.0, double(INFINITY)}) {
                    const NormOrder norm(p);
                    const auto plan = optimal_allocation({v, {}, {}}, norm, t);
                    const double best = brute_best3(v, p, t);
                    const double got = ref_objective(plan.counts, v, p);
                    EXPECT_LE(got, best + best * 3.0 / double(t)) << a << b << c << " p=" << p;
                    EXPECT_GE(got, best - 1e-15);
                }
            }
}

TEST(Floors, DominatesFloorsAndSumsToHorizon) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.01, 1);
    for (int i = 0; i < 1000; ++i) {
        const int k = 2 + i % 5;
        std::vector<double> w(k);
        for (auto& x : w) x = u(rng);
        const double s = std::accumulate(w.begin(), w.end(), 0.0);
        for (auto& x : w) x /= s;
        const auto t = static_cast<std::int64_t>(50 + rng() % 2000);
        Counts floors(k);
        std::int64_t left = t;
        for (auto& f : floors) {
            f = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(left / k + 1));
            left -= f;
        }
        const auto c = allocate_with_floors(w, floors, t, w);
        EXPECT_EQ(sum(c), t);
        for (int j = 0; j < k; ++j) EXPECT_GE(c[j], floors[j]);
    }
}

TEST(Floors, ZeroFloorsMatchRounding) {
    const std::vector<double> w{0.2, 0.3, 0.5};
    EXPECT_EQ(allocate_with_floors(w, Counts{0, 0, 0}, 101, w), round_allocation(w, 101, w));
}

TEST(Profile, Validation) {
    EXPECT_THROW(validate(VarianceProfile{{}, {}, {}}), ConfigError);
    EXPECT_THROW(validate(VarianceProfile{{1, 0}, {}, {}}), ConfigError);
    EXPECT_THROW(validate(VarianceProfile{{1, 2}, 1.5, {}}), ConfigError);
    EXPECT_THROW(validate(VarianceProfile{{1, 2}, {}, 1.5}), ConfigError);
    EXPECT_NO_THROW(validate(VarianceProfile{{1, 2}, 1.0, 2.0}));
}
