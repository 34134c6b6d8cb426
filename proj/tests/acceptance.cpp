// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mgme/allocation.hpp"
#include "mgme/concentration.hpp"
#include "mgme/estimation.hpp"
#include "mgme/experiment.hpp"
#include "mgme/selftest.hpp"

using namespace mgme;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

// Rounded closed-form allocation vs exhaustive search.
Outcome oracle_equivalence() {
    const double grid[] = {1, 2, 4};
    const NormOrder norms[] = {NormOrder(1), NormOrder(2), NormOrder::infinity()};
    double worst = 0;
    int cases = 0;
    for (double a : grid)
        for (double b : grid)
            for (double c : grid)
                for (const auto& p : norms) {
                    const VarianceProfile prof{{a, b, c}, {}, {}};
                    const auto best = oracle_best_allocation(prof, p, 30);
                    const auto rounded = optimal_allocation(prof, p, 30).counts;
                    const double vb = objective_rp(best, prof.variances, p);
                    const double vr = objective_rp(rounded, prof.variances, p);
                    worst = std::max(worst, (vr - vb) / vb);
                    ++cases;
                }
    return {worst <= 0.05, std::to_string(cases) + " profiles, worst relative gap " + fmt(worst)};
}

// Per-tail violation frequency of all three radii on Gaussian samples.
Outcome coverage() {
    const int reps = 10000;
    const double sigma2 = 2.0;
    std::mt19937_64 rng(314159);
    std::normal_distribution<double> g(1.0, std::sqrt(sigma2));
    bool ok = true;
    double worst_excess = -1;
    for (int n : {10, 50, 200}) {
        for (double delta : {0.1, 0.01}) {
            const auto rg = radius_gsg(n, delta, sigma2);
            const auto rs = radius_ssg(n, delta, sigma2);
            const auto rc = radius_gaussian(n, delta, sigma2);
            int viol[6] = {};
            for (int r = 0; r < reps; ++r) {
                double s = 0, s2 = 0;
                for (int i = 0; i < n; ++i) {
                    const double x = g(rng);
                    s += x;
                    s2 += x * x;
                }
                const double mean = s / n;
                const double v = (s2 - n * mean * mean) / (n - 1);
                viol[0] += v - sigma2 > rg.eps_plus;
                viol[1] += sigma2 - v > rg.eps_minus;
                viol[2] += v - sigma2 > rs.eps_plus;
                viol[3] += sigma2 - v > rs.eps_minus;
                viol[4] += v - sigma2 > rc.eps_plus;
                viol[5] += sigma2 - v > rc.eps_minus;
            }
            const double limit = delta + 3 * std::sqrt(delta * (1 - delta) / reps);
            for (int k : viol) {
                const double freq = double(k) / reps;
                ok &= freq <= limit;
                worst_excess = std::max(worst_excess, freq - limit);
            }
        }
    }
    return {ok, "36 tail checks, max(freq - limit) = " + fmt(worst_excess)};
}

// Closed-form conditional MSE vs Monte Carlo with fixed contexts.
Outcome ridge_mse() {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
    std::normal_distribution<double> z;
    const int draws = 100000;
    bool ok = true;
    double worst_z = 0;
    for (int inst = 0; inst < 20; ++inst) {
        const int d = 1 + inst % 4;
        const int n = d + 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(19 - d));
        const double gamma = inst % 2 == 0 ? 0.0 : 1.0 / n;
        const double sigma2 = 0.5 + 3.0 * (rng() % 1000) / 1000.0;
        Eigen::MatrixXd c(d, n);
        for (int i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
        Eigen::VectorXd beta(d);
        for (int j = 0; j < d; ++j) beta[j] = 2 * u(rng);
        const Eigen::MatrixXd gram = c * c.transpose();
        const Eigen::MatrixXd v = gram + gamma * Eigen::MatrixXd::Identity(d, d);
        // beta_hat = A y with A = V^-1 C, computed by QR here.
        const Eigen::MatrixXd a = v.colPivHouseholderQr().solve(c);
        const Eigen::VectorXd mean_y = c.transpose() * beta;
        double s = 0, s2 = 0;
        Eigen::VectorXd y(n);
        for (int r = 0; r < draws; ++r) {
            for (int i = 0; i < n; ++i) y[i] = mean_y[i] + std::sqrt(sigma2) * z(rng);
            const double e = (a * y - beta).squaredNorm();
            s += e;
            s2 += e * e;
        }
        const double mc = s / draws;
        const double se = std::sqrt((s2 / draws - mc * mc) / draws);
        const double zscore = std::abs(mc - conditional_mse(gram, beta, sigma2, gamma)) / se;
        worst_z = std::max(worst_z, zscore);
        ok &= zscore <= 3.0;
    }
    return {ok, "20 instances, max |MC - closed form| / SE = " + fmt(worst_z)};
}

ExperimentConfig nonadaptive_base(const NormOrder& p) {
    ExperimentConfig cfg;
    cfg.name = "nonadaptive";
    cfg.policy = PolicyKind::NonAdaptive;
    cfg.norm = p;
    cfg.regime = NoiseKind::GSG;
    cfg.proxy = 2.5;
    cfg.lower_bound = 1.0;
    cfg.trials = 100;
    cfg.seed = 1;
    for (double v : {1.0, 1.5, 2.0, 2.5}) cfg.arms.push_back(ArmSpec::gaussian(0, v));
    cfg.workers = workers();
    return cfg;
}

double mean_slope(const ExperimentConfig& cfg) {
    std::vector<RatePoint> pts;
    for (const auto& row : summarize(run_experiment(cfg))) pts.push_back({double(row.horizon), row.mean_regret});
    return slope_estimate(pts);
}

Outcome nonadaptive_rates() {
    const double s_inf = mean_slope(nonadaptive_base(NormOrder::infinity()));
    const double s_one = mean_slope(nonadaptive_base(NormOrder(1)));
    const bool ok = s_inf > -1.8 && s_inf < -1.2 && s_one > -2.4 && s_one < -1.6;
    return {ok, "slope p=inf " + fmt(s_inf) + " in (-1.8,-1.2), p=1 " + fmt(s_one) + " in (-2.4,-1.6)"};
}

Outcome ssg_domination() {
    bool ok = true;
    std::ostringstream detail;
    for (double v1 : {5.0, 20.0, 50.0, 100.0}) {
        ExperimentConfig cfg;
        cfg.name = "domination";
        cfg.policy = PolicyKind::Adaptive;
        cfg.norm = NormOrder::infinity();
        cfg.regime = NoiseKind::SSG;
        cfg.horizons = {1000};
        cfg.trials = 100;
        cfg.seed = 7;
        cfg.arms = {ArmSpec::gaussian(0, v1), ArmSpec::rademacher(0)};
        cfg.bounds = {BoundCurve::T7_ssg_adaptive_inf};
        cfg.workers = workers();
        const auto row = summarize(run_experiment(cfg)).front();
        ok &= row.mean_regret <= row.mean_bounds[0];
        detail << "s1^2=" << v1 << ": " << fmt(row.mean_regret) << " <= " << fmt(row.mean_bounds[0]) << "; ";
    }
    return {ok, detail.str()};
}

Outcome contextual_slope() {
    bool ok = true;
    std::ostringstream detail;
    for (int k : {5, 10}) {
        ExperimentConfig cfg;
        cfg.name = "contextual";
        cfg.policy = PolicyKind::Contextual;
        cfg.norm = NormOrder(1);
        cfg.regime = NoiseKind::SSG;
        cfg.horizons = {200000, 500000, 1000000, 2000000};
        cfg.trials = 100;
        cfg.seed = 11;
        cfg.contextual = ContextualSetup{};
        cfg.contextual->arms = k;
        cfg.contextual->dimension = 4;
        cfg.workers = workers();
        const double s = mean_slope(cfg);
        ok &= s > -2.4 && s < -1.6;
        detail << "K=" << k << " slope " << fmt(s) << "; ";
    }
    return {ok, detail.str() + "range (-2.4,-1.6)"};
}

Outcome invariants() {
    const auto report = run_selftest(1000);
    std::ostringstream detail;
    detail << report.configs << " configs, " << report.failures.size() << " failures";
    return {report.ok(), detail.str()};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"1 oracle equivalence", 10, oracle_equivalence},
        {"2 concentration coverage", 30, coverage},
        {"3 ridge conditional mse", 60, ridge_mse},
        {"4 non-adaptive rates", 600, nonadaptive_rates},
        {"5 ssg bound domination", 300, ssg_domination},
        {"6 contextual slope", 900, contextual_slope},
        {"7 structural invariants", 120, invariants},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = out.ok && secs < c.limit_s;
        failed += !pass;
        std::printf("%s criterion %s: %s [%.1f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", c.name,
                    out.detail.c_str(), secs, c.limit_s);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
