#include "mgme/selftest.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "mgme/allocation.hpp"
#include "mgme/error.hpp"
#include "mgme/policies.hpp"

namespace mgme {

namespace {

enum Property { kBudget, kDeterminism, kNoOvershoot, kCommitment, kPessimism, kMonotonicity, kRegret, kCount };

constexpr const char* kPropertyNames[kCount] = {
    "budget_identity", "determinism", "no_overshoot", "context_commitment",
    "weight_pessimism", "weight_monotonicity", "regret_nonnegative",
};

constexpr std::size_t kMaxDiagnostics = 20;

class Recorder {
public:
    explicit Recorder(SelftestReport& r) : report_(r) {
        for (const char* n : kPropertyNames) report_.properties.push_back({n, 0, 0, 0});
    }

    void check(Property p, bool ok, int config, const std::string& what) {
        auto& t = report_.properties[p];
        ++t.checked;
        if (ok) return;
        ++t.failed;
        if (report_.failures.size() < kMaxDiagnostics)
            report_.failures.push_back("config " + std::to_string(config) + ": " + kPropertyNames[p] + ": " + what);
    }
    void skip(Property p) { ++report_.properties[p].skipped; }

private:
    SelftestReport& report_;
};

struct Draw {
    Rng rng;
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    std::int64_t log_uniform(std::int64_t lo, std::int64_t hi) {
        const double x = std::exp(uniform(std::log(static_cast<double>(lo)), std::log(static_cast<double>(hi))));
        return std::clamp(static_cast<std::int64_t>(std::llround(x)), lo, hi);
    }
};

NormOrder random_norm(Draw& d) {
    switch (d.integer(0, 2)) {
    case 0: return NormOrder(1.0);
    case 1: return NormOrder(2.0);
    default: return NormOrder::infinity();
    }
}

NoiseKind random_regime(Draw& d) {
    switch (d.integer(0, 2)) {
    case 0: return NoiseKind::GSG;
    case 1: return NoiseKind::SSG;
    default: return NoiseKind::GaussianExact;
    }
}

bool same_trace(const PolicyTrace& a, const PolicyTrace& b) {
    auto same_phases = [](const ArmPhases& x, const ArmPhases& y) {
        return x.phase1_end == y.phase1_end && x.phase2_end == y.phase2_end;
    };
    return a.counts == b.counts && a.arm_sequence == b.arm_sequence &&
           a.variance_estimates == b.variance_estimates && a.mean_estimates == b.mean_estimates &&
           std::equal(a.phases.begin(), a.phases.end(), b.phases.begin(), b.phases.end(), same_phases) &&
           a.realized_regret == b.realized_regret && a.good_event_held == b.good_event_held &&
           a.beta_estimates.size() == b.beta_estimates.size() &&
           std::equal(a.beta_estimates.begin(), a.beta_estimates.end(), b.beta_estimates.begin(),
                      [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return x == y; });
}

std::string describe_budget(const PolicyTrace& t, std::int64_t horizon) {
    std::int64_t sum = 0;
    for (auto c : t.counts) sum += c;
    return "sum(counts)=" + std::to_string(sum) + " sequence=" + std::to_string(t.arm_sequence.size()) +
           " T=" + std::to_string(horizon);
}

void check_budget(Recorder& rec, int id, const PolicyTrace& t, std::int64_t horizon) {
    std::vector<std::int64_t> hist(t.counts.size(), 0);
    bool ok = static_cast<std::int64_t>(t.arm_sequence.size()) == horizon;
    for (auto a : t.arm_sequence) {
        if (a >= hist.size()) ok = false;
        else ++hist[a];
    }
    std::int64_t sum = 0;
    for (std::size_t k = 0; k < t.counts.size(); ++k) {
        sum += t.counts[k];
        ok = ok && t.counts[k] >= 2 && hist[k] == t.counts[k];
        if (k < t.phases.size())
            ok = ok && t.phases[k].phase1_end <= t.phases[k].phase2_end && t.phases[k].phase2_end <= t.counts[k];
    }
    rec.check(kBudget, ok && sum == horizon, id, describe_budget(t, horizon));
}

void check_no_overshoot(Recorder& rec, int id, const PolicyTrace& t, std::span<const double> truth,
                        const NormOrder& p, std::int64_t horizon) {
    const auto star = optimal_fractions(truth, p);
    bool applies = t.good_event_held && !t.truncated;
    for (std::size_t k = 0; applies && k < star.size(); ++k)
        applies = static_cast<double>(t.phases[k].phase1_end) <= star[k] * static_cast<double>(horizon);
    if (!applies) {
        rec.skip(kNoOvershoot);
        return;
    }
    const auto slack = static_cast<double>(truth.size());
    for (std::size_t k = 0; k < star.size(); ++k) {
        const double limit = star[k] * static_cast<double>(horizon) + slack;
        const bool ok = static_cast<double>(t.phases[k].phase2_end) <= limit;
        rec.check(kNoOvershoot, ok, id,
                  "arm " + std::to_string(k) + " tau=" + std::to_string(t.phases[k].phase2_end) +
                      " > n*+K=" + std::to_string(limit));
    }
}

void check_regret(Recorder& rec, int id, double regret, const std::string& what) {
    rec.check(kRegret, regret >= -1e-12, id, what + " regret " + std::to_string(regret));
}

void canonical_case(Recorder& rec, int id, Draw& d, bool adaptive) {
    const int k_arms = d.integer(2, 4);
    std::vector<ArmSpec> arms;
    for (int k = 0; k < k_arms; ++k) {
        if (d.integer(0, 3) == 0) arms.push_back(ArmSpec::symmetric_beta(d.uniform(-1, 1), d.uniform(0.5, 4)));
        else arms.push_back(ArmSpec::gaussian(d.uniform(-1, 1), d.uniform(0.5, 4)));
    }
    std::vector<double> truth;
    for (const auto& a : arms) truth.push_back(a.variance);
    const double vmin = *std::min_element(truth.begin(), truth.end());
    const double vmax = *std::max_element(truth.begin(), truth.end());

    PolicyConfig cfg;
    cfg.horizon = d.log_uniform(std::max<std::int64_t>(2 * k_arms, 20), 20000);
    cfg.norm = random_norm(d);
    cfg.regime = NoiseRegime{random_regime(d), vmax * d.uniform(1.0, 1.5)};
    cfg.batch_growth = std::array{1.5, 2.0, 3.0}[static_cast<std::size_t>(d.integer(0, 2))];
    cfg.phase3_ucb_mode = d.integer(0, 1) == 1;
    if (!adaptive) cfg.lower_bound = vmin * d.uniform(0.5, 1.0);
    const auto seed = d.rng();

    ArmEnvironment env1(arms, seed), env2(arms, seed);
    const auto t1 = adaptive ? run_adaptive(cfg, env1) : run_nonadaptive(cfg, env1);
    const auto t2 = adaptive ? run_adaptive(cfg, env2) : run_nonadaptive(cfg, env2);

    check_budget(rec, id, t1, cfg.horizon);
    rec.check(kDeterminism, same_trace(t1, t2), id, "repeat run diverged");
    check_regret(rec, id, t1.realized_regret, "policy");
    if (adaptive) check_no_overshoot(rec, id, t1, truth, cfg.norm, cfg.horizon);
    rec.skip(kCommitment);
}

std::vector<Eigen::VectorXd> hypercube_contexts(Draw& d, int dim, std::int64_t n) {
    const auto spec = ContextSpec::uniform_hypercube(dim);
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) out.push_back(sample_context(spec, d.rng));
    return out;
}

void contextual_case(Recorder& rec, int id, Draw& d) {
    const int k_arms = d.integer(2, 4);
    const int dim = d.integer(1, 3);
    std::vector<Eigen::VectorXd> betas;
    std::vector<ArmSpec> noise;
    std::vector<double> truth;
    for (int k = 0; k < k_arms; ++k) {
        Eigen::VectorXd b(dim);
        for (int j = 0; j < dim; ++j) b[j] = d.uniform(-2, 2);
        betas.push_back(b);
        noise.push_back(ArmSpec::gaussian(0.0, d.uniform(1, 4)));
        truth.push_back(noise.back().variance);
    }

    PolicyConfig cfg;
    cfg.horizon = d.log_uniform(std::max<std::int64_t>(2 * k_arms * std::max(dim, 2), 20), 5000);
    cfg.norm = NormOrder(1.0);
    cfg.regime = NoiseRegime{random_regime(d), 4.0};
    cfg.batch_growth = std::array{1.5, 2.0, 3.0}[static_cast<std::size_t>(d.integer(0, 2))];
    cfg.context_lambda_min = 1.0;
    const auto seed = d.rng();
    const auto contexts = hypercube_contexts(d, dim, cfg.horizon);

    ReplayContextualEnvironment env1(betas, noise, contexts, seed), env2(betas, noise, contexts, seed);
    const auto t1 = run_contextual(cfg, env1);
    const auto t2 = run_contextual(cfg, env2);
    check_budget(rec, id, t1, cfg.horizon);
    rec.check(kDeterminism, same_trace(t1, t2), id, "repeat contextual run diverged");
    check_regret(rec, id, t1.realized_regret, "contextual");
    check_no_overshoot(rec, id, t1, truth, cfg.norm, cfg.horizon);

    // Alter every context from round `cut` on; the arm committed at `cut`
    // and everything before it must not change.
    const auto cut = static_cast<std::size_t>(d.integer(0, static_cast<int>(cfg.horizon) - 1));
    auto altered = contexts;
    std::shuffle(altered.begin() + static_cast<std::ptrdiff_t>(cut), altered.end(), d.rng);
    for (std::size_t r = cut; r < altered.size(); ++r) altered[r] *= d.uniform(0.5, 1.5);
    ReplayContextualEnvironment env3(betas, noise, altered, seed);
    const auto t3 = run_contextual(cfg, env3);
    const bool ok = t3.arm_sequence.size() > cut &&
                    std::equal(t1.arm_sequence.begin(), t1.arm_sequence.begin() + static_cast<std::ptrdiff_t>(cut) + 1,
                               t3.arm_sequence.begin());
    rec.check(kCommitment, ok, id, "arm choice at round " + std::to_string(cut) + " saw the future");
}

void weight_case(Recorder& rec, int id, Draw& d) {
    const int k_arms = d.integer(2, 6);
    const double q = NormOrder(std::array{1.0, 2.0, 5.0, std::numeric_limits<double>::infinity()}
                                   [static_cast<std::size_t>(d.integer(0, 3))])
                         .q();
    std::vector<double> truth;
    for (int k = 0; k < k_arms; ++k) truth.push_back(d.uniform(0.1, 10));
    std::vector<double> lcb, ucb;
    for (double v : truth) {
        lcb.push_back(v * d.uniform(0, 1));
        ucb.push_back(v * d.uniform(1, 3));
    }
    std::vector<double> star;
    {
        double s = 0.0;
        for (double v : truth) s += std::pow(v, q / 2);
        for (double v : truth) star.push_back(std::pow(v, q / 2) / s);
    }
    const auto k = static_cast<std::size_t>(d.integer(0, k_arms - 1));
    std::vector<double> others;
    for (std::size_t j = 0; j < truth.size(); ++j)
        if (j != k) others.push_back(ucb[j]);

    const double w = adaptive_weight(lcb[k], others, q);
    rec.check(kPessimism, w <= star[k] + 1e-12, id,
              "weight " + std::to_string(w) + " exceeds optimal share " + std::to_string(star[k]));

    const double lcb_up = lcb[k] + d.uniform(0, 1) * (truth[k] - lcb[k]);
    auto others_up = others;
    others_up[static_cast<std::size_t>(d.integer(0, static_cast<int>(others.size()) - 1))] *= d.uniform(1, 2);
    const double w_lcb = adaptive_weight(lcb_up, others, q);
    const double w_ucb = adaptive_weight(lcb[k], others_up, q);
    rec.check(kMonotonicity, w_lcb >= w - 1e-15 && w_ucb <= w + 1e-15, id, "weight not monotone");

    // Any positive integer plan has regret >= 0 against the continuous optimum.
    const auto horizon = d.log_uniform(k_arms, 500);
    std::vector<std::int64_t> counts(truth.size(), 1);
    for (std::int64_t extra = horizon - k_arms; extra > 0; --extra)
        ++counts[static_cast<std::size_t>(d.integer(0, k_arms - 1))];
    const NormOrder p = random_norm(d);
    check_regret(rec, id, regret(counts, truth, p), "random plan");
}

}  // namespace

bool SelftestReport::ok() const {
    return std::all_of(properties.begin(), properties.end(), [](const PropertyTally& t) { return t.failed == 0; });
}

SelftestReport run_selftest(int configs, std::uint64_t seed) {
    SelftestReport report;
    Recorder rec(report);
    for (int i = 0; i < configs; ++i) {
        Draw d{make_stream(seed, {0x53454c46ULL, static_cast<std::uint64_t>(i)})};
        try {
            switch (i % 3) {
            case 0: canonical_case(rec, i, d, false); break;
            case 1: canonical_case(rec, i, d, true); break;
            default: contextual_case(rec, i, d); break;
            }
            weight_case(rec, i, d);
        } catch (const Error& e) {
            rec.check(kBudget, false, i, std::string("unexpected error: ") + e.what());
        }
        ++report.configs;
    }
    return report;
}

void print_report(std::ostream& out, const SelftestReport& report) {
    out << "selftest: " << report.configs << " randomized configs\n";
    for (const auto& t : report.properties)
        out << "  " << (t.failed == 0 ? "PASS" : "FAIL") << "  " << t.name << "  checked=" << t.checked
            << " skipped=" << t.skipped << " failed=" << t.failed << '\n';
    for (const auto& f : report.failures) out << "    " << f << '\n';
}

}  // namespace mgme
