#include "mgme/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgme/error.hpp"

namespace mgme {

namespace {

constexpr double kRidgeFloor = 1e-8;

std::vector<double> uniform_weights(std::size_t k) {
    return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

std::vector<double> safe_plugin_weights(std::span<const double> estimates, double q) {
    try {
        return plugin_weights(estimates, q);
    } catch (const DegenerateInput&) {
        return uniform_weights(estimates.size());
    }
}

void check_common(const PolicyConfig& cfg, std::size_t arms) {
    if (arms == 0) throw ConfigError("at least one arm is required");
    if (cfg.horizon < 2 * static_cast<std::int64_t>(arms))
        throw ConfigError("horizon must be at least twice the number of arms");
    if (!(cfg.batch_growth > 1.0)) throw ConfigError("batch growth must exceed 1");
    if (!(cfg.lcb_margin > 0.0)) throw ConfigError("lcb margin must be positive");
    if (cfg.regime.kind == NoiseKind::GSG && !(cfg.regime.sigma_sq_proxy > 0.0))
        throw ConfigError("GSG regime needs a positive proxy");
}

// Arm bookkeeping for the canonical setting.
class CanonicalArms {
public:
    explicit CanonicalArms(BanditEnvironment& env) : env_(env), moments_(env.arms()) {}

    std::size_t arms() const { return moments_.size(); }
    std::int64_t count(std::size_t k) const { return moments_[k].n; }
    void pull(std::size_t k) { moments_[k].push(env_.pull(k)); }
    double variance(std::size_t k) { return sample_variance(moments_[k]); }
    double true_variance(std::size_t k) const { return env_.true_variance(k); }
    const RunningMoments& moments(std::size_t k) const { return moments_[k]; }

private:
    BanditEnvironment& env_;
    std::vector<RunningMoments> moments_;
};

// Arm bookkeeping for the contextual setting; variance is the ridge residual
// variance with gamma = lambda_min / n.
class ContextualArms {
public:
    ContextualArms(ContextualEnvironment& env, double lambda_min)
        : env_(env), lambda_min_(lambda_min) {
        for (std::size_t k = 0; k < env.arms(); ++k) states_.emplace_back(env.dimension());
        cached_n_.assign(env.arms(), -1);
        cached_var_.assign(env.arms(), 0.0);
    }

    std::size_t arms() const { return states_.size(); }
    std::int64_t count(std::size_t k) const { return states_[k].count(); }
    void pull(std::size_t k) {
        auto obs = env_.pull(k);
        states_[k].update(obs.context, obs.reward);
    }
    double variance(std::size_t k) {
        if (cached_n_[k] != count(k)) {
            cached_var_[k] = residual_variance(states_[k], estimate(k));
            cached_n_[k] = count(k);
        }
        return cached_var_[k];
    }
    double true_variance(std::size_t k) const { return env_.true_variance(k); }

    Eigen::VectorXd estimate(std::size_t k) {
        const double gamma = gamma_schedule(lambda_min_, std::max<std::int64_t>(count(k), 1));
        try {
            return ridge_estimate(states_[k], gamma);
        } catch (const SingularSystem&) {
            floor_used_ = true;
            return ridge_estimate(states_[k], std::max(gamma, kRidgeFloor));
        }
    }
    bool floor_used() const { return floor_used_; }

private:
    ContextualEnvironment& env_;
    double lambda_min_;
    std::vector<RidgeState> states_;
    std::vector<std::int64_t> cached_n_;
    std::vector<double> cached_var_;
    bool floor_used_ = false;
};

// Shared pull accounting: enforces the horizon and records the arm sequence.
template <class Arms>
class Budget {
public:
    Budget(Arms& arms, std::int64_t horizon, PolicyTrace& trace)
        : arms_(arms), horizon_(horizon), trace_(trace) {
        for (std::size_t k = 0; k < arms.arms(); ++k) used_ += arms.count(k);
    }

    bool exhausted() const { return used_ >= horizon_; }
    std::int64_t remaining() const { return horizon_ - used_; }

    // Pulls arm k until it has `target` observations or the horizon ends.
    void pull_to(std::size_t k, std::int64_t target) {
        while (arms_.count(k) < target && !exhausted()) {
            arms_.pull(k);
            trace_.arm_sequence.push_back(static_cast<std::uint32_t>(k));
            ++used_;
        }
    }

    // Round-robin pulls until every arm has `target` observations.
    void round_robin_to(std::int64_t target) {
        for (std::int64_t r = 1; r <= target; ++r)
            for (std::size_t k = 0; k < arms_.arms(); ++k) pull_to(k, r);
    }

private:
    Arms& arms_;
    std::int64_t horizon_;
    PolicyTrace& trace_;
    std::int64_t used_ = 0;
};

template <class Arms>
VarianceView view_of(const PolicyConfig& cfg, Arms& arms, std::size_t k, double delta,
                     double radius_scale = 1.0) {
    const double v = arms.variance(k);
    if (cfg.variance_hook) return cfg.variance_hook(k, arms.count(k), v);
    VarianceView out{v, {}, true};
    out.ci_defined =
        try_confidence_interval(cfg.regime, v, arms.count(k), delta, out.ci, cfg.tail_form, radius_scale);
    return out;
}

// Phases 1-3 of the adaptive allocation, shared by the canonical and the
// contextual policy.
template <class Arms>
void run_three_phase(const PolicyConfig& cfg, Arms& arms, std::int64_t initial_length,
                     PolicyTrace& trace) {
    const std::size_t k_arms = arms.arms();
    const std::int64_t horizon = cfg.horizon;
    const double q = cfg.norm.q();
    const double delta = delta_schedule(AlgorithmKind::Adaptive, cfg.norm, horizon);
    Budget<Arms> budget(arms, horizon, trace);
    trace.phases.assign(k_arms, {});

    auto record_truth = [&](const VarianceView& view, std::size_t k) {
        if (!view.ci_defined || !view.ci.contains(arms.true_variance(k))) trace.good_event_held = false;
    };

    // Phase 1: make every lower confidence bound positive.
    budget.round_robin_to(initial_length);
    for (;;) {
        std::vector<std::size_t> failing;
        for (std::size_t k = 0; k < k_arms; ++k) {
            const auto view = view_of(cfg, arms, k, delta, cfg.lcb_margin);
            if (!view.ci_defined || !(view.ci.lcb > 0.0)) failing.push_back(k);
        }
        if (failing.empty()) break;
        if (budget.exhausted()) {
            trace.truncated = true;
            break;
        }
        for (auto k : failing) budget.pull_to(k, arms.count(k) + 1);
    }
    for (std::size_t k = 0; k < k_arms; ++k) trace.phases[k].phase1_end = arms.count(k);

    // Phase 2: grow each active arm toward its pessimistic share; an arm
    // leaves the active set once n_k >= lambda_k T and rejoins if the share grows.
    const double t = static_cast<double>(horizon);
    std::vector<double> share(k_arms);
    std::vector<bool> active(k_arms, true);
    for (std::size_t k = 0; k < k_arms; ++k) share[k] = static_cast<double>(arms.count(k)) / t;
    while (!trace.truncated) {
        for (std::size_t k = 0; k < k_arms; ++k) {
            if (!active[k]) continue;
            budget.pull_to(k, phase2_schedule(arms.count(k), share[k] * t, cfg.batch_growth));
        }
        std::vector<VarianceView> views;
        views.reserve(k_arms);
        for (std::size_t k = 0; k < k_arms; ++k) {
            views.push_back(view_of(cfg, arms, k, delta));
            record_truth(views.back(), k);
        }
        bool any_active = false;
        std::vector<double> others;
        for (std::size_t k = 0; k < k_arms; ++k) {
            others.clear();
            for (std::size_t j = 0; j < k_arms; ++j)
                if (j != k) others.push_back(views[j].ci_defined ? views[j].ci.ucb : views[j].estimate);
            const double lcb = views[k].ci_defined ? views[k].ci.lcb : 0.0;
            share[k] = adaptive_weight(lcb, others, q);
            active[k] = static_cast<double>(arms.count(k)) < share[k] * t;
            any_active = any_active || active[k];
        }
        if (!any_active) break;
        if (budget.exhausted()) {
            trace.truncated = true;
            break;
        }
    }
    std::vector<std::int64_t> taus(k_arms);
    for (std::size_t k = 0; k < k_arms; ++k) {
        taus[k] = arms.count(k);
        trace.phases[k].phase2_end = taus[k];
    }

    // Phase 3: plug-in (or UCB) weights at tau_k, then spend the rest.
    std::vector<double> estimates(k_arms);
    std::vector<double> ucbs(k_arms);
    bool ucbs_defined = true;
    for (std::size_t k = 0; k < k_arms; ++k) {
        const auto view = view_of(cfg, arms, k, delta);
        estimates[k] = view.estimate;
        ucbs[k] = view.ci.ucb;
        ucbs_defined = ucbs_defined && view.ci_defined && view.ci.ucb > 0.0;
    }
    const auto weights = cfg.phase3_ucb_mode && ucbs_defined ? phase3_ucb_weights(ucbs, q)
                                                             : safe_plugin_weights(estimates, q);
    const auto unconstrained = round_allocation(weights, horizon, estimates);
    for (std::size_t k = 0; k < k_arms; ++k)
        if (unconstrained[k] < taus[k]) trace.budget_clamped = true;
    const auto final_counts = allocate_with_floors(weights, taus, horizon, estimates);
    for (std::size_t k = 0; k < k_arms; ++k) budget.pull_to(k, final_counts[k]);

    trace.counts.resize(k_arms);
    for (std::size_t k = 0; k < k_arms; ++k) trace.counts[k] = arms.count(k);
    trace.variance_estimates = estimates;
}

std::vector<double> true_variances(const BanditEnvironment& env) {
    std::vector<double> v(env.arms());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = env.true_variance(k);
    return v;
}

void fill_canonical_outcome(const PolicyConfig& cfg, const BanditEnvironment& env,
                            const CanonicalArms& arms, PolicyTrace& trace) {
    trace.mean_estimates.resize(arms.arms());
    for (std::size_t k = 0; k < arms.arms(); ++k) trace.mean_estimates[k] = arms.moments(k).mean;
    const auto truth = true_variances(env);
    trace.realized_objective = objective_rp(trace.counts, truth, cfg.norm);
    trace.optimal_objective = optimal_value(truth, cfg.norm, cfg.horizon);
    trace.realized_regret = trace.realized_objective - trace.optimal_objective;
}

}  // namespace

ArmEnvironment::ArmEnvironment(std::vector<ArmSpec> arms, std::uint64_t seed) : arms_(std::move(arms)) {
    streams_.reserve(arms_.size());
    for (std::size_t k = 0; k < arms_.size(); ++k) {
        validate(arms_[k]);
        streams_.push_back(make_stream(seed, {0x41524dULL, k}));
    }
}

double ArmEnvironment::pull(std::size_t arm) { return sample_reward(arms_.at(arm), streams_.at(arm)); }

LinearContextualEnvironment::LinearContextualEnvironment(std::vector<Eigen::VectorXd> betas,
                                                         std::vector<ArmSpec> noise,
                                                         ContextSpec contexts, std::uint64_t seed)
    : betas_(std::move(betas)),
      noise_(std::move(noise)),
      contexts_(std::move(contexts)),
      context_stream_(make_stream(seed, {0x435458ULL})) {
    validate(contexts_);
    if (betas_.size() != noise_.size()) throw ConfigError("one noise arm per coefficient vector");
    for (std::size_t k = 0; k < betas_.size(); ++k) {
        if (betas_[k].size() != contexts_.dimension)
            throw ConfigError("coefficient dimension does not match the context dimension");
        validate(noise_[k]);
        noise_streams_.push_back(make_stream(seed, {0x4e5345ULL, k}));
    }
}

ContextualObservation LinearContextualEnvironment::pull(std::size_t arm) {
    ContextualObservation obs;
    obs.context = sample_context(contexts_, context_stream_);
    obs.reward = reward_with_context(betas_.at(arm), obs.context, noise_.at(arm), noise_streams_.at(arm));
    return obs;
}

ReplayContextualEnvironment::ReplayContextualEnvironment(std::vector<Eigen::VectorXd> betas,
                                                         std::vector<ArmSpec> noise,
                                                         std::vector<Eigen::VectorXd> contexts,
                                                         std::uint64_t seed)
    : betas_(std::move(betas)), noise_(std::move(noise)), contexts_(std::move(contexts)) {
    if (betas_.empty() || betas_.size() != noise_.size())
        throw ConfigError("one noise arm per coefficient vector");
    for (std::size_t k = 0; k < betas_.size(); ++k) {
        if (betas_[k].size() != betas_.front().size()) throw ConfigError("coefficient dimensions differ");
        validate(noise_[k]);
        noise_streams_.push_back(make_stream(seed, {0x4e5345ULL, k}));
    }
}

ContextualObservation ReplayContextualEnvironment::pull(std::size_t arm) {
    if (round_ >= contexts_.size()) throw ContractViolation("replay context list exhausted");
    ContextualObservation obs;
    obs.context = contexts_[round_++];
    obs.reward = reward_with_context(betas_.at(arm), obs.context, noise_.at(arm), noise_streams_.at(arm));
    return obs;
}

std::int64_t phase1_length(const NoiseRegime& regime, std::int64_t horizon, std::int64_t arms) {
    if (arms < 1 || horizon < 2 * arms) throw ConfigError("phase 1 length needs T >= 2K");
    const double log_t = std::log(static_cast<double>(horizon));
    const double cap = std::floor(static_cast<double>(horizon) / static_cast<double>(arms));
    double start = 0.0;
    if (regime.kind == NoiseKind::GSG)
        start = 64.0 * regime.sigma_sq_proxy * regime.sigma_sq_proxy * log_t;
    else
        start = 18.0 * log_t;
    return std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(std::min(start, cap))));
}

std::int64_t phase2_schedule(std::int64_t current_n, double target, double batch_growth) {
    if (!(batch_growth > 1.0)) throw ContractViolation("batch growth must exceed 1");
    const auto capped = static_cast<std::int64_t>(std::ceil(target));
    const auto grown = static_cast<std::int64_t>(std::ceil(static_cast<double>(current_n) * batch_growth));
    return std::min(capped, std::max(current_n + 1, grown));
}

double contextual_objective(std::span<const std::int64_t> counts, std::span<const double> variances,
                            int dimension, double lambda_min) {
    return 2.0 * dimension / lambda_min * objective_rp(counts, variances, NormOrder(1.0));
}

double contextual_optimal_objective(std::span<const double> variances, std::int64_t horizon,
                                    int dimension, double lambda_min) {
    return 2.0 * dimension / lambda_min * optimal_value(variances, NormOrder(1.0), horizon);
}

PolicyTrace run_nonadaptive(const PolicyConfig& cfg, BanditEnvironment& env) {
    check_common(cfg, env.arms());
    if (!cfg.lower_bound) throw ConfigError("the non-adaptive policy needs a variance lower bound");
    const std::size_t k_arms = env.arms();
    const double q = cfg.norm.q();
    const auto tau = tau_nonadaptive(*cfg.lower_bound, cfg.regime.sigma_sq_proxy,
                                     static_cast<std::int64_t>(k_arms), cfg.horizon, q);

    PolicyTrace trace;
    CanonicalArms arms(env);
    Budget<CanonicalArms> budget(arms, cfg.horizon, trace);
    budget.round_robin_to(tau);

    const double delta = delta_schedule(AlgorithmKind::NonAdaptive, cfg.norm, cfg.horizon);
    std::vector<double> estimates(k_arms);
    for (std::size_t k = 0; k < k_arms; ++k) {
        const auto view = view_of(cfg, arms, k, delta);
        estimates[k] = view.estimate;
        if (!view.ci_defined || !view.ci.contains(env.true_variance(k))) trace.good_event_held = false;
    }

    const auto weights = safe_plugin_weights(estimates, q);
    const std::vector<std::int64_t> floors(k_arms, tau);
    const auto unconstrained = round_allocation(weights, cfg.horizon, estimates);
    for (std::size_t k = 0; k < k_arms; ++k)
        if (unconstrained[k] < tau) trace.budget_clamped = true;
    const auto final_counts = allocate_with_floors(weights, floors, cfg.horizon, estimates);
    for (std::size_t k = 0; k < k_arms; ++k) budget.pull_to(k, final_counts[k]);

    trace.phases.assign(k_arms, ArmPhases{tau, tau});
    trace.counts.resize(k_arms);
    for (std::size_t k = 0; k < k_arms; ++k) trace.counts[k] = arms.count(k);
    trace.variance_estimates = estimates;
    fill_canonical_outcome(cfg, env, arms, trace);
    return trace;
}

PolicyTrace run_adaptive(const PolicyConfig& cfg, BanditEnvironment& env) {
    check_common(cfg, env.arms());
    const auto k_arms = static_cast<std::int64_t>(env.arms());
    const auto initial = cfg.lower_bound
                             ? tau_nonadaptive(*cfg.lower_bound, std::max(cfg.regime.sigma_sq_proxy, *cfg.lower_bound),
                                               k_arms, cfg.horizon, cfg.norm.q())
                             : phase1_length(cfg.regime, cfg.horizon, k_arms);
    PolicyTrace trace;
    CanonicalArms arms(env);
    run_three_phase(cfg, arms, initial, trace);
    fill_canonical_outcome(cfg, env, arms, trace);
    return trace;
}

PolicyTrace run_contextual(const PolicyConfig& cfg, ContextualEnvironment& env) {
    check_common(cfg, env.arms());
    if (cfg.norm.is_infinite() || cfg.norm.p() != 1.0)
        throw ConfigError("the contextual policy targets p = 1");
    if (!(cfg.context_lambda_min > 0.0)) throw ConfigError("context lambda_min must be positive");
    const auto k_arms = static_cast<std::int64_t>(env.arms());
    const int d = env.dimension();
    if (cfg.horizon < k_arms * std::max(d, 2))
        throw ConfigError("horizon too short to play every arm d times");

    const auto initial = std::max<std::int64_t>(
        {d, 2, cfg.lower_bound ? tau_nonadaptive(*cfg.lower_bound,
                                                 std::max(cfg.regime.sigma_sq_proxy, *cfg.lower_bound),
                                                 k_arms, cfg.horizon, cfg.norm.q())
                               : phase1_length(cfg.regime, cfg.horizon, k_arms)});

    PolicyTrace trace;
    ContextualArms arms(env, cfg.context_lambda_min);
    {
        // Every arm plays d rounds before any estimate is formed.
        Budget<ContextualArms> warmup(arms, cfg.horizon, trace);
        warmup.round_robin_to(d);
    }
    run_three_phase(cfg, arms, initial, trace);

    trace.beta_estimates.reserve(env.arms());
    for (std::size_t k = 0; k < env.arms(); ++k) trace.beta_estimates.push_back(arms.estimate(k));
    trace.ridge_floor_used = arms.floor_used();
    std::vector<double> truth(env.arms());
    for (std::size_t k = 0; k < truth.size(); ++k) truth[k] = env.true_variance(k);
    trace.realized_objective = contextual_objective(trace.counts, truth, d, cfg.context_lambda_min);
    trace.optimal_objective = contextual_optimal_objective(truth, cfg.horizon, d, cfg.context_lambda_min);
    trace.realized_regret = trace.realized_objective - trace.optimal_objective;
    return trace;
}

}  // namespace mgme
