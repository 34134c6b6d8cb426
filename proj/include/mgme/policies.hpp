#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mgme/allocation.hpp"
#include "mgme/arm_models.hpp"
#include "mgme/concentration.hpp"
#include "mgme/estimation.hpp"

namespace mgme {

// Canonical bandit: pulling arm k returns one reward from its distribution.
class BanditEnvironment {
public:
    virtual ~BanditEnvironment() = default;
    virtual std::size_t arms() const = 0;
    virtual double pull(std::size_t arm) = 0;
    virtual double true_variance(std::size_t arm) const = 0;
};

// One independent random stream per arm, split from the master seed, so an
// arm's draw sequence does not depend on the order of pulls.
class ArmEnvironment final : public BanditEnvironment {
public:
    ArmEnvironment(std::vector<ArmSpec> arms, std::uint64_t seed);

    std::size_t arms() const override { return arms_.size(); }
    double pull(std::size_t arm) override;
    double true_variance(std::size_t arm) const override { return arms_.at(arm).variance; }
    const ArmSpec& spec(std::size_t arm) const { return arms_.at(arm); }

private:
    std::vector<ArmSpec> arms_;
    std::vector<Rng> streams_;
};

struct ContextualObservation {
    Eigen::VectorXd context;
    double reward = 0.0;
};

// Linear contextual bandit. The arm is committed before the round's context
// is drawn; pull() reveals both.
class ContextualEnvironment {
public:
    virtual ~ContextualEnvironment() = default;
    virtual std::size_t arms() const = 0;
    virtual int dimension() const = 0;
    virtual ContextualObservation pull(std::size_t arm) = 0;
    virtual double true_variance(std::size_t arm) const = 0;
};

class LinearContextualEnvironment final : public ContextualEnvironment {
public:
    LinearContextualEnvironment(std::vector<Eigen::VectorXd> betas, std::vector<ArmSpec> noise,
                                ContextSpec contexts, std::uint64_t seed);

    std::size_t arms() const override { return betas_.size(); }
    int dimension() const override { return contexts_.dimension; }
    ContextualObservation pull(std::size_t arm) override;
    double true_variance(std::size_t arm) const override { return noise_.at(arm).variance; }
    const Eigen::VectorXd& beta(std::size_t arm) const { return betas_.at(arm); }
    const ContextSpec& context_spec() const { return contexts_; }

private:
    std::vector<Eigen::VectorXd> betas_;
    std::vector<ArmSpec> noise_;
    ContextSpec contexts_;
    Rng context_stream_;
    std::vector<Rng> noise_streams_;
};

// Contexts come from a fixed per-round list (round = total pulls so far), so a
// run can be replayed with the future altered. Noise keeps one stream per arm.
class ReplayContextualEnvironment final : public ContextualEnvironment {
public:
    ReplayContextualEnvironment(std::vector<Eigen::VectorXd> betas, std::vector<ArmSpec> noise,
                                std::vector<Eigen::VectorXd> contexts, std::uint64_t seed);

    std::size_t arms() const override { return betas_.size(); }
    int dimension() const override { return static_cast<int>(betas_.front().size()); }
    ContextualObservation pull(std::size_t arm) override;
    double true_variance(std::size_t arm) const override { return noise_.at(arm).variance; }

private:
    std::vector<Eigen::VectorXd> betas_;
    std::vector<ArmSpec> noise_;
    std::vector<Eigen::VectorXd> contexts_;
    std::vector<Rng> noise_streams_;
    std::size_t round_ = 0;
};

// Variance estimate and interval an arm reports to the allocation logic.
struct VarianceView {
    double estimate = 0.0;
    ConfidenceInterval ci;
    bool ci_defined = true;
};

// Test seam: overrides the data-driven estimate/interval for (arm, n, sample variance).
using VarianceHook = std::function<VarianceView(std::size_t arm, std::int64_t n, double sample_variance)>;

struct PolicyConfig {
    std::int64_t horizon = 0;
    NormOrder norm = NormOrder::infinity();
    NoiseRegime regime;
    // Known floor on all variances. Required by run_nonadaptive; when given to
    // the adaptive policies Phase 1 starts from the non-adaptive length.
    std::optional<double> lower_bound;
    // Phase 3 weights from upper confidence bounds instead of point estimates.
    bool phase3_ucb_mode = false;
    // Phase 2 checkpoint growth factor (> 1).
    double batch_growth = 2.0;
    // Phase 1 strictness: radii are multiplied by this before testing LCB > 0.
    double lcb_margin = 1.0;
    TailForm tail_form = TailForm::Refined;
    // Contextual only.
    double context_lambda_min = 1.0;
    VarianceHook variance_hook;
};

struct ArmPhases {
    std::int64_t phase1_end = 0;
    std::int64_t phase2_end = 0;  // tau_k
};

struct PolicyTrace {
    std::vector<std::int64_t> counts;
    std::vector<ArmPhases> phases;
    std::vector<double> mean_estimates;
    std::vector<Eigen::VectorXd> beta_estimates;
    std::vector<double> variance_estimates;
    std::vector<std::uint32_t> arm_sequence;
    double realized_objective = 0.0;
    double optimal_objective = 0.0;
    double realized_regret = 0.0;
    bool good_event_held = true;
    // Some arm already held more pulls than its final share.
    bool budget_clamped = false;
    // Horizon ran out before Phase 2 finished.
    bool truncated = false;
    // A ridge solve needed the 1e-8 penalty floor.
    bool ridge_floor_used = false;
};

PolicyTrace run_nonadaptive(const PolicyConfig& cfg, BanditEnvironment& env);
PolicyTrace run_adaptive(const PolicyConfig& cfg, BanditEnvironment& env);
PolicyTrace run_contextual(const PolicyConfig& cfg, ContextualEnvironment& env);

// Initial per-arm Phase 1 length: ceil(min(64 sigma^4 log T, T/K)) for GSG,
// ceil(min(18 log T, T/K)) otherwise; at least 2.
std::int64_t phase1_length(const NoiseRegime& regime, std::int64_t horizon, std::int64_t arms);

// min(ceil(target), max(n + 1, ceil(n * growth))).
std::int64_t phase2_schedule(std::int64_t current_n, double target, double batch_growth);

// (2d / lambda_min) sum_k sigma_k^2 / n_k and its optimum (2d / lambda_min) (sum_k sigma_k)^2 / T.
double contextual_objective(std::span<const std::int64_t> counts, std::span<const double> variances,
                            int dimension, double lambda_min);
double contextual_optimal_objective(std::span<const double> variances, std::int64_t horizon,
                                    int dimension, double lambda_min);

}  // namespace mgme
