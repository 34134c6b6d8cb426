#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace mgme {

// Norm order p >= 1 of the group-error objective; p = +inf is the worst group.
class NormOrder {
public:
    explicit NormOrder(double p);
    static NormOrder infinity() { return NormOrder(std::numeric_limits<double>::infinity()); }

    double p() const noexcept { return p_; }
    bool is_infinite() const noexcept { return p_ == std::numeric_limits<double>::infinity(); }
    // 2p / (p + 1), or 2 for p = inf.
    double q() const noexcept;

private:
    double p_;
};

double q_of_p(const NormOrder& p);

struct VarianceProfile {
    std::vector<double> variances;
    std::optional<double> lower_bound;  // known floor on every variance
    std::optional<double> proxy;        // subgaussian proxy sigma^2
};

void validate(const VarianceProfile& profile);

struct AllocationPlan {
    std::vector<double> fractions;
    std::vector<std::int64_t> counts;
    std::int64_t horizon = 0;
};

// sigma_k^q / sum_j sigma_j^q.
std::vector<double> optimal_fractions(std::span<const double> variances, const NormOrder& p);

// Optimal fractions plus counts rounded with round_allocation (priority = variances).
AllocationPlan optimal_allocation(const VarianceProfile& profile, const NormOrder& p,
                                  std::int64_t horizon);

// || { sigma_k^2 / n_k } ||_p. Throws ContractViolation on a zero count.
double objective_rp(std::span<const std::int64_t> counts, std::span<const double> variances,
                    const NormOrder& p);
double objective_rp(const AllocationPlan& plan, std::span<const double> variances,
                    const NormOrder& p);

// Closed-form optimum (1/T) (sum_k sigma_k^q)^(2/q) of the continuous relaxation.
double optimal_value(std::span<const double> variances, const NormOrder& p, std::int64_t horizon);

double regret(std::span<const std::int64_t> counts, std::span<const double> variances,
              const NormOrder& p);
double regret(const AllocationPlan& plan, const VarianceProfile& profile, const NormOrder& p);

// Normalized (sigma_hat^2)^(q/2). Throws DegenerateInput when all estimates are zero.
std::vector<double> plugin_weights(std::span<const double> variance_estimates, double q);

// LCB_k^(q/2) / (LCB_k^(q/2) + sum_{j != k} UCB_j^(q/2)).
double adaptive_weight(double lcb_k, std::span<const double> ucb_others, double q);

// Normalized UCB^(q/2).
std::vector<double> phase3_ucb_weights(std::span<const double> ucb_all, double q);

// floor( lb^(q/2) / (lb^(q/2) + (K-1) proxy^(q/2)) * T ), clamped to [2, T-K+1].
std::int64_t tau_nonadaptive(double lower_bound, double proxy, std::int64_t arms,
                             std::int64_t horizon, double q);

// floor(lambda_k T) per arm, then the leftover rounds one at a time to arms in
// decreasing priority_k / floor_k (ties to the lowest index). Sums to T exactly.
std::vector<std::int64_t> round_allocation(std::span<const double> fractions, std::int64_t horizon,
                                           std::span<const double> priority);

// Final allocation when some arms already hold `floors` pulls: arms whose
// rounded share falls below their floor keep the floor, and the rest of the
// budget is re-split among the remaining arms in proportion to `weights`.
// Requires sum(floors) <= T. Result sums to T and dominates `floors`.
std::vector<std::int64_t> allocate_with_floors(std::span<const double> weights,
                                               std::span<const std::int64_t> floors,
                                               std::int64_t horizon,
                                               std::span<const double> priority);

}  // namespace mgme
