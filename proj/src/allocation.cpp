#include "mgme/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgme/error.hpp"

namespace mgme {

namespace {

// Absorbs representation error in lambda * T (e.g. 0.2 * 10).
constexpr double kFloorSlack = 1e-9;

std::vector<double> normalize(std::vector<double> w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= total;
    return w;
}

std::vector<std::size_t> priority_order(std::span<const double> priority) {
    std::vector<std::size_t> order(priority.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return priority[a] > priority[b]; });
    return order;
}

}  // namespace

NormOrder::NormOrder(double p) : p_(p) {
    if (!(p >= 1.0)) throw ConfigError("norm order p must be >= 1");
}

double NormOrder::q() const noexcept { return is_infinite() ? 2.0 : 2.0 * p_ / (p_ + 1.0); }

double q_of_p(const NormOrder& p) { return p.q(); }

void validate(const VarianceProfile& profile) {
    if (profile.variances.empty()) throw ConfigError("variance profile is empty");
    for (double v : profile.variances)
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("variances must be positive");
    const auto [lo, hi] = std::minmax_element(profile.variances.begin(), profile.variances.end());
    if (profile.lower_bound && (!(*profile.lower_bound > 0.0) || *profile.lower_bound > *lo))
        throw ConfigError("variance lower bound must be positive and <= min variance");
    if (profile.proxy && *profile.proxy < *hi)
        throw ConfigError("subgaussian proxy must be >= max variance");
}

std::vector<double> optimal_fractions(std::span<const double> variances, const NormOrder& p) {
    const double half_q = p.q() / 2.0;
    std::vector<double> w;
    w.reserve(variances.size());
    for (double v : variances) w.push_back(std::pow(v, half_q));
    return normalize(std::move(w));
}

AllocationPlan optimal_allocation(const VarianceProfile& profile, const NormOrder& p,
                                  std::int64_t horizon) {
    validate(profile);
    const auto k = static_cast<std::int64_t>(profile.variances.size());
    if (horizon < k) throw ConfigError("horizon must be at least the number of arms");
    AllocationPlan plan;
    plan.horizon = horizon;
    plan.fractions = optimal_fractions(profile.variances, p);
    plan.counts = round_allocation(plan.fractions, horizon, profile.variances);
    return plan;
}

double objective_rp(std::span<const std::int64_t> counts, std::span<const double> variances,
                    const NormOrder& p) {
    if (counts.size() != variances.size()) throw ContractViolation("counts/variances size mismatch");
    double acc = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] <= 0) throw ContractViolation("objective undefined for a zero count");
        const double err = variances[k] / static_cast<double>(counts[k]);
        if (p.is_infinite())
            acc = std::max(acc, err);
        else
            acc += std::pow(err, p.p());
    }
    return p.is_infinite() ? acc : std::pow(acc, 1.0 / p.p());
}

double objective_rp(const AllocationPlan& plan, std::span<const double> variances,
                    const NormOrder& p) {
    return objective_rp(plan.counts, variances, p);
}

double optimal_value(std::span<const double> variances, const NormOrder& p, std::int64_t horizon) {
    const double q = p.q();
    double sigma_q = 0.0;
    for (double v : variances) sigma_q += std::pow(v, q / 2.0);
    return std::pow(sigma_q, 2.0 / q) / static_cast<double>(horizon);
}

double regret(std::span<const std::int64_t> counts, std::span<const double> variances,
              const NormOrder& p) {
    const auto horizon = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    return objective_rp(counts, variances, p) - optimal_value(variances, p, horizon);
}

double regret(const AllocationPlan& plan, const VarianceProfile& profile, const NormOrder& p) {
    return regret(plan.counts, profile.variances, p);
}

std::vector<double> plugin_weights(std::span<const double> variance_estimates, double q) {
    std::vector<double> w;
    w.reserve(variance_estimates.size());
    double total = 0.0;
    for (double v : variance_estimates) {
        if (v < 0.0) throw ContractViolation("variance estimates must be nonnegative");
        w.push_back(std::pow(v, q / 2.0));
        total += w.back();
    }
    if (!(total > 0.0)) throw DegenerateInput("all variance estimates are zero");
    return normalize(std::move(w));
}

double adaptive_weight(double lcb_k, std::span<const double> ucb_others, double q) {
    const double own = std::pow(std::max(lcb_k, 0.0), q / 2.0);
    double denom = own;
    for (double u : ucb_others) denom += std::pow(u, q / 2.0);
    return denom > 0.0 ? own / denom : 0.0;
}

std::vector<double> phase3_ucb_weights(std::span<const double> ucb_all, double q) {
    for (double u : ucb_all)
        if (!(u > 0.0)) throw ContractViolation("upper confidence bounds must be positive");
    return plugin_weights(ucb_all, q);
}

std::int64_t tau_nonadaptive(double lower_bound, double proxy, std::int64_t arms,
                             std::int64_t horizon, double q) {
    if (!(lower_bound > 0.0)) throw ConfigError("variance lower bound must be positive");
    if (lower_bound > proxy) throw ConfigError("variance lower bound exceeds the proxy");
    if (arms < 1 || horizon < 2 * arms) throw ConfigError("tau needs K >= 1 and T >= 2K");
    const double lo = std::pow(lower_bound, q / 2.0);
    const double hi = std::pow(proxy, q / 2.0);
    const double share = lo / (lo + static_cast<double>(arms - 1) * hi);
    auto tau = static_cast<std::int64_t>(std::floor(share * static_cast<double>(horizon) + kFloorSlack));
    return std::clamp<std::int64_t>(tau, 2, horizon - arms + 1);
}

std::vector<std::int64_t> round_allocation(std::span<const double> fractions, std::int64_t horizon,
                                           std::span<const double> priority) {
    if (fractions.size() != priority.size()) throw ContractViolation("fractions/priority size mismatch");
    if (fractions.empty()) throw ContractViolation("round_allocation needs at least one arm");
    if (horizon < 0) throw ContractViolation("negative horizon");
    std::vector<std::int64_t> counts(fractions.size());
    std::int64_t used = 0;
    for (std::size_t k = 0; k < fractions.size(); ++k) {
        counts[k] = static_cast<std::int64_t>(
            std::floor(std::max(fractions[k], 0.0) * static_cast<double>(horizon) + kFloorSlack));
        used += counts[k];
    }
    const auto order = priority_order(priority);
    // Fractions summing slightly above 1 can overshoot; trim lowest priority first.
    for (std::size_t i = order.size(); used > horizon;) {
        i = (i == 0 ? order.size() : i) - 1;
        if (counts[order[i]] > 0) {
            --counts[order[i]];
            --used;
        }
    }
    // Top-up goes to the arms whose mean estimate is noisiest after flooring,
    // i.e. largest priority / n_k. With uniform floors this is plain priority order.
    std::vector<double> noise(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k)
        noise[k] = priority[k] / static_cast<double>(std::max<std::int64_t>(counts[k], 1));
    const auto top_up = priority_order(noise);
    for (std::size_t i = 0; used < horizon; i = (i + 1) % top_up.size()) {
        ++counts[top_up[i]];
        ++used;
    }
    return counts;
}

std::vector<std::int64_t> allocate_with_floors(std::span<const double> weights,
                                               std::span<const std::int64_t> floors,
                                               std::int64_t horizon,
                                               std::span<const double> priority) {
    const std::size_t k = weights.size();
    if (floors.size() != k || priority.size() != k)
        throw ContractViolation("allocate_with_floors size mismatch");
    const auto floor_total = std::accumulate(floors.begin(), floors.end(), std::int64_t{0});
    if (floor_total > horizon) throw ContractViolation("floors exceed the horizon");

    std::vector<bool> pinned(k, false);
    std::vector<std::int64_t> counts(floors.begin(), floors.end());
    for (;;) {
        std::int64_t budget = horizon;
        double free_weight = 0.0;
        std::vector<std::size_t> free_arms;
        for (std::size_t i = 0; i < k; ++i) {
            if (pinned[i]) {
                budget -= floors[i];
            } else {
                free_arms.push_back(i);
                free_weight += weights[i];
            }
        }
        if (free_arms.empty()) {
            // Everything pinned: spend what is left by priority.
            std::vector<double> share(k, 0.0);
            auto extra = round_allocation(share, budget, priority);
            for (std::size_t i = 0; i < k; ++i) counts[i] = floors[i] + extra[i];
            return counts;
        }
        std::vector<double> share(free_arms.size());
        std::vector<double> prio(free_arms.size());
        for (std::size_t j = 0; j < free_arms.size(); ++j) {
            share[j] = free_weight > 0.0 ? weights[free_arms[j]] / free_weight
                                         : 1.0 / static_cast<double>(free_arms.size());
            prio[j] = priority[free_arms[j]];
        }
        const auto sub = round_allocation(share, budget, prio);
        bool changed = false;
        for (std::size_t j = 0; j < free_arms.size(); ++j) {
            if (sub[j] < floors[free_arms[j]]) {
                pinned[free_arms[j]] = true;
                changed = true;
            }
        }
        if (!changed) {
            for (std::size_t i = 0; i < k; ++i) counts[i] = floors[i];
            for (std::size_t j = 0; j < free_arms.size(); ++j) counts[free_arms[j]] = sub[j];
            return counts;
        }
    }
}

}  // namespace mgme
