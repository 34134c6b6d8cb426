#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mgme {

// Streaming count / mean / sum of squared deviations (Welford).
struct RunningMoments {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) noexcept {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
};

RunningMoments update_moments(RunningMoments m, double x) noexcept;

// Unbiased m2 / (n - 1). Throws InsufficientData for n < 2.
double sample_variance(const RunningMoments& m);

// Two-pass reference form of the same estimator.
double sample_variance(std::span<const double> xs);

// Sufficient statistics for ridge regression, plus the raw history the
// residual variance estimator needs.
class RidgeState {
public:
    explicit RidgeState(int dimension);

    void update(const Eigen::VectorXd& context, double reward);

    int dimension() const noexcept { return dimension_; }
    std::int64_t count() const noexcept { return static_cast<std::int64_t>(rewards_.size()); }
    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    const Eigen::VectorXd& xty() const noexcept { return xty_; }
    // Column s holds context s.
    Eigen::Map<const Eigen::MatrixXd> contexts() const;
    std::span<const double> rewards() const noexcept { return rewards_; }

private:
    int dimension_;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd xty_;
    std::vector<double> history_contexts_;
    std::vector<double> rewards_;
};

RidgeState ridge_update(RidgeState s, const Eigen::VectorXd& context, double reward);

// (gamma I + gram)^{-1} xty via a symmetric factorization.
// Throws SingularSystem when the smallest eigenvalue is below 1e-12 * ||V||.
Eigen::VectorXd ridge_estimate(const RidgeState& s, double gamma);

// lambda_min / n.
double gamma_schedule(double lambda_min, std::int64_t n);

// Recentered residual variance, divisor n - 1.
double residual_variance(const RidgeState& s, const Eigen::VectorXd& beta_hat);

// Exact E[||beta_hat - beta||^2 | contexts] under homoscedastic noise with
// variance sigma_sq, V = gamma I + gram:
//   sigma^2 tr(V^-1) + gamma^2 beta' V^-2 beta - gamma sigma^2 tr(V^-2).
double conditional_mse(const Eigen::MatrixXd& gram, const Eigen::VectorXd& beta, double sigma_sq,
                       double gamma);

}  // namespace mgme
