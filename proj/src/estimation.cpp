#include "mgme/estimation.hpp"

#include <cmath>
#include <string>

#include "mgme/error.hpp"

namespace mgme {

namespace {

constexpr double kSingularRelTol = 1e-12;

Eigen::MatrixXd regularized(const Eigen::MatrixXd& gram, double gamma) {
    Eigen::MatrixXd v = gram;
    v.diagonal().array() += gamma;
    return v;
}

// Eigen-decomposes V and rejects it when it is numerically singular.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> checked_eigen(const Eigen::MatrixXd& v) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
    if (eig.info() != Eigen::Success) throw SingularSystem("eigen decomposition failed");
    const double scale = v.norm();
    if (!(eig.eigenvalues().minCoeff() > kSingularRelTol * scale) || scale == 0.0)
        throw SingularSystem("regularized gram matrix is singular");
    return eig;
}

}  // namespace

RunningMoments update_moments(RunningMoments m, double x) noexcept {
    m.push(x);
    return m;
}

double sample_variance(const RunningMoments& m) {
    if (m.n < 2) throw InsufficientData("sample variance needs at least 2 observations");
    return m.m2 / static_cast<double>(m.n - 1);
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw InsufficientData("sample variance needs at least 2 observations");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size() - 1);
}

RidgeState::RidgeState(int dimension)
    : dimension_(dimension),
      gram_(Eigen::MatrixXd::Zero(dimension, dimension)),
      xty_(Eigen::VectorXd::Zero(dimension)) {
    if (dimension < 1) throw ContractViolation("ridge dimension must be positive");
}

void RidgeState::update(const Eigen::VectorXd& context, double reward) {
    if (context.size() != dimension_)
        throw ContractViolation("context dimension " + std::to_string(context.size()) +
                                " does not match ridge dimension " + std::to_string(dimension_));
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(context);
    gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
    xty_ += reward * context;
    history_contexts_.insert(history_contexts_.end(), context.data(), context.data() + dimension_);
    rewards_.push_back(reward);
}

Eigen::Map<const Eigen::MatrixXd> RidgeState::contexts() const {
    return {history_contexts_.data(), dimension_, static_cast<Eigen::Index>(rewards_.size())};
}

RidgeState ridge_update(RidgeState s, const Eigen::VectorXd& context, double reward) {
    s.update(context, reward);
    return s;
}

Eigen::VectorXd ridge_estimate(const RidgeState& s, double gamma) {
    if (gamma < 0.0) throw ContractViolation("ridge penalty must be nonnegative");
    const auto eig = checked_eigen(regularized(s.gram(), gamma));
    const Eigen::VectorXd coords = eig.eigenvectors().transpose() * s.xty();
    return eig.eigenvectors() * coords.cwiseQuotient(eig.eigenvalues());
}

double gamma_schedule(double lambda_min, std::int64_t n) {
    if (n < 1) throw ContractViolation("gamma schedule needs n >= 1");
    if (!(lambda_min > 0.0)) throw ContractViolation("lambda_min must be positive");
    return lambda_min / static_cast<double>(n);
}

double residual_variance(const RidgeState& s, const Eigen::VectorXd& beta_hat) {
    if (s.count() < 2) throw InsufficientData("residual variance needs at least 2 observations");
    if (beta_hat.size() != s.dimension()) throw ContractViolation("beta_hat dimension mismatch");
    const auto y = Eigen::Map<const Eigen::VectorXd>(s.rewards().data(), s.count());
    const Eigen::VectorXd r = y - s.contexts().transpose() * beta_hat;
    const double rbar = r.mean();
    return (r.array() - rbar).square().sum() / static_cast<double>(s.count() - 1);
}

double conditional_mse(const Eigen::MatrixXd& gram, const Eigen::VectorXd& beta, double sigma_sq,
                       double gamma) {
    if (gram.rows() != gram.cols() || gram.rows() != beta.size())
        throw ContractViolation("conditional_mse dimension mismatch");
    const auto eig = checked_eigen(regularized(gram, gamma));
    const Eigen::VectorXd inv = eig.eigenvalues().cwiseInverse();
    const double tr_inv = inv.sum();
    const double tr_inv2 = inv.squaredNorm();
    // beta' V^-2 beta = ||V^-1 beta||^2 computed in the eigenbasis.
    const Eigen::VectorXd coords = eig.eigenvectors().transpose() * beta;
    const double bias = coords.cwiseProduct(inv).squaredNorm();
    return sigma_sq * tr_inv + gamma * gamma * bias - gamma * sigma_sq * tr_inv2;
}

}  // namespace mgme
