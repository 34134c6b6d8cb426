#pragma once

#include <cstdint>

#include "mgme/arm_models.hpp"

namespace mgme {

class NormOrder;

// Deviation radii for the sample variance. eps_plus bounds the right tail
// (sigma_hat^2 - sigma^2), eps_minus the left tail (sigma^2 - sigma_hat^2).
struct RadiusPair {
    double eps_minus = 0.0;
    double eps_plus = 0.0;
};

// Radii divided by the true variance; depend only on (n, delta).
struct MultiplicativeFactors {
    double s_minus = 0.0;
    double s_plus = 0.0;
};

struct ConfidenceInterval {
    double lcb = 0.0;
    double ucb = 0.0;

    bool contains(double v) const noexcept { return lcb <= v && v <= ucb; }
};

// Left-tail second-order constant: 13/3 (refined, default) or 6 (symmetric form).
enum class TailForm { Refined, Symmetric };

// General subgaussian radii with known proxy sigma^2:
//   4 sigma^2 f(n) sqrt(2 L / (n-1)) + c sigma^2 L / n,  L = log(1/delta),
//   f(n) = (1 + sqrt(n-1)) / sqrt(n),  c = 6 (right), 13/3 (left).
RadiusPair radius_gsg(std::int64_t n, double delta, double sigma_sq_proxy,
                      TailForm form = TailForm::Refined);

// Strictly subgaussian: f(n) = (1 + sqrt((n-1)/8)) / sqrt(n), proxy = variance.
RadiusPair radius_ssg(std::int64_t n, double delta, double variance,
                      TailForm form = TailForm::Refined);

// Gaussian chi-square radii: right 2 s sqrt(L/(n-1)) + 2 s L/(n-1), left 2 s sqrt(L/(n-1)).
RadiusPair radius_gaussian(std::int64_t n, double delta, double variance);

MultiplicativeFactors factors_ssg(std::int64_t n, double delta, TailForm form = TailForm::Refined);
MultiplicativeFactors factors_gaussian(std::int64_t n, double delta);

// (max(v - eps_plus, 0), v + eps_minus)
ConfidenceInterval ci_gsg(double sigma_sq_hat, const RadiusPair& r);

// (v / (1 + s_plus), v / (1 - s_minus)). Throws PhasePrecondition if s_minus >= 1.
ConfidenceInterval ci_ssg(double sigma_sq_hat, const MultiplicativeFactors& s);

enum class AlgorithmKind { NonAdaptive, Adaptive };

// NonAdaptive: T^-1 (p = inf), T^-3/2 (finite p).
// Adaptive:    T^-2 (p = inf), T^-5/2 (finite p).
double delta_schedule(AlgorithmKind algorithm, const NormOrder& p, std::int64_t horizon);

// Regime-dispatched interval used by the policies. GSG uses the known proxy;
// SSG and GaussianExact use multiplicative factors so no true variance is needed.
// Radii (or factors) are multiplied by radius_scale before use.
// Returns false (leaving `out` untouched) when the scaled s_minus >= 1.
bool try_confidence_interval(const NoiseRegime& regime, double sigma_sq_hat, std::int64_t n,
                             double delta, ConfidenceInterval& out,
                             TailForm form = TailForm::Refined, double radius_scale = 1.0);

}  // namespace mgme
