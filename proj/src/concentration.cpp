#include "mgme/concentration.hpp"

#include <cmath>

#include "mgme/allocation.hpp"
#include "mgme/error.hpp"

namespace mgme {

namespace {

void check_args(std::int64_t n, double delta) {
    if (n < 2) throw InsufficientData("variance radii need n >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw ContractViolation("delta must lie in (0, 1)");
}

double f_gsg(double n) { return (1.0 + std::sqrt(n - 1.0)) / std::sqrt(n); }
double f_ssg(double n) { return (1.0 + std::sqrt((n - 1.0) / 8.0)) / std::sqrt(n); }

RadiusPair subgaussian_radii(double f, double n, double delta, double scale, TailForm form) {
    const double log_inv = std::log(1.0 / delta);
    const double lead = 4.0 * scale * f * std::sqrt(2.0 * log_inv / (n - 1.0));
    const double left_const = form == TailForm::Refined ? 13.0 / 3.0 : 6.0;
    return {lead + left_const * scale * log_inv / n, lead + 6.0 * scale * log_inv / n};
}

}  // namespace

RadiusPair radius_gsg(std::int64_t n, double delta, double sigma_sq_proxy, TailForm form) {
    check_args(n, delta);
    const double nn = static_cast<double>(n);
    return subgaussian_radii(f_gsg(nn), nn, delta, sigma_sq_proxy, form);
}

RadiusPair radius_ssg(std::int64_t n, double delta, double variance, TailForm form) {
    check_args(n, delta);
    const double nn = static_cast<double>(n);
    return subgaussian_radii(f_ssg(nn), nn, delta, variance, form);
}

RadiusPair radius_gaussian(std::int64_t n, double delta, double variance) {
    check_args(n, delta);
    const double ratio = std::log(1.0 / delta) / static_cast<double>(n - 1);
    const double lead = 2.0 * variance * std::sqrt(ratio);
    return {lead, lead + 2.0 * variance * ratio};
}

MultiplicativeFactors factors_ssg(std::int64_t n, double delta, TailForm form) {
    const auto r = radius_ssg(n, delta, 1.0, form);
    return {r.eps_minus, r.eps_plus};
}

MultiplicativeFactors factors_gaussian(std::int64_t n, double delta) {
    const auto r = radius_gaussian(n, delta, 1.0);
    return {r.eps_minus, r.eps_plus};
}

ConfidenceInterval ci_gsg(double sigma_sq_hat, const RadiusPair& r) {
    return {std::max(sigma_sq_hat - r.eps_plus, 0.0), sigma_sq_hat + r.eps_minus};
}

ConfidenceInterval ci_ssg(double sigma_sq_hat, const MultiplicativeFactors& s) {
    if (!(s.s_minus < 1.0)) throw PhasePrecondition("s_minus >= 1: upper bound undefined");
    return {sigma_sq_hat / (1.0 + s.s_plus), sigma_sq_hat / (1.0 - s.s_minus)};
}

double delta_schedule(AlgorithmKind algorithm, const NormOrder& p, std::int64_t horizon) {
    if (horizon < 2) throw ContractViolation("delta schedule needs T >= 2");
    const double t = static_cast<double>(horizon);
    double exponent = 0.0;
    if (algorithm == AlgorithmKind::NonAdaptive)
        exponent = p.is_infinite() ? 1.0 : 1.5;
    else
        exponent = p.is_infinite() ? 2.0 : 2.5;
    return std::pow(t, -exponent);
}

bool try_confidence_interval(const NoiseRegime& regime, double sigma_sq_hat, std::int64_t n,
                             double delta, ConfidenceInterval& out, TailForm form,
                             double radius_scale) {
    switch (regime.kind) {
    case NoiseKind::GSG: {
        auto r = radius_gsg(n, delta, regime.sigma_sq_proxy, form);
        r.eps_minus *= radius_scale;
        r.eps_plus *= radius_scale;
        out = ci_gsg(sigma_sq_hat, r);
        return true;
    }
    case NoiseKind::SSG:
    case NoiseKind::GaussianExact: {
        auto s = regime.kind == NoiseKind::SSG ? factors_ssg(n, delta, form)
                                               : factors_gaussian(n, delta);
        s.s_minus *= radius_scale;
        s.s_plus *= radius_scale;
        if (!(s.s_minus < 1.0)) return false;
        out = ci_ssg(sigma_sq_hat, s);
        return true;
    }
    }
    return false;
}

}  // namespace mgme
