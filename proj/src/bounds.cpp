#include "mgme/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "mgme/error.hpp"

namespace mgme {

namespace {

constexpr std::array<std::pair<BoundCurve, std::string_view>, 9> kNames{{
    {BoundCurve::T1_inf, "T1_inf"},
    {BoundCurve::T2_finite, "T2_finite"},
    {BoundCurve::T3_inf, "T3_inf"},
    {BoundCurve::T3_finite, "T3_finite"},
    {BoundCurve::T5_contextual, "T5_contextual"},
    {BoundCurve::T6_ssg_nonadaptive, "T6_ssg_nonadaptive"},
    {BoundCurve::T7_ssg_adaptive_inf, "T7_ssg_adaptive_inf"},
    {BoundCurve::T7_ssg_adaptive_finite, "T7_ssg_adaptive_finite"},
    {BoundCurve::T8_contextual_ssg, "T8_contextual_ssg"},
}};

// sum_k sigma_k^e with sigma_k = sqrt(variance_k).
double power_sum(const std::vector<double>& variances, double e) {
    double s = 0.0;
    for (double v : variances) s += std::pow(v, e / 2.0);
    return s;
}

double need(const std::optional<double>& v, const char* what) {
    if (!v) throw ConfigError(std::string("bound needs ") + what);
    return *v;
}

void need_infinite(const NormOrder& p, BoundCurve c) {
    if (!p.is_infinite()) throw ConfigError(std::string(bound_name(c)) + " is a p = inf bound");
}

void need_finite(const NormOrder& p, BoundCurve c) {
    if (p.is_infinite()) throw ConfigError(std::string(bound_name(c)) + " is a finite-p bound");
}

double nonadaptive_share(const VarianceProfile& profile, const NormOrder& p, const BoundExtras& extras) {
    if (extras.lambda) return *extras.lambda;
    const double q = p.q();
    const double lo = std::pow(need(profile.lower_bound, "a variance lower bound"), q / 2.0);
    const double hi = std::pow(need(profile.proxy, "a subgaussian proxy"), q / 2.0);
    const auto k = static_cast<double>(profile.variances.size());
    return lo / (lo + (k - 1.0) * hi);
}

}  // namespace

std::string_view bound_name(BoundCurve curve) {
    for (const auto& [c, n] : kNames)
        if (c == curve) return n;
    return "unknown";
}

BoundCurve parse_bound(std::string_view name) {
    for (const auto& [c, n] : kNames)
        if (n == name) return c;
    throw ConfigError("unknown bound curve '" + std::string(name) + "'");
}

BoundRate bound_rate(BoundCurve curve, const NormOrder& p) {
    switch (curve) {
    case BoundCurve::T1_inf:
    case BoundCurve::T3_inf:
    case BoundCurve::T7_ssg_adaptive_inf:
        return {-1.5, 0.5};
    case BoundCurve::T6_ssg_nonadaptive:
        return p.is_infinite() ? BoundRate{-1.5, 0.5} : BoundRate{-2.0, 1.0};
    default:
        return {-2.0, 1.0};
    }
}

double bound_value(BoundCurve curve, const VarianceProfile& profile, const NormOrder& p,
                   std::int64_t horizon, const BoundExtras& extras) {
    validate(profile);
    if (horizon < 2) throw ConfigError("bound needs T >= 2");
    const auto& var = profile.variances;
    const auto k = static_cast<double>(var.size());
    const double t = static_cast<double>(horizon);
    const double log_t = std::log(t);
    const double rate_inf = std::pow(t, -1.5) * std::sqrt(log_t);
    const double rate_fin = std::pow(t, -2.0) * log_t;
    const double var_min = *std::min_element(var.begin(), var.end());
    const double sd_min = std::sqrt(var_min);
    const double sigma2 = power_sum(var, 2.0);

    switch (curve) {
    case BoundCurve::T1_inf: {
        need_infinite(p, curve);
        const double proxy = need(profile.proxy, "a subgaussian proxy");
        const double floor = need(profile.lower_bound, "a variance lower bound");
        const double lambda = nonadaptive_share(profile, p, extras);
        const double f = (k + sigma2 / floor - 2.0) / std::sqrt(lambda);
        return 4.0 * std::sqrt(2.0) * proxy * f * rate_inf;
    }
    case BoundCurve::T2_finite: {
        need_finite(p, curve);
        const double proxy = need(profile.proxy, "a subgaussian proxy");
        const double q = p.q();
        const double lambda = nonadaptive_share(profile, p, extras);
        const double f = p.p() * p.p() * std::pow(power_sum(var, q), 1.0 / p.p()) *
                         power_sum(var, q - 4.0) / (lambda * (p.p() + 1.0));
        return 24.0 * proxy * proxy * f * rate_fin;
    }
    case BoundCurve::T3_inf: {
        need_infinite(p, curve);
        const double proxy = need(profile.proxy, "a subgaussian proxy");
        const double f = std::sqrt(sigma2) *
                         (power_sum(var, -1.0) + sigma2 / (sd_min * sd_min * sd_min) - 2.0 / sd_min);
        return 8.0 * proxy * f * rate_inf;
    }
    case BoundCurve::T3_finite: {
        need_finite(p, curve);
        const double proxy = need(profile.proxy, "a subgaussian proxy");
        const double q = p.q();
        const double f = p.p() * p.p() * std::pow(power_sum(var, q), 2.0 / q) * power_sum(var, -4.0) /
                         (p.p() + 1.0);
        return 40.0 * proxy * proxy * f * rate_fin;
    }
    case BoundCurve::T5_contextual: {
        const double proxy = need(profile.proxy, "a subgaussian proxy");
        if (!extras.dimension) throw ConfigError("bound needs the context dimension");
        const double lambda_c = need(extras.context_lambda_min, "the context lambda_min");
        const double sigma1 = power_sum(var, 1.0);
        const double f = sigma1 * sigma1 * power_sum(var, -4.0) / 2.0;
        return 80.0 * (*extras.dimension) * proxy / lambda_c * f * rate_fin;
    }
    case BoundCurve::T6_ssg_nonadaptive: {
        const double lambda = nonadaptive_share(profile, p, extras);
        if (p.is_infinite()) return 4.0 / std::sqrt(lambda) * (sigma2 - var_min) * rate_inf;
        const double q = p.q();
        return 3.0 * p.p() * p.p() * std::pow(power_sum(var, q), 2.0 / q) / (lambda * (p.p() + 1.0)) *
               rate_fin;
    }
    case BoundCurve::T7_ssg_adaptive_inf: {
        need_infinite(p, curve);
        const double root = std::sqrt(sigma2);
        const double bracket = root * (sigma2 - 2.0 * var_min) / sd_min + root * power_sum(var, 1.0);
        return 2.0 * std::sqrt(2.0) * bracket * rate_inf;
    }
    case BoundCurve::T7_ssg_adaptive_finite: {
        need_finite(p, curve);
        const double q = p.q();
        return 5.0 * k * p.p() * p.p() * std::pow(power_sum(var, q), 2.0 / q) / (p.p() + 1.0) * rate_fin;
    }
    case BoundCurve::T8_contextual_ssg: {
        if (!extras.dimension) throw ConfigError("bound needs the context dimension");
        const double lambda_c = need(extras.context_lambda_min, "the context lambda_min");
        const double sigma1 = power_sum(var, 1.0);
        return 5.0 * (*extras.dimension) * k * sigma1 * sigma1 / lambda_c * rate_fin;
    }
    }
    throw ConfigError("unknown bound curve");
}

}  // namespace mgme
