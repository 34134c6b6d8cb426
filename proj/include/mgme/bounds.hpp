#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "mgme/allocation.hpp"

namespace mgme {

// Leading terms of the regret upper bounds. The lower-order remainders are
// not tracked.
enum class BoundCurve {
    T1_inf,                  // non-adaptive, GSG, p = inf
    T2_finite,               // non-adaptive, GSG, finite p
    T3_inf,                  // adaptive, GSG, p = inf
    T3_finite,               // adaptive, GSG, finite p
    T5_contextual,           // contextual, GSG, p = 1
    T6_ssg_nonadaptive,      // non-adaptive, SSG, either p
    T7_ssg_adaptive_inf,     // adaptive, SSG, p = inf
    T7_ssg_adaptive_finite,  // adaptive, SSG, finite p
    T8_contextual_ssg,       // contextual, SSG, p = 1
};

struct BoundRate {
    double t_exponent;    // T^t_exponent
    double log_exponent;  // (log T)^log_exponent
};

struct BoundExtras {
    std::optional<int> dimension;
    std::optional<double> context_lambda_min;
    // Non-adaptive share lambda; derived from lower_bound and proxy when absent.
    std::optional<double> lambda;
};

std::string_view bound_name(BoundCurve curve);
// Throws ConfigError for unknown names.
BoundCurve parse_bound(std::string_view name);

BoundRate bound_rate(BoundCurve curve, const NormOrder& p);

// Leading-term value at horizon T. Throws ConfigError when a quantity the
// curve needs (proxy, lower bound, d, lambda_min) is missing or p does not
// fit the curve.
double bound_value(BoundCurve curve, const VarianceProfile& profile, const NormOrder& p,
                   std::int64_t horizon, const BoundExtras& extras = {});

}  // namespace mgme
