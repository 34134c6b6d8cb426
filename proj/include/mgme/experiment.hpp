#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mgme/allocation.hpp"
#include "mgme/arm_models.hpp"
#include "mgme/bounds.hpp"
#include "mgme/concentration.hpp"

namespace mgme {

enum class PolicyKind { NonAdaptive, Adaptive, Contextual };

std::string_view policy_name(PolicyKind kind);
std::string_view regime_name(NoiseKind kind);

// Random linear instances: beta ~ U[beta_lo, beta_hi]^d, Gaussian noise with
// variance ~ U[var_lo, var_hi], uniform hypercube contexts. One instance per
// trial, shared across horizons.
struct ContextualSetup {
    int arms = 5;
    int dimension = 4;
    double beta_lo = -2.0;
    double beta_hi = 2.0;
    double var_lo = 1.0;
    double var_hi = 4.0;
};

struct ExperimentConfig {
    std::string name = "experiment";
    PolicyKind policy = PolicyKind::Adaptive;
    std::vector<std::int64_t> horizons{2000, 5000, 10000, 20000, 50000, 100000};
    int trials = 100;
    std::uint64_t seed = 1;

    NormOrder norm = NormOrder::infinity();
    NoiseKind regime = NoiseKind::GSG;
    // Subgaussian proxy. Drives the GSG radii and the non-adaptive tau; when
    // unset the GSG proxy defaults to the largest arm variance.
    std::optional<double> proxy;
    std::optional<double> lower_bound;
    bool phase3_ucb_mode = false;
    double batch_growth = 2.0;
    double lcb_margin = 1.0;
    TailForm tail_form = TailForm::Refined;

    std::vector<ArmSpec> arms;                  // canonical policies
    std::optional<ContextualSetup> contextual;  // contextual policy

    std::vector<BoundCurve> bounds;
    std::string output;          // results CSV; empty = stdout
    std::string summary_output;  // per-T summary CSV; empty = none
    int workers = 1;
    // When false, runtime_ms is written as 0 so output is byte-reproducible.
    bool record_timing = true;
};

// Throws ConfigError on inconsistent settings.
void validate(const ExperimentConfig& cfg);

struct TrialResult {
    std::int64_t horizon = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    int arms = 0;
    double regret = 0.0;
    double objective = 0.0;
    double optimal_objective = 0.0;
    bool good_event = false;
    double runtime_ms = 0.0;
    std::vector<double> bound_values;  // parallel to cfg.bounds
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<TrialResult> trials;  // sorted by (T, trial)
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Instance variances trial `trial` uses (arm variances, or the sampled noise
// variances for the contextual policy).
std::vector<double> instance_variances(const ExperimentConfig& cfg, int trial);

// Profile handed to bound_value for a given instance.
VarianceProfile bound_profile(const ExperimentConfig& cfg, const std::vector<double>& variances);
BoundExtras bound_extras(const ExperimentConfig& cfg);

inline const char* kCsvHeader =
    "experiment,policy,regime,p,K,T,trial,seed,regret,objective,optimal_objective,bound_name,"
    "bound_value,good_event,runtime_ms";

// One row per (T, trial, bound); a single row with empty bound fields when no
// bounds are configured.
void write_csv(std::ostream& out, const ExperimentResult& result);

struct SummaryRow {
    std::int64_t horizon = 0;
    int trials = 0;
    double mean_regret = 0.0;
    double median_regret = 0.0;
    double q10_regret = 0.0;
    double q90_regret = 0.0;
    double good_event_rate = 0.0;
    std::vector<double> mean_bounds;  // parallel to cfg.bounds
};

std::vector<SummaryRow> summarize(const ExperimentResult& result);
void write_summary(std::ostream& out, const ExperimentResult& result);

// Leading-term bound curves over the configured horizons (first trial's instance).
void write_bound_curves(std::ostream& out, const ExperimentConfig& cfg);

// Exhaustive search over positive compositions of T into K parts; the first
// minimizer in lexicographic order wins. K <= 4 and T <= 60, else SizeError.
std::vector<std::int64_t> oracle_best_allocation(const VarianceProfile& profile, const NormOrder& p,
                                                 std::int64_t horizon);

struct RatePoint {
    double horizon = 0.0;
    double regret = 0.0;
};

// OLS slope of log(regret) on log(T). Nonpositive regrets are dropped; needs
// at least 4 remaining points spanning a decade, else EstimationError.
double slope_estimate(const std::vector<RatePoint>& points);

struct SlopeGroup {
    std::string experiment;
    std::string policy;
    std::string p;
    std::vector<RatePoint> points;  // mean regret per T
};

// Reads a results CSV and averages regret per (experiment, policy, p, T).
// Throws IoError if the file cannot be read or the header does not match.
std::vector<SlopeGroup> read_rate_groups(const std::string& path);

std::string format_real(double v);

}  // namespace mgme
