#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mgme/experiment.hpp"

namespace mgme {

// INI-style experiment files:
//
//   [experiment]  name, policy, horizons, trials, seed, output, summary, workers, timing
//   [policy]      p, regime, proxy, lower_bound, phase3_ucb, batch_growth, lcb_margin, tail_form
//   [arms]        arms = gaussian:1, gaussian:0:2.5, rademacher, beta:0:2, constant:0
//   [contextual]  arms, dimension, beta_range = lo,hi, noise_variance_range = lo,hi
//   [bounds]      curves = T1_inf, T3_inf
//
// Overrides have the form "section.key=value" and are applied before parsing.
// Every failure raises ConfigError.
ExperimentConfig parse_experiment_config(std::istream& in, const std::vector<std::string>& overrides = {});
// Throws IoError if the file cannot be opened.
ExperimentConfig load_experiment_config(const std::string& path, const std::vector<std::string>& overrides = {});

// "gaussian:VAR", "gaussian:MEAN:VAR", "rademacher[:MEAN]", "beta:ALPHA",
// "beta:MEAN:ALPHA", "constant:VALUE".
ArmSpec parse_arm(const std::string& text);

NormOrder parse_norm(const std::string& text);
NoiseKind parse_regime(const std::string& text);
PolicyKind parse_policy(const std::string& text);

// Small-instance oracle input: [profile] variances, p, horizon.
struct OracleProfile {
    VarianceProfile profile;
    NormOrder norm = NormOrder::infinity();
    std::int64_t horizon = 0;
};

OracleProfile load_oracle_profile(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace mgme
