// Experiment configuration: strict key = value text. Unknown keys are
// errors so a typo cannot silently change the physics.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coagsim/microsim.hpp"

namespace coagsim {

struct ExperimentConfig {
  std::string experiment;  // E1..E5
  double epsilon = 0.0;
  double alpha = 0.0;
  double nu = 0.0;
  double nu_tilde = 0.0;
  double mu = 0.0;
  double kappa = 0.0;
  double theta = 0.0;
  double margin = 0.0;
  double a = 0.0;
  std::vector<double> rho;
  double t_macro_end = 0.0;
  double sample_every = 0.0;
  std::optional<double> dt_override;
  double delta = 0.0;
  std::int64_t replicas = 0;
  std::uint64_t master_seed = 0;
};

// Throws std::runtime_error naming the offending line for unknown keys,
// unparsable values, duplicates and missing keys.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin = "<string>");

// Canonical rendering; parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const ExperimentConfig& cfg);

// Scaling parameters for a given ladder rung (epsilon may differ from the
// configured one; dt_override is rescaled by the ratio of the conservative
// step bounds so the stability margin is constant across the ladder).
ScalingParams scaling_params_for(const ExperimentConfig& cfg, double epsilon);

}  // namespace coagsim
