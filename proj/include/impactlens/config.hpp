#pragma once

#include <cstdint>

namespace impactlens {

struct SeasonalitySpec {
  int n_seasons = 7;  // weekly by default
  int duration = 1;   // days per season
};

enum class RegressionPrior {
  kSpikeSlab,         // variable selection, prior inclusion 0.5 per covariate
  kConjugateNormal,   // all covariates always included
};

// Sampler and prior configuration for one model fit.
struct ModelConfig {
  int n_iterations = 1000;
  int burn_in = 200;
  SeasonalitySpec seasonality;

  // Prior guesses for disturbance sds, interpreted on the standardized scale.
  double prior_level_sd = 0.1;
  double prior_seasonal_sd = 0.01;
  double prior_obs_sd = 1.0;

  // Pseudo-observation count backing each variance prior.
  double variance_prior_weight = 32.0;

  bool include_covariates = false;
  RegressionPrior regression_prior = RegressionPrior::kSpikeSlab;
  double spike_inclusion_prob = 0.5;
  // Observations' worth of information in the slab (Zellner-style).
  double slab_information_weight = 1.0;

  std::uint64_t seed = 0;

  int retained_draws() const { return n_iterations - burn_in; }

  // Throws ConfigError on invalid settings.
  void validate() const;
};

}  // namespace impactlens
