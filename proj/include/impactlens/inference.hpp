#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "impactlens/config.hpp"
#include "impactlens/rng.hpp"
#include "impactlens/statespace.hpp"
#include "impactlens/timeseries.hpp"

namespace impactlens {

struct TraceSummary {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// One retained sweep: parameters plus the state vector of the last
// training day, which seeds the counterfactual simulation.
struct PosteriorDraw {
  Params params;
  Eigen::VectorXd final_state;
};

struct PosteriorSamples {
  std::vector<PosteriorDraw> draws;

  // Trace diagnostics over the retained draws.
  TraceSummary sigma_obs2;
  TraceSummary sigma_level2;
  TraceSummary sigma_seasonal2;
  std::vector<TraceSummary> beta;
  std::vector<double> inclusion_rate;  // spike-and-slab only

  std::size_t size() const { return draws.size(); }
};

// Gibbs sampler over (states, variances, coefficients) for a standardized
// pre-period series. Deterministic for a fixed config.seed.
PosteriorSamples fit(const std::vector<double>& pre_series,
                     const std::optional<CovariateSet>& covariates,
                     const ModelConfig& config);

// One draw from the inverse-gamma full conditional of a disturbance
// variance: shape (prior_weight + n_terms)/2,
// scale (prior_weight * prior_sd^2 + sum_sq)/2.
double draw_variance(double sum_sq, std::int64_t n_terms, double prior_sd,
                     double prior_weight, Rng& rng);

struct RegressionPriorSpec {
  RegressionPrior kind = RegressionPrior::kSpikeSlab;
  double inclusion_prob = 0.5;
  double information_weight = 1.0;  // observations' worth in the slab
};

struct RegressionDraw {
  Eigen::VectorXd beta;        // zero entries for excluded covariates
  std::vector<bool> included;
};

// Draws coefficients from their conditional given the trend-removed
// residual and the observation variance. Under the spike-and-slab prior the
// inclusion pattern is drawn exactly (subsets enumerated for small k).
RegressionDraw draw_regression(const Eigen::VectorXd& residual,
                               const Eigen::MatrixXd& covariates,
                               double obs_variance, Rng& rng,
                               const RegressionPriorSpec& prior);

}  // namespace impactlens
