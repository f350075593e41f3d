#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "impactlens/dates.hpp"
#include "impactlens/timeseries.hpp"

namespace impactlens {

// Generator settings for synthetic daily series drawn from the structural
// model, with an optional multiplicative lift over the post period.
struct SynthConfig {
  Date start = Date::from_ymd(2018, 1, 1);
  int n_pre = 500;
  int n_post = 25;

  double level = 100.0;
  double sigma_obs = 1.0;
  double sigma_level = 0.1;
  double sigma_seasonal = 0.01;
  double seasonal_amplitude = 1.0;

  // Covariate effects: when non-empty, the generator also produces one
  // covariate column per coefficient (a smooth annual-cycle column first,
  // then a sparse indicator column).
  std::vector<double> beta;

  // Multiplicative post-period change, e.g. -0.20 for a 20% drop.
  double lift = 0.0;

  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthOutput {
  DailySeries series;
  std::optional<CovariateSet> covariates;
  AnalysisWindow window;
  std::string truth_json;  // generator parameters, for downstream checks
};

SynthOutput generate_synthetic(const SynthConfig& config);

}  // namespace impactlens
