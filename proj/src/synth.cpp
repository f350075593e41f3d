#include "impactlens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "impactlens/errors.hpp"
#include "impactlens/rng.hpp"

namespace impactlens {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void SynthConfig::validate() const {
  if (n_pre < kMinPreDays)
    throw ConfigError("n_pre must be at least " + std::to_string(kMinPreDays));
  if (n_post < 1) throw ConfigError("n_post must be at least 1");
  if (sigma_obs < 0 || sigma_level < 0 || sigma_seasonal < 0)
    throw ConfigError("generator sds must be non-negative");
  if (lift <= -1.0) throw ConfigError("lift must be greater than -1");
  if (beta.size() > 2)
    throw ConfigError("generator supports at most 2 covariates");
}

SynthOutput generate_synthetic(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int n = config.n_pre + config.n_post;
  const std::size_t k = config.beta.size();

  // Covariate columns: an annual temperature-like cycle and a sparse
  // holiday-like indicator.
  std::vector<std::vector<double>> covariate_columns;
  std::vector<std::string> covariate_names;
  if (k >= 1) {
    std::vector<double> cycle(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
      cycle[static_cast<std::size_t>(t)] =
          70.0 + 10.0 * std::sin(kTwoPi * t / 365.25) + 0.5 * rng.normal();
    covariate_columns.push_back(std::move(cycle));
    covariate_names.push_back("cycle");
  }
  if (k >= 2) {
    std::vector<double> indicator(static_cast<std::size_t>(n), 0.0);
    for (int t = 0; t < n; ++t)
      if (rng.uniform() < 0.03) indicator[static_cast<std::size_t>(t)] = 1.0;
    covariate_columns.push_back(std::move(indicator));
    covariate_names.push_back("indicator");
  }

  // Weekly pattern with effects that sum to zero exactly.
  std::vector<double> seasonal(7);
  for (int j = 0; j < 7; ++j)
    seasonal[static_cast<std::size_t>(j)] =
        config.seasonal_amplitude * std::cos(kTwoPi * j / 7.0);

  std::vector<double> values(static_cast<std::size_t>(n));
  double level = config.level;
  for (int t = 0; t < n; ++t) {
    if (t > 0) {
      level += config.sigma_level * rng.normal();
      // the current effect drifts; remaining effects rotate
      const double drift = config.sigma_seasonal * rng.normal();
      double prev_sum = 0.0;
      for (int j = 0; j < 6; ++j) prev_sum += seasonal[static_cast<std::size_t>(j)];
      std::rotate(seasonal.rbegin(), seasonal.rbegin() + 1, seasonal.rend());
      seasonal[0] = -prev_sum + drift;
    }
    double y = level + seasonal[0] + config.sigma_obs * rng.normal();
    for (std::size_t j = 0; j < k; ++j)
      y += config.beta[j] * covariate_columns[j][static_cast<std::size_t>(t)];
    if (t >= config.n_pre) y *= (1.0 + config.lift);
    values[static_cast<std::size_t>(t)] = y;
  }

  const Date intervention = config.start + config.n_pre;
  SynthOutput out{DailySeries{config.start, std::move(values)},
                  std::nullopt,
                  AnalysisWindow(config.start, intervention,
                                 intervention + (config.n_post - 1)),
                  {}};
  if (k > 0)
    out.covariates = CovariateSet{config.start, std::move(covariate_names),
                                  std::move(covariate_columns)};

  nlohmann::ordered_json truth{{"start", config.start.to_string()},
                               {"n_pre", config.n_pre},
                               {"n_post", config.n_post},
                               {"level", config.level},
                               {"sigma_obs", config.sigma_obs},
                               {"sigma_level", config.sigma_level},
                               {"sigma_seasonal", config.sigma_seasonal},
                               {"seasonal_amplitude", config.seasonal_amplitude},
                               {"beta", config.beta},
                               {"lift", config.lift},
                               {"seed", config.seed}};
  out.truth_json = truth.dump(2);
  return out;
}

}  // namespace impactlens
