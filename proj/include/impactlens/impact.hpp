#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "impactlens/inference.hpp"
#include "impactlens/rng.hpp"
#include "impactlens/statespace.hpp"
#include "impactlens/timeseries.hpp"

namespace impactlens {

// Simulated post-period observations on the original count scale.
// One row per retained draw, one column per post-period day.
struct CounterfactualDraws {
  Eigen::MatrixXd values;

  Eigen::Index n_draws() const { return values.rows(); }
  Eigen::Index horizon() const { return values.cols(); }
};

struct EffectSummary {
  double point = 0.0;
  double sd = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
};

struct ImpactReport {
  int post_days = 0;
  double alpha = 0.05;

  double actual_avg = 0.0;
  double actual_cum = 0.0;

  EffectSummary predicted_avg;
  EffectSummary predicted_cum;
  EffectSummary absolute_avg;
  EffectSummary absolute_cum;
  EffectSummary relative;  // scale-free; identical for average and cumulative

  double tail_prob = 0.5;    // one-sided posterior tail-area probability
  double causal_prob = 0.5;  // 1 - tail_prob
};

// Simulates the counterfactual post-period once per retained draw, starting
// from each draw's final training-day state, then maps the simulated values
// back to the original count scale. Draws are kept as-is (they may go
// negative; the Gaussian observation model implies it).
CounterfactualDraws predict_counterfactual(
    const PosteriorSamples& samples, const ModelSpec& model,
    const std::optional<Eigen::MatrixXd>& post_covariates,
    const AnalysisWindow& window, const StandardizationParams& standardization,
    Rng& rng);

// Summarizes actual vs. counterfactual: average/cumulative predictions,
// absolute and relative effects with empirical credible intervals, and the
// one-sided tail-area probability (add-one smoothed, capped at 0.5).
ImpactReport compute_impact(const std::vector<double>& actual_post,
                            const CounterfactualDraws& draws, double alpha = 0.05);

// Two-column text table in the supplementary-material row order.
std::string format_report(const ImpactReport& report, const std::string& label);

// Same record as JSON with field names matching ImpactReport.
std::string report_to_json(const ImpactReport& report, int indent = 2);

// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double p);

// One-sided add-one-smoothed tail probability of the observed cumulative
// outcome under the counterfactual draws, capped at 0.5.
double tail_area_probability(const std::vector<double>& cumulative_draws,
                             double actual_cum);

// Shared numeric formatting (4 significant digits, plain notation).
std::string format_number(double x);
std::string format_percent(double fraction);

}  // namespace impactlens
