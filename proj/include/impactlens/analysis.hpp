#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impactlens/impact.hpp"
#include "impactlens/inference.hpp"
#include "impactlens/timeseries.hpp"

namespace impactlens {

// Post-intervention window presets from the reference analysis:
// pre-period 2017-01-01..2020-03-03, post starting 2020-03-04 and ending
// on 2020-03-16 (preset 1) or 2020-03-28 (preset 2).
AnalysisWindow window_preset(int which);

struct PlotPoint {
  Date date;
  double actual = 0.0;
  double counterfactual_median = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double pointwise_effect = 0.0;   // actual minus counterfactual median
  double cumulative_effect = 0.0;  // running sum of the pointwise column
};

struct Diagnostics {
  TraceSummary sigma_obs2;
  TraceSummary sigma_level2;
  TraceSummary sigma_seasonal2;
  std::vector<TraceSummary> beta;
  std::vector<double> inclusion_rate;
};

struct AnalysisResult {
  ImpactReport report;
  std::vector<PlotPoint> plot;
  Diagnostics diagnostics;
};

// Full pipeline for one series: split, standardize on pre-period statistics,
// fit, simulate the counterfactual, summarize. Deterministic in config.seed.
AnalysisResult analyze_series(const DailySeries& series,
                              const std::optional<CovariateSet>& covariates,
                              const AnalysisWindow& window,
                              const ModelConfig& config);

// Significance stars for consolidated tables. Repository convention
// (p < 0.1 / 0.05 / 0.01), not defined by the reference tables.
std::string significance_stars(double tail_prob);

// --- canonical series files ----------------------------------------------

void write_series_json(const std::string& path, const std::string& name,
                       const DailySeries& series);
DailySeries read_series_json(const std::string& path);

// Covariate columns stored one file per column with the same schema.
std::optional<CovariateSet> read_covariates(const std::string& dir,
                                            const std::vector<std::string>& names);

std::string plot_data_csv(const std::vector<PlotPoint>& plot);

// --- reproduction harness -------------------------------------------------

struct ReproduceCell {
  std::string category;       // slug
  std::string display_name;
  int window = 1;             // 1 or 2
  bool with_covariates = false;
  std::optional<ImpactReport> report;
  std::string error;          // set when this fit failed
};

struct ReproduceOptions {
  ModelConfig config;          // per-run overrides; seed acts as master seed
  AnalysisWindow window1;
  AnalysisWindow window2;
  int threads = 0;             // 0 = hardware concurrency
  // row order of the consolidated table; empty = alphabetical
  std::vector<std::string> category_order;

  ReproduceOptions() : window1(window_preset(1)), window2(window_preset(2)) {}
};

struct ReproduceResult {
  std::vector<ReproduceCell> cells;  // category-major, 4 cells per category
};

// Runs every category through both windows and both model kinds.
// Individual failures are recorded in their cell; the rest continue.
ReproduceResult reproduce(const std::map<std::string, DailySeries>& series_by_slug,
                          const std::map<std::string, std::string>& display_names,
                          const std::optional<CovariateSet>& covariates,
                          const ReproduceOptions& options);

// Consolidated relative-effect table in the overview layout.
std::string consolidated_table(const ReproduceResult& result);

// Stable per-cell seed derivation so parallel execution stays reproducible.
std::uint64_t cell_seed(std::uint64_t master, const std::string& category,
                        int window, bool with_covariates);

}  // namespace impactlens
