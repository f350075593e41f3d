#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "impactlens/dates.hpp"

namespace impactlens {

// Contiguous daily counts for one category: index i holds the value for
// start + i days. Immutable after construction.
struct DailySeries {
  Date start;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  Date date_at(std::size_t i) const { return start + static_cast<std::int64_t>(i); }
  Date last_date() const { return start + static_cast<std::int64_t>(values.size()) - 1; }

  // Index of a date within the series; throws ValidationError when outside.
  std::size_t index_of(Date d) const;
};

// Named regressor columns aligned day-by-day with a target series.
struct CovariateSet {
  Date start;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t length() const { return columns.empty() ? 0 : columns[0].size(); }
  std::size_t count() const { return columns.size(); }

  // Throws ValidationError unless every column matches the target exactly.
  void check_aligned(const DailySeries& target) const;
};

// Pre/post analysis window. Pre period is [pre_start, intervention),
// post period is [intervention, post_end], both inclusive of their days.
struct AnalysisWindow {
  Date pre_start;
  Date intervention;
  Date post_end;

  AnalysisWindow(Date pre_start, Date intervention, Date post_end);

  // Training length in days.
  std::int64_t pre_length() const { return intervention - pre_start; }
  // Post-intervention length in days.
  std::int64_t post_length() const { return post_end - intervention + 1; }
  // Total length in days.
  std::int64_t total_length() const { return pre_length() + post_length(); }
};

// Shortest admissible training window.
inline constexpr std::int64_t kMinPreDays = 30;

// Affine transform fitted on a pre-period segment; applying then inverting
// reproduces the input to floating-point accuracy.
struct StandardizationParams {
  double mean = 0.0;
  double sd = 1.0;

  double apply(double x) const { return (x - mean) / sd; }
  double invert(double z) const { return z * sd + mean; }

  std::vector<double> apply(const std::vector<double>& xs) const;
  std::vector<double> invert(const std::vector<double>& zs) const;
};

// Builds a gap-free daily series over [start, end] from dated records.
// Days with no record get 0; duplicate dates are summed.
DailySeries build_daily_series(const std::vector<std::pair<Date, double>>& records,
                               Date start, Date end);

struct WindowSplit {
  DailySeries pre;
  DailySeries post;
  std::optional<CovariateSet> pre_covariates;
  std::optional<CovariateSet> post_covariates;
};

// Splits a series (and aligned covariates) into pre/post segments.
WindowSplit split_window(const DailySeries& series,
                         const std::optional<CovariateSet>& covariates,
                         const AnalysisWindow& window);

// Centers and scales a segment to mean 0, sample sd 1.
// Throws DegenerateScaleError for constant segments; the caller should then
// skip standardization for that segment.
std::pair<std::vector<double>, StandardizationParams> standardize(
    const std::vector<double>& segment);

double sample_mean(const std::vector<double>& xs);
double sample_sd(const std::vector<double>& xs);

}  // namespace impactlens
