#include "impactlens/timeseries.hpp"

#include <cmath>

#include "impactlens/errors.hpp"

namespace impactlens {

std::size_t DailySeries::index_of(Date d) const {
  if (d < start || d > last_date())
    throw ValidationError("date " + d.to_string() + " outside series range " +
                          start.to_string() + ".." + last_date().to_string());
  return static_cast<std::size_t>(d - start);
}

void CovariateSet::check_aligned(const DailySeries& target) const {
  if (start != target.start)
    throw ValidationError("covariates start " + start.to_string() +
                          " does not match series start " + target.start.to_string());
  if (names.size() != columns.size())
    throw ValidationError("covariate names/columns count mismatch");
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != target.size())
      throw ValidationError("covariate '" + names[j] + "' length " +
                            std::to_string(columns[j].size()) +
                            " does not match series length " +
                            std::to_string(target.size()));
  }
}

AnalysisWindow::AnalysisWindow(Date pre_start_, Date intervention_, Date post_end_)
    : pre_start(pre_start_), intervention(intervention_), post_end(post_end_) {
  if (!(pre_start < intervention))
    throw ValidationError("pre_start must precede intervention date");
  if (!(intervention <= post_end))
    throw ValidationError("intervention date must not exceed post_end");
  if (pre_length() < kMinPreDays)
    throw ValidationError("pre-period of " + std::to_string(pre_length()) +
                          " days is below the minimum of " +
                          std::to_string(kMinPreDays));
}

std::vector<double> StandardizationParams::apply(const std::vector<double>& xs) const {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = apply(xs[i]);
  return out;
}

std::vector<double> StandardizationParams::invert(const std::vector<double>& zs) const {
  std::vector<double> out(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) out[i] = invert(zs[i]);
  return out;
}

DailySeries build_daily_series(const std::vector<std::pair<Date, double>>& records,
                               Date start, Date end) {
  if (start > end)
    throw ValidationError("range start " + start.to_string() + " after end " +
                          end.to_string());
  const std::size_t n = static_cast<std::size_t>(end - start) + 1;
  std::vector<double> values(n, 0.0);
  for (const auto& [date, count] : records) {
    if (date < start || date > end)
      throw RangeViolationError("record date " + date.to_string() +
                                " outside range " + start.to_string() + ".." +
                                end.to_string());
    if (!(count >= 0.0) || !std::isfinite(count))
      throw ValidationError("negative or non-finite count " +
                            std::to_string(count) + " on " + date.to_string());
    values[static_cast<std::size_t>(date - start)] += count;
  }
  return DailySeries{start, std::move(values)};
}

WindowSplit split_window(const DailySeries& series,
                         const std::optional<CovariateSet>& covariates,
                         const AnalysisWindow& window) {
  if (window.pre_start < series.start || window.post_end > series.last_date())
    throw ValidationError("analysis window " + window.pre_start.to_string() + ".." +
                          window.post_end.to_string() + " outside series range " +
                          series.start.to_string() + ".." +
                          series.last_date().to_string());
  if (covariates) covariates->check_aligned(series);

  const std::size_t pre_begin = series.index_of(window.pre_start);
  const std::size_t post_begin = series.index_of(window.intervention);
  const std::size_t post_end = series.index_of(window.post_end) + 1;

  WindowSplit out;
  out.pre.start = window.pre_start;
  out.pre.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(pre_begin),
                        series.values.begin() + static_cast<std::ptrdiff_t>(post_begin));
  out.post.start = window.intervention;
  out.post.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(post_begin),
                         series.values.begin() + static_cast<std::ptrdiff_t>(post_end));

  if (covariates) {
    CovariateSet pre_cov{window.pre_start, covariates->names, {}};
    CovariateSet post_cov{window.intervention, covariates->names, {}};
    for (const auto& col : covariates->columns) {
      pre_cov.columns.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(pre_begin),
                                   col.begin() + static_cast<std::ptrdiff_t>(post_begin));
      post_cov.columns.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(post_begin),
                                    col.begin() + static_cast<std::ptrdiff_t>(post_end));
    }
    out.pre_covariates = std::move(pre_cov);
    out.post_covariates = std::move(post_cov);
  }
  return out;
}

double sample_mean(const std::vector<double>& xs) {
  double sum = 0.0;
  for (const double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
  const double m = sample_mean(xs);
  double ss = 0.0;
  for (const double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::pair<std::vector<double>, StandardizationParams> standardize(
    const std::vector<double>& segment) {
  if (segment.size() < 2)
    throw ValidationError("standardize needs at least 2 values");
  StandardizationParams params{sample_mean(segment), sample_sd(segment)};
  if (!(params.sd > 0.0))
    throw DegenerateScaleError(
        "constant segment has zero sd; skip standardization for it");
  return {params.apply(segment), params};
}

}  // namespace impactlens
