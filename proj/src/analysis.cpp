#include "impactlens/analysis.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "impactlens/errors.hpp"
#include "impactlens/statespace.hpp"

namespace impactlens {

AnalysisWindow window_preset(int which) {
  const Date pre_start = Date::from_ymd(2017, 1, 1);
  const Date intervention = Date::from_ymd(2020, 3, 4);
  if (which == 1) return AnalysisWindow(pre_start, intervention, Date::from_ymd(2020, 3, 16));
  if (which == 2) return AnalysisWindow(pre_start, intervention, Date::from_ymd(2020, 3, 28));
  throw ConfigError("window preset must be 1 or 2");
}

std::string significance_stars(double tail_prob) {
  if (tail_prob < 0.01) return "***";
  if (tail_prob < 0.05) return "**";
  if (tail_prob < 0.1) return "*";
  return "";
}

AnalysisResult analyze_series(const DailySeries& series,
                              const std::optional<CovariateSet>& covariates,
                              const AnalysisWindow& window,
                              const ModelConfig& config) {
  config.validate();
  if (config.include_covariates && !covariates)
    throw ValidationError("covariates requested but none supplied");
  const bool use_covariates = config.include_covariates && covariates.has_value() &&
                              covariates->count() > 0;

  const WindowSplit split =
      split_window(series, use_covariates ? covariates : std::nullopt, window);

  std::vector<double> pre_std;
  StandardizationParams target_params;
  try {
    std::tie(pre_std, target_params) = standardize(split.pre.values);
  } catch (const DegenerateScaleError&) {
    throw FitError("constant pre-period series cannot be fitted");
  }

  // Covariates get the same treatment on pre-period statistics; a constant
  // column keeps its raw values.
  std::optional<CovariateSet> pre_cov_std;
  std::optional<Eigen::MatrixXd> post_cov_std;
  if (use_covariates) {
    const CovariateSet& pre_cov = *split.pre_covariates;
    const CovariateSet& post_cov = *split.post_covariates;
    CovariateSet std_set{pre_cov.start, pre_cov.names, {}};
    Eigen::MatrixXd post_matrix(static_cast<Eigen::Index>(post_cov.length()),
                                static_cast<Eigen::Index>(post_cov.count()));
    for (std::size_t j = 0; j < pre_cov.columns.size(); ++j) {
      StandardizationParams col_params{0.0, 1.0};
      std::vector<double> col_std;
      try {
        std::tie(col_std, col_params) = standardize(pre_cov.columns[j]);
      } catch (const DegenerateScaleError&) {
        col_std = pre_cov.columns[j];
      }
      std_set.columns.push_back(std::move(col_std));
      const auto& post_col = post_cov.columns[j];
      for (std::size_t t = 0; t < post_col.size(); ++t)
        post_matrix(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
            col_params.apply(post_col[t]);
    }
    pre_cov_std = std::move(std_set);
    post_cov_std = std::move(post_matrix);
  }

  AnalysisResult result;
  const PosteriorSamples samples = fit(pre_std, pre_cov_std, config);
  result.diagnostics = {samples.sigma_obs2, samples.sigma_level2,
                        samples.sigma_seasonal2, samples.beta,
                        samples.inclusion_rate};

  const ModelSpec model = build_model(config, pre_cov_std, false);
  Rng predict_rng(derive_seed(config.seed, "counterfactual"));
  const CounterfactualDraws draws = predict_counterfactual(
      samples, model, post_cov_std, window, target_params, predict_rng);
  result.report = compute_impact(split.post.values, draws);

  const Eigen::Index horizon = draws.horizon();
  result.plot.reserve(static_cast<std::size_t>(horizon));
  double running = 0.0;
  for (Eigen::Index t = 0; t < horizon; ++t) {
    std::vector<double> col(draws.values.col(t).data(),
                            draws.values.col(t).data() + draws.n_draws());
    PlotPoint p;
    p.date = window.intervention + t;
    p.actual = split.post.values[static_cast<std::size_t>(t)];
    p.counterfactual_median = empirical_quantile(col, 0.5);
    p.ci_lower = empirical_quantile(col, result.report.alpha / 2.0);
    p.ci_upper = empirical_quantile(col, 1.0 - result.report.alpha / 2.0);
    p.pointwise_effect = p.actual - p.counterfactual_median;
    running += p.pointwise_effect;
    p.cumulative_effect = running;
    result.plot.push_back(p);
  }
  return result;
}

// --- canonical files -------------------------------------------------------

void write_series_json(const std::string& path, const std::string& name,
                       const DailySeries& series) {
  nlohmann::ordered_json doc{{"name", name},
                             {"start_date", series.start.to_string()},
                             {"values", series.values}};
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write series file '" + path + "'");
  out << doc.dump(2) << '\n';
}

DailySeries read_series_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open series file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("series file '" + path + "': " + e.what());
  }
  if (!doc.contains("start_date") || !doc.contains("values"))
    throw SchemaError("series file '" + path + "' needs start_date and values");
  DailySeries series{Date::parse(doc["start_date"].get<std::string>()),
                     doc["values"].get<std::vector<double>>()};
  for (const double v : series.values)
    if (!std::isfinite(v))
      throw ValidationError("series file '" + path + "' has non-finite values");
  return series;
}

std::optional<CovariateSet> read_covariates(const std::string& dir,
                                            const std::vector<std::string>& names) {
  CovariateSet set;
  bool first = true;
  for (const auto& name : names) {
    const std::string path = dir + "/" + name + ".json";
    std::ifstream probe(path);
    if (!probe) return std::nullopt;
    probe.close();
    const DailySeries column = read_series_json(path);
    if (first) {
      set.start = column.start;
      first = false;
    } else if (set.start != column.start ||
               (!set.columns.empty() && set.columns[0].size() != column.values.size())) {
      throw ValidationError("covariate files in '" + dir + "' are not aligned");
    }
    set.names.push_back(name);
    set.columns.push_back(column.values);
  }
  if (set.columns.empty()) return std::nullopt;
  return set;
}

std::string plot_data_csv(const std::vector<PlotPoint>& plot) {
  std::ostringstream out;
  out << "date,actual,counterfactual_median,ci_lower,ci_upper,"
         "pointwise_effect,cumulative_effect\n";
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  for (const PlotPoint& p : plot) {
    out << p.date.to_string() << ',' << num(p.actual) << ','
        << num(p.counterfactual_median) << ',' << num(p.ci_lower) << ','
        << num(p.ci_upper) << ',' << num(p.pointwise_effect) << ','
        << num(p.cumulative_effect) << '\n';
  }
  return out.str();
}

// --- reproduction harness ---------------------------------------------------

std::uint64_t cell_seed(std::uint64_t master, const std::string& category,
                        int window, bool with_covariates) {
  const std::string tag = category + "/w" + std::to_string(window) +
                          (with_covariates ? "/cov" : "/uni");
  return derive_seed(master, tag);
}

ReproduceResult reproduce(const std::map<std::string, DailySeries>& series_by_slug,
                          const std::map<std::string, std::string>& display_names,
                          const std::optional<CovariateSet>& covariates,
                          const ReproduceOptions& options) {
  std::vector<std::string> order = options.category_order;
  if (order.empty())
    for (const auto& [slug, series] : series_by_slug) order.push_back(slug);
  for (const auto& slug : order)
    if (!series_by_slug.count(slug))
      throw ValidationError("no series for category '" + slug + "'");

  ReproduceResult result;
  for (const auto& slug : order) {
    for (const int window : {1, 2}) {
      for (const bool with_cov : {false, true}) {
        ReproduceCell cell;
        cell.category = slug;
        const auto it = display_names.find(slug);
        cell.display_name = it != display_names.end() ? it->second : slug;
        cell.window = window;
        cell.with_covariates = with_cov;
        result.cells.push_back(std::move(cell));
      }
    }
  }

  unsigned workers = options.threads > 0
                         ? static_cast<unsigned>(options.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(result.cells.size()));

  std::atomic<std::size_t> next{0};
  auto run = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= result.cells.size()) return;
      ReproduceCell& cell = result.cells[i];
      try {
        ModelConfig cfg = options.config;
        cfg.include_covariates = cell.with_covariates;
        cfg.seed = cell_seed(options.config.seed, cell.category, cell.window,
                             cell.with_covariates);
        const AnalysisWindow& window =
            cell.window == 1 ? options.window1 : options.window2;
        const AnalysisResult res = analyze_series(
            series_by_slug.at(cell.category),
            cell.with_covariates ? covariates : std::nullopt, window, cfg);
        cell.report = res.report;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };

  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  return result;
}

std::string consolidated_table(const ReproduceResult& result) {
  auto cell_text = [](const ReproduceCell& cell) -> std::string {
    if (!cell.report) return "failed";
    const ImpactReport& r = *cell.report;
    return format_percent(r.relative.point) + significance_stars(r.tail_prob) + " [" +
           format_percent(r.relative.ci_lower) + ", " +
           format_percent(r.relative.ci_upper) + "]";
  };

  // category-major layout: 4 cells per category in a stable order
  std::ostringstream out;
  constexpr int name_width = 28;
  constexpr int col_width = 26;
  const std::array<std::string, 4> headers = {"W1 Univariate", "W1 With Cov.",
                                              "W2 Univariate", "W2 With Cov."};
  out << std::string("Crime Type");
  for (int i = 10; i < name_width; ++i) out << ' ';
  for (const auto& h : headers) {
    out << h;
    for (int i = static_cast<int>(h.size()); i < col_width; ++i) out << ' ';
  }
  out << '\n';

  for (std::size_t i = 0; i < result.cells.size(); i += 4) {
    const std::string& name = result.cells[i].display_name;
    out << name;
    for (int j = static_cast<int>(name.size()); j < name_width; ++j) out << ' ';
    // cells arrive as (w1,uni), (w1,cov), (w2,uni), (w2,cov)
    const std::array<std::size_t, 4> order = {i, i + 1, i + 2, i + 3};
    for (const std::size_t idx : order) {
      const std::string text = cell_text(result.cells[idx]);
      out << text;
      for (int j = static_cast<int>(text.size()); j < col_width; ++j) out << ' ';
    }
    out << '\n';
  }
  out << "Stars: * p<0.1, ** p<0.05, *** p<0.01 (repository convention).\n";
  return out.str();
}

}  // namespace impactlens
