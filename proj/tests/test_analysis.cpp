#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "impactlens/analysis.hpp"
#include "impactlens/errors.hpp"
#include "impactlens/synth.hpp"

using namespace impactlens;

namespace {

ModelConfig quick_config(std::uint64_t seed) {
  ModelConfig config;
  config.n_iterations = 300;
  config.burn_in = 100;
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("window presets pin the reference dates") {
  const AnalysisWindow w1 = window_preset(1);
  CHECK(w1.pre_start.to_string() == "2017-01-01");
  CHECK(w1.intervention.to_string() == "2020-03-04");
  CHECK(w1.post_end.to_string() == "2020-03-16");
  CHECK(w1.pre_length() == 1158);
  CHECK(w1.post_length() == 13);

  const AnalysisWindow w2 = window_preset(2);
  CHECK(w2.post_end.to_string() == "2020-03-28");
  CHECK(w2.post_length() == 25);
  // the second window contains the first
  CHECK(w2.intervention == w1.intervention);
  CHECK(w1.post_end < w2.post_end);
  CHECK_THROWS_AS(window_preset(3), ConfigError);
}

TEST_CASE("significance stars follow the documented thresholds") {
  CHECK(significance_stars(0.2) == "");
  CHECK(significance_stars(0.09) == "*");
  CHECK(significance_stars(0.04) == "**");
  CHECK(significance_stars(0.009) == "***");
}

TEST_CASE("analyze_series: null synthetic series shows no effect") {
  SynthConfig gen;
  gen.n_pre = 240;
  gen.n_post = 20;
  gen.lift = 0.0;
  gen.seed = 4;
  const SynthOutput synth = generate_synthetic(gen);
  const AnalysisResult res =
      analyze_series(synth.series, std::nullopt, synth.window, quick_config(11));
  CHECK(std::abs(res.report.relative.point) < 0.05);
  CHECK(res.report.tail_prob > 0.05);
  CHECK(res.report.relative.ci_lower < 0.0);
  CHECK(res.report.relative.ci_upper > 0.0);
}

TEST_CASE("analyze_series plot columns satisfy their identities") {
  SynthConfig gen;
  gen.n_pre = 180;
  gen.n_post = 15;
  gen.lift = -0.1;
  gen.seed = 21;
  const SynthOutput synth = generate_synthetic(gen);
  const AnalysisResult res =
      analyze_series(synth.series, std::nullopt, synth.window, quick_config(5));

  REQUIRE(res.plot.size() == 15);
  double running = 0.0;
  for (const PlotPoint& p : res.plot) {
    CHECK(p.pointwise_effect == p.actual - p.counterfactual_median);
    running += p.pointwise_effect;
    CHECK(p.cumulative_effect == running);  // exact running sum
    CHECK(p.ci_lower <= p.counterfactual_median);
    CHECK(p.counterfactual_median <= p.ci_upper);
  }
  CHECK(res.plot.front().date == synth.window.intervention);
  // actuals in the plot equal the post segment of the input series
  for (std::size_t i = 0; i < res.plot.size(); ++i)
    CHECK(res.plot[i].actual ==
          synth.series.values[static_cast<std::size_t>(gen.n_pre) + i]);
}

TEST_CASE("analyze_series is deterministic for a fixed seed") {
  SynthConfig gen;
  gen.n_pre = 150;
  gen.n_post = 10;
  gen.seed = 31;
  const SynthOutput synth = generate_synthetic(gen);
  const AnalysisResult a =
      analyze_series(synth.series, std::nullopt, synth.window, quick_config(3));
  const AnalysisResult b =
      analyze_series(synth.series, std::nullopt, synth.window, quick_config(3));
  CHECK(report_to_json(a.report) == report_to_json(b.report));
  CHECK(plot_data_csv(a.plot) == plot_data_csv(b.plot));
}

TEST_CASE("analyze_series uses covariates when asked") {
  SynthConfig gen;
  gen.n_pre = 200;
  gen.n_post = 10;
  gen.beta = {0.5, -3.0};
  gen.seed = 17;
  const SynthOutput synth = generate_synthetic(gen);
  ModelConfig config = quick_config(13);
  config.include_covariates = true;
  const AnalysisResult res =
      analyze_series(synth.series, synth.covariates, synth.window, config);
  CHECK(res.diagnostics.beta.size() == 2);
  CHECK(res.diagnostics.inclusion_rate.size() == 2);
  CHECK_THROWS_AS(analyze_series(synth.series, std::nullopt, synth.window, config),
                  ValidationError);
}

TEST_CASE("analyze_series rejects constant series") {
  DailySeries flat{Date::from_ymd(2019, 1, 1), std::vector<double>(100, 6.0)};
  const AnalysisWindow window(Date::from_ymd(2019, 1, 1), Date::from_ymd(2019, 3, 1),
                              Date::from_ymd(2019, 3, 10));
  CHECK_THROWS_AS(analyze_series(flat, std::nullopt, window, quick_config(1)),
                  FitError);
}

TEST_CASE("series json files round-trip") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "impactlens_series.json").string();
  DailySeries series{Date::from_ymd(2019, 5, 1), {1.5, 0.0, 3.25}};
  write_series_json(path, "demo", series);
  const DailySeries back = read_series_json(path);
  CHECK(back.start == series.start);
  CHECK(back.values == series.values);
  std::filesystem::remove(path);
}

TEST_CASE("plot csv contains the expected header and rows") {
  std::vector<PlotPoint> plot(2);
  plot[0].date = Date::from_ymd(2020, 3, 4);
  plot[0].actual = 17;
  plot[1].date = Date::from_ymd(2020, 3, 5);
  const std::string csv = plot_data_csv(plot);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line ==
        "date,actual,counterfactual_median,ci_lower,ci_upper,pointwise_effect,"
        "cumulative_effect");
  std::getline(lines, line);
  CHECK(line.rfind("2020-03-04,17,", 0) == 0);
}

TEST_CASE("reproduce covers the full grid and stays deterministic") {
  // miniature dataset: 10 slugs with individually seeded synthetic series
  std::map<std::string, DailySeries> series;
  std::map<std::string, std::string> names;
  AnalysisWindow window(Date::from_ymd(2018, 1, 1), Date::from_ymd(2018, 5, 1),
                        Date::from_ymd(2018, 5, 10));
  std::optional<CovariateSet> covariates;
  const std::vector<std::string> slugs = {
      "assault_dw", "battery",     "burglary", "intimate_partner_assault",
      "robbery",    "shoplifting", "theft",    "stolen_vehicle",
      "homicide",   "overall"};
  for (std::size_t i = 0; i < slugs.size(); ++i) {
    SynthConfig gen;
    gen.start = Date::from_ymd(2018, 1, 1);
    gen.n_pre = 120;
    gen.n_post = 15;
    gen.beta = {0.2, -1.0};
    gen.seed = 900 + i;
    const SynthOutput synth = generate_synthetic(gen);
    series.emplace(slugs[i], synth.series);
    names[slugs[i]] = slugs[i];
    if (!covariates) covariates = synth.covariates;
  }

  ReproduceOptions options;
  options.config.n_iterations = 150;
  options.config.burn_in = 50;
  options.config.seed = 77;
  options.window1 = AnalysisWindow(Date::from_ymd(2018, 1, 1),
                                   Date::from_ymd(2018, 5, 1),
                                   Date::from_ymd(2018, 5, 5));
  options.window2 = window;
  options.threads = 2;

  const ReproduceResult a = reproduce(series, names, covariates, options);
  CHECK(a.cells.size() == 40);
  for (const auto& cell : a.cells) {
    INFO(cell.category << " w" << cell.window << " cov=" << cell.with_covariates
                       << " error=" << cell.error);
    CHECK(cell.report.has_value());
  }

  // per-cell seeds are stable, so a rerun gives identical numbers even with
  // a different thread count
  ReproduceOptions serial = options;
  serial.threads = 1;
  const ReproduceResult b = reproduce(series, names, covariates, serial);
  REQUIRE(b.cells.size() == a.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].report->relative.point == b.cells[i].report->relative.point);
    CHECK(a.cells[i].report->tail_prob == b.cells[i].report->tail_prob);
  }
  CHECK(consolidated_table(a) == consolidated_table(b));

  // the consolidated table shows each cell's relative effect
  const std::string table = consolidated_table(a);
  for (const auto& cell : a.cells) {
    CHECK(table.find(format_percent(cell.report->relative.point)) !=
          std::string::npos);
  }

  // a deliberately broken series fails its own cells only
  series.at("homicide").values.assign(series.at("homicide").values.size(), 2.0);
  const ReproduceResult c = reproduce(series, names, covariates, serial);
  int failed = 0, succeeded = 0;
  for (const auto& cell : c.cells) {
    if (cell.report)
      ++succeeded;
    else {
      ++failed;
      CHECK(cell.category == "homicide");
      CHECK(!cell.error.empty());
    }
  }
  CHECK(failed == 4);
  CHECK(succeeded == 36);
}

TEST_CASE("cell seeds differ across the grid") {
  const std::uint64_t base = cell_seed(7, "robbery", 1, false);
  CHECK(base != cell_seed(7, "robbery", 1, true));
  CHECK(base != cell_seed(7, "robbery", 2, false));
  CHECK(base != cell_seed(7, "theft", 1, false));
  CHECK(base != cell_seed(8, "robbery", 1, false));
  CHECK(base == cell_seed(7, "robbery", 1, false));
}
