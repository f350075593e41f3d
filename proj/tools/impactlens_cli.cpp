// impactlens command line: ingest raw extracts, analyze one series,
// reproduce the full category grid, or generate synthetic benchmarks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "impactlens/analysis.hpp"
#include "impactlens/errors.hpp"
#include "impactlens/impact.hpp"
#include "impactlens/ingest.hpp"
#include "impactlens/synth.hpp"

namespace fs = std::filesystem;
using namespace impactlens;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitMissingInput = 2;

struct RunConfig {
  std::vector<std::string> crime_files;
  std::string temperature_file;
  std::string taxonomy_file;
  std::string data_dir;
  std::string out_dir;
  std::string category = "overall";
  std::string window = "1";  // "1", "2" or "custom"
  std::string pre_start;
  std::string intervention;
  std::string post_end;
  std::string post_end2;     // second window end for reproduce
  std::string range_start = "2017-01-01";
  std::string range_end = "2020-03-28";
  bool covariates = false;
  int iters = 1000;
  int burn_in = 200;
  double prior_level_sd = 0.1;
  double prior_seasonal_sd = 0.01;
  std::uint64_t seed = 0;
  int threads = 0;

  // synth generator settings
  int n_pre = 500;
  int n_post = 25;
  double level = 100.0;
  double sigma_obs = 1.0;
  double sigma_level = 0.1;
  double sigma_seasonal = 0.01;
  double seasonal_amplitude = 1.0;
  double lift = 0.0;
  std::vector<double> beta;
};

void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  in >> doc;
  auto get = [&doc](const char* key, auto& target) {
    if (doc.contains(key)) target = doc[key].get<std::decay_t<decltype(target)>>();
  };
  get("crime_files", cfg.crime_files);
  get("temperature_file", cfg.temperature_file);
  get("taxonomy_file", cfg.taxonomy_file);
  get("data_dir", cfg.data_dir);
  get("out_dir", cfg.out_dir);
  get("category", cfg.category);
  get("window", cfg.window);
  get("pre_start", cfg.pre_start);
  get("intervention", cfg.intervention);
  get("post_end", cfg.post_end);
  get("post_end2", cfg.post_end2);
  get("range_start", cfg.range_start);
  get("range_end", cfg.range_end);
  get("covariates", cfg.covariates);
  get("iters", cfg.iters);
  get("burn_in", cfg.burn_in);
  get("prior_level_sd", cfg.prior_level_sd);
  get("prior_seasonal_sd", cfg.prior_seasonal_sd);
  get("seed", cfg.seed);
  get("threads", cfg.threads);
  get("n_pre", cfg.n_pre);
  get("n_post", cfg.n_post);
  get("level", cfg.level);
  get("sigma_obs", cfg.sigma_obs);
  get("sigma_level", cfg.sigma_level);
  get("sigma_seasonal", cfg.sigma_seasonal);
  get("seasonal_amplitude", cfg.seasonal_amplitude);
  get("lift", cfg.lift);
  get("beta", cfg.beta);
}

ModelConfig model_config_from(const RunConfig& cfg) {
  ModelConfig mc;
  mc.n_iterations = cfg.iters;
  mc.burn_in = cfg.burn_in;
  mc.prior_level_sd = cfg.prior_level_sd;
  mc.prior_seasonal_sd = cfg.prior_seasonal_sd;
  mc.include_covariates = cfg.covariates;
  mc.seed = cfg.seed;
  return mc;
}

AnalysisWindow window_from(const RunConfig& cfg) {
  if (cfg.window == "1") return window_preset(1);
  if (cfg.window == "2") return window_preset(2);
  if (cfg.window == "custom") {
    if (cfg.pre_start.empty() || cfg.intervention.empty() || cfg.post_end.empty())
      throw ConfigError("custom window needs --pre-start, --intervention, --post-end");
    return AnalysisWindow(Date::parse(cfg.pre_start), Date::parse(cfg.intervention),
                          Date::parse(cfg.post_end));
  }
  throw ConfigError("window must be 1, 2 or custom");
}

void require_out_dir(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("--out is required");
  fs::create_directories(cfg.out_dir);
}

const std::vector<std::string> kCovariateNames = {"max_temperature", "holiday"};

int cmd_ingest(const RunConfig& cfg) {
  if (cfg.crime_files.empty()) throw ConfigError("ingest needs at least one --crime file");
  for (const auto& path : cfg.crime_files)
    if (!fs::exists(path)) {
      std::cerr << "error: input path does not exist: " << path << '\n';
      return kExitMissingInput;
    }
  if (!cfg.temperature_file.empty() && !fs::exists(cfg.temperature_file)) {
    std::cerr << "error: input path does not exist: " << cfg.temperature_file << '\n';
    return kExitMissingInput;
  }
  require_out_dir(cfg);

  const Date start = Date::parse(cfg.range_start);
  const Date end = Date::parse(cfg.range_end);
  const CategoryTaxonomy taxonomy = cfg.taxonomy_file.empty()
                                        ? CategoryTaxonomy::lapd_default()
                                        : CategoryTaxonomy::load(cfg.taxonomy_file);

  std::vector<CrimeRecord> all_records;
  std::size_t total_row_errors = 0;
  std::cout << "Source                          Records    Bad rows\n";
  for (const auto& path : cfg.crime_files) {
    CrimeParseResult parsed = parse_crime_file(path);
    std::cout << path;
    for (std::size_t i = path.size(); i < 32; ++i) std::cout << ' ';
    std::cout << parsed.records.size() << "    " << parsed.row_errors.size() << '\n';
    total_row_errors += parsed.row_errors.size();
    if (!parsed.row_errors.empty()) {
      std::ofstream err(fs::path(cfg.out_dir) / "ingest_errors.txt",
                        std::ios::app);
      err << "# " << path << '\n';
      for (const auto& msg : parsed.row_errors) err << msg << '\n';
    }
    all_records.insert(all_records.end(),
                       std::make_move_iterator(parsed.records.begin()),
                       std::make_move_iterator(parsed.records.end()));
  }
  std::cout << "Total records: " << all_records.size() << '\n';
  if (total_row_errors > 0)
    std::cout << "Rows routed to error summary: " << total_row_errors
              << " (see ingest_errors.txt)\n";

  const auto series = build_category_series(all_records, taxonomy, start, end);
  for (const auto& [slug, s] : series)
    write_series_json((fs::path(cfg.out_dir) / (slug + ".json")).string(), slug, s);

  if (!cfg.temperature_file.empty()) {
    const std::vector<double> tmax =
        load_temperature(cfg.temperature_file, start, end);
    write_series_json((fs::path(cfg.out_dir) / "max_temperature.json").string(),
                      "max_temperature", DailySeries{start, tmax});
  }
  const std::vector<double> holidays =
      holiday_column(start, end, HolidayCalendar::us_federal());
  write_series_json((fs::path(cfg.out_dir) / "holiday.json").string(), "holiday",
                    DailySeries{start, holidays});

  std::cout << "Wrote " << series.size() << " series files to " << cfg.out_dir << '\n';
  return 0;
}

std::optional<CovariateSet> load_covariates_if_needed(const RunConfig& cfg) {
  if (!cfg.covariates) return std::nullopt;
  auto cov = read_covariates(cfg.data_dir, kCovariateNames);
  if (!cov)
    throw ValidationError("covariate files (max_temperature.json, holiday.json) "
                          "not found in " + cfg.data_dir);
  return cov;
}

void write_analysis_outputs(const fs::path& dir, const std::string& stem,
                            const std::string& label, const AnalysisResult& res) {
  {
    std::ofstream out(dir / (stem + ".txt"));
    out << format_report(res.report, label);
  }
  {
    std::ofstream out(dir / (stem + ".json"));
    out << report_to_json(res.report) << '\n';
  }
  {
    std::ofstream out(dir / (stem + "_plot.csv"));
    out << plot_data_csv(res.plot);
  }
}

int cmd_analyze(const RunConfig& cfg) {
  if (cfg.data_dir.empty()) throw ConfigError("--data is required");
  const fs::path series_path = fs::path(cfg.data_dir) / (cfg.category + ".json");
  if (!fs::exists(series_path)) {
    std::cerr << "error: input path does not exist: " << series_path.string() << '\n';
    return kExitMissingInput;
  }
  require_out_dir(cfg);

  const DailySeries series = read_series_json(series_path.string());
  const AnalysisWindow window = window_from(cfg);
  const std::string stem = "report_" + cfg.category + "_w" + cfg.window;

  // univariate model always; the covariate model additionally when flagged
  ModelConfig mc = model_config_from(cfg);
  mc.include_covariates = false;
  const AnalysisResult uni = analyze_series(series, std::nullopt, window, mc);
  write_analysis_outputs(cfg.out_dir, stem + "_uni", cfg.category, uni);
  std::cout << format_report(uni.report, cfg.category + " (univariate)");

  if (cfg.covariates) {
    const std::optional<CovariateSet> covariates = load_covariates_if_needed(cfg);
    ModelConfig mcc = model_config_from(cfg);
    const AnalysisResult cov = analyze_series(series, covariates, window, mcc);
    write_analysis_outputs(cfg.out_dir, stem + "_cov", cfg.category, cov);
    std::cout << format_report(cov.report, cfg.category + " (with covariates)");
  }
  std::cout << "Outputs written to " << cfg.out_dir << '\n';
  return 0;
}

int cmd_reproduce(const RunConfig& cfg) {
  if (cfg.data_dir.empty()) throw ConfigError("--data is required");
  if (!fs::exists(cfg.data_dir)) {
    std::cerr << "error: input path does not exist: " << cfg.data_dir << '\n';
    return kExitMissingInput;
  }
  require_out_dir(cfg);

  const CategoryTaxonomy taxonomy = cfg.taxonomy_file.empty()
                                        ? CategoryTaxonomy::lapd_default()
                                        : CategoryTaxonomy::load(cfg.taxonomy_file);
  std::map<std::string, DailySeries> series;
  std::map<std::string, std::string> names;
  std::vector<std::string> slugs = taxonomy.category_slugs();
  slugs.push_back("overall");
  for (const auto& slug : slugs) {
    const fs::path path = fs::path(cfg.data_dir) / (slug + ".json");
    if (!fs::exists(path)) {
      std::cerr << "error: input path does not exist: " << path.string() << '\n';
      return kExitMissingInput;
    }
    series.emplace(slug, read_series_json(path.string()));
    names[slug] = slug == "overall" ? "Overall Crimes" : taxonomy.display_name(slug);
  }
  const auto covariates = read_covariates(cfg.data_dir, kCovariateNames);

  ReproduceOptions options;
  options.config = model_config_from(cfg);
  options.threads = cfg.threads;
  options.category_order = taxonomy.category_slugs();
  options.category_order.push_back("overall");
  if (!cfg.pre_start.empty()) {
    // custom windows (used with synthetic data)
    if (cfg.intervention.empty() || cfg.post_end.empty() || cfg.post_end2.empty())
      throw ConfigError("custom reproduce windows need --pre-start, --intervention, "
                        "--post-end and --post-end2");
    options.window1 = AnalysisWindow(Date::parse(cfg.pre_start),
                                     Date::parse(cfg.intervention),
                                     Date::parse(cfg.post_end));
    options.window2 = AnalysisWindow(Date::parse(cfg.pre_start),
                                     Date::parse(cfg.intervention),
                                     Date::parse(cfg.post_end2));
  }

  const ReproduceResult result = reproduce(series, names, covariates, options);

  const std::string table = consolidated_table(result);
  {
    std::ofstream out(fs::path(cfg.out_dir) / "consolidated.txt");
    out << table;
  }
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const ReproduceCell& cell : result.cells) {
    nlohmann::ordered_json entry{{"category", cell.category},
                                 {"window", cell.window},
                                 {"with_covariates", cell.with_covariates}};
    if (cell.report) {
      entry["report"] = nlohmann::ordered_json::parse(report_to_json(*cell.report));
      const std::string stem = "report_" + cell.category + "_w" +
                               std::to_string(cell.window) +
                               (cell.with_covariates ? "_cov" : "_uni");
      std::ofstream out(fs::path(cfg.out_dir) / (stem + ".txt"));
      out << format_report(*cell.report, cell.display_name);
    } else {
      entry["error"] = cell.error;
    }
    cells.push_back(std::move(entry));
  }
  {
    std::ofstream out(fs::path(cfg.out_dir) / "consolidated.json");
    out << cells.dump(2) << '\n';
  }

  std::cout << table;
  std::size_t failed = 0;
  for (const auto& cell : result.cells)
    if (!cell.report) ++failed;
  if (failed > 0) std::cout << failed << " of " << result.cells.size()
                            << " fits failed; see consolidated.json\n";
  std::cout << "Outputs written to " << cfg.out_dir << '\n';
  return 0;
}

int cmd_synth(const RunConfig& cfg) {
  require_out_dir(cfg);
  SynthConfig sc;
  sc.n_pre = cfg.n_pre;
  sc.n_post = cfg.n_post;
  sc.level = cfg.level;
  sc.sigma_obs = cfg.sigma_obs;
  sc.sigma_level = cfg.sigma_level;
  sc.sigma_seasonal = cfg.sigma_seasonal;
  sc.seasonal_amplitude = cfg.seasonal_amplitude;
  sc.lift = cfg.lift;
  sc.beta = cfg.beta;
  sc.seed = cfg.seed;

  const SynthOutput out = generate_synthetic(sc);
  write_series_json((fs::path(cfg.out_dir) / "synthetic.json").string(), "synthetic",
                    out.series);
  if (out.covariates)
    for (std::size_t j = 0; j < out.covariates->count(); ++j)
      write_series_json(
          (fs::path(cfg.out_dir) / (out.covariates->names[j] + ".json")).string(),
          out.covariates->names[j],
          DailySeries{out.covariates->start, out.covariates->columns[j]});
  {
    std::ofstream truth(fs::path(cfg.out_dir) / "truth.json");
    truth << out.truth_json << '\n';
  }
  std::cout << "Synthetic series: " << out.series.size() << " days starting "
            << out.series.start.to_string() << ", intervention "
            << out.window.intervention.to_string() << '\n';
  std::cout << "Outputs written to " << cfg.out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian structural time-series causal impact analysis"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file mirroring the flags");
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--out", cfg.out_dir, "Output directory");
  };
  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--iters", cfg.iters, "MCMC iterations");
    sub->add_option("--burn-in", cfg.burn_in, "Burn-in iterations to discard");
    sub->add_option("--prior-level-sd", cfg.prior_level_sd,
                    "Prior sd of the level disturbance (standardized scale)");
    sub->add_option("--prior-seasonal-sd", cfg.prior_seasonal_sd,
                    "Prior sd of the seasonal disturbance");
  };
  auto add_window_flags = [&](CLI::App* sub) {
    sub->add_option("--window", cfg.window, "Window preset: 1, 2 or custom");
    sub->add_option("--pre-start", cfg.pre_start, "Custom pre-period start (YYYY-MM-DD)");
    sub->add_option("--intervention", cfg.intervention, "Custom intervention date");
    sub->add_option("--post-end", cfg.post_end, "Custom post-period end");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "Parse raw extracts into series files");
  ingest->add_option("--crime", cfg.crime_files, "LAPD crime extract CSV (repeatable)");
  ingest->add_option("--temperature", cfg.temperature_file, "NOAA daily summaries CSV");
  ingest->add_option("--taxonomy", cfg.taxonomy_file, "Category taxonomy JSON");
  ingest->add_option("--start", cfg.range_start, "Series range start");
  ingest->add_option("--end", cfg.range_end, "Series range end");
  add_common(ingest);

  CLI::App* analyze = app.add_subcommand("analyze", "Fit one series and report impact");
  analyze->add_option("--data", cfg.data_dir, "Directory with canonical series files");
  analyze->add_option("--category", cfg.category, "Category slug (e.g. robbery, overall)");
  analyze->add_flag("--covariates", cfg.covariates,
                    "Also fit the model with regression covariates");
  add_window_flags(analyze);
  add_model_flags(analyze);
  add_common(analyze);

  CLI::App* repro = app.add_subcommand(
      "reproduce", "Run all categories x windows x model kinds");
  repro->add_option("--data", cfg.data_dir, "Directory with canonical series files");
  repro->add_option("--taxonomy", cfg.taxonomy_file, "Category taxonomy JSON");
  repro->add_option("--pre-start", cfg.pre_start, "Custom pre-period start");
  repro->add_option("--intervention", cfg.intervention, "Custom intervention date");
  repro->add_option("--post-end", cfg.post_end, "Custom first-window end");
  repro->add_option("--post-end2", cfg.post_end2, "Custom second-window end");
  repro->add_option("--threads", cfg.threads, "Worker threads (0 = auto)");
  add_model_flags(repro);
  add_common(repro);

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic benchmark series");
  synth->add_option("--n-pre", cfg.n_pre, "Pre-period length in days");
  synth->add_option("--n-post", cfg.n_post, "Post-period length in days");
  synth->add_option("--level", cfg.level, "Initial level");
  synth->add_option("--sigma-obs", cfg.sigma_obs, "Observation noise sd");
  synth->add_option("--sigma-level", cfg.sigma_level, "Level disturbance sd");
  synth->add_option("--sigma-seasonal", cfg.sigma_seasonal, "Seasonal disturbance sd");
  synth->add_option("--seasonal-amplitude", cfg.seasonal_amplitude,
                    "Weekly pattern amplitude");
  synth->add_option("--lift", cfg.lift, "Multiplicative post-period lift");
  synth->add_option("--beta", cfg.beta, "Covariate effects (repeatable, max 2)");
  add_common(synth);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      // flags win over the config file: re-parse them on top
      apply_config_file(config_path, cfg);
      app.clear();
      CLI11_PARSE(app, argc, argv);
    }
    if (ingest->parsed()) return cmd_ingest(cfg);
    if (analyze->parsed()) return cmd_analyze(cfg);
    if (repro->parsed()) return cmd_reproduce(cfg);
    if (synth->parsed()) return cmd_synth(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
