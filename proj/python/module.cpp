// Python bindings for the core operations: series construction, model
// fitting, counterfactual prediction and impact summaries.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "impactlens/analysis.hpp"
#include "impactlens/errors.hpp"
#include "impactlens/impact.hpp"
#include "impactlens/inference.hpp"
#include "impactlens/ingest.hpp"
#include "impactlens/synth.hpp"

namespace py = pybind11;
using namespace impactlens;

namespace {

DailySeries make_series(const std::string& start, std::vector<double> values) {
  return DailySeries{Date::parse(start), std::move(values)};
}

CovariateSet make_covariates(const std::string& start, std::vector<std::string> names,
                             std::vector<std::vector<double>> columns) {
  return CovariateSet{Date::parse(start), std::move(names), std::move(columns)};
}

Eigen::MatrixXd variance_draws(const PosteriorSamples& s) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(s.size()), 3);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const Params& p = s.draws[static_cast<std::size_t>(i)].params;
    out(i, 0) = p.sigma_obs2;
    out(i, 1) = p.sigma_level2;
    out(i, 2) = p.sigma_seasonal2;
  }
  return out;
}

Eigen::MatrixXd beta_draws(const PosteriorSamples& s) {
  const Eigen::Index k =
      s.draws.empty() ? 0 : s.draws.front().params.beta.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(s.size()), k);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    out.row(i) = s.draws[static_cast<std::size_t>(i)].params.beta.transpose();
  return out;
}

py::dict plot_as_dict(const std::vector<PlotPoint>& plot) {
  std::vector<std::string> dates;
  std::vector<double> actual, median, lo, hi, pointwise, cumulative;
  for (const PlotPoint& p : plot) {
    dates.push_back(p.date.to_string());
    actual.push_back(p.actual);
    median.push_back(p.counterfactual_median);
    lo.push_back(p.ci_lower);
    hi.push_back(p.ci_upper);
    pointwise.push_back(p.pointwise_effect);
    cumulative.push_back(p.cumulative_effect);
  }
  py::dict d;
  d["date"] = dates;
  d["actual"] = actual;
  d["counterfactual_median"] = median;
  d["ci_lower"] = lo;
  d["ci_upper"] = hi;
  d["pointwise_effect"] = pointwise;
  d["cumulative_effect"] = cumulative;
  return d;
}

}  // namespace

PYBIND11_MODULE(_impactlens, m) {
  m.doc() = "Bayesian structural time-series causal impact analysis";

  py::register_exception<Error>(m, "ImpactlensError");

  py::class_<DailySeries>(m, "DailySeries")
      .def(py::init(&make_series), py::arg("start_date"), py::arg("values"))
      .def_property_readonly(
          "start_date", [](const DailySeries& s) { return s.start.to_string(); })
      .def_readonly("values", &DailySeries::values)
      .def("__len__", &DailySeries::size);

  py::class_<CovariateSet>(m, "CovariateSet")
      .def(py::init(&make_covariates), py::arg("start_date"), py::arg("names"),
           py::arg("columns"))
      .def_property_readonly(
          "start_date", [](const CovariateSet& c) { return c.start.to_string(); })
      .def_readonly("names", &CovariateSet::names)
      .def_readonly("columns", &CovariateSet::columns);

  py::class_<AnalysisWindow>(m, "AnalysisWindow")
      .def(py::init([](const std::string& pre_start, const std::string& intervention,
                       const std::string& post_end) {
             return AnalysisWindow(Date::parse(pre_start), Date::parse(intervention),
                                   Date::parse(post_end));
           }),
           py::arg("pre_start"), py::arg("intervention"), py::arg("post_end"))
      .def_property_readonly("pre_length", &AnalysisWindow::pre_length)
      .def_property_readonly("post_length", &AnalysisWindow::post_length);

  m.def("window_preset", &window_preset, py::arg("which"));

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("n_iterations", &ModelConfig::n_iterations)
      .def_readwrite("burn_in", &ModelConfig::burn_in)
      .def_readwrite("prior_level_sd", &ModelConfig::prior_level_sd)
      .def_readwrite("prior_seasonal_sd", &ModelConfig::prior_seasonal_sd)
      .def_readwrite("prior_obs_sd", &ModelConfig::prior_obs_sd)
      .def_readwrite("include_covariates", &ModelConfig::include_covariates)
      .def_readwrite("seed", &ModelConfig::seed);

  py::class_<TraceSummary>(m, "TraceSummary")
      .def_readonly("mean", &TraceSummary::mean)
      .def_readonly("sd", &TraceSummary::sd)
      .def_readonly("min", &TraceSummary::min)
      .def_readonly("max", &TraceSummary::max);

  py::class_<PosteriorSamples>(m, "PosteriorSamples")
      .def("__len__", &PosteriorSamples::size)
      .def_readonly("sigma_obs2", &PosteriorSamples::sigma_obs2)
      .def_readonly("sigma_level2", &PosteriorSamples::sigma_level2)
      .def_readonly("sigma_seasonal2", &PosteriorSamples::sigma_seasonal2)
      .def_readonly("inclusion_rate", &PosteriorSamples::inclusion_rate)
      .def("variance_draws", &variance_draws,
           "Retained draws as an (n, 3) array: obs, level, seasonal variances")
      .def("beta_draws", &beta_draws);

  m.def(
      "fit",
      [](const std::vector<double>& pre_series,
         const std::optional<CovariateSet>& covariates, const ModelConfig& config) {
        return fit(pre_series, covariates, config);
      },
      py::arg("pre_series"), py::arg("covariates"), py::arg("config"));

  py::class_<EffectSummary>(m, "EffectSummary")
      .def_readonly("point", &EffectSummary::point)
      .def_readonly("sd", &EffectSummary::sd)
      .def_readonly("ci_lower", &EffectSummary::ci_lower)
      .def_readonly("ci_upper", &EffectSummary::ci_upper);

  py::class_<ImpactReport>(m, "ImpactReport")
      .def_readonly("post_days", &ImpactReport::post_days)
      .def_readonly("alpha", &ImpactReport::alpha)
      .def_readonly("actual_avg", &ImpactReport::actual_avg)
      .def_readonly("actual_cum", &ImpactReport::actual_cum)
      .def_readonly("predicted_avg", &ImpactReport::predicted_avg)
      .def_readonly("predicted_cum", &ImpactReport::predicted_cum)
      .def_readonly("absolute_avg", &ImpactReport::absolute_avg)
      .def_readonly("absolute_cum", &ImpactReport::absolute_cum)
      .def_readonly("relative", &ImpactReport::relative)
      .def_readonly("tail_prob", &ImpactReport::tail_prob)
      .def_readonly("causal_prob", &ImpactReport::causal_prob)
      .def("text", [](const ImpactReport& r,
                      const std::string& label) { return format_report(r, label); },
           py::arg("label") = "series")
      .def("to_json", [](const ImpactReport& r) { return report_to_json(r); });

  m.def(
      "compute_impact",
      [](const std::vector<double>& actual, const Eigen::MatrixXd& draws,
         double alpha) {
        CounterfactualDraws cd;
        cd.values = draws;
        return compute_impact(actual, cd, alpha);
      },
      py::arg("actual_post"), py::arg("draws"), py::arg("alpha") = 0.05);

  m.def(
      "build_daily_series",
      [](const std::vector<std::pair<std::string, double>>& records,
         const std::string& start, const std::string& end) {
        std::vector<std::pair<Date, double>> parsed;
        parsed.reserve(records.size());
        for (const auto& [date, count] : records)
          parsed.emplace_back(Date::parse(date), count);
        return build_daily_series(parsed, Date::parse(start), Date::parse(end));
      },
      py::arg("records"), py::arg("start"), py::arg("end"));

  m.def("standardize", [](const std::vector<double>& segment) {
    auto [scaled, params] = standardize(segment);
    return py::make_tuple(scaled, py::make_tuple(params.mean, params.sd));
  });

  m.def(
      "analyze",
      [](const DailySeries& series, const std::optional<CovariateSet>& covariates,
         const AnalysisWindow& window, const ModelConfig& config) {
        const AnalysisResult res = analyze_series(series, covariates, window, config);
        py::dict out;
        out["report"] = res.report;
        out["plot"] = plot_as_dict(res.plot);
        return out;
      },
      py::arg("series"), py::arg("covariates"), py::arg("window"), py::arg("config"));

  m.def(
      "generate_synthetic",
      [](int n_pre, int n_post, double level, double sigma_obs, double sigma_level,
         double sigma_seasonal, double seasonal_amplitude,
         const std::vector<double>& beta, double lift, std::uint64_t seed) {
        SynthConfig cfg;
        cfg.n_pre = n_pre;
        cfg.n_post = n_post;
        cfg.level = level;
        cfg.sigma_obs = sigma_obs;
        cfg.sigma_level = sigma_level;
        cfg.sigma_seasonal = sigma_seasonal;
        cfg.seasonal_amplitude = seasonal_amplitude;
        cfg.beta = beta;
        cfg.lift = lift;
        cfg.seed = seed;
        const SynthOutput out = generate_synthetic(cfg);
        py::dict d;
        d["series"] = out.series;
        d["covariates"] = out.covariates;
        d["truth"] = out.truth_json;
        return d;
      },
      py::arg("n_pre") = 500, py::arg("n_post") = 25, py::arg("level") = 100.0,
      py::arg("sigma_obs") = 1.0, py::arg("sigma_level") = 0.1,
      py::arg("sigma_seasonal") = 0.01, py::arg("seasonal_amplitude") = 1.0,
      py::arg("beta") = std::vector<double>{}, py::arg("lift") = 0.0,
      py::arg("seed") = 0);

  m.def(
      "holiday_column",
      [](const std::string& start, const std::string& end) {
        return holiday_column(Date::parse(start), Date::parse(end),
                              HolidayCalendar::us_federal());
      },
      py::arg("start"), py::arg("end"));
}
