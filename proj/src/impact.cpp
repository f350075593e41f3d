#include "impactlens/impact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "impactlens/errors.hpp"

namespace impactlens {

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("quantile of empty sample");
  p = std::clamp(p, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - std::floor(h);
  return values[lo] + frac * (values[hi] - values[lo]);
}

CounterfactualDraws predict_counterfactual(
    const PosteriorSamples& samples, const ModelSpec& model,
    const std::optional<Eigen::MatrixXd>& post_covariates,
    const AnalysisWindow& window, const StandardizationParams& standardization,
    Rng& rng) {
  const int horizon = static_cast<int>(window.post_length());
  const Eigen::Index n_draws = static_cast<Eigen::Index>(samples.size());
  if (n_draws == 0) throw ValidationError("no posterior draws to simulate from");
  if (post_covariates && post_covariates->rows() != horizon)
    throw ValidationError("post covariates cover " +
                          std::to_string(post_covariates->rows()) +
                          " days but the window has " + std::to_string(horizon));

  CounterfactualDraws out;
  out.values.resize(n_draws, horizon);

  // Independent stream per row so rows could be simulated concurrently with
  // a reproducible assignment.
  const std::uint64_t base = rng.next_u64();
  for (Eigen::Index i = 0; i < n_draws; ++i) {
    Rng row_rng(derive_seed(base, static_cast<std::uint64_t>(i)));
    const PosteriorDraw& draw = samples.draws[static_cast<std::size_t>(i)];
    const std::vector<double> sim = simulate_forward(
        model, draw.params, draw.final_state, horizon, row_rng, post_covariates);
    for (int h = 0; h < horizon; ++h)
      out.values(i, h) = standardization.invert(sim[static_cast<std::size_t>(h)]);
  }
  if (!out.values.allFinite())
    throw NumericalError("non-finite counterfactual draw");
  return out;
}

ImpactReport compute_impact(const std::vector<double>& actual_post,
                            const CounterfactualDraws& draws, double alpha) {
  const Eigen::Index n_draws = draws.n_draws();
  const Eigen::Index horizon = draws.horizon();
  if (static_cast<Eigen::Index>(actual_post.size()) != horizon)
    throw ValidationError("actual post length " + std::to_string(actual_post.size()) +
                          " does not match draw columns " + std::to_string(horizon));
  if (n_draws < 100)
    throw InsufficientSamplesError("need at least 100 draws for stable quantiles, got " +
                                   std::to_string(n_draws));
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("alpha must be inside (0, 1)");

  const double days = static_cast<double>(horizon);
  double actual_cum = 0.0;
  for (const double v : actual_post) actual_cum += v;

  std::vector<double> cum(static_cast<std::size_t>(n_draws));
  std::vector<double> abs_effect(static_cast<std::size_t>(n_draws));
  std::vector<double> rel_effect(static_cast<std::size_t>(n_draws));
  for (Eigen::Index i = 0; i < n_draws; ++i) {
    const double c = draws.values.row(i).sum();
    cum[static_cast<std::size_t>(i)] = c;
    abs_effect[static_cast<std::size_t>(i)] = actual_cum - c;
    rel_effect[static_cast<std::size_t>(i)] = (actual_cum - c) / c;
  }

  auto mean_of = [](const std::vector<double>& xs) { return sample_mean(xs); };
  auto sd_of = [](const std::vector<double>& xs) { return sample_sd(xs); };
  const double lo_p = alpha / 2.0;
  const double hi_p = 1.0 - alpha / 2.0;

  ImpactReport rep;
  rep.post_days = static_cast<int>(horizon);
  rep.alpha = alpha;
  rep.actual_cum = actual_cum;
  rep.actual_avg = actual_cum / days;

  rep.predicted_cum = {mean_of(cum), sd_of(cum), empirical_quantile(cum, lo_p),
                       empirical_quantile(cum, hi_p)};
  rep.predicted_avg = {rep.predicted_cum.point / days, rep.predicted_cum.sd / days,
                       rep.predicted_cum.ci_lower / days,
                       rep.predicted_cum.ci_upper / days};

  rep.absolute_cum = {actual_cum - rep.predicted_cum.point, sd_of(abs_effect),
                      empirical_quantile(abs_effect, lo_p),
                      empirical_quantile(abs_effect, hi_p)};
  rep.absolute_avg = {rep.absolute_cum.point / days, rep.absolute_cum.sd / days,
                      rep.absolute_cum.ci_lower / days, rep.absolute_cum.ci_upper / days};

  // Point estimate keeps the exact ratio identity with the cumulative
  // numbers; spread comes from the per-draw ratios.
  rep.relative = {rep.absolute_cum.point / rep.predicted_cum.point, sd_of(rel_effect),
                  empirical_quantile(rel_effect, lo_p),
                  empirical_quantile(rel_effect, hi_p)};

  rep.tail_prob = tail_area_probability(cum, actual_cum);
  rep.causal_prob = 1.0 - rep.tail_prob;
  return rep;
}

double tail_area_probability(const std::vector<double>& cumulative_draws,
                             double actual_cum) {
  if (cumulative_draws.empty())
    throw ValidationError("tail probability of an empty draw set");
  // Count draws at least as extreme as the actual outcome on the side of
  // the observed effect; add-one smoothing keeps the probability above 0.
  std::size_t count = 0;
  if (actual_cum <= sample_mean(cumulative_draws)) {
    for (const double c : cumulative_draws)
      if (c <= actual_cum) ++count;
  } else {
    for (const double c : cumulative_draws)
      if (c >= actual_cum) ++count;
  }
  return std::min(0.5, static_cast<double>(1 + count) /
                           static_cast<double>(1 + cumulative_draws.size()));
}

std::string format_number(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[64];
  const double ax = std::abs(x);
  if (ax != 0.0 && (ax >= 1e7 || ax < 1e-4)) {
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
  }
  int decimals = 1;
  if (ax >= 1.0) {
    const int digits = static_cast<int>(std::floor(std::log10(ax))) + 1;
    decimals = std::clamp(4 - digits, 0, 4);
  } else {
    decimals = 4;
  }
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  std::string text(buf);
  if (text.find('.') != std::string::npos) {
    while (text.back() == '0') text.pop_back();
    if (text.back() == '.') text.pop_back();
  }
  if (text == "-0") text = "0";
  return text;
}

std::string format_percent(double fraction) {
  return format_number(100.0 * fraction) + "%";
}

namespace {

std::string pair_cell(double point, double sd, bool percent) {
  const auto fmt = percent ? format_percent : format_number;
  return fmt(point) + " (" + fmt(sd) + ")";
}

std::string interval_cell(double lo, double hi, bool percent) {
  const auto fmt = percent ? format_percent : format_number;
  return "[" + fmt(lo) + ", " + fmt(hi) + "]";
}

void emit_row(std::ostringstream& out, const std::string& label,
              const std::string& avg, const std::string& cum) {
  constexpr int label_width = 28;
  constexpr int col_width = 22;
  out << label;
  for (int i = static_cast<int>(label.size()); i < label_width; ++i) out << ' ';
  out << avg;
  for (int i = static_cast<int>(avg.size()); i < col_width; ++i) out << ' ';
  out << cum << '\n';
}

}  // namespace

std::string format_report(const ImpactReport& r, const std::string& label) {
  std::ostringstream out;
  const std::string ci_label = format_number((1.0 - r.alpha) * 100.0) + "% C.I.";

  out << "Causal Impact Analysis - " << label << '\n';
  emit_row(out, "", "Average", "Cumulative");
  emit_row(out, "Actual", format_number(r.actual_avg), format_number(r.actual_cum));
  emit_row(out, "Prediction (S.D.)",
           pair_cell(r.predicted_avg.point, r.predicted_avg.sd, false),
           pair_cell(r.predicted_cum.point, r.predicted_cum.sd, false));
  emit_row(out, ci_label,
           interval_cell(r.predicted_avg.ci_lower, r.predicted_avg.ci_upper, false),
           interval_cell(r.predicted_cum.ci_lower, r.predicted_cum.ci_upper, false));
  emit_row(out, "Absolute Effect (S.D.)",
           pair_cell(r.absolute_avg.point, r.absolute_avg.sd, false),
           pair_cell(r.absolute_cum.point, r.absolute_cum.sd, false));
  emit_row(out, ci_label,
           interval_cell(r.absolute_avg.ci_lower, r.absolute_avg.ci_upper, false),
           interval_cell(r.absolute_cum.ci_lower, r.absolute_cum.ci_upper, false));
  emit_row(out, "Relative Effect (S.D.)",
           pair_cell(r.relative.point, r.relative.sd, true),
           pair_cell(r.relative.point, r.relative.sd, true));
  emit_row(out, ci_label, interval_cell(r.relative.ci_lower, r.relative.ci_upper, true),
           interval_cell(r.relative.ci_lower, r.relative.ci_upper, true));

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5f", r.tail_prob);
  out << "Posterior tail-area probability p:   " << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * r.causal_prob);
  out << "Posterior prob. of a causal effect:  " << buf << '\n';
  return out.str();
}

namespace {

nlohmann::ordered_json summary_json(const EffectSummary& s) {
  return {{"point", s.point},
          {"sd", s.sd},
          {"ci_lower", s.ci_lower},
          {"ci_upper", s.ci_upper}};
}

}  // namespace

std::string report_to_json(const ImpactReport& r, int indent) {
  nlohmann::ordered_json j{{"post_days", r.post_days},
                           {"alpha", r.alpha},
                           {"actual_avg", r.actual_avg},
                           {"actual_cum", r.actual_cum},
                           {"predicted_avg", summary_json(r.predicted_avg)},
                           {"predicted_cum", summary_json(r.predicted_cum)},
                           {"absolute_avg", summary_json(r.absolute_avg)},
                           {"absolute_cum", summary_json(r.absolute_cum)},
                           {"relative", summary_json(r.relative)},
                           {"tail_prob", r.tail_prob},
                           {"causal_prob", r.causal_prob}};
  return j.dump(indent);
}

}  // namespace impactlens
