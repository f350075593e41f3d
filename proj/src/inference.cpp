#include "impactlens/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "impactlens/errors.hpp"

namespace impactlens {

void ModelConfig::validate() const {
  if (n_iterations < 1) throw ConfigError("n_iterations must be positive");
  if (burn_in < 0 || burn_in >= n_iterations)
    throw ConfigError("burn_in must satisfy 0 <= burn_in < n_iterations");
  if (!(prior_level_sd > 0.0) || !(prior_seasonal_sd > 0.0) || !(prior_obs_sd > 0.0))
    throw ConfigError("prior sds must be positive");
  if (!(variance_prior_weight > 0.0))
    throw ConfigError("variance prior weight must be positive");
  if (spike_inclusion_prob < 0.0 || spike_inclusion_prob > 1.0)
    throw ConfigError("spike inclusion probability must be in [0, 1]");
  if (!(slab_information_weight > 0.0))
    throw ConfigError("slab information weight must be positive");
  if (seasonality.n_seasons < 2)
    throw ConfigError("unsupported seasonality period " +
                      std::to_string(seasonality.n_seasons));
}

double draw_variance(double sum_sq, std::int64_t n_terms, double prior_sd,
                     double prior_weight, Rng& rng) {
  if (sum_sq < 0.0 || !std::isfinite(sum_sq))
    throw ValidationError("sum of squares must be finite and non-negative");
  if (n_terms < 1) throw ValidationError("n_terms must be at least 1");
  const double shape = 0.5 * (prior_weight + static_cast<double>(n_terms));
  const double scale = 0.5 * (prior_weight * prior_sd * prior_sd + sum_sq);
  const double draw = rng.inverse_gamma(shape, scale);
  return std::max(draw, 1e-300);
}

namespace {

// log of the residual marginal likelihood with the coefficients integrated
// out, up to terms shared by every subset.
// prior_precision and the cross products are the full-covariate versions;
// `subset` selects the active columns.
double subset_log_marginal(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xtu,
                           const Eigen::MatrixXd& prior_precision,
                           double obs_variance, unsigned subset) {
  const int k = static_cast<int>(xtx.rows());
  std::vector<int> idx;
  for (int j = 0; j < k; ++j)
    if (subset & (1u << j)) idx.push_back(j);
  if (idx.empty()) return 0.0;

  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXd a(m, m), b(m, m);
  Eigen::VectorXd cross(m);
  for (int r = 0; r < m; ++r) {
    cross(r) = xtu(idx[static_cast<std::size_t>(r)]);
    for (int c = 0; c < m; ++c) {
      a(r, c) = prior_precision(idx[static_cast<std::size_t>(r)],
                                idx[static_cast<std::size_t>(c)]);
      b(r, c) = a(r, c) + xtx(idx[static_cast<std::size_t>(r)],
                              idx[static_cast<std::size_t>(c)]);
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt_a(a);
  const Eigen::LLT<Eigen::MatrixXd> llt_b(b);
  if (llt_a.info() != Eigen::Success || llt_b.info() != Eigen::Success)
    throw ConditioningError("rank-deficient covariate matrix in regression step");
  double log_det_a = 0.0, log_det_b = 0.0;
  for (int j = 0; j < m; ++j) {
    log_det_a += 2.0 * std::log(llt_a.matrixL()(j, j));
    log_det_b += 2.0 * std::log(llt_b.matrixL()(j, j));
  }
  const double quad = cross.dot(llt_b.solve(cross));
  return 0.5 * (log_det_a - log_det_b) + 0.5 * quad / obs_variance;
}

}  // namespace

RegressionDraw draw_regression(const Eigen::VectorXd& residual,
                               const Eigen::MatrixXd& covariates,
                               double obs_variance, Rng& rng,
                               const RegressionPriorSpec& prior) {
  const int k = static_cast<int>(covariates.cols());
  RegressionDraw out;
  out.beta = Eigen::VectorXd::Zero(k);
  out.included.assign(static_cast<std::size_t>(k), false);
  if (k == 0) return out;
  if (covariates.rows() != residual.size())
    throw ValidationError("covariate rows do not match residual length");
  if (!(obs_variance > 0.0) || !std::isfinite(obs_variance))
    throw ValidationError("observation variance must be positive");

  const double n = static_cast<double>(covariates.rows());
  const Eigen::MatrixXd xtx = covariates.transpose() * covariates;
  const Eigen::VectorXd xtu = covariates.transpose() * residual;
  const Eigen::MatrixXd prior_precision = (prior.information_weight / n) * xtx;

  if (Eigen::FullPivLU<Eigen::MatrixXd>(xtx).rank() < k)
    throw ConditioningError("rank-deficient covariate matrix in regression step");

  unsigned chosen = (1u << k) - 1u;  // all included
  if (prior.kind == RegressionPrior::kSpikeSlab) {
    if (k > 16)
      throw ConfigError("spike-and-slab subset enumeration supports at most 16 covariates");
    const unsigned n_subsets = 1u << k;
    std::vector<double> log_weights(n_subsets);
    double best = -std::numeric_limits<double>::infinity();
    for (unsigned s = 0; s < n_subsets; ++s) {
      double lw = subset_log_marginal(xtx, xtu, prior_precision, obs_variance, s);
      for (int j = 0; j < k; ++j) {
        const bool in = s & (1u << j);
        lw += std::log(in ? prior.inclusion_prob : 1.0 - prior.inclusion_prob);
      }
      log_weights[s] = lw;
      best = std::max(best, lw);
    }
    double total = 0.0;
    for (double& lw : log_weights) {
      lw = std::exp(lw - best);
      total += lw;
    }
    double u = rng.uniform() * total;
    chosen = n_subsets - 1;
    for (unsigned s = 0; s < n_subsets; ++s) {
      u -= log_weights[s];
      if (u <= 0.0) {
        chosen = s;
        break;
      }
    }
  }

  std::vector<int> idx;
  for (int j = 0; j < k; ++j)
    if (chosen & (1u << j)) {
      idx.push_back(j);
      out.included[static_cast<std::size_t>(j)] = true;
    }
  if (idx.empty()) return out;

  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXd precision(m, m);
  Eigen::VectorXd cross(m);
  for (int r = 0; r < m; ++r) {
    cross(r) = xtu(idx[static_cast<std::size_t>(r)]);
    for (int c = 0; c < m; ++c)
      precision(r, c) = xtx(idx[static_cast<std::size_t>(r)],
                            idx[static_cast<std::size_t>(c)]) +
                        prior_precision(idx[static_cast<std::size_t>(r)],
                                        idx[static_cast<std::size_t>(c)]);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("rank-deficient covariate matrix in regression step");

  const Eigen::VectorXd mean = llt.solve(cross);
  Eigen::VectorXd z(m);
  for (int j = 0; j < m; ++j) z(j) = rng.normal();
  // beta = mean + sqrt(obs_variance) * L^-T z
  const Eigen::VectorXd noise =
      llt.matrixU().solve(z) * std::sqrt(obs_variance);
  for (int j = 0; j < m; ++j)
    out.beta(idx[static_cast<std::size_t>(j)]) = mean(j) + noise(j);
  return out;
}

namespace {

TraceSummary summarize(const std::vector<double>& trace) {
  TraceSummary s;
  if (trace.empty()) return s;
  s.min = trace.front();
  s.max = trace.front();
  double sum = 0.0;
  for (const double v : trace) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(trace.size());
  double ss = 0.0;
  for (const double v : trace) ss += (v - s.mean) * (v - s.mean);
  s.sd = trace.size() > 1
             ? std::sqrt(ss / static_cast<double>(trace.size() - 1))
             : 0.0;
  return s;
}

}  // namespace

PosteriorSamples fit(const std::vector<double>& pre_series,
                     const std::optional<CovariateSet>& covariates,
                     const ModelConfig& config) {
  config.validate();
  const std::size_t n = pre_series.size();
  if (n < static_cast<std::size_t>(kMinPreDays))
    throw FitError("pre-period length " + std::to_string(n) +
                   " is below the minimum of " + std::to_string(kMinPreDays));
  for (const double v : pre_series)
    if (!std::isfinite(v)) throw FitError("non-finite value in pre-period series");
  if (!(sample_sd(pre_series) > 0.0))
    throw FitError("constant pre-period series cannot be fitted");

  const ModelSpec model = build_model(config, covariates, false);
  const int k = model.layout.num_covariates;
  Eigen::MatrixXd x;
  if (k > 0) {
    if (covariates->length() != n)
      throw FitError("covariates do not cover the pre-period series");
    x = model.covariates;
  }

  Rng rng(config.seed);
  Params params;
  params.sigma_obs2 = 0.5 * sample_sd(pre_series) * sample_sd(pre_series);
  params.sigma_level2 = config.prior_level_sd * config.prior_level_sd;
  params.sigma_seasonal2 = config.prior_seasonal_sd * config.prior_seasonal_sd;
  params.beta = Eigen::VectorXd::Zero(k);

  const RegressionPriorSpec reg_prior{config.regression_prior,
                                      config.spike_inclusion_prob,
                                      config.slab_information_weight};
  const double weight = config.variance_prior_weight;
  const int level_idx = model.layout.level;
  const int seas_begin = model.layout.seasonal_begin;
  const int seas_states = model.layout.seasonal_states;

  PosteriorSamples samples;
  samples.draws.reserve(static_cast<std::size_t>(config.retained_draws()));
  std::vector<double> trace_obs, trace_level, trace_seasonal;
  std::vector<std::vector<double>> trace_beta(static_cast<std::size_t>(k));
  std::vector<double> inclusion_count(static_cast<std::size_t>(k), 0.0);

  std::vector<double> residual(n);
  const Eigen::Map<const Eigen::VectorXd> y_vec(pre_series.data(),
                                                static_cast<Eigen::Index>(n));

  for (int iter = 0; iter < config.n_iterations; ++iter) {
    try {
      // (a) state path given parameters
      if (k > 0) {
        const Eigen::VectorXd offset = x * params.beta;
        for (std::size_t t = 0; t < n; ++t)
          residual[t] = pre_series[t] - offset(static_cast<Eigen::Index>(t));
      } else {
        residual = pre_series;
      }
      const StateSpaceSystem sys = assemble_system(model, params, residual);
      const StatePath path = simulation_smoother_system(sys, residual, rng);
      const Eigen::MatrixXd& a = path.states;

      // (b) variances from their inverse-gamma conditionals given the path
      double ss_level = 0.0, ss_seasonal = 0.0;
      for (std::size_t t = 0; t + 1 < n; ++t) {
        const Eigen::Index ti = static_cast<Eigen::Index>(t);
        const double dlevel = a(ti + 1, level_idx) - a(ti, level_idx);
        ss_level += dlevel * dlevel;
        double prev_sum = 0.0;
        for (int j = 0; j < seas_states; ++j) prev_sum += a(ti, seas_begin + j);
        const double eta = a(ti + 1, seas_begin) + prev_sum;
        ss_seasonal += eta * eta;
      }
      params.sigma_level2 = draw_variance(ss_level, static_cast<std::int64_t>(n) - 1,
                                          config.prior_level_sd, weight, rng);
      params.sigma_seasonal2 =
          draw_variance(ss_seasonal, static_cast<std::int64_t>(n) - 1,
                        config.prior_seasonal_sd, weight, rng);

      double ss_obs = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const Eigen::Index ti = static_cast<Eigen::Index>(t);
        const double eps = residual[t] - a(ti, level_idx) - a(ti, seas_begin);
        ss_obs += eps * eps;
      }
      params.sigma_obs2 = draw_variance(ss_obs, static_cast<std::int64_t>(n),
                                        config.prior_obs_sd, weight, rng);

      // (c) regression coefficients given the path
      if (k > 0) {
        Eigen::VectorXd trend_removed(static_cast<Eigen::Index>(n));
        for (std::size_t t = 0; t < n; ++t) {
          const Eigen::Index ti = static_cast<Eigen::Index>(t);
          trend_removed(ti) = y_vec(ti) - a(ti, level_idx) - a(ti, seas_begin);
        }
        const RegressionDraw reg =
            draw_regression(trend_removed, x, params.sigma_obs2, rng, reg_prior);
        params.beta = reg.beta;
        if (iter >= config.burn_in)
          for (int j = 0; j < k; ++j)
            if (reg.included[static_cast<std::size_t>(j)])
              inclusion_count[static_cast<std::size_t>(j)] += 1.0;
      }

      params.validate();
      if (iter >= config.burn_in) {
        samples.draws.push_back(
            {params, a.row(static_cast<Eigen::Index>(n) - 1).transpose()});
        trace_obs.push_back(params.sigma_obs2);
        trace_level.push_back(params.sigma_level2);
        trace_seasonal.push_back(params.sigma_seasonal2);
        for (int j = 0; j < k; ++j)
          trace_beta[static_cast<std::size_t>(j)].push_back(params.beta(j));
      }
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (sampler iteration " +
                           std::to_string(iter) + ")");
    }
  }

  samples.sigma_obs2 = summarize(trace_obs);
  samples.sigma_level2 = summarize(trace_level);
  samples.sigma_seasonal2 = summarize(trace_seasonal);
  for (int j = 0; j < k; ++j) {
    samples.beta.push_back(summarize(trace_beta[static_cast<std::size_t>(j)]));
    samples.inclusion_rate.push_back(inclusion_count[static_cast<std::size_t>(j)] /
                                     static_cast<double>(config.retained_draws()));
  }
  return samples;
}

}  // namespace impactlens
