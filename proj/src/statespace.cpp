#include "impactlens/statespace.hpp"

#include <cmath>
#include <string>

#include "impactlens/errors.hpp"

namespace impactlens {

namespace {

constexpr double kDiffuseScale = 1e6;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double sample_variance(const std::vector<double>& y) {
  if (y.size() < 2) return 1.0;
  const double sd = sample_sd(y);
  return sd * sd;
}

void symmetrize(Eigen::MatrixXd& m) {
  m = 0.5 * (m + m.transpose()).eval();
}

// Square root of a PSD matrix via its eigendecomposition; tolerates exact
// singularity (zero-variance components).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  Eigen::VectorXd vals = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * vals.asDiagonal();
}

}  // namespace

void Params::validate() const {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0)
      throw ValidationError(std::string("invalid variance ") + name + ": " +
                            std::to_string(v));
  };
  check(sigma_obs2, "sigma_obs2");
  check(sigma_level2, "sigma_level2");
  check(sigma_seasonal2, "sigma_seasonal2");
  if (!beta.allFinite()) throw ValidationError("non-finite regression coefficient");
}

ModelSpec build_model(const ModelConfig& config,
                      const std::optional<CovariateSet>& covariates,
                      bool carry_coefficients_in_state) {
  const int seasons = config.seasonality.n_seasons;
  if (seasons < 2)
    throw ConfigError("unsupported seasonality period " + std::to_string(seasons) +
                      " (need at least 2 seasons)");
  if (config.seasonality.duration != 1)
    throw ConfigError("only season duration 1 is supported");

  const int seasonal_states = seasons - 1;
  const int k = covariates ? static_cast<int>(covariates->count()) : 0;
  const bool in_state = carry_coefficients_in_state && k > 0;
  const int d = 1 + seasonal_states + (in_state ? k : 0);

  ModelSpec model;
  model.layout.level = 0;
  model.layout.seasonal_begin = 1;
  model.layout.seasonal_states = seasonal_states;
  model.layout.num_covariates = k;
  model.layout.regression_in_state = in_state;
  model.layout.regression_begin = in_state ? 1 + seasonal_states : -1;
  model.layout.state_dim = d;
  model.state_dim = d;
  model.disturbance_dim = 2;

  model.transition = Eigen::MatrixXd::Zero(d, d);
  model.transition(0, 0) = 1.0;  // level random walk
  // Seasonal sum-to-zero recursion: the new current effect is minus the sum
  // of the previous ones; older effects shift down one slot.
  for (int j = 0; j < seasonal_states; ++j) model.transition(1, 1 + j) = -1.0;
  for (int j = 1; j < seasonal_states; ++j) model.transition(1 + j, j) = 1.0;
  // Coefficient states, when present, are constant.
  for (int j = 0; j < (in_state ? k : 0); ++j) {
    const int idx = model.layout.regression_begin + j;
    model.transition(idx, idx) = 1.0;
  }

  model.control = Eigen::MatrixXd::Zero(d, 2);
  model.control(0, 0) = 1.0;  // level disturbance
  model.control(1, 1) = 1.0;  // seasonal disturbance

  model.base_output = Eigen::VectorXd::Zero(d);
  model.base_output(0) = 1.0;
  model.base_output(1) = 1.0;

  if (k > 0) {
    const std::size_t n = covariates->length();
    model.covariates.resize(static_cast<Eigen::Index>(n), k);
    for (int j = 0; j < k; ++j)
      for (std::size_t t = 0; t < n; ++t)
        model.covariates(static_cast<Eigen::Index>(t), j) =
            covariates->columns[static_cast<std::size_t>(j)][t];
  }
  return model;
}

Eigen::VectorXd regression_offset(const ModelSpec& model, const Params& params) {
  if (model.layout.num_covariates == 0 || model.layout.regression_in_state)
    return Eigen::VectorXd();
  if (params.beta.size() != model.layout.num_covariates)
    throw ValidationError("beta length " + std::to_string(params.beta.size()) +
                          " does not match covariate count " +
                          std::to_string(model.layout.num_covariates));
  return model.covariates * params.beta;
}

StateSpaceSystem assemble_system(const ModelSpec& model, const Params& params,
                                 const std::vector<double>& y) {
  params.validate();
  const int d = model.state_dim;

  StateSpaceSystem sys;
  sys.transition = model.transition;
  sys.control = model.control;
  sys.disturbance_cov = Eigen::Vector2d(params.sigma_level2, params.sigma_seasonal2)
                            .asDiagonal();
  sys.obs_variance = params.sigma_obs2;

  if (model.layout.regression_in_state) {
    const Eigen::Index n = model.covariates.rows();
    if (static_cast<std::size_t>(n) != y.size())
      throw ValidationError("covariate rows do not match series length");
    sys.output.resize(n, d);
    for (Eigen::Index t = 0; t < n; ++t) {
      sys.output.row(t).head(model.layout.regression_begin) =
          model.base_output.head(model.layout.regression_begin).transpose();
      sys.output.row(t).tail(model.layout.num_covariates) = model.covariates.row(t);
    }
  } else {
    sys.output = model.base_output.transpose();
  }

  sys.initial_mean = Eigen::VectorXd::Zero(d);
  if (!y.empty()) sys.initial_mean(model.layout.level) = y.front();
  sys.initial_cov = kDiffuseScale * sample_variance(y) * Eigen::MatrixXd::Identity(d, d);
  return sys;
}

FilterResult filter_system(const StateSpaceSystem& sys, const std::vector<double>& y,
                           bool store_covariances) {
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  const int d = sys.dim();
  if (sys.output.rows() != 1 && sys.output.rows() != n)
    throw ValidationError("output rows must be 1 or match the series length");

  FilterResult res;
  res.predicted_mean.resize(n, d);
  res.filtered_mean.resize(n, d);
  res.innovation.resize(n);
  res.innovation_variance.resize(n);
  res.gain.resize(n, d);
  if (store_covariances) {
    res.predicted_cov.resize(static_cast<std::size_t>(n));
    res.filtered_cov.resize(static_cast<std::size_t>(n));
  }

  const Eigen::MatrixXd state_noise_cov =
      sys.control * sys.disturbance_cov * sys.control.transpose();

  Eigen::VectorXd a = sys.initial_mean;
  Eigen::MatrixXd P = sys.initial_cov;
  Eigen::VectorXd Pz(d), gain(d), a_f(d);
  Eigen::MatrixXd P_f(d, d), TP(d, d);
  double loglik = 0.0;

  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::RowVectorXd z = sys.output_row(t);
    const double v = y[static_cast<std::size_t>(t)] - z.dot(a);
    Pz.noalias() = P * z.transpose();
    const double F = z.dot(Pz) + sys.obs_variance;
    if (!std::isfinite(F) || F <= 0.0 || !std::isfinite(v))
      throw NumericalError("kalman filter failed at time index " + std::to_string(t) +
                           " (innovation variance " + std::to_string(F) + ")");

    res.predicted_mean.row(t) = a.transpose();
    res.innovation(t) = v;
    res.innovation_variance(t) = F;
    loglik -= 0.5 * (kLog2Pi + std::log(F) + v * v / F);

    a_f.noalias() = a + Pz * (v / F);
    P_f.noalias() = P - (Pz * Pz.transpose()) / F;
    symmetrize(P_f);
    res.filtered_mean.row(t) = a_f.transpose();
    if (store_covariances) {
      res.predicted_cov[static_cast<std::size_t>(t)] = P;
      res.filtered_cov[static_cast<std::size_t>(t)] = P_f;
    }

    gain.noalias() = sys.transition * Pz / F;
    res.gain.row(t) = gain.transpose();

    a.noalias() = sys.transition * a_f;
    TP.noalias() = sys.transition * P_f;
    P.noalias() = TP * sys.transition.transpose() + state_noise_cov;
    symmetrize(P);
  }
  res.log_likelihood = loglik;
  return res;
}

Eigen::MatrixXd smooth_means_system(const StateSpaceSystem& sys,
                                    const std::vector<double>& y,
                                    const FilterResult& filtered) {
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  const int d = sys.dim();
  const Eigen::MatrixXd state_noise_cov =
      sys.control * sys.disturbance_cov * sys.control.transpose();

  // Backward pass accumulating the weighted innovations.
  Eigen::MatrixXd r_store(n, d);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd next(d);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const Eigen::RowVectorXd z = sys.output_row(t);
    const double scaled_innov = filtered.innovation(t) / filtered.innovation_variance(t);
    const double gain_dot_r = filtered.gain.row(t).dot(r);
    next.noalias() = sys.transition.transpose() * r;
    next.noalias() += z.transpose() * (scaled_innov - gain_dot_r);
    r = next;
    r_store.row(t) = r.transpose();
  }

  // Forward pass reconstructing smoothed means.
  Eigen::MatrixXd smoothed(n, d);
  Eigen::VectorXd state = sys.initial_mean + sys.initial_cov * r_store.row(0).transpose();
  smoothed.row(0) = state.transpose();
  for (Eigen::Index t = 1; t < n; ++t) {
    state = sys.transition * smoothed.row(t - 1).transpose() +
            state_noise_cov * r_store.row(t).transpose();
    smoothed.row(t) = state.transpose();
  }
  return smoothed;
}

SmoothedMoments smooth_moments_system(const StateSpaceSystem& sys,
                                      const std::vector<double>& y) {
  const FilterResult fr = filter_system(sys, y, true);
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  const int d = sys.dim();

  SmoothedMoments out;
  out.mean.resize(n, d);
  out.cov.resize(static_cast<std::size_t>(n));

  Eigen::VectorXd r = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const Eigen::RowVectorXd z = sys.output_row(t);
    const double F = fr.innovation_variance(t);
    const Eigen::VectorXd gain = fr.gain.row(t).transpose();
    const Eigen::MatrixXd L = sys.transition - gain * z;

    r = z.transpose() * (fr.innovation(t) / F) + L.transpose() * r;
    N = z.transpose() * z / F + L.transpose() * N * L;
    symmetrize(N);

    const Eigen::MatrixXd& P = fr.predicted_cov[static_cast<std::size_t>(t)];
    out.mean.row(t) = (fr.predicted_mean.row(t).transpose() + P * r).transpose();
    Eigen::MatrixXd V = P - P * N * P;
    symmetrize(V);
    out.cov[static_cast<std::size_t>(t)] = V;
  }
  return out;
}

void simulate_unconditional(const StateSpaceSystem& sys, Eigen::Index n, Rng& rng,
                            Eigen::MatrixXd& states_out, Eigen::VectorXd& obs_out) {
  const int d = sys.dim();
  const int q = sys.noise_dim();
  const Eigen::MatrixXd init_sqrt = psd_sqrt(sys.initial_cov);
  const Eigen::MatrixXd noise_sqrt = psd_sqrt(sys.disturbance_cov);
  const double obs_sd = std::sqrt(sys.obs_variance);

  states_out.resize(n, d);
  obs_out.resize(n);

  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z(i) = rng.normal();
  Eigen::VectorXd state = sys.initial_mean + init_sqrt * z;

  Eigen::VectorXd eta(q);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (t > 0) {
      for (int i = 0; i < q; ++i) eta(i) = rng.normal();
      state = sys.transition * state + sys.control * (noise_sqrt * eta);
    }
    states_out.row(t) = state.transpose();
    obs_out(t) = sys.output_row(t).dot(state) + obs_sd * rng.normal();
  }
}

StatePath simulation_smoother_system(const StateSpaceSystem& sys,
                                     const std::vector<double>& y, Rng& rng) {
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());

  Eigen::MatrixXd fake_states;
  Eigen::VectorXd fake_obs;
  simulate_unconditional(sys, n, rng, fake_states, fake_obs);

  const FilterResult fr_data = filter_system(sys, y, false);
  const Eigen::MatrixXd smoothed_data = smooth_means_system(sys, y, fr_data);

  std::vector<double> fake(fake_obs.data(), fake_obs.data() + n);
  const FilterResult fr_fake = filter_system(sys, fake, false);
  const Eigen::MatrixXd smoothed_fake = smooth_means_system(sys, fake, fr_fake);

  StatePath path;
  path.states = smoothed_data + (fake_states - smoothed_fake);
  return path;
}

namespace {

std::vector<double> apply_offset(const std::vector<double>& y,
                                 const Eigen::VectorXd& offset) {
  if (offset.size() == 0) return y;
  if (static_cast<std::size_t>(offset.size()) != y.size())
    throw ValidationError("regression offset length does not match series");
  std::vector<double> out(y.size());
  for (std::size_t t = 0; t < y.size(); ++t)
    out[t] = y[t] - offset(static_cast<Eigen::Index>(t));
  return out;
}

}  // namespace

FilterResult kalman_filter(const ModelSpec& model, const Params& params,
                           const std::vector<double>& y) {
  const std::vector<double> effective = apply_offset(y, regression_offset(model, params));
  return filter_system(assemble_system(model, params, effective), effective, true);
}

SmoothedMoments kalman_smoother(const ModelSpec& model, const Params& params,
                                const std::vector<double>& y) {
  const std::vector<double> effective = apply_offset(y, regression_offset(model, params));
  return smooth_moments_system(assemble_system(model, params, effective), effective);
}

StatePath simulation_smoother(const ModelSpec& model, const Params& params,
                              const std::vector<double>& y, Rng& rng) {
  const std::vector<double> effective = apply_offset(y, regression_offset(model, params));
  return simulation_smoother_system(assemble_system(model, params, effective),
                                    effective, rng);
}

std::vector<double> simulate_forward(const ModelSpec& model, const Params& params,
                                     const Eigen::VectorXd& initial_state,
                                     int horizon, Rng& rng,
                                     const std::optional<Eigen::MatrixXd>& post_covariates) {
  params.validate();
  if (horizon < 1) throw ValidationError("horizon must be at least 1");
  if (initial_state.size() != model.state_dim)
    throw ValidationError("initial state dimension " +
                          std::to_string(initial_state.size()) +
                          " does not match model dimension " +
                          std::to_string(model.state_dim));
  const int k = model.layout.num_covariates;
  if ((k > 0) != post_covariates.has_value())
    throw ValidationError(k > 0 ? "model has a regression block but no covariates given"
                                : "covariates given but model has no regression block");
  if (post_covariates &&
      (post_covariates->rows() != horizon || post_covariates->cols() != k))
    throw ValidationError("post covariates must be " + std::to_string(horizon) + "x" +
                          std::to_string(k));

  const double level_sd = std::sqrt(params.sigma_level2);
  const double seasonal_sd = std::sqrt(params.sigma_seasonal2);
  const double obs_sd = std::sqrt(params.sigma_obs2);

  Eigen::VectorXd state = initial_state;
  Eigen::VectorXd noise = Eigen::VectorXd::Zero(2);
  std::vector<double> out(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    noise(0) = level_sd * rng.normal();
    noise(1) = seasonal_sd * rng.normal();
    state = model.transition * state + model.control * noise;

    double mean = model.base_output.dot(state);
    if (model.layout.regression_in_state) {
      mean += post_covariates->row(h).dot(state.tail(k));
    } else if (k > 0) {
      mean += post_covariates->row(h).dot(params.beta);
    }
    out[static_cast<std::size_t>(h)] = mean + obs_sd * rng.normal();
  }
  return out;
}

}  // namespace impactlens
