#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "impactlens/config.hpp"
#include "impactlens/rng.hpp"
#include "impactlens/timeseries.hpp"

namespace impactlens {

// Index ranges of the structural components inside the state vector.
struct ComponentLayout {
  int level = 0;
  int seasonal_begin = 1;
  int seasonal_states = 6;       // n_seasons - 1
  int regression_begin = -1;     // -1 unless coefficients are carried in the state
  int num_covariates = 0;
  bool regression_in_state = false;
  int state_dim = 7;
};

// Structural model: local level + seasonal + static regression.
struct ModelSpec {
  ComponentLayout layout;
  int state_dim = 7;
  int disturbance_dim = 2;        // level and current seasonal are stochastic
  Eigen::MatrixXd transition;     // state_dim × state_dim
  Eigen::MatrixXd control;        // state_dim × disturbance_dim
  Eigen::VectorXd base_output;    // constant output loadings (level + seasonal)
  Eigen::MatrixXd covariates;     // n × k pre-period covariate values; 0×0 when none
};

struct Params {
  double sigma_obs2 = 1.0;
  double sigma_level2 = 0.01;
  double sigma_seasonal2 = 1e-4;
  Eigen::VectorXd beta;  // length = num_covariates

  // Non-negative, finite variances; finite coefficients.
  void validate() const;
};

// Fully assembled linear-Gaussian system. The filter, smoothers and
// simulators below operate on this, so tests can feed arbitrary matrices.
struct StateSpaceSystem {
  Eigen::MatrixXd transition;       // d × d
  Eigen::MatrixXd control;          // d × q
  Eigen::MatrixXd disturbance_cov;  // q × q
  Eigen::MatrixXd output;           // 1 × d constant, or n × d time-varying
  double obs_variance = 1.0;
  Eigen::VectorXd initial_mean;     // prior mean of the first state
  Eigen::MatrixXd initial_cov;      // prior covariance of the first state

  int dim() const { return static_cast<int>(transition.rows()); }
  int noise_dim() const { return static_cast<int>(control.cols()); }
  Eigen::RowVectorXd output_row(Eigen::Index t) const {
    return output.rows() == 1 ? output.row(0) : output.row(t);
  }
};

struct FilterResult {
  Eigen::MatrixXd predicted_mean;              // n × d, E[state_t | y_1..t-1]
  Eigen::MatrixXd filtered_mean;               // n × d, E[state_t | y_1..t]
  std::vector<Eigen::MatrixXd> predicted_cov;  // empty when covariances not stored
  std::vector<Eigen::MatrixXd> filtered_cov;
  Eigen::VectorXd innovation;                  // one-step prediction errors
  Eigen::VectorXd innovation_variance;
  Eigen::MatrixXd gain;                        // n × d, transition-premultiplied gain
  double log_likelihood = 0.0;
};

struct SmoothedMoments {
  Eigen::MatrixXd mean;                   // n × d, E[state_t | y_1..n]
  std::vector<Eigen::MatrixXd> cov;       // Var[state_t | y_1..n]
};

// One complete draw of the state trajectory, one row per day.
struct StatePath {
  Eigen::MatrixXd states;  // n × d
};

// --- model construction ------------------------------------------------

// Builds the structural model. With carry_coefficients_in_state the
// regression coefficients become extra constant states and the output row
// varies over time; otherwise they stay static and enter as an observation
// offset (the default used by the sampler).
ModelSpec build_model(const ModelConfig& config,
                      const std::optional<CovariateSet>& covariates,
                      bool carry_coefficients_in_state = false);

// Assembles the concrete system for given parameters and data. The level
// prior is centered on the first effective observation with variance
// 1e6 * var(y); seasonal (and any coefficient) states get the same diffuse
// scale around zero.
StateSpaceSystem assemble_system(const ModelSpec& model, const Params& params,
                                 const std::vector<double>& y);

// Observation offsets x_t' beta for the static-regression form; zero-length
// when the model has no covariates or carries them in the state.
Eigen::VectorXd regression_offset(const ModelSpec& model, const Params& params);

// --- exact machinery on assembled systems -------------------------------

FilterResult filter_system(const StateSpaceSystem& sys, const std::vector<double>& y,
                           bool store_covariances = true);

// Smoothed means only; cheap enough for the sampler's inner loop.
Eigen::MatrixXd smooth_means_system(const StateSpaceSystem& sys,
                                    const std::vector<double>& y,
                                    const FilterResult& filtered);

// Smoothed means and covariances.
SmoothedMoments smooth_moments_system(const StateSpaceSystem& sys,
                                      const std::vector<double>& y);

// One draw from the conditional state distribution via mean correction:
// simulate an artificial dataset from the system, smooth both, recombine.
StatePath simulation_smoother_system(const StateSpaceSystem& sys,
                                     const std::vector<double>& y, Rng& rng);

// Unconditional simulation of states and observations from the system.
void simulate_unconditional(const StateSpaceSystem& sys, Eigen::Index n, Rng& rng,
                            Eigen::MatrixXd& states_out, Eigen::VectorXd& obs_out);

// --- structural-model entry points ---------------------------------------

FilterResult kalman_filter(const ModelSpec& model, const Params& params,
                           const std::vector<double>& y);

SmoothedMoments kalman_smoother(const ModelSpec& model, const Params& params,
                                const std::vector<double>& y);

StatePath simulation_smoother(const ModelSpec& model, const Params& params,
                              const std::vector<double>& y, Rng& rng);

// Simulates one observation path after the training window, starting from
// the final training-day state. Covariates are required exactly when the
// model has a regression block; their row count must equal the horizon.
std::vector<double> simulate_forward(const ModelSpec& model, const Params& params,
                                     const Eigen::VectorXd& initial_state,
                                     int horizon, Rng& rng,
                                     const std::optional<Eigen::MatrixXd>& post_covariates);

}  // namespace impactlens
