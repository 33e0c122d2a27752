#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sonarcrlb/bistatic_fim.hpp"
#include "sonarcrlb/crlb.hpp"
#include "sonarcrlb/scenario.hpp"
#include "sonarcrlb/waveform.hpp"

namespace sonarcrlb {

/// One draw of the observation model: passive snapshots y_n = D_n v_n + e_n per node
/// (v_n ~ N(0, sigma_n^2 I)) and the bistatic echo mu_bs + e_bs. Noise is AR(1) per
/// sensor, independent across sensors, nodes and components.
struct Measurements {
  std::array<Eigen::VectorXd, 2> passive;
  Eigen::VectorXd bistatic;

  /// [passive node 1; passive node 2; bistatic].
  Eigen::VectorXd stacked() const;
};

/// Unit-innovation AR(1) noise for `num_sensors` independent sensors of length
/// `num_samples`, started in the stationary state.
Eigen::VectorXd simulate_ar1_noise(double ar_coefficient, int num_samples, int num_sensors, std::uint64_t seed);

/// Likelihood model at a fixed true scenario. Estimation parameters are
/// phi = (x, y, delta) with total Doppler scale eta(x, y) + delta, matching the
/// parameterization of the FIMs; case 1 estimates (x, y) only. Source powers, echo
/// gain and the bistatic window are held at their true-state values.
class LikelihoodModel {
 public:
  LikelihoodModel(const Scenario& scenario, const SampledWaveform& waveform, FusionCase case_id);

  FusionCase case_id() const { return case_id_; }
  int dimension() const { return case_id_ == FusionCase::passive_only ? 2 : 3; }
  Eigen::VectorXd truth() const;

  Measurements simulate(std::uint64_t seed) const;

  /// Negative log-likelihood (up to a constant) of the components used by the case.
  double negative_log_likelihood(const Measurements& y, const Eigen::VectorXd& phi) const;

  FimMatrix fim() const;
  /// CRLB over phi (dimension x dimension); throws ConfigError when the FIM is singular.
  Eigen::MatrixXd crlb() const;

  const BistaticSetup& bistatic_setup() const { return setup_; }

 private:
  double passive_nll(int node, const Eigen::VectorXd& y, const Vec2& p) const;

  Scenario scenario_;
  SampledWaveform waveform_;
  FusionCase case_id_;
  BistaticSetup setup_;
  std::array<double, 2> source_power_{};
  std::optional<Eigen::MatrixXd> bound_;
};

Measurements simulate_measurements(const Scenario& scenario, const SampledWaveform& waveform, std::uint64_t seed);

struct McOptions {
  FusionCase case_id = FusionCase::bistatic_only;
  int num_trials = 500;
  std::uint64_t seed = 1;
  int workers = 1;
  int grid_points = 5;       // coarse grid points per axis
  double grid_span = 3.0;    // coarse grid half-width in CRLB standard deviations
  int max_refinements = 40;
};

struct McReport {
  FusionCase case_id = FusionCase::bistatic_only;
  int num_trials = 0;
  std::vector<std::string> parameters;
  Eigen::VectorXd mean_error;
  Eigen::MatrixXd empirical_covariance;
  Eigen::MatrixXd crlb;
  Eigen::VectorXd efficiency;  // empirical variance / CRLB per parameter
  /// Smallest eigenvalue of L^-1 C L^-T - I with CRLB = L L^T.
  double min_whitened_eigenvalue = 0.0;
  /// Standard error of a whitened sample variance, sqrt(2 / (n - 1)).
  double standard_error = 0.0;
  int unconverged_trials = 0;

  /// Empirical covariance minus CRLB is PSD within 3 standard errors.
  bool bound_respected() const { return min_whitened_eigenvalue > -3.0 * standard_error; }
};

/// Grid-plus-refine ML estimate for one measurement draw. Returns false in
/// `converged` if the refinement hit its iteration limit.
Eigen::VectorXd ml_estimate(const LikelihoodModel& model, const Measurements& y, const McOptions& options,
                            bool* converged = nullptr);

/// Monte-Carlo check of the CRLB as a lower bound. Trial i uses an RNG stream seeded by
/// (seed, i), so results do not depend on the worker count.
McReport mc_crlb_check(const Scenario& scenario, const SampledWaveform& waveform, const McOptions& options);

std::string format_report(const McReport& report);

}  // namespace sonarcrlb
