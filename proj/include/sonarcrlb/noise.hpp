#pragma once

#include <Eigen/Dense>

namespace sonarcrlb {

/// First-order autoregressive noise e_n = -a e_{n-1} + w_n with unit-variance w_n,
/// started in its stationary state, so cov(e_i, e_j) = (-a)^{|i-j|} / (1 - a^2).
/// Sensors are mutually uncorrelated.
struct NoiseModel {
  double ar_coefficient = 0.0;
  int num_samples = 1;

  void validate() const;
  double lag0_variance() const { return 1.0 / (1.0 - ar_coefficient * ar_coefficient); }
};

/// N x N symmetric Toeplitz temporal covariance of one sensor.
Eigen::MatrixXd ar1_covariance(const NoiseModel& noise);

/// MN x MN block-diagonal covariance: identical AR(1) blocks, zero cross-sensor blocks.
Eigen::MatrixXd spatial_block_covariance(const NoiseModel& noise, int num_sensors);

/// Exact factorization of the AR(1) precision matrix, R^{-1} = W^T W, with W lower
/// bidiagonal: (W x)_0 = sqrt(1 - a^2) x_0 and (W x)_n = x_n + a x_{n-1}.
/// Applying W to a stacked multi-sensor vector whitens each length-N block
/// independently, which factorizes the block covariance in O(MN).
class Ar1Whitener {
 public:
  explicit Ar1Whitener(double ar_coefficient);

  double ar_coefficient() const { return a_; }

  /// Whiten each column of `x`, treating every `block_length` rows as one sensor.
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& x, int block_length) const;
  Eigen::VectorXd whiten(const Eigen::VectorXd& x, int block_length) const;

  /// Dense N x N precision matrix R^{-1} (tridiagonal).
  Eigen::MatrixXd precision(int n) const;

  /// log det R of one sensor block; independent of the block length.
  double log_det_covariance() const;

 private:
  double a_;
  double head_scale_;
};

}  // namespace sonarcrlb
