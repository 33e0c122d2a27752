#include "sonarcrlb/noise.hpp"

#include <cmath>

#include "sonarcrlb/errors.hpp"

namespace sonarcrlb {

void NoiseModel::validate() const {
  if (!(std::abs(ar_coefficient) < 1.0)) {
    throw DomainError("AR(1) coefficient must satisfy |a| < 1 for a stationary process");
  }
  if (num_samples < 1) throw ConfigError("noise num_samples must be >= 1");
}

Eigen::MatrixXd ar1_covariance(const NoiseModel& noise) {
  noise.validate();
  const int n = noise.num_samples;
  Eigen::VectorXd lags(n);
  const double a = noise.ar_coefficient;
  lags(0) = noise.lag0_variance();
  for (int k = 1; k < n; ++k) lags(k) = -a * lags(k - 1);

  Eigen::MatrixXd r(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) r(i, j) = lags(std::abs(i - j));
  }
  return r;
}

Eigen::MatrixXd spatial_block_covariance(const NoiseModel& noise, int num_sensors) {
  if (num_sensors < 1) throw ConfigError("num_sensors must be >= 1");
  const Eigen::MatrixXd block = ar1_covariance(noise);
  const int n = noise.num_samples;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(num_sensors * n, num_sensors * n);
  for (int m = 0; m < num_sensors; ++m) out.block(m * n, m * n, n, n) = block;
  return out;
}

Ar1Whitener::Ar1Whitener(double ar_coefficient) : a_(ar_coefficient) {
  if (!(std::abs(a_) < 1.0)) {
    throw DomainError("AR(1) coefficient must satisfy |a| < 1 for a stationary process");
  }
  head_scale_ = std::sqrt(1.0 - a_ * a_);
}

Eigen::MatrixXd Ar1Whitener::whiten(const Eigen::MatrixXd& x, int block_length) const {
  if (block_length < 1 || x.rows() % block_length != 0) {
    throw ConfigError("whitening block length must divide the row count");
  }
  Eigen::MatrixXd out(x.rows(), x.cols());
  const Eigen::Index blocks = x.rows() / block_length;
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index base = b * block_length;
    out.row(base) = head_scale_ * x.row(base);
    for (Eigen::Index n = 1; n < block_length; ++n) {
      out.row(base + n) = x.row(base + n) + a_ * x.row(base + n - 1);
    }
  }
  return out;
}

Eigen::VectorXd Ar1Whitener::whiten(const Eigen::VectorXd& x, int block_length) const {
  Eigen::MatrixXd as_matrix = x;
  return whiten(as_matrix, block_length).col(0);
}

Eigen::MatrixXd Ar1Whitener::precision(int n) const {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    q(i, i) = (i == 0 || i == n - 1) ? 1.0 : 1.0 + a_ * a_;
    if (i + 1 < n) q(i, i + 1) = q(i + 1, i) = a_;
  }
  if (n == 1) q(0, 0) = 1.0 - a_ * a_;
  return q;
}

double Ar1Whitener::log_det_covariance() const {
  // det W = sqrt(1 - a^2) and R = (W^T W)^{-1}.
  return -std::log(1.0 - a_ * a_);
}

}  // namespace sonarcrlb
