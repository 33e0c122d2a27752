#pragma once

// Reference computations used only by the tests. Each one takes a different route
// from the library: closed-form kernels, dense matrices, explicit inverses and
// finite differences instead of factorizations and analytic derivatives.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "sonarcrlb/bistatic_fim.hpp"
#include "sonarcrlb/interpolation.hpp"
#include "sonarcrlb/scenario.hpp"

namespace oracle {

using sonarcrlb::Scenario;
using sonarcrlb::Vec2;

inline constexpr double kPi = std::numbers::pi;

/// Central difference of a scalar function.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// AR(1) Toeplitz covariance written out from its autocorrelation.
inline Eigen::MatrixXd ar1_toeplitz(double a, int n) {
  Eigen::MatrixXd r(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) r(i, j) = std::pow(-a, std::abs(i - j)) / (1.0 - a * a);
  }
  return r;
}

inline Eigen::MatrixXd block_diagonal(const Eigen::MatrixXd& block, int copies) {
  const auto n = block.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * copies, n * copies);
  for (int m = 0; m < copies; ++m) out.block(m * n, m * n, n, n) = block;
  return out;
}

/// Periodic trigonometric-interpolation delay by `shift` samples as a real N x N matrix,
/// from the closed-form kernel
///   (1/N) [1 + 2 sum_{k=1}^{N/2-1} cos(2 pi k (n - l - shift) / N) + cos(pi (n - l - shift))].
inline Eigen::MatrixXd dirichlet_delay(double shift, int n) {
  Eigen::MatrixXd d(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double u = r - c - shift;
      double acc = 1.0 + std::cos(kPi * u);
      for (int k = 1; k < n / 2; ++k) acc += 2.0 * std::cos(2.0 * kPi * k * u / n);
      d(r, c) = acc / n;
    }
  }
  return d;
}

/// Inter-sensor delays straight from the geometry: (d / c) m u_y at the node.
inline double intersensor_delay(const Scenario& sc, const Vec2& p, int node, int m) {
  const Vec2 delta = p - sc.node(node).origin;
  return sc.node(node).element_spacing / sc.sound_speed * m * (delta.y() / delta.norm());
}

/// Stacked delay operator (MN x N) at target position p.
inline Eigen::MatrixXd delay_operator(const Scenario& sc, const Vec2& p, int node) {
  const int n = sc.passive.num_samples;
  const int sensors = sc.node(node).num_sensors;
  Eigen::MatrixXd out(sensors * n, n);
  for (int m = 0; m < sensors; ++m) {
    out.block(m * n, 0, n, n) = dirichlet_delay(intersensor_delay(sc, p, node, m) * sc.passive.sample_rate, n);
  }
  return out;
}

inline Eigen::MatrixXd passive_sigma(const Scenario& sc, const Vec2& p, int node, double sigma_s2) {
  const Eigen::MatrixXd d = delay_operator(sc, p, node);
  return sigma_s2 * d * d.transpose() +
         block_diagonal(ar1_toeplitz(sc.ar_coefficient, sc.passive.num_samples), sc.node(node).num_sensors);
}

/// 1/2 tr(S^-1 dS_i S^-1 dS_j) with an explicit inverse and dS from central differences.
inline Eigen::Matrix2d passive_fim_trace(const Scenario& sc, int node, double sigma_s2, double h = 1e-3) {
  const Vec2 p = sc.target.position;
  const Eigen::MatrixXd inv = passive_sigma(sc, p, node, sigma_s2).inverse();
  Eigen::MatrixXd ds[2];
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e(i) = h;
    ds[i] = (passive_sigma(sc, p + e, node, sigma_s2) - passive_sigma(sc, p - e, node, sigma_s2)) / (2.0 * h);
  }
  Eigen::Matrix2d fim;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) fim(i, j) = 0.5 * (inv * ds[i] * inv * ds[j]).trace();
  }
  return fim;
}

/// Bistatic mean at (x, y, delta) with total Doppler scale eta(p) + delta.
inline Eigen::VectorXd bistatic_mean_offset(const Scenario& sc, const sonarcrlb::SampledWaveform& wf,
                                            const sonarcrlb::BistaticSetup& setup, const Eigen::Vector3d& phi) {
  const Vec2 p(phi(0), phi(1));
  const sonarcrlb::ParamVector theta{p.x(), p.y(), sonarcrlb::doppler_scale_at(sc, p) + phi(2)};
  return sonarcrlb::bistatic_mean(sc, wf, setup, theta).values;
}

/// Hessian of the Gaussian mean term Q(phi) = 1/2 (mu(phi) - mu0)^T Sigma^-1 (mu(phi) - mu0)
/// at the true state by second differences with steps `h`.
inline Eigen::Matrix3d bistatic_curvature(const Scenario& sc, const sonarcrlb::SampledWaveform& wf,
                                          const sonarcrlb::BistaticSetup& setup, const Eigen::Vector3d& h) {
  const Eigen::Vector3d phi0(sc.target.position.x(), sc.target.position.y(), 0.0);
  const Eigen::VectorXd mu0 = bistatic_mean_offset(sc, wf, setup, phi0);
  const int sensors = sc.node(sonarcrlb::kReceiverNode).num_sensors;
  const Eigen::MatrixXd precision =
      block_diagonal(ar1_toeplitz(sc.ar_coefficient, setup.window.num_samples), sensors).inverse();
  const auto q = [&](const Eigen::Vector3d& phi) {
    const Eigen::VectorXd r = bistatic_mean_offset(sc, wf, setup, phi) - mu0;
    return 0.5 * r.dot(precision * r);
  };
  Eigen::Matrix3d hess;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d ei = Eigen::Vector3d::Zero();
      Eigen::Vector3d ej = Eigen::Vector3d::Zero();
      ei(i) = h(i);
      ej(j) = h(j);
      hess(i, j) = (q(phi0 + ei + ej) - q(phi0 + ei - ej) - q(phi0 - ei + ej) + q(phi0 - ei - ej)) /
                   (4.0 * h(i) * h(j));
    }
  }
  return hess;
}

/// chi(tau, eta) = sqrt(eta) Ts sum_n s[n] sum_k s[k] h(eta (n - tau fs) - k) with the
/// closed-form kernel.
inline double wbaf_cell(const std::vector<double>& s, double fs, double tau, double eta) {
  const auto& kernel = sonarcrlb::default_kernel();
  double acc = 0.0;
  const auto length = static_cast<long>(s.size());
  for (long n = 0; n < length; ++n) {
    const double u = eta * (static_cast<double>(n) - tau * fs);
    double value = 0.0;
    for (long k = 0; k < length; ++k) value += s[static_cast<std::size_t>(k)] * kernel.exact(u - static_cast<double>(k));
    acc += s[static_cast<std::size_t>(n)] * value;
  }
  return std::abs(std::sqrt(eta) / fs * acc);
}

/// O(N^2) DFT, X_k = sum_n x_n e^{-j 2 pi k n / N}.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * t % n) / static_cast<double>(n));
    }
    out[k] = acc;
  }
  return out;
}

/// Largest relative entry-wise deviation, scaled by the largest magnitude in `ref`.
inline double relative_error(const Eigen::MatrixXd& value, const Eigen::MatrixXd& ref) {
  const double scale = ref.cwiseAbs().maxCoeff();
  if (scale == 0.0) return value.cwiseAbs().maxCoeff();
  return (value - ref).cwiseAbs().maxCoeff() / scale;
}

}  // namespace oracle
