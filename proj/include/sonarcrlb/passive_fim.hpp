#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "sonarcrlb/crlb.hpp"
#include "sonarcrlb/scenario.hpp"

namespace sonarcrlb {

/// Position axis for derivatives.
enum class Axis { x = 0, y = 1 };

/// Trigonometric-interpolation fractional delay at one node: per sensor m, a diagonal
/// spectrum lambda_k(tau_m) on the N-point DFT grid, and the assembled real operator
/// D = (I_M kron W^H) Lambda W (MN x N), one circulant N x N block per sensor.
struct DelayOperator {
  int num_samples = 0;
  double sample_period = 0.0;
  std::vector<double> delays;                            // tau_m per sensor [s]
  std::vector<Eigen::VectorXcd> spectra;                 // lambda_k per sensor
  Eigen::MatrixXd assembled;                             // MN x N
  double max_imaginary = 0.0;                            // largest |Im| seen while assembling

  int num_sensors() const { return static_cast<int>(spectra.size()); }
};

/// lambda_k for one delay: exp(-j 2 pi k tau / (N Ts)) for k < N/2, cos(pi tau / Ts) at
/// k = N/2, exp(j 2 pi (N - k) tau / (N Ts)) for k > N/2.
Eigen::VectorXcd fractional_delay_spectrum(double tau, int num_samples, double sample_period);

/// d lambda_k / d tau, branch by branch.
Eigen::VectorXcd fractional_delay_spectrum_slope(double tau, int num_samples, double sample_period);

/// Real N x N circulant W^H diag(spectrum) W. `max_imaginary` receives the largest
/// imaginary residue of the complex assembly.
Eigen::MatrixXd circulant_from_spectrum(const Eigen::VectorXcd& spectrum, double* max_imaginary = nullptr);

/// Builds the operator for `node_index` using the scenario's passive sampling.
/// Requires even N and |tau_m| < N Ts.
DelayOperator build_delay_operator(const Scenario& scenario, int node_index);

/// dD/dx or dD/dy (MN x N): chain rule through d tau_m / dp.
Eigen::MatrixXd delay_operator_derivative(const Scenario& scenario, int node_index, Axis wrt);

/// Sigma = sigma_s^2 D D^T + I_M kron R_e and its position derivatives
/// dSigma/dp_i = sigma_s^2 (dD_i D^T + D dD_i^T). The eta derivative is identically zero.
struct PassiveCovariance {
  Eigen::MatrixXd sigma;
  std::array<Eigen::MatrixXd, 2> dsigma;
};

PassiveCovariance passive_covariance(const Scenario& scenario, int node_index, double sigma_s2);

/// Largest Sigma condition number accepted before a ConditioningError.
inline constexpr double kMaxCovarianceCondition = 1e12;

/// Covariance-form information 1/2 tr(Sigma^-1 dSigma_i Sigma^-1 dSigma_j) over (x, y);
/// the eta row and column are structural zeros.
///
/// Evaluated without forming Sigma^-1: with Q = I kron R_e^-1 (exact AR(1) factor) and
/// K = I + sigma^2 D^T Q D, Woodbury gives G_PS = P^T Sigma^-1 S for P, S in
/// {D, dD_x, dD_y} from N x N blocks, and
///   I_ij = sigma^4 [tr(G_{D,i} G_{D,j}) + tr(G_{D,D} G_{i,j})].
FimMatrix fim_passive(const Scenario& scenario, int node_index, double sigma_s2);

/// Passive source variance seen at a node: the target's emitted_power override, or the
/// per-sensor passive SNR at the node's range mapped through the noise lag-0 variance.
double passive_signal_power(const Scenario& scenario, int node_index);

}  // namespace sonarcrlb
