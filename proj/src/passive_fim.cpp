#include "sonarcrlb/passive_fim.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sonarcrlb/errors.hpp"
#include "sonarcrlb/noise.hpp"
#include "sonarcrlb/sonar_equation.hpp"

namespace sonarcrlb {

namespace {

constexpr double kPi = std::numbers::pi;
using Complex = std::complex<double>;

void check_passive_sampling(const Scenario& scenario) {
  const int n = scenario.passive.num_samples;
  if (n < 2 || n % 2 != 0) {
    throw ConfigError("passive num_samples must be even and >= 2 (the k = N/2 branch), got " +
                      std::to_string(n));
  }
  if (!(scenario.passive.sample_rate > 0.0)) throw ConfigError("passive sample rate must be > 0");
}

double trace_of_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b.transpose()).sum();
}

// Block (m, l) of a stacked operator sum: circulant of spectra[m] * conj(spectra[l]).
Eigen::MatrixXd circulant_block_matrix(const std::vector<Eigen::VectorXcd>& left,
                                       const std::vector<Eigen::VectorXcd>& right, int n) {
  const auto m = static_cast<int>(left.size());
  Eigen::MatrixXd out(m * n, m * n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXcd product =
          left[static_cast<std::size_t>(i)].cwiseProduct(right[static_cast<std::size_t>(j)].conjugate());
      out.block(i * n, j * n, n, n) = circulant_from_spectrum(product);
    }
  }
  return out;
}

std::vector<Eigen::VectorXcd> spectra_slopes(const Scenario& scenario, int node_index, Axis wrt) {
  const int n = scenario.passive.num_samples;
  const double ts = 1.0 / scenario.passive.sample_rate;
  const int sensors = scenario.node(node_index).num_sensors;
  std::vector<Eigen::VectorXcd> out;
  out.reserve(static_cast<std::size_t>(sensors));
  for (int m = 0; m < sensors; ++m) {
    const double tau = intersensor_delay(scenario, node_index, m);
    const double dtau = signal_param_gradients(scenario, node_index, m).tau_m(static_cast<int>(wrt));
    out.push_back(fractional_delay_spectrum_slope(tau, n, ts) * dtau);
  }
  return out;
}

Eigen::MatrixXd stack_circulants(const std::vector<Eigen::VectorXcd>& spectra, int n) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(spectra.size()) * n, n);
  for (std::size_t m = 0; m < spectra.size(); ++m) {
    out.block(static_cast<Eigen::Index>(m) * n, 0, n, n) = circulant_from_spectrum(spectra[m]);
  }
  return out;
}

}  // namespace

Eigen::VectorXcd fractional_delay_spectrum(double tau, int num_samples, double sample_period) {
  const int n = num_samples;
  const double scale = 2.0 * kPi * tau / (n * sample_period);
  Eigen::VectorXcd out(n);
  for (int k = 0; k < n; ++k) {
    if (2 * k < n) {
      out(k) = std::polar(1.0, -scale * k);
    } else if (2 * k == n) {
      out(k) = std::cos(kPi * tau / sample_period);
    } else {
      out(k) = std::polar(1.0, scale * (n - k));
    }
  }
  return out;
}

Eigen::VectorXcd fractional_delay_spectrum_slope(double tau, int num_samples, double sample_period) {
  const int n = num_samples;
  const double scale = 2.0 * kPi / (n * sample_period);
  Eigen::VectorXcd out(n);
  for (int k = 0; k < n; ++k) {
    if (2 * k < n) {
      out(k) = Complex(0.0, -scale * k) * std::polar(1.0, -scale * tau * k);
    } else if (2 * k == n) {
      out(k) = -kPi / sample_period * std::sin(kPi * tau / sample_period);
    } else {
      out(k) = Complex(0.0, scale * (n - k)) * std::polar(1.0, scale * tau * (n - k));
    }
  }
  return out;
}

Eigen::MatrixXd circulant_from_spectrum(const Eigen::VectorXcd& spectrum, double* max_imaginary) {
  const auto n = static_cast<int>(spectrum.size());
  // First column c[q] = (1/N) sum_k spectrum_k e^{j 2 pi k q / N}.
  Eigen::VectorXcd twiddle(n);
  for (int i = 0; i < n; ++i) twiddle(i) = std::polar(1.0, 2.0 * kPi * i / n);
  Eigen::VectorXd column(n);
  double worst_imag = 0.0;
  for (int q = 0; q < n; ++q) {
    Complex acc = 0.0;
    for (int k = 0; k < n; ++k) acc += spectrum(k) * twiddle((k * q) % n);
    acc /= static_cast<double>(n);
    column(q) = acc.real();
    worst_imag = std::max(worst_imag, std::abs(acc.imag()));
  }
  if (max_imaginary != nullptr) *max_imaginary = std::max(*max_imaginary, worst_imag);

  Eigen::MatrixXd out(n, n);
  for (int l = 0; l < n; ++l) {
    for (int r = 0; r < n; ++r) out(r, l) = column(((r - l) % n + n) % n);
  }
  return out;
}

DelayOperator build_delay_operator(const Scenario& scenario, int node_index) {
  check_passive_sampling(scenario);
  const int n = scenario.passive.num_samples;
  const double ts = 1.0 / scenario.passive.sample_rate;
  const int sensors = scenario.node(node_index).num_sensors;

  DelayOperator op;
  op.num_samples = n;
  op.sample_period = ts;
  op.assembled.resize(sensors * n, n);
  for (int m = 0; m < sensors; ++m) {
    const double tau = intersensor_delay(scenario, node_index, m);
    if (!(std::abs(tau) < n * ts)) {
      std::ostringstream msg;
      msg << "inter-sensor delay " << tau << " s exceeds the passive window " << n * ts << " s";
      throw ConfigError(msg.str());
    }
    op.delays.push_back(tau);
    op.spectra.push_back(fractional_delay_spectrum(tau, n, ts));
    op.assembled.block(m * n, 0, n, n) = circulant_from_spectrum(op.spectra.back(), &op.max_imaginary);
  }
  return op;
}

Eigen::MatrixXd delay_operator_derivative(const Scenario& scenario, int node_index, Axis wrt) {
  check_passive_sampling(scenario);
  return stack_circulants(spectra_slopes(scenario, node_index, wrt), scenario.passive.num_samples);
}

PassiveCovariance passive_covariance(const Scenario& scenario, int node_index, double sigma_s2) {
  if (!(sigma_s2 >= 0.0)) throw DomainError("passive signal power must be >= 0");
  const DelayOperator op = build_delay_operator(scenario, node_index);
  const int n = op.num_samples;
  const int sensors = op.num_sensors();

  PassiveCovariance out;
  out.sigma = sigma_s2 * circulant_block_matrix(op.spectra, op.spectra, n) +
              spatial_block_covariance({scenario.ar_coefficient, n}, sensors);
  for (const Axis axis : {Axis::x, Axis::y}) {
    const auto slopes = spectra_slopes(scenario, node_index, axis);
    Eigen::MatrixXd cross = circulant_block_matrix(slopes, op.spectra, n);
    out.dsigma[static_cast<std::size_t>(axis)] = sigma_s2 * (cross + cross.transpose());
  }
  return out;
}

FimMatrix fim_passive(const Scenario& scenario, int node_index, double sigma_s2) {
  if (!(sigma_s2 >= 0.0)) throw DomainError("passive signal power must be >= 0");
  FimMatrix fim = FimMatrix::Zero();
  if (sigma_s2 == 0.0) return fim;

  const DelayOperator op = build_delay_operator(scenario, node_index);
  const int n = op.num_samples;
  const int sensors = op.num_sensors();
  const double a = scenario.ar_coefficient;

  // Sigma = I kron R + sigma^2 D D^T with |lambda_k| <= 1, so lambda_max(Sigma) <=
  // 1/(1-|a|)^2 + sigma^2 M and lambda_min(Sigma) >= 1/(1+|a|)^2.
  const double condition_bound =
      (1.0 / ((1.0 - std::abs(a)) * (1.0 - std::abs(a))) + sigma_s2 * sensors) *
      (1.0 + std::abs(a)) * (1.0 + std::abs(a));
  if (condition_bound > kMaxCovarianceCondition) {
    std::ostringstream msg;
    msg << "passive covariance condition bound " << condition_bound << " exceeds "
        << kMaxCovarianceCondition << " (sigma_s^2 = " << sigma_s2 << ", a = " << a << ")";
    throw ConditioningError(msg.str(), condition_bound);
  }

  Eigen::MatrixXd stacked(sensors * n, 3 * n);
  stacked.leftCols(n) = op.assembled;
  stacked.middleCols(n, n) = delay_operator_derivative(scenario, node_index, Axis::x);
  stacked.rightCols(n) = delay_operator_derivative(scenario, node_index, Axis::y);

  const Ar1Whitener whitener(a);
  const Eigen::MatrixXd whitened = whitener.whiten(stacked, n);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(whitened.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();

  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(n, n) + sigma_s2 * gram.topLeftCorner(n, n);
  const Eigen::LLT<Eigen::MatrixXd> k_factor(k);
  if (k_factor.info() != Eigen::Success) {
    throw ConditioningError("Woodbury core I + sigma^2 D^T R^-1 D failed to factorize", condition_bound);
  }
  const Eigen::MatrixXd top_rows = gram.topRows(n);
  const Eigen::MatrixXd g = gram - sigma_s2 * top_rows.transpose() * k_factor.solve(top_rows);

  const auto block = [&](int p, int s) { return g.block(p * n, s * n, n, n); };
  const Eigen::MatrixXd g_dd = block(0, 0);
  const double s4 = sigma_s2 * sigma_s2;
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) {
      const double value = s4 * (trace_of_product(block(0, i + 1), block(0, j + 1)) +
                                 trace_of_product(g_dd, block(i + 1, j + 1)));
      fim(i, j) = value;
      fim(j, i) = value;
    }
  }
  return fim;
}

double passive_signal_power(const Scenario& scenario, int node_index) {
  if (scenario.target.emitted_power) return *scenario.target.emitted_power;
  const double speed = scenario.target.speed_knots();
  if (speed <= 0.0) return 0.0;
  const NodeLook look = look_from(scenario.node(node_index).origin, scenario.target.position);
  const double snr = passive_snr_db(look.range, scenario.environment.listening_frequency_khz, speed,
                                    scenario.target.weight_tonnes, scenario.environment.wind_speed_knots);
  return snr_db_to_signal_power(snr, NoiseModel{scenario.ar_coefficient, scenario.passive.num_samples});
}

}  // namespace sonarcrlb
