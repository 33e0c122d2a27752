#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sonarcrlb/crlb.hpp"
#include "sonarcrlb/scenario.hpp"
#include "sonarcrlb/waveform.hpp"

namespace sonarcrlb {

/// Receiver observation window t_n = start + n / sample_rate, n = 0..num_samples-1.
struct BistaticWindow {
  double start = 0.0;
  double sample_rate = 24000.0;
  int num_samples = 0;

  std::vector<double> times() const;
};

/// Everything about the echo that is held fixed while theta varies: the window
/// placement and the propagation amplitude applied to the unit-energy-normalized
/// transmit samples.
struct BistaticSetup {
  BistaticWindow window;
  double gain = 1.0;
};

/// Window opened around the echo at the true state: it starts `pad` samples before
/// tau0 and spans the waveform length plus padding for the inter-sensor delays,
/// Doppler stretch and reconstruction kernel. With scenario.num_samples > 0 the window
/// has that length and is centred on the echo instead.
BistaticWindow default_window(const Scenario& scenario, const SampledWaveform& waveform);

/// Amplitude making the received energy-normalized echo match the active SNR at the
/// true (r1, r2): gain^2 = 10^(SNR/10) / (1 - a^2).
double echo_gain(const Scenario& scenario);

BistaticSetup make_bistatic_setup(const Scenario& scenario, const SampledWaveform& waveform);

struct BistaticMean {
  Eigen::VectorXd values;  // stacked per receiver sensor, MN
  bool support_exhausted = false;
};

/// Stacked echoes gain * s(eta (t_n - tau0 - tau_m)) at the receiver node for the given
/// theta. The position sets tau0 and tau_m; theta.eta is the total Doppler scale.
BistaticMean bistatic_mean(const Scenario& scenario, const SampledWaveform& waveform,
                           const BistaticSetup& setup, const ParamVector& theta);

/// Mean at the true state, theta = (p, eta(p)).
BistaticMean bistatic_mean(const Scenario& scenario, const SampledWaveform& waveform,
                           const BistaticSetup& setup);

/// True-state parameter vector (p, eta(p)).
ParamVector true_parameters(const Scenario& scenario);

/// Columns d mu / d theta_i = gain * s'(k) .* dk/dtheta_i (MN x 3), with s' the exact
/// derivative of the same reconstruction that produces the mean.
Eigen::MatrixXd bistatic_jacobian(const Scenario& scenario, const SampledWaveform& waveform,
                                  const BistaticSetup& setup);

/// J^T Sigma_bs^-1 J with Sigma_bs the spatially white AR(1) block covariance,
/// applied through the exact AR(1) whitening factor.
FimMatrix fim_bistatic(const Scenario& scenario, const SampledWaveform& waveform,
                       const BistaticSetup& setup);

FimMatrix fim_bistatic(const Scenario& scenario, const SampledWaveform& waveform);

}  // namespace sonarcrlb
