#include "sonarcrlb/bistatic_fim.hpp"

#include <algorithm>
#include <cmath>

#include "sonarcrlb/errors.hpp"
#include "sonarcrlb/interpolation.hpp"
#include "sonarcrlb/noise.hpp"
#include "sonarcrlb/sonar_equation.hpp"

namespace sonarcrlb {

std::vector<double> BistaticWindow::times() const {
  std::vector<double> t(static_cast<std::size_t>(std::max(num_samples, 0)));
  for (std::size_t n = 0; n < t.size(); ++n) t[n] = start + static_cast<double>(n) / sample_rate;
  return t;
}

BistaticWindow default_window(const Scenario& scenario, const SampledWaveform& waveform) {
  if (waveform.sample_rate != scenario.sample_rate) {
    throw ConfigError("waveform sample rate must equal the scenario sample rate");
  }
  const double fs = scenario.sample_rate;
  const double eta = doppler_scale(scenario);
  const double tau0 = bistatic_delay(scenario);
  double max_intersensor = 0.0;
  for (int m = 0; m < scenario.node(kReceiverNode).num_sensors; ++m) {
    max_intersensor = std::max(max_intersensor, std::abs(intersensor_delay(scenario, kReceiverNode, m)));
  }
  const auto length = static_cast<double>(waveform.samples.size());
  const int pad = KaiserSincKernel::kHalfWidth + static_cast<int>(std::ceil(max_intersensor * fs)) +
                  static_cast<int>(std::ceil(std::abs(1.0 / eta - 1.0) * length)) + 1;

  BistaticWindow w;
  w.sample_rate = fs;
  if (scenario.num_samples > 0) {
    w.num_samples = scenario.num_samples;
    w.start = tau0 + 0.5 * (length - w.num_samples) / fs;
  } else {
    w.num_samples = static_cast<int>(waveform.samples.size()) + 2 * pad;
    w.start = tau0 - pad / fs;
  }
  return w;
}

double echo_gain(const Scenario& scenario) {
  const double r1 = look_from(scenario.nodes[0].origin, scenario.target.position).range;
  const double r2 = look_from(scenario.nodes[1].origin, scenario.target.position).range;
  const double snr = active_snr_db(scenario.transmit_power_watt, r1, r2,
                                   scenario.environment.listening_frequency_khz,
                                   scenario.environment.wind_speed_knots);
  return std::sqrt(snr_db_to_signal_power(snr, NoiseModel{scenario.ar_coefficient, 1}));
}

BistaticSetup make_bistatic_setup(const Scenario& scenario, const SampledWaveform& waveform) {
  return {default_window(scenario, waveform), echo_gain(scenario)};
}

ParamVector true_parameters(const Scenario& scenario) {
  const Vec2& p = scenario.target.position;
  return {p.x(), p.y(), doppler_scale(scenario)};
}

BistaticMean bistatic_mean(const Scenario& scenario, const SampledWaveform& waveform,
                           const BistaticSetup& setup, const ParamVector& theta) {
  if (!(theta.eta > 0.0)) throw DomainError("Doppler scale must be positive");
  const int sensors = scenario.node(kReceiverNode).num_sensors;
  const int n = setup.window.num_samples;
  const std::vector<double> times = setup.window.times();
  const Vec2 p = theta.position();
  const double tau0 = bistatic_delay_at(scenario, p);

  BistaticMean out;
  out.values.resize(static_cast<Eigen::Index>(sensors) * n);
  for (int m = 0; m < sensors; ++m) {
    const double tau = tau0 + intersensor_delay_at(scenario, p, kReceiverNode, m);
    const std::vector<double> echo = evaluate_scaled_delayed(waveform, theta.eta, tau, times);
    for (int i = 0; i < n; ++i) out.values(m * n + i) = setup.gain * echo[static_cast<std::size_t>(i)];
  }
  out.support_exhausted = waveform.energy > 0.0 && setup.gain != 0.0 && out.values.isZero(0.0);
  return out;
}

BistaticMean bistatic_mean(const Scenario& scenario, const SampledWaveform& waveform,
                           const BistaticSetup& setup) {
  return bistatic_mean(scenario, waveform, setup, true_parameters(scenario));
}

Eigen::MatrixXd bistatic_jacobian(const Scenario& scenario, const SampledWaveform& waveform,
                                  const BistaticSetup& setup) {
  const int sensors = scenario.node(kReceiverNode).num_sensors;
  const int n = setup.window.num_samples;
  const double fs = waveform.sample_rate;
  const double eta = doppler_scale(scenario);
  const double tau0 = bistatic_delay(scenario);

  Eigen::MatrixXd jac(static_cast<Eigen::Index>(sensors) * n, 3);
  for (int m = 0; m < sensors; ++m) {
    const double tau_m = intersensor_delay(scenario, kReceiverNode, m);
    const SignalParamGradients g = signal_param_gradients(scenario, kReceiverNode, m);
    const Vec2 shift_gradient = eta * (g.tau0 + g.tau_m);
    for (int i = 0; i < n; ++i) {
      const double t = setup.window.start + i / fs;
      const double lag = t - tau0 - tau_m;
      const double ds = setup.gain * fs * interpolate_derivative_at(waveform.samples, eta * lag * fs);
      const Eigen::Index row = static_cast<Eigen::Index>(m) * n + i;
      jac(row, 0) = ds * (g.eta.x() * lag - shift_gradient.x());
      jac(row, 1) = ds * (g.eta.y() * lag - shift_gradient.y());
      jac(row, 2) = ds * lag;
    }
  }
  return jac;
}

FimMatrix fim_bistatic(const Scenario& scenario, const SampledWaveform& waveform,
                       const BistaticSetup& setup) {
  if (setup.window.num_samples < 1) throw ConfigError("bistatic window must contain samples");
  const Eigen::MatrixXd jac = bistatic_jacobian(scenario, waveform, setup);
  const Ar1Whitener whitener(scenario.ar_coefficient);
  const Eigen::MatrixXd whitened = whitener.whiten(jac, setup.window.num_samples);
  FimMatrix fim = whitened.transpose() * whitened;
  return 0.5 * (fim + fim.transpose());
}

FimMatrix fim_bistatic(const Scenario& scenario, const SampledWaveform& waveform) {
  return fim_bistatic(scenario, waveform, make_bistatic_setup(scenario, waveform));
}

}  // namespace sonarcrlb
