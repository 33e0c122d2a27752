#include "sonarcrlb/scenario.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "sonarcrlb/errors.hpp"

namespace sonarcrlb {

namespace {

const Vec2 kArrayAxis(0.0, 1.0);

void check_sensor(const Scenario& scenario, int node_index, int sensor) {
  if (node_index != 0 && node_index != 1) {
    throw ConfigError("node index must be 0 or 1, got " + std::to_string(node_index));
  }
  const int m = scenario.node(node_index).num_sensors;
  if (sensor < 0 || sensor >= m) {
    throw ConfigError("sensor index " + std::to_string(sensor) + " outside [0, " +
                      std::to_string(m) + ")");
  }
}

}  // namespace

void SensorNode::validate() const {
  if (num_sensors < 1) throw ConfigError("node num_sensors must be >= 1");
  if (!(element_spacing > 0.0)) throw ConfigError("node element_spacing must be > 0");
  if (!origin.allFinite()) throw ConfigError("node origin must be finite");
}

void Scenario::validate() const {
  for (const auto& n : nodes) n.validate();
  if ((nodes[0].origin - nodes[1].origin).norm() <= kDegenerateRange) {
    throw ConfigError("node origins must be distinct");
  }
  if (!target.position.allFinite() || !target.velocity.allFinite()) {
    throw ConfigError("target position and velocity must be finite");
  }
  if (!(target.weight_tonnes > 0.0)) throw ConfigError("target weight must be > 0");
  if (target.emitted_power && *target.emitted_power < 0.0) {
    throw ConfigError("target emitted power must be >= 0");
  }
  if (!(sound_speed > 0.0)) throw ConfigError("sound speed must be > 0");
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be > 0");
  if (num_samples != 0 && num_samples < 2) throw ConfigError("num_samples must be 0 (auto) or >= 2");
  if (!(passive.sample_rate > 0.0)) throw ConfigError("passive sample rate must be > 0");
  if (passive.num_samples < 2) throw ConfigError("passive num_samples must be >= 2");
  if (!(std::abs(ar_coefficient) < 1.0)) throw ConfigError("AR(1) coefficient must satisfy |a| < 1");
  if (!(transmit_power_watt > 0.0)) throw ConfigError("transmit power must be > 0");
  environment.validate();
}

Scenario Scenario::with_target_position(const Vec2& position) const {
  Scenario out = *this;
  out.target.position = position;
  return out;
}

NodeLook look_from(const Vec2& node_origin, const Vec2& point) {
  const Vec2 delta = point - node_origin;
  const double r = delta.norm();
  if (!(r > kDegenerateRange)) {
    std::ostringstream msg;
    msg << "target at (" << point.x() << ", " << point.y() << ") coincides with node origin ("
        << node_origin.x() << ", " << node_origin.y() << ")";
    throw GeometryError(msg.str());
  }
  return {r, delta / r};
}

double doppler_scale_at(const Scenario& scenario, const Vec2& position) {
  const Vec2& v = scenario.target.velocity;
  double projection = 0.0;
  for (const auto& node : scenario.nodes) projection += v.dot(look_from(node.origin, position).unit);
  return 1.0 + projection / scenario.sound_speed;
}

double doppler_scale(const Scenario& scenario) {
  return doppler_scale_at(scenario, scenario.target.position);
}

double bistatic_delay_at(const Scenario& scenario, const Vec2& position) {
  double path = 0.0;
  for (const auto& node : scenario.nodes) path += look_from(node.origin, position).range;
  return path / scenario.sound_speed;
}

double bistatic_delay(const Scenario& scenario) {
  return bistatic_delay_at(scenario, scenario.target.position);
}

double intersensor_delay_at(const Scenario& scenario, const Vec2& position, int node_index,
                            int sensor) {
  check_sensor(scenario, node_index, sensor);
  const SensorNode& node = scenario.node(node_index);
  const NodeLook look = look_from(node.origin, position);
  return node.element_spacing / scenario.sound_speed * sensor * kArrayAxis.dot(look.unit);
}

double intersensor_delay(const Scenario& scenario, int node_index, int sensor) {
  return intersensor_delay_at(scenario, scenario.target.position, node_index, sensor);
}

SignalParamGradients signal_param_gradients_at(const Scenario& scenario, const Vec2& position,
                                               int node_index, int sensor) {
  check_sensor(scenario, node_index, sensor);
  const double c = scenario.sound_speed;
  const Vec2& v = scenario.target.velocity;

  SignalParamGradients g{Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
  for (const auto& node : scenario.nodes) {
    const NodeLook look = look_from(node.origin, position);
    const Mat2 projector = Mat2::Identity() - look.unit * look.unit.transpose();
    g.eta += projector * v / look.range;
    g.tau0 += look.unit;
  }
  g.eta /= c;
  g.tau0 /= c;

  const SensorNode& node = scenario.node(node_index);
  const NodeLook look = look_from(node.origin, position);
  const Mat2 projector = Mat2::Identity() - look.unit * look.unit.transpose();
  g.tau_m = node.element_spacing / c * sensor * projector * kArrayAxis / look.range;
  return g;
}

SignalParamGradients signal_param_gradients(const Scenario& scenario, int node_index, int sensor) {
  return signal_param_gradients_at(scenario, scenario.target.position, node_index, sensor);
}

KDerivatives k_derivatives(const Scenario& scenario, int node_index, int sensor, double t) {
  const double eta = doppler_scale(scenario);
  const double lag = t - bistatic_delay(scenario) - intersensor_delay(scenario, node_index, sensor);
  const SignalParamGradients g = signal_param_gradients(scenario, node_index, sensor);
  return {lag, g.eta * lag - eta * (g.tau0 + g.tau_m)};
}

}  // namespace sonarcrlb
