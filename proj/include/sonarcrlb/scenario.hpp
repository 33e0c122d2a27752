#pragma once

#include <array>
#include <optional>

#include <Eigen/Dense>

#include "sonarcrlb/sonar_equation.hpp"

namespace sonarcrlb {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kMetersPerSecondPerKnot = 0.514444;

constexpr double knots_to_mps(double knots) { return knots * kMetersPerSecondPerKnot; }
constexpr double mps_to_knots(double mps) { return mps / kMetersPerSecondPerKnot; }

/// Minimum target-to-node distance below which the geometry is rejected [m].
inline constexpr double kDegenerateRange = 1e-6;

/// Node 1 transmits the communication signal, node 2 receives the echo.
inline constexpr int kTransmitterNode = 0;
inline constexpr int kReceiverNode = 1;

/// Uniform linear array. Elements sit along the fixed axis e = [0, 1]^T;
/// sensor 0 is the phase reference.
struct SensorNode {
  Vec2 origin = Vec2::Zero();
  int num_sensors = 4;
  double element_spacing = 0.125;

  void validate() const;
};

struct TargetState {
  Vec2 position = Vec2(0.0, 1000.0);
  Vec2 velocity = Vec2::Zero();  // m/s
  double weight_tonnes = 1.0;
  /// Passive source variance. When unset it is derived per node from the passive SNR.
  std::optional<double> emitted_power;

  double speed_knots() const { return mps_to_knots(velocity.norm()); }
};

/// Sampling of the passive (target-radiated) observation window.
struct PassiveSampling {
  double sample_rate = 2560.0;
  int num_samples = 128;
};

struct Scenario {
  std::array<SensorNode, 2> nodes{};
  TargetState target{};
  double sound_speed = 1500.0;
  /// Bistatic receiver sample rate [Hz].
  double sample_rate = 24000.0;
  /// Bistatic window length; 0 sizes the window to the waveform.
  int num_samples = 0;
  PassiveSampling passive{};
  double ar_coefficient = 0.5;
  Environment environment{};
  double transmit_power_watt = 1.0;

  void validate() const;

  const SensorNode& node(int index) const { return nodes.at(static_cast<std::size_t>(index)); }

  /// Copy with the target moved to `position` (velocity and everything else kept).
  Scenario with_target_position(const Vec2& position) const;
};

/// Estimation parameters theta = [x, y, eta].
struct ParamVector {
  double x = 0.0;
  double y = 0.0;
  double eta = 1.0;

  Vec2 position() const { return {x, y}; }
  Eigen::Vector3d as_vector() const { return {x, y, eta}; }
};

/// Range and unit vector from a node origin to a point.
struct NodeLook {
  double range;
  Vec2 unit;
};

NodeLook look_from(const Vec2& node_origin, const Vec2& point);

/// eta = 1 + (v . u1 + v . u2) / c.
double doppler_scale(const Scenario& scenario);
double doppler_scale_at(const Scenario& scenario, const Vec2& position);

/// tau0 = (|p - p1| + |p - p2|) / c.
double bistatic_delay(const Scenario& scenario);
double bistatic_delay_at(const Scenario& scenario, const Vec2& position);

/// tau_m = (d / c) m e^T u, with 0-based sensor index m.
double intersensor_delay(const Scenario& scenario, int node_index, int sensor);
double intersensor_delay_at(const Scenario& scenario, const Vec2& position, int node_index, int sensor);

struct SignalParamGradients {
  Vec2 eta;
  Vec2 tau0;
  Vec2 tau_m;
};

/// Position gradients of eta, tau0 and tau_m. The tau_m gradient uses
/// (d/c) m (I - u u^T) e / r, which expands to the cos(psi) R u / r form with
/// cos(psi) = u_x.
SignalParamGradients signal_param_gradients(const Scenario& scenario, int node_index, int sensor);
SignalParamGradients signal_param_gradients_at(const Scenario& scenario, const Vec2& position,
                                               int node_index, int sensor);

struct KDerivatives {
  double d_eta;  // seconds
  Vec2 d_p;      // seconds per meter
};

/// Derivatives of k(t; theta) = eta (t - tau0 - tau_m) at the true state.
/// The position derivative includes eta's dependence on p.
KDerivatives k_derivatives(const Scenario& scenario, int node_index, int sensor, double t);

}  // namespace sonarcrlb
