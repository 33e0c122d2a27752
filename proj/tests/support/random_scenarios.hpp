#pragma once

#include <random>
#include <vector>

#include "sonarcrlb/scenario.hpp"
#include "sonarcrlb/waveform.hpp"

namespace testing_support {

using sonarcrlb::Scenario;
using sonarcrlb::Vec2;

/// Random two-node scenario with the target at least `min_range` from both nodes and
/// off the node baseline by at least `min_offset` meters.
inline Scenario random_scenario(std::mt19937_64& rng, double min_range = 200.0, double min_offset = 50.0) {
  std::uniform_real_distribution<double> coord(-2000.0, 2000.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> sensors(2, 6);
  Scenario sc;
  while (true) {
    sc.nodes[0].origin = Vec2(coord(rng), coord(rng));
    sc.nodes[1].origin = Vec2(coord(rng), coord(rng));
    sc.target.position = Vec2(coord(rng), coord(rng));
    const Vec2 base = sc.nodes[1].origin - sc.nodes[0].origin;
    if (base.norm() < 300.0) continue;
    const Vec2 rel = sc.target.position - sc.nodes[0].origin;
    const double offset = std::abs(base.x() * rel.y() - base.y() * rel.x()) / base.norm();
    if ((sc.target.position - sc.nodes[0].origin).norm() < min_range) continue;
    if ((sc.target.position - sc.nodes[1].origin).norm() < min_range) continue;
    if (offset < min_offset) continue;
    break;
  }
  for (auto& node : sc.nodes) {
    node.num_sensors = sensors(rng);
    node.element_spacing = 0.05 + 0.45 * unit(rng);
  }
  const double speed = 10.0 * unit(rng);
  const double heading = 2.0 * 3.141592653589793 * unit(rng);
  sc.target.velocity = Vec2(speed * std::cos(heading), speed * std::sin(heading));
  sc.sound_speed = 1450.0 + 100.0 * unit(rng);
  sc.ar_coefficient = -0.8 + 1.6 * unit(rng);
  return sc;
}

/// Short FSK burst for tests that need a cheap waveform (one or two symbols).
inline sonarcrlb::SampledWaveform short_burst(int symbols = 2, std::uint64_t seed = 3, double energy = 40.0) {
  sonarcrlb::WaveformConfig cfg = sonarcrlb::pc_mfsk_like_config();
  cfg.frame_length = 32;
  cfg.tones = 4;
  cfg.mary = 4;
  cfg.num_symbols = symbols;
  cfg.bandwidth = 6000.0;
  cfg.seed = seed;
  cfg.energy = energy;
  return sonarcrlb::generate(cfg);
}

}  // namespace testing_support
