#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sonarcrlb/crlb.hpp"
#include "sonarcrlb/scenario.hpp"
#include "sonarcrlb/waveform.hpp"

namespace sonarcrlb {

/// Target positions x_i = x_min + i (x_max - x_min) / (nx - 1), same for y.
/// Points are ordered row-major with y outermost.
struct GridSpec {
  double x_min = -3000.0;
  double x_max = 3000.0;
  double y_min = -3000.0;
  double y_max = 3000.0;
  int nx = 21;
  int ny = 21;

  void validate() const;
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::vector<double> xs() const;
  std::vector<double> ys() const;
  Vec2 point(std::size_t index) const;
};

/// A named waveform: either generated from an FSK-family config or read from a sample
/// file and rescaled to `energy`.
struct WaveformSpec {
  std::string name;
  WaveformConfig generator;
  std::optional<std::filesystem::path> file;
  std::optional<std::uint64_t> seed;  // unset: derived from the master seed
  double energy = 40.0;

  SampledWaveform materialize(std::uint64_t derived_seed) const;
};

struct WbafSettings {
  double max_delay_s = 1e-3;
  int delay_points = 81;
  double eta_span = 5e-3;  // eta grid is 1 +- eta_span
  int eta_points = 201;
};

struct McSettings {
  int case_id = 3;
  int trials = 500;
  std::uint64_t seed = 1;
};

struct SweepConfig {
  Scenario scenario;
  GridSpec grid;
  std::vector<FusionCase> cases{FusionCase::passive_only, FusionCase::fused, FusionCase::bistatic_only};
  std::vector<WaveformSpec> waveforms;
  int workers = 0;
  std::uint64_t seed = 1;
  WbafSettings wbaf;
  McSettings mc;

  void validate() const;
  /// Waveform i without an explicit seed uses seed + i.
  std::vector<SampledWaveform> materialize_waveforms() const;
};

/// Parses a JSON document. Missing keys keep their defaults; every invalid or unknown
/// field is collected and reported in a single ConfigError. Generated waveforms
/// without an explicit seed get seed + index so the master seed controls them all.
/// `base_dir` resolves relative waveform file paths.
SweepConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
SweepConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration as JSON (the form parse_config accepts).
std::string to_json(const SweepConfig& config);

/// Config with the default scenario, grid and both FSK-like waveforms.
SweepConfig default_config();

/// Comma-separated case list such as "1,3".
std::vector<FusionCase> parse_case_list(const std::string& text);

}  // namespace sonarcrlb
