#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sonarcrlb/config.hpp"
#include "sonarcrlb/crlb.hpp"
#include "sonarcrlb/waveform.hpp"

namespace sonarcrlb {

/// Per-point outcome labels written to the CSV flag column.
namespace flags {
inline constexpr const char* kOk = "ok";
inline constexpr const char* kEtaUnobservable = "eta_unobservable";
inline constexpr const char* kSingular = "singular";
inline constexpr const char* kPositionSingular = "position_singular";
inline constexpr const char* kEtaSingular = "eta_singular";
inline constexpr const char* kDegenerateGeometry = "degenerate_geometry";
inline constexpr const char* kConditioningError = "conditioning_error";
inline constexpr const char* kUndefined = "undefined";
}  // namespace flags

/// One case evaluated over the grid. Case 1 does not involve a waveform, so its
/// `waveform` is empty. Missing values are singular or failed points (see flags).
struct CaseMap {
  FusionCase case_id = FusionCase::fused;
  std::string waveform;
  std::vector<std::optional<double>> sqrt_crlb_position;
  std::vector<std::optional<double>> sqrt_crlb_eta;
  std::vector<std::string> flag;
};

/// Case 3 over case 2 ratio for one waveform and quantity ("position" or "doppler").
struct RatioMap {
  std::string waveform;
  std::string quantity;
  std::vector<std::optional<double>> ratio;
  std::vector<std::string> flag;
};

struct CrlbGrid {
  GridSpec grid;
  std::vector<CaseMap> maps;
  std::vector<RatioMap> ratios;

  const CaseMap* find(FusionCase case_id, const std::string& waveform = {}) const;
  const RatioMap* find_ratio(const std::string& waveform, const std::string& quantity) const;
};

/// Evaluates every requested case at every grid point. Geometry and CRLB quantities
/// are recomputed per point; passive FIMs are shared across waveforms. Numerical
/// failures are recorded as flags and never abort the sweep. Results do not depend on
/// the worker count.
CrlbGrid run_sweep(const SweepConfig& config);

/// Ratio maps case3 / case2 for every waveform that has both cases.
std::vector<RatioMap> ratio_maps(const CrlbGrid& grid);

/// CSV file name for a case map: case1.csv, case2_<waveform>.csv, ...
std::string case_file_name(const CaseMap& map);
std::string ratio_file_name(const RatioMap& map);

/// Header x_m,y_m,sqrt_crlb_p_m,sqrt_crlb_eta,flag; singular values are empty fields.
std::string case_csv(const GridSpec& grid, const CaseMap& map);
/// Header x_m,y_m,ratio,flag.
std::string ratio_csv(const GridSpec& grid, const RatioMap& map);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

/// Writes every case and ratio CSV plus run_metadata.json into `out_dir`.
void write_sweep_outputs(const CrlbGrid& grid, const SweepConfig& config, const std::filesystem::path& out_dir,
                         double wall_time_s);

struct WaveformSummary {
  std::string name;
  std::string family;
  double duration_s = 0.0;
  double energy = 0.0;
  std::optional<double> median_sqrt_crlb_eta;
  std::optional<double> max_sqrt_crlb_eta;
  std::size_t finite_points = 0;
  MainlobeMetrics wbaf;
};

/// Case-2 Doppler bound statistics over the grid plus WBAF mainlobe metrics for each
/// configured waveform. Requires at least two waveforms.
std::vector<WaveformSummary> compare_waveforms(const SweepConfig& config);

std::string format_comparison(const std::vector<WaveformSummary>& rows);

/// WBAF over the configured delay/Doppler grid.
WbafResult wbaf_for(const SampledWaveform& waveform, const WbafSettings& settings, int workers = 1);

/// Writes wbaf_<name>.csv (surface), wbaf_<name>_cuts.csv and wbaf_metrics.json.
void write_wbaf_outputs(const SweepConfig& config, const std::filesystem::path& out_dir);

/// Library version string.
const char* version();

}  // namespace sonarcrlb
