#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sonarcrlb {

enum class WaveformFamily {
  spfsk,    // permutation frequency hopping over Y tones
  pc_mfsk,  // M-ary FSK with pseudo-random symbols
  raw,      // imported sample file
};

std::string to_string(WaveformFamily family);
WaveformFamily waveform_family_from_string(const std::string& name);

/// FSK-family generator settings.
///
/// Each symbol (hop) lasts `frame_length` samples followed by a silent guard of
/// guard_fraction * frame_length samples. Tones are spaced by fs / frame_length,
/// which makes them orthogonal over one symbol, and are centred on
/// `center_frequency`. Every symbol carries a raised-cosine edge taper so the
/// spectrum stays inside the null-to-null band.
///
/// SPFSK-like: hops walk through seeded permutations of the Y tones;
///   symbols = ceil(num_bits / Y) unless `num_symbols` is set.
/// PC-MFSK-like: seeded uniform symbols over `mary` tones spread across the Y-tone
///   grid; symbols = ceil(num_bits / log2(mary)) unless `num_symbols` is set.
struct WaveformConfig {
  std::string name;
  WaveformFamily family = WaveformFamily::pc_mfsk;
  int mary = 16;
  int frame_length = 128;
  double guard_fraction = 0.01;
  int tones = 16;
  int num_bits = 64;
  int num_symbols = 0;  // 0 derives the count from num_bits
  double center_frequency = 6000.0;
  double bandwidth = 4000.0;
  double energy = 40.0;
  double sample_rate = 24000.0;
  std::uint64_t seed = 1;
  /// Codec label carried through as metadata only (e.g. "G=2", "R2-S").
  std::string codec_label;

  void validate() const;
  double tone_spacing() const { return sample_rate / frame_length; }
  int symbol_count() const;
};

/// SPFSK-like defaults: Mary = 1, N_frame = 2048, eps = 0.2, Y = 256, N_b = 1024.
WaveformConfig spfsk_like_config();
/// PC-MFSK-like defaults: Mary = 16, N_frame = 128, eps = 0.01, Y = 16, N_b = 64.
WaveformConfig pc_mfsk_like_config();

struct SampledWaveform {
  std::vector<double> samples;
  double sample_rate = 24000.0;
  double energy = 0.0;  // sum of squared samples
  WaveformFamily family = WaveformFamily::raw;

  double sample_period() const { return 1.0 / sample_rate; }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  std::span<const double> view() const { return samples; }

  /// Copy rescaled to a new energy.
  SampledWaveform with_energy(double new_energy) const;
};

/// Wrap raw samples; energy is computed from the data.
SampledWaveform make_waveform(std::vector<double> samples, double sample_rate,
                              WaveformFamily family = WaveformFamily::raw);

SampledWaveform generate(const WaveformConfig& config);

/// s(eta (t_n - tau)) through band-limited reconstruction; zero outside the support.
std::vector<double> evaluate_scaled_delayed(const SampledWaveform& waveform, double eta,
                                            double tau, std::span<const double> sample_times);

/// ds/dt at the sample instants by spectral differentiation over the record length
/// (Nyquist bin dropped for even lengths).
std::vector<double> derivative(const SampledWaveform& waveform);
std::vector<double> spectral_derivative(std::span<const double> samples, double sample_rate);

/// Fraction of the energy inside [f_lo, f_hi] from the record's periodogram.
double band_energy_fraction(const SampledWaveform& waveform, double f_lo, double f_hi);

/// Wideband ambiguity function chi(tau, eta) = sqrt(eta) T_s sum_n s(t_n) s(eta (t_n - tau)).
struct WbafResult {
  std::vector<double> delays;
  std::vector<double> etas;
  Eigen::MatrixXd magnitude;  // |chi|, rows = etas, columns = delays
  double zero_lag_value = 0.0;  // chi(0, 1) = E_s T_s
  Eigen::Index peak_eta_index = 0;
  Eigen::Index peak_delay_index = 0;
  std::vector<double> delay_cut;    // |chi| along delay at the peak eta
  std::vector<double> doppler_cut;  // |chi| along eta at the peak delay

  double peak() const { return magnitude(peak_eta_index, peak_delay_index); }
};

WbafResult wbaf(const SampledWaveform& waveform, std::span<const double> delay_grid,
                std::span<const double> eta_grid, int workers = 1);

/// Summary numbers for one ambiguity surface.
struct MainlobeMetrics {
  double doppler_width = 0.0;       // eta span above the level
  double delay_width = 0.0;         // seconds
  double delay_sidelobe_db = 0.0;   // highest delay-cut sidelobe relative to the peak
  double doppler_sidelobe_db = 0.0;
};

/// Width of the lobe containing `peak_index` where cut >= peak * 10^(level_db / 20),
/// with linear interpolation of the crossings. Returns +inf if the lobe reaches an end
/// of the axis.
double mainlobe_width(std::span<const double> axis, std::span<const double> cut,
                      std::size_t peak_index, double level_db = -3.0);

/// Highest value outside the mainlobe (bounded by the first local minima) in dB
/// relative to the peak; -inf when no sidelobe exists on the axis.
double peak_sidelobe_db(std::span<const double> cut, std::size_t peak_index);

MainlobeMetrics mainlobe_metrics(const WbafResult& result, double level_db = -3.0);

/// Evenly spaced grid including both ends.
std::vector<double> linspace(double first, double last, int count);

/// Sample file: text header lines "key value" terminated by "end_header\n",
/// followed by little-endian IEEE-754 float64 samples.
void write_waveform_file(const std::filesystem::path& path, const SampledWaveform& waveform);
SampledWaveform read_waveform_file(const std::filesystem::path& path);

}  // namespace sonarcrlb
