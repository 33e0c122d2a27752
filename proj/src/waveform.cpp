#include "sonarcrlb/waveform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "fft.hpp"
#include "sonarcrlb/errors.hpp"
#include "sonarcrlb/interpolation.hpp"
#include "sonarcrlb/parallel.hpp"

namespace sonarcrlb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kEdgePadding = KaiserSincKernel::kHalfWidth;

double sum_of_squares(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0, [](double acc, double v) { return acc + v * v; });
}

// Portable uniform draws so a seed maps to the same waveform on every standard library.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<int> hop_sequence(const WaveformConfig& config, std::mt19937_64& rng) {
  const int symbols = config.symbol_count();
  std::vector<int> hops;
  hops.reserve(static_cast<std::size_t>(symbols));
  if (config.family == WaveformFamily::spfsk) {
    std::vector<int> permutation(static_cast<std::size_t>(config.tones));
    while (static_cast<int>(hops.size()) < symbols) {
      std::iota(permutation.begin(), permutation.end(), 0);
      for (std::size_t i = permutation.size() - 1; i > 0; --i) {
        std::swap(permutation[i], permutation[uniform_index(rng, i + 1)]);
      }
      for (int tone : permutation) {
        if (static_cast<int>(hops.size()) == symbols) break;
        hops.push_back(tone);
      }
    }
  } else {
    const int stride = config.tones / config.mary;
    for (int s = 0; s < symbols; ++s) {
      const auto symbol = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(config.mary)));
      hops.push_back(symbol * stride + (stride - 1) / 2);
    }
  }
  return hops;
}

}  // namespace

std::string to_string(WaveformFamily family) {
  switch (family) {
    case WaveformFamily::spfsk:
      return "spfsk";
    case WaveformFamily::pc_mfsk:
      return "pc_mfsk";
    case WaveformFamily::raw:
      return "raw";
  }
  return "raw";
}

WaveformFamily waveform_family_from_string(const std::string& name) {
  if (name == "spfsk" || name == "SPFSK" || name == "spfsk_like") return WaveformFamily::spfsk;
  if (name == "pc_mfsk" || name == "PC-MFSK" || name == "pc-mfsk" || name == "pc_mfsk_like") {
    return WaveformFamily::pc_mfsk;
  }
  if (name == "raw") return WaveformFamily::raw;
  throw ConfigError("unknown waveform family '" + name + "'");
}

void WaveformConfig::validate() const {
  std::vector<std::string> problems;
  if (family == WaveformFamily::raw) problems.emplace_back("family 'raw' cannot be generated");
  if (frame_length < 8) problems.emplace_back("frame_length must be >= 8");
  if (tones < 2) problems.emplace_back("tones must be >= 2");
  if (family == WaveformFamily::pc_mfsk) {
    if (mary < 2) problems.emplace_back("mary must be >= 2 for PC-MFSK");
    else if (mary > tones || tones % mary != 0) problems.emplace_back("mary must divide tones");
  } else if (mary < 1) {
    problems.emplace_back("mary must be >= 1");
  }
  if (!(guard_fraction >= 0.0 && guard_fraction <= 1.0)) problems.emplace_back("guard_fraction must lie in [0, 1]");
  if (num_bits < 1 && num_symbols < 1) problems.emplace_back("num_bits must be >= 1");
  if (num_symbols < 0) problems.emplace_back("num_symbols must be >= 0");
  if (!(energy > 0.0)) problems.emplace_back("energy must be > 0");
  if (!(sample_rate > 0.0)) problems.emplace_back("sample_rate must be > 0");
  if (!(center_frequency > 0.0)) problems.emplace_back("center_frequency must be > 0");
  if (!(bandwidth > 0.0)) problems.emplace_back("bandwidth must be > 0");
  if (center_frequency - bandwidth / 2.0 < 0.0) problems.emplace_back("band extends below 0 Hz");
  if (center_frequency + bandwidth / 2.0 >= sample_rate / 2.0) {
    problems.emplace_back("band edge f_c + B/2 must lie below the Nyquist frequency");
  }
  if (frame_length >= 8 && tones >= 2 && sample_rate > 0.0 &&
      (tones + 1) * tone_spacing() > bandwidth) {
    std::ostringstream msg;
    msg << "tone spacing exceeds bandwidth: (Y + 1) * fs / N_frame = " << (tones + 1) * tone_spacing()
        << " Hz > B = " << bandwidth << " Hz";
    problems.push_back(msg.str());
  }
  if (!problems.empty()) {
    std::string joined = "invalid waveform config";
    if (!name.empty()) joined += " '" + name + "'";
    for (const auto& p : problems) joined += "; " + p;
    throw ConfigError(joined);
  }
}

int WaveformConfig::symbol_count() const {
  if (num_symbols > 0) return num_symbols;
  if (family == WaveformFamily::spfsk) return std::max(1, (num_bits + tones - 1) / tones);
  const int bits_per_symbol = std::max(1, static_cast<int>(std::round(std::log2(mary))));
  return std::max(1, (num_bits + bits_per_symbol - 1) / bits_per_symbol);
}

WaveformConfig spfsk_like_config() {
  WaveformConfig c;
  c.name = "spfsk";
  c.family = WaveformFamily::spfsk;
  c.mary = 1;
  c.frame_length = 2048;
  c.guard_fraction = 0.2;
  c.tones = 256;
  c.num_bits = 1024;
  c.codec_label = "G=2";
  return c;
}

WaveformConfig pc_mfsk_like_config() {
  WaveformConfig c;
  c.name = "pc_mfsk";
  c.family = WaveformFamily::pc_mfsk;
  c.mary = 16;
  c.frame_length = 128;
  c.guard_fraction = 0.01;
  c.tones = 16;
  c.num_bits = 64;
  c.codec_label = "R2-S";
  return c;
}

SampledWaveform SampledWaveform::with_energy(double new_energy) const {
  if (!(new_energy > 0.0) || !(energy > 0.0)) throw ConfigError("energies must be positive to rescale");
  SampledWaveform out = *this;
  const double gain = std::sqrt(new_energy / energy);
  for (auto& v : out.samples) v *= gain;
  out.energy = sum_of_squares(out.samples);
  return out;
}

SampledWaveform make_waveform(std::vector<double> samples, double sample_rate, WaveformFamily family) {
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");
  SampledWaveform w;
  w.energy = sum_of_squares(samples);
  w.samples = std::move(samples);
  w.sample_rate = sample_rate;
  w.family = family;
  return w;
}

SampledWaveform generate(const WaveformConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const std::vector<int> hops = hop_sequence(config, rng);

  const int symbol_len = config.frame_length;
  const int guard_len = static_cast<int>(std::lround(config.guard_fraction * symbol_len));
  const int ramp = std::max(2, symbol_len / 8);
  const double spacing = config.tone_spacing();
  const double centre_index = (config.tones - 1) / 2.0;

  std::vector<double> taper(static_cast<std::size_t>(symbol_len), 1.0);
  for (int n = 0; n < ramp; ++n) {
    const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * (n + 0.5) / ramp));
    taper[static_cast<std::size_t>(n)] = w;
    taper[static_cast<std::size_t>(symbol_len - 1 - n)] = w;
  }

  const std::size_t total =
      2 * kEdgePadding + hops.size() * static_cast<std::size_t>(symbol_len + guard_len);
  std::vector<double> samples(total, 0.0);
  std::size_t cursor = kEdgePadding;
  for (int tone : hops) {
    const double f = config.center_frequency + (tone - centre_index) * spacing;
    const double phase = kTwoPi * uniform_unit(rng);
    for (int n = 0; n < symbol_len; ++n) {
      samples[cursor + static_cast<std::size_t>(n)] =
          taper[static_cast<std::size_t>(n)] * std::cos(kTwoPi * f * n / config.sample_rate + phase);
    }
    cursor += static_cast<std::size_t>(symbol_len + guard_len);
  }

  SampledWaveform w = make_waveform(std::move(samples), config.sample_rate, config.family);
  return w.with_energy(config.energy);
}

std::vector<double> evaluate_scaled_delayed(const SampledWaveform& waveform, double eta, double tau,
                                            std::span<const double> sample_times) {
  if (!(eta > 0.0)) throw DomainError("Doppler scale must be positive");
  return interpolate_scaled_delayed(waveform.samples, waveform.sample_rate, eta, tau, sample_times);
}

std::vector<double> spectral_derivative(std::span<const double> samples, double sample_rate) {
  const std::size_t n = samples.size();
  if (n == 0) return {};
  auto spectrum = detail::real_dft(samples);
  const double bin_hz = sample_rate / static_cast<double>(n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    if (n % 2 == 0 && k == n / 2) {
      spectrum[k] = 0.0;
      continue;
    }
    spectrum[k] *= std::complex<double>(0.0, kTwoPi * bin_hz * static_cast<double>(k));
  }
  return detail::inverse_real_dft(spectrum, n);
}

std::vector<double> derivative(const SampledWaveform& waveform) {
  return spectral_derivative(waveform.samples, waveform.sample_rate);
}

double band_energy_fraction(const SampledWaveform& waveform, double f_lo, double f_hi) {
  const std::size_t n = waveform.samples.size();
  if (n == 0) return 0.0;
  const auto spectrum = detail::real_dft(waveform.samples);
  const double bin_hz = waveform.sample_rate / static_cast<double>(n);
  double total = 0.0;
  double inside = 0.0;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const bool self_conjugate = (k == 0) || (n % 2 == 0 && k == n / 2);
    const double weight = self_conjugate ? 1.0 : 2.0;
    const double p = weight * std::norm(spectrum[k]);
    total += p;
    const double f = bin_hz * static_cast<double>(k);
    if (f >= f_lo && f <= f_hi) inside += p;
  }
  return total > 0.0 ? inside / total : 0.0;
}

WbafResult wbaf(const SampledWaveform& waveform, std::span<const double> delay_grid,
                std::span<const double> eta_grid, int workers) {
  if (delay_grid.empty() || eta_grid.empty()) throw ConfigError("WBAF grids must be non-empty");
  for (double eta : eta_grid) {
    if (!(eta > 0.0)) throw DomainError("WBAF Doppler scales must be positive");
  }
  const auto& s = waveform.samples;
  const double fs = waveform.sample_rate;
  const double ts = 1.0 / fs;
  const auto length = static_cast<long>(s.size());

  WbafResult out;
  out.delays.assign(delay_grid.begin(), delay_grid.end());
  out.etas.assign(eta_grid.begin(), eta_grid.end());
  out.magnitude.resize(static_cast<Eigen::Index>(eta_grid.size()), static_cast<Eigen::Index>(delay_grid.size()));
  out.zero_lag_value = waveform.energy * ts;

  constexpr int w = KaiserSincKernel::kHalfWidth;
  parallel_for(eta_grid.size(), workers, [&](std::size_t i) {
    const double eta = eta_grid[i];
    for (std::size_t j = 0; j < delay_grid.size(); ++j) {
      const double shift = delay_grid[j] * fs;
      // Only n with eta (n - shift) inside (-W, L - 1 + W) can contribute.
      const long first = std::max(0L, static_cast<long>(std::floor(shift - w / eta)));
      const long last = std::min(length - 1, static_cast<long>(std::ceil(shift + (length - 1 + w) / eta)));
      double acc = 0.0;
      for (long n = first; n <= last; ++n) {
        const double sn = s[static_cast<std::size_t>(n)];
        if (sn == 0.0) continue;
        acc += sn * interpolate_at(s, eta * (static_cast<double>(n) - shift));
      }
      out.magnitude(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::abs(std::sqrt(eta) * ts * acc);
    }
  });

  out.magnitude.maxCoeff(&out.peak_eta_index, &out.peak_delay_index);
  const Eigen::VectorXd row = out.magnitude.row(out.peak_eta_index).transpose();
  const Eigen::VectorXd col = out.magnitude.col(out.peak_delay_index);
  out.delay_cut.assign(row.data(), row.data() + row.size());
  out.doppler_cut.assign(col.data(), col.data() + col.size());
  return out;
}

double mainlobe_width(std::span<const double> axis, std::span<const double> cut,
                      std::size_t peak_index, double level_db) {
  if (axis.size() != cut.size() || cut.empty() || peak_index >= cut.size()) {
    throw ConfigError("mainlobe_width: axis and cut must be non-empty and of equal length");
  }
  const double threshold = cut[peak_index] * std::pow(10.0, level_db / 20.0);
  const auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double t = (cut[inside] - threshold) / (cut[inside] - cut[outside]);
    return axis[inside] + t * (axis[outside] - axis[inside]);
  };

  std::size_t i = peak_index;
  while (i > 0 && cut[i - 1] >= threshold) --i;
  if (i == 0) return std::numeric_limits<double>::infinity();
  const double left = crossing(i, i - 1);

  std::size_t j = peak_index;
  while (j + 1 < cut.size() && cut[j + 1] >= threshold) ++j;
  if (j + 1 == cut.size()) return std::numeric_limits<double>::infinity();
  const double right = crossing(j, j + 1);
  return std::abs(right - left);
}

double peak_sidelobe_db(std::span<const double> cut, std::size_t peak_index) {
  if (cut.empty() || peak_index >= cut.size()) throw ConfigError("peak_sidelobe_db: bad peak index");
  std::size_t left = peak_index;
  while (left > 0 && cut[left - 1] <= cut[left]) --left;
  std::size_t right = peak_index;
  while (right + 1 < cut.size() && cut[right + 1] <= cut[right]) ++right;

  double sidelobe = 0.0;
  bool found = false;
  for (std::size_t k = 0; k < left; ++k) {
    sidelobe = std::max(sidelobe, cut[k]);
    found = true;
  }
  for (std::size_t k = right + 1; k < cut.size(); ++k) {
    sidelobe = std::max(sidelobe, cut[k]);
    found = true;
  }
  if (!found || sidelobe <= 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(sidelobe / cut[peak_index]);
}

MainlobeMetrics mainlobe_metrics(const WbafResult& result, double level_db) {
  MainlobeMetrics m;
  const auto di = static_cast<std::size_t>(result.peak_delay_index);
  const auto ei = static_cast<std::size_t>(result.peak_eta_index);
  m.delay_width = mainlobe_width(result.delays, result.delay_cut, di, level_db);
  m.doppler_width = mainlobe_width(result.etas, result.doppler_cut, ei, level_db);
  m.delay_sidelobe_db = peak_sidelobe_db(result.delay_cut, di);
  m.doppler_sidelobe_db = peak_sidelobe_db(result.doppler_cut, ei);
  return m;
}

std::vector<double> linspace(double first, double last, int count) {
  if (count < 1) throw ConfigError("linspace count must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = first;
    return out;
  }
  const double step = (last - first) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = first + step * i;
  out.back() = last;
  return out;
}

namespace {

constexpr const char* kMagic = "sonarcrlb-waveform 1";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
  }
}

}  // namespace

void write_waveform_file(const std::filesystem::path& path, const SampledWaveform& waveform) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open waveform file for writing: " + path.string());
  std::ostringstream header;
  header.precision(17);
  header << kMagic << '\n'
         << "family " << to_string(waveform.family) << '\n'
         << "sample_rate " << waveform.sample_rate << '\n'
         << "energy " << waveform.energy << '\n'
         << "num_samples " << waveform.samples.size() << '\n'
         << "end_header\n";
  out << header.str();
  for (double v : waveform.samples) {
    const std::uint64_t le = to_little_endian(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&le), sizeof le);
  }
  if (!out) throw ConfigError("failed writing waveform file: " + path.string());
}

SampledWaveform read_waveform_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open waveform file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw ConfigError("not a waveform file (bad magic line): " + path.string());
  }
  double sample_rate = 0.0;
  double header_energy = -1.0;
  long long count = -1;
  WaveformFamily family = WaveformFamily::raw;
  bool terminated = false;
  while (std::getline(in, line)) {
    if (line == "end_header") {
      terminated = true;
      break;
    }
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "family") {
      std::string v;
      fields >> v;
      family = waveform_family_from_string(v);
    } else if (key == "sample_rate") {
      fields >> sample_rate;
    } else if (key == "energy") {
      fields >> header_energy;
    } else if (key == "num_samples") {
      fields >> count;
    }
    if (fields.fail()) throw ConfigError("malformed waveform header line: '" + line + "'");
  }
  if (!terminated) throw ConfigError("waveform header missing end_header");
  if (!(sample_rate > 0.0)) throw ConfigError("waveform header needs a positive sample_rate");
  if (count < 0) throw ConfigError("waveform header needs num_samples");

  std::vector<double> samples(static_cast<std::size_t>(count));
  for (auto& v : samples) {
    std::uint64_t le = 0;
    in.read(reinterpret_cast<char*>(&le), sizeof le);
    if (!in) throw ConfigError("waveform file truncated: " + path.string());
    v = std::bit_cast<double>(to_little_endian(le));
  }
  SampledWaveform w = make_waveform(std::move(samples), sample_rate, family);
  if (header_energy >= 0.0 && std::abs(w.energy - header_energy) > 1e-9 * std::max(1.0, header_energy)) {
    throw ConfigError("waveform header energy does not match the sample data");
  }
  return w;
}

}  // namespace sonarcrlb
