#include "sonarcrlb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "sonarcrlb/errors.hpp"

namespace sonarcrlb {

using nlohmann::json;

void GridSpec::validate() const {
  std::vector<std::string> problems;
  if (nx < 1) problems.emplace_back("grid.nx must be >= 1");
  if (ny < 1) problems.emplace_back("grid.ny must be >= 1");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || x_max < x_min) {
    problems.emplace_back("grid.x_min/x_max must be finite with x_max >= x_min");
  }
  if (!std::isfinite(y_min) || !std::isfinite(y_max) || y_max < y_min) {
    problems.emplace_back("grid.y_min/y_max must be finite with y_max >= y_min");
  }
  if (nx > 1 && x_max == x_min) problems.emplace_back("grid.nx > 1 needs x_max > x_min");
  if (ny > 1 && y_max == y_min) problems.emplace_back("grid.ny > 1 needs y_max > y_min");
  if (!problems.empty()) {
    std::string msg = "invalid grid:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

std::vector<double> GridSpec::xs() const { return linspace(x_min, x_max, nx); }
std::vector<double> GridSpec::ys() const { return linspace(y_min, y_max, ny); }

Vec2 GridSpec::point(std::size_t index) const {
  const auto i = static_cast<int>(index % static_cast<std::size_t>(nx));
  const auto j = static_cast<int>(index / static_cast<std::size_t>(nx));
  const double x = nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1);
  const double y = ny == 1 ? y_min : y_min + (y_max - y_min) * j / (ny - 1);
  return {i == nx - 1 ? x_max : x, j == ny - 1 ? y_max : y};
}

SampledWaveform WaveformSpec::materialize(std::uint64_t derived_seed) const {
  if (file) {
    SampledWaveform w = read_waveform_file(*file);
    if (!(w.energy > 0.0)) throw ConfigError("waveform '" + name + "' file holds only zeros");
    return w.with_energy(energy);
  }
  WaveformConfig cfg = generator;
  cfg.energy = energy;
  cfg.seed = seed.value_or(derived_seed);
  return generate(cfg);
}

std::vector<SampledWaveform> SweepConfig::materialize_waveforms() const {
  std::vector<SampledWaveform> out;
  out.reserve(waveforms.size());
  for (std::size_t i = 0; i < waveforms.size(); ++i) out.push_back(waveforms[i].materialize(seed + i));
  return out;
}

namespace {

std::vector<std::string> validation_problems(const SweepConfig& cfg) {
  const auto& [scenario, grid, cases, waveforms, workers, wbaf, mc] =
      std::tie(cfg.scenario, cfg.grid, cfg.cases, cfg.waveforms, cfg.workers, cfg.wbaf, cfg.mc);
  std::vector<std::string> problems;
  const auto collect = [&](const std::string& where, auto&& check) {
    try {
      check();
    } catch (const std::exception& e) {
      problems.push_back(where + ": " + e.what());
    }
  };
  collect("scenario", [&] { scenario.validate(); });
  collect("grid", [&] { grid.validate(); });
  if (cases.empty()) problems.emplace_back("cases: at least one case is required");
  if (waveforms.empty()) problems.emplace_back("waveforms: at least one waveform is required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < waveforms.size(); ++i) {
    const auto& w = waveforms[i];
    const std::string where = "waveforms[" + std::to_string(i) + "]";
    if (w.name.empty()) problems.push_back(where + ".name must be non-empty");
    if (!names.insert(w.name).second) problems.push_back(where + ".name '" + w.name + "' is duplicated");
    if (!(w.energy > 0.0)) problems.push_back(where + ".energy must be > 0");
    if (!w.file) {
      collect(where, [&] { w.generator.validate(); });
      if (w.generator.sample_rate != scenario.sample_rate) {
        problems.push_back(where + ".sample_rate must equal scenario.sample_rate");
      }
    }
  }
  if (workers < 0) problems.emplace_back("workers must be >= 0");
  if (wbaf.delay_points < 1 || wbaf.eta_points < 1) problems.emplace_back("wbaf point counts must be >= 1");
  if (!(wbaf.max_delay_s >= 0.0)) problems.emplace_back("wbaf.max_delay_s must be >= 0");
  if (!(wbaf.eta_span >= 0.0 && wbaf.eta_span < 1.0)) problems.emplace_back("wbaf.eta_span must be in [0, 1)");
  if (mc.trials < 1) problems.emplace_back("mc.trials must be >= 1");
  if (mc.case_id < 1 || mc.case_id > 3) problems.emplace_back("mc.case must be 1, 2 or 3");
  return problems;
}

[[noreturn]] void throw_problems(const std::vector<std::string>& problems) {
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ConfigError(msg);
}

}  // namespace

void SweepConfig::validate() const {
  const std::vector<std::string> problems = validation_problems(*this);
  if (!problems.empty()) throw_problems(problems);
}

namespace {

// Walks a JSON document, reading known keys into typed fields and recording every
// type error and unknown key under its dotted path.
class Reader {
 public:
  std::vector<std::string> problems;

  bool object(const json& node, const std::string& path) {
    if (node.is_object()) return true;
    problems.push_back(path + " must be an object");
    return false;
  }

  void unknown_keys(const json& node, const std::string& path, std::initializer_list<const char*> known) {
    if (!node.is_object()) return;
    for (const auto& [key, value] : node.items()) {
      bool found = false;
      for (const char* k : known) found = found || key == k;
      if (!found) problems.push_back(join(path, key) + " is not a recognised key");
    }
  }

  template <typename T>
  void read(const json& node, const std::string& path, const char* key, T& out) {
    if (!node.is_object() || !node.contains(key)) return;
    const json& v = node.at(key);
    const std::string where = join(path, key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return fail(where, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return fail(where, "an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
        return fail(where, "a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return fail(where, "a number");
    } else {
      if (!v.is_string()) return fail(where, "a string");
    }
    out = v.get<T>();
  }

  void read_point(const json& node, const std::string& path, const char* key, Vec2& out) {
    if (!node.is_object() || !node.contains(key)) return;
    const json& v = node.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      return fail(join(path, key), "a two-element numeric array [x, y]");
    }
    out = Vec2(v[0].get<double>(), v[1].get<double>());
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  void fail(const std::string& where, const char* expected) {
    problems.push_back(where + " must be " + expected);
  }
};

double heading_deg(const Vec2& velocity) {
  if (velocity.norm() == 0.0) return 0.0;
  return std::atan2(velocity.y(), velocity.x()) * 180.0 / std::numbers::pi;
}

Vec2 velocity_from(double speed_knots, double heading) {
  const double rad = heading * std::numbers::pi / 180.0;
  const double v = knots_to_mps(speed_knots);
  return {v * std::cos(rad), v * std::sin(rad)};
}

void read_scenario(Reader& r, const json& node, Scenario& sc) {
  const std::string path = "scenario";
  if (!r.object(node, path)) return;
  r.unknown_keys(node, path, {"nodes", "target", "sound_speed", "sample_rate", "num_samples", "passive",
                              "transmit_power_w"});
  if (node.contains("nodes")) {
    const json& nodes = node.at("nodes");
    if (!nodes.is_array() || nodes.size() != 2) {
      r.problems.emplace_back("scenario.nodes must be an array of exactly two nodes");
    } else {
      for (std::size_t i = 0; i < 2; ++i) {
        const std::string np = "scenario.nodes[" + std::to_string(i) + "]";
        if (!r.object(nodes[i], np)) continue;
        r.unknown_keys(nodes[i], np, {"origin", "num_sensors", "element_spacing"});
        r.read_point(nodes[i], np, "origin", sc.nodes[i].origin);
        r.read(nodes[i], np, "num_sensors", sc.nodes[i].num_sensors);
        r.read(nodes[i], np, "element_spacing", sc.nodes[i].element_spacing);
      }
    }
  }
  if (node.contains("target")) {
    const json& t = node.at("target");
    const std::string tp = "scenario.target";
    if (r.object(t, tp)) {
      r.unknown_keys(t, tp, {"position", "speed_knots", "heading_deg", "weight_tonnes", "emitted_power"});
      double speed = sc.target.speed_knots();
      double heading = heading_deg(sc.target.velocity);
      r.read_point(t, tp, "position", sc.target.position);
      r.read(t, tp, "speed_knots", speed);
      r.read(t, tp, "heading_deg", heading);
      r.read(t, tp, "weight_tonnes", sc.target.weight_tonnes);
      if (t.contains("emitted_power")) {
        double p = 0.0;
        r.read(t, tp, "emitted_power", p);
        sc.target.emitted_power = p;
      }
      if (!(speed >= 0.0)) r.problems.emplace_back("scenario.target.speed_knots must be >= 0");
      sc.target.velocity = velocity_from(speed, heading);
    }
  }
  r.read(node, path, "sound_speed", sc.sound_speed);
  r.read(node, path, "sample_rate", sc.sample_rate);
  r.read(node, path, "num_samples", sc.num_samples);
  r.read(node, path, "transmit_power_w", sc.transmit_power_watt);
  if (node.contains("passive")) {
    const json& p = node.at("passive");
    const std::string pp = "scenario.passive";
    if (r.object(p, pp)) {
      r.unknown_keys(p, pp, {"num_samples", "window_s"});
      double window = sc.passive.num_samples / sc.passive.sample_rate;
      r.read(p, pp, "num_samples", sc.passive.num_samples);
      r.read(p, pp, "window_s", window);
      if (!(window > 0.0)) {
        r.problems.emplace_back("scenario.passive.window_s must be > 0");
      } else {
        sc.passive.sample_rate = sc.passive.num_samples / window;
      }
    }
  }
}

WaveformSpec read_waveform(Reader& r, const json& node, const std::string& path,
                           const std::filesystem::path& base_dir, double sample_rate) {
  WaveformSpec spec;
  if (!r.object(node, path)) return spec;
  r.unknown_keys(node, path, {"name", "preset", "family", "file", "mary", "frame_length", "guard_fraction",
                              "tones", "num_bits", "num_symbols", "center_frequency", "bandwidth",
                              "energy", "seed", "codec_label"});
  std::string preset;
  r.read(node, path, "preset", preset);
  std::optional<WaveformFamily> family;
  if (node.contains("family")) {
    std::string name;
    r.read(node, path, "family", name);
    try {
      family = waveform_family_from_string(name);
    } catch (const std::exception&) {
      r.problems.push_back(path + ".family '" + name + "' is not one of spfsk, pc_mfsk, raw");
    }
  }
  if (preset == "pc_mfsk_like" || (preset.empty() && family == WaveformFamily::pc_mfsk)) {
    spec.generator = pc_mfsk_like_config();
  } else if (preset == "spfsk_like" || preset.empty()) {
    spec.generator = spfsk_like_config();
  } else {
    r.problems.push_back(path + ".preset must be 'spfsk_like' or 'pc_mfsk_like'");
  }
  auto& g = spec.generator;
  if (family) g.family = *family;
  r.read(node, path, "mary", g.mary);
  r.read(node, path, "frame_length", g.frame_length);
  r.read(node, path, "guard_fraction", g.guard_fraction);
  r.read(node, path, "tones", g.tones);
  r.read(node, path, "num_bits", g.num_bits);
  r.read(node, path, "num_symbols", g.num_symbols);
  r.read(node, path, "center_frequency", g.center_frequency);
  r.read(node, path, "bandwidth", g.bandwidth);
  r.read(node, path, "codec_label", g.codec_label);
  g.sample_rate = sample_rate;
  spec.energy = g.energy;
  r.read(node, path, "energy", spec.energy);
  if (node.contains("seed")) {
    std::uint64_t seed = 0;
    r.read(node, path, "seed", seed);
    spec.seed = seed;
  }
  std::string file;
  r.read(node, path, "file", file);
  if (!file.empty()) {
    std::filesystem::path fp(file);
    spec.file = fp.is_absolute() ? fp : base_dir / fp;
    g.family = WaveformFamily::raw;
  } else if (g.family == WaveformFamily::raw) {
    r.problems.push_back(path + ": family 'raw' requires a file");
  }
  spec.name = preset.empty() ? to_string(g.family) : preset;
  r.read(node, path, "name", spec.name);
  g.name = spec.name;
  return spec;
}

}  // namespace

std::vector<FusionCase> parse_case_list(const std::string& text) {
  std::vector<FusionCase> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("case list entry '" + item + "' is not an integer");
    }
    const FusionCase c = fusion_case_from_int(id);
    bool seen = false;
    for (FusionCase existing : out) seen = seen || existing == c;
    if (!seen) out.push_back(c);
  }
  if (out.empty()) throw ConfigError("case list must name at least one case");
  return out;
}

SweepConfig default_config() {
  SweepConfig cfg;
  cfg.scenario.nodes[0].origin = Vec2(-1000.0, 0.0);
  cfg.scenario.nodes[1].origin = Vec2(1000.0, 0.0);
  cfg.scenario.target.velocity = velocity_from(9.72, 90.0);
  WaveformSpec spfsk;
  spfsk.name = "spfsk_like";
  spfsk.generator = spfsk_like_config();
  WaveformSpec pcmfsk;
  pcmfsk.name = "pc_mfsk_like";
  pcmfsk.generator = pc_mfsk_like_config();
  cfg.waveforms = {spfsk, pcmfsk};
  return cfg;
}

SweepConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  Reader r;
  SweepConfig cfg = default_config();
  if (!r.object(doc, "configuration")) throw ConfigError("configuration must be a JSON object");
  r.unknown_keys(doc, "", {"scenario", "noise", "environment", "waveforms", "grid", "cases", "seed", "workers",
                           "wbaf", "mc"});

  if (doc.contains("scenario")) read_scenario(r, doc.at("scenario"), cfg.scenario);
  if (doc.contains("noise") && r.object(doc.at("noise"), "noise")) {
    r.unknown_keys(doc.at("noise"), "noise", {"ar_coefficient"});
    r.read(doc.at("noise"), "noise", "ar_coefficient", cfg.scenario.ar_coefficient);
  }
  if (doc.contains("environment") && r.object(doc.at("environment"), "environment")) {
    const json& e = doc.at("environment");
    r.unknown_keys(e, "environment", {"wind_speed_knots", "listening_frequency_khz"});
    r.read(e, "environment", "wind_speed_knots", cfg.scenario.environment.wind_speed_knots);
    r.read(e, "environment", "listening_frequency_khz", cfg.scenario.environment.listening_frequency_khz);
  }
  if (doc.contains("grid") && r.object(doc.at("grid"), "grid")) {
    const json& g = doc.at("grid");
    r.unknown_keys(g, "grid", {"x_min", "x_max", "y_min", "y_max", "nx", "ny"});
    r.read(g, "grid", "x_min", cfg.grid.x_min);
    r.read(g, "grid", "x_max", cfg.grid.x_max);
    r.read(g, "grid", "y_min", cfg.grid.y_min);
    r.read(g, "grid", "y_max", cfg.grid.y_max);
    r.read(g, "grid", "nx", cfg.grid.nx);
    r.read(g, "grid", "ny", cfg.grid.ny);
  }
  if (doc.contains("cases")) {
    const json& c = doc.at("cases");
    if (!c.is_array()) {
      r.problems.emplace_back("cases must be an array of integers");
    } else {
      cfg.cases.clear();
      for (const auto& v : c) {
        if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > 3) {
          r.problems.push_back("cases entry " + v.dump() + " must be 1, 2 or 3");
          continue;
        }
        const FusionCase fc = fusion_case_from_int(v.get<int>());
        if (std::find(cfg.cases.begin(), cfg.cases.end(), fc) == cfg.cases.end()) cfg.cases.push_back(fc);
      }
    }
  }
  r.read(doc, "", "seed", cfg.seed);
  r.read(doc, "", "workers", cfg.workers);
  if (doc.contains("waveforms")) {
    const json& w = doc.at("waveforms");
    if (!w.is_array()) {
      r.problems.emplace_back("waveforms must be an array");
    } else {
      cfg.waveforms.clear();
      for (std::size_t i = 0; i < w.size(); ++i) {
        cfg.waveforms.push_back(
            read_waveform(r, w[i], "waveforms[" + std::to_string(i) + "]", base_dir, cfg.scenario.sample_rate));
      }
    }
  }
  if (doc.contains("wbaf") && r.object(doc.at("wbaf"), "wbaf")) {
    const json& w = doc.at("wbaf");
    r.unknown_keys(w, "wbaf", {"max_delay_s", "delay_points", "eta_span", "eta_points"});
    r.read(w, "wbaf", "max_delay_s", cfg.wbaf.max_delay_s);
    r.read(w, "wbaf", "delay_points", cfg.wbaf.delay_points);
    r.read(w, "wbaf", "eta_span", cfg.wbaf.eta_span);
    r.read(w, "wbaf", "eta_points", cfg.wbaf.eta_points);
  }
  if (doc.contains("mc") && r.object(doc.at("mc"), "mc")) {
    const json& m = doc.at("mc");
    r.unknown_keys(m, "mc", {"case", "trials", "seed"});
    r.read(m, "mc", "case", cfg.mc.case_id);
    r.read(m, "mc", "trials", cfg.mc.trials);
    r.read(m, "mc", "seed", cfg.mc.seed);
  }

  std::vector<std::string> problems = r.problems;
  for (auto& p : validation_problems(cfg)) problems.push_back(std::move(p));
  if (!problems.empty()) throw_problems(problems);
  return cfg;
}

SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::string to_json(const SweepConfig& config) {
  const Scenario& sc = config.scenario;
  json nodes = json::array();
  for (const auto& n : sc.nodes) {
    nodes.push_back({{"origin", {n.origin.x(), n.origin.y()}},
                     {"num_sensors", n.num_sensors},
                     {"element_spacing", n.element_spacing}});
  }
  json target = {{"position", {sc.target.position.x(), sc.target.position.y()}},
                 {"speed_knots", sc.target.speed_knots()},
                 {"heading_deg", heading_deg(sc.target.velocity)},
                 {"weight_tonnes", sc.target.weight_tonnes}};
  if (sc.target.emitted_power) target["emitted_power"] = *sc.target.emitted_power;

  json waveforms = json::array();
  for (std::size_t i = 0; i < config.waveforms.size(); ++i) {
    const auto& w = config.waveforms[i];
    json entry = {{"name", w.name}, {"energy", w.energy}, {"seed", w.seed.value_or(config.seed + i)}};
    if (w.file) {
      entry["file"] = w.file->string();
    } else {
      const auto& g = w.generator;
      entry.update({{"family", to_string(g.family)},
                    {"mary", g.mary},
                    {"frame_length", g.frame_length},
                    {"guard_fraction", g.guard_fraction},
                    {"tones", g.tones},
                    {"num_bits", g.num_bits},
                    {"num_symbols", g.num_symbols},
                    {"center_frequency", g.center_frequency},
                    {"bandwidth", g.bandwidth},
                    {"codec_label", g.codec_label}});
    }
    waveforms.push_back(entry);
  }
  json cases = json::array();
  for (FusionCase c : config.cases) cases.push_back(to_int(c));

  const json doc = {
      {"scenario",
       {{"nodes", nodes},
        {"target", target},
        {"sound_speed", sc.sound_speed},
        {"sample_rate", sc.sample_rate},
        {"num_samples", sc.num_samples},
        {"passive", {{"num_samples", sc.passive.num_samples}, {"window_s", sc.passive.num_samples / sc.passive.sample_rate}}},
        {"transmit_power_w", sc.transmit_power_watt}}},
      {"noise", {{"ar_coefficient", sc.ar_coefficient}}},
      {"environment",
       {{"wind_speed_knots", sc.environment.wind_speed_knots},
        {"listening_frequency_khz", sc.environment.listening_frequency_khz}}},
      {"waveforms", waveforms},
      {"grid",
       {{"x_min", config.grid.x_min},
        {"x_max", config.grid.x_max},
        {"y_min", config.grid.y_min},
        {"y_max", config.grid.y_max},
        {"nx", config.grid.nx},
        {"ny", config.grid.ny}}},
      {"cases", cases},
      {"seed", config.seed},
      {"workers", config.workers},
      {"wbaf",
       {{"max_delay_s", config.wbaf.max_delay_s},
        {"delay_points", config.wbaf.delay_points},
        {"eta_span", config.wbaf.eta_span},
        {"eta_points", config.wbaf.eta_points}}},
      {"mc", {{"case", config.mc.case_id}, {"trials", config.mc.trials}, {"seed", config.mc.seed}}}};
  return doc.dump(2);
}

}  // namespace sonarcrlb
