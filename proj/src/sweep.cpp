#include "sonarcrlb/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fft.hpp"
#include "json.hpp"
#include "sonarcrlb/bistatic_fim.hpp"
#include "sonarcrlb/errors.hpp"
#include "sonarcrlb/parallel.hpp"
#include "sonarcrlb/passive_fim.hpp"

namespace sonarcrlb {

const char* version() { return "0.1.0"; }

const CaseMap* CrlbGrid::find(FusionCase case_id, const std::string& waveform) const {
  for (const auto& m : maps) {
    if (m.case_id == case_id && (case_id == FusionCase::passive_only || m.waveform == waveform)) return &m;
  }
  return nullptr;
}

const RatioMap* CrlbGrid::find_ratio(const std::string& waveform, const std::string& quantity) const {
  for (const auto& r : ratios) {
    if (r.waveform == waveform && r.quantity == quantity) return &r;
  }
  return nullptr;
}

namespace {

const char* result_flag(const CrlbResult& r) {
  const bool p = !r.position_singular();
  const bool e = !r.eta_singular();
  if (r.case_id == FusionCase::passive_only) return p ? flags::kEtaUnobservable : flags::kSingular;
  if (p && e) return flags::kOk;
  if (p) return flags::kEtaSingular;
  if (e) return flags::kPositionSingular;
  return flags::kSingular;
}

void allocate(CaseMap& map, std::size_t points) {
  map.sqrt_crlb_position.assign(points, std::nullopt);
  map.sqrt_crlb_eta.assign(points, std::nullopt);
  map.flag.assign(points, flags::kSingular);
}

struct PassiveResult {
  FimMatrix node1 = FimMatrix::Zero();
  FimMatrix node2 = FimMatrix::Zero();
  const char* failure = nullptr;
};

PassiveResult passive_fims(const Scenario& sc) {
  PassiveResult out;
  try {
    out.node1 = fim_passive(sc, 0, passive_signal_power(sc, 0));
    out.node2 = fim_passive(sc, 1, passive_signal_power(sc, 1));
  } catch (const ConditioningError&) {
    out.failure = flags::kConditioningError;
  }
  return out;
}

}  // namespace

CrlbGrid run_sweep(const SweepConfig& config) {
  config.validate();
  const std::vector<SampledWaveform> waveforms = config.materialize_waveforms();
  for (const auto& w : waveforms) {
    if (w.sample_rate != config.scenario.sample_rate) {
      throw ConfigError("waveform sample rate must equal scenario.sample_rate");
    }
  }

  const auto has_case = [&](FusionCase c) {
    return std::find(config.cases.begin(), config.cases.end(), c) != config.cases.end();
  };
  const bool need_passive = has_case(FusionCase::passive_only) || has_case(FusionCase::fused);
  const bool need_bistatic = has_case(FusionCase::fused) || has_case(FusionCase::bistatic_only);

  CrlbGrid grid;
  grid.grid = config.grid;
  const std::size_t points = config.grid.size();
  // Map layout: case 1 first, then for each waveform the requested waveform cases.
  if (has_case(FusionCase::passive_only)) grid.maps.push_back({FusionCase::passive_only, {}, {}, {}, {}});
  for (const auto& spec : config.waveforms) {
    for (FusionCase c : {FusionCase::fused, FusionCase::bistatic_only}) {
      if (has_case(c)) grid.maps.push_back({c, spec.name, {}, {}, {}});
    }
  }
  for (auto& m : grid.maps) allocate(m, points);

  parallel_for(points, config.workers, [&](std::size_t index) {
    const Scenario sc = config.scenario.with_target_position(config.grid.point(index));
    const auto set_all = [&](const char* flag) {
      for (auto& m : grid.maps) m.flag[index] = flag;
    };
    try {
      (void)bistatic_delay(sc);
      for (int node = 0; node < 2; ++node) {
        for (int m = 0; m < sc.node(node).num_sensors; ++m) (void)intersensor_delay(sc, node, m);
      }
    } catch (const GeometryError&) {
      set_all(flags::kDegenerateGeometry);
      return;
    }

    PassiveResult passive;
    if (need_passive) passive = passive_fims(sc);

    std::vector<FimMatrix> bistatic(waveforms.size(), FimMatrix::Zero());
    if (need_bistatic) {
      for (std::size_t w = 0; w < waveforms.size(); ++w) {
        bistatic[w] = fim_bistatic(sc, waveforms[w], make_bistatic_setup(sc, waveforms[w]));
      }
    }

    for (auto& m : grid.maps) {
      if (m.case_id != FusionCase::bistatic_only && passive.failure) {
        m.flag[index] = passive.failure;
        continue;
      }
      std::size_t w = 0;
      if (m.case_id != FusionCase::passive_only) {
        while (config.waveforms[w].name != m.waveform) ++w;
      }
      const CrlbResult r = crlb(fuse(m.case_id, passive.node1, passive.node2, bistatic[w]), m.case_id);
      m.sqrt_crlb_position[index] = r.sqrt_crlb_position;
      m.sqrt_crlb_eta[index] = r.sqrt_crlb_eta;
      m.flag[index] = result_flag(r);
    }
  });

  grid.ratios = ratio_maps(grid);
  return grid;
}

std::vector<RatioMap> ratio_maps(const CrlbGrid& grid) {
  std::vector<RatioMap> out;
  for (const auto& m : grid.maps) {
    if (m.case_id != FusionCase::fused) continue;
    const CaseMap* bs = grid.find(FusionCase::bistatic_only, m.waveform);
    if (!bs) continue;
    const std::size_t points = m.flag.size();
    for (const char* quantity : {"position", "doppler"}) {
      const bool position = std::string(quantity) == "position";
      const auto& num = position ? bs->sqrt_crlb_position : bs->sqrt_crlb_eta;
      const auto& den = position ? m.sqrt_crlb_position : m.sqrt_crlb_eta;
      RatioMap r{m.waveform, quantity, std::vector<std::optional<double>>(points), {}};
      r.flag.assign(points, flags::kUndefined);
      for (std::size_t i = 0; i < points; ++i) {
        if (num[i] && den[i] && *den[i] > 0.0) {
          r.ratio[i] = *num[i] / *den[i];
          r.flag[i] = flags::kOk;
        }
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string case_file_name(const CaseMap& map) {
  std::string name = "case" + std::to_string(to_int(map.case_id));
  if (!map.waveform.empty()) name += "_" + map.waveform;
  return name + ".csv";
}

std::string ratio_file_name(const RatioMap& map) { return "ratio_" + map.quantity + "_" + map.waveform + ".csv"; }

std::string format_number(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::string case_csv(const GridSpec& grid, const CaseMap& map) {
  std::ostringstream out;
  out << "x_m,y_m,sqrt_crlb_p_m,sqrt_crlb_eta,flag\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec2 p = grid.point(i);
    out << format_number(p.x()) << ',' << format_number(p.y()) << ',' << optional_field(map.sqrt_crlb_position[i])
        << ',' << optional_field(map.sqrt_crlb_eta[i]) << ',' << map.flag[i] << '\n';
  }
  return out.str();
}

std::string ratio_csv(const GridSpec& grid, const RatioMap& map) {
  std::ostringstream out;
  out << "x_m,y_m,ratio,flag\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec2 p = grid.point(i);
    out << format_number(p.x()) << ',' << format_number(p.y()) << ',' << optional_field(map.ratio[i]) << ','
        << map.flag[i] << '\n';
  }
  return out.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing output file: " + path.string());
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("cannot create output directory: " + dir.string());
  }
}

nlohmann::json library_versions() {
  return {{"sonarcrlb", version()},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"fft", detail::fft_library_version()}};
}

}  // namespace

void write_sweep_outputs(const CrlbGrid& grid, const SweepConfig& config, const std::filesystem::path& out_dir,
                         double wall_time_s) {
  ensure_directory(out_dir);
  nlohmann::json files = nlohmann::json::array();
  for (const auto& m : grid.maps) {
    write_text(out_dir / case_file_name(m), case_csv(grid.grid, m));
    files.push_back(case_file_name(m));
  }
  for (const auto& r : grid.ratios) {
    write_text(out_dir / ratio_file_name(r), ratio_csv(grid.grid, r));
    files.push_back(ratio_file_name(r));
  }
  const nlohmann::json meta = {{"config", nlohmann::json::parse(to_json(config))},
                               {"versions", library_versions()},
                               {"seed", config.seed},
                               {"workers", resolve_workers(config.workers)},
                               {"grid_points", grid.grid.size()},
                               {"wall_time_s", wall_time_s},
                               {"outputs", files}};
  write_text(out_dir / "run_metadata.json", meta.dump(2) + "\n");
}

WbafResult wbaf_for(const SampledWaveform& waveform, const WbafSettings& settings, int workers) {
  const std::vector<double> delays = linspace(-settings.max_delay_s, settings.max_delay_s, settings.delay_points);
  const std::vector<double> etas = linspace(1.0 - settings.eta_span, 1.0 + settings.eta_span, settings.eta_points);
  return wbaf(waveform, delays, etas, workers);
}

std::vector<WaveformSummary> compare_waveforms(const SweepConfig& config) {
  if (config.waveforms.size() < 2) throw ConfigError("compare needs at least two waveforms");
  SweepConfig fused = config;
  fused.cases = {FusionCase::fused};
  const CrlbGrid grid = run_sweep(fused);
  const std::vector<SampledWaveform> waveforms = config.materialize_waveforms();

  std::vector<WaveformSummary> rows;
  for (std::size_t w = 0; w < waveforms.size(); ++w) {
    WaveformSummary row;
    row.name = config.waveforms[w].name;
    row.family = to_string(waveforms[w].family);
    row.duration_s = waveforms[w].duration();
    row.energy = waveforms[w].energy;
    const CaseMap* map = grid.find(FusionCase::fused, row.name);
    std::vector<double> values;
    for (const auto& v : map->sqrt_crlb_eta) {
      if (v) values.push_back(*v);
    }
    row.finite_points = values.size();
    if (!values.empty()) {
      std::sort(values.begin(), values.end());
      const std::size_t n = values.size();
      row.median_sqrt_crlb_eta = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
      row.max_sqrt_crlb_eta = values.back();
    }
    row.wbaf = mainlobe_metrics(wbaf_for(waveforms[w], config.wbaf, config.workers));
    rows.push_back(row);
  }
  return rows;
}

std::string format_comparison(const std::vector<WaveformSummary>& rows) {
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-16s %-8s %10s %14s %14s %8s %14s %12s %12s %12s\n", "waveform", "family",
                "duration_s", "median_eta", "max_eta", "finite", "doppler_3db", "delay_3db_s", "doppler_sl_db",
                "delay_sl_db");
  out << line;
  const auto opt = [](const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); };
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-16s %-8s %10.4f %14.6e %14.6e %8zu %14.6e %12.4e %12.2f %12.2f\n",
                  r.name.c_str(), r.family.c_str(), r.duration_s, opt(r.median_sqrt_crlb_eta),
                  opt(r.max_sqrt_crlb_eta), r.finite_points, r.wbaf.doppler_width, r.wbaf.delay_width,
                  r.wbaf.doppler_sidelobe_db, r.wbaf.delay_sidelobe_db);
    out << line;
  }
  return out.str();
}

void write_wbaf_outputs(const SweepConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  ensure_directory(out_dir);
  const std::vector<SampledWaveform> waveforms = config.materialize_waveforms();
  nlohmann::json metrics = nlohmann::json::object();
  for (std::size_t w = 0; w < waveforms.size(); ++w) {
    const std::string& name = config.waveforms[w].name;
    const WbafResult r = wbaf_for(waveforms[w], config.wbaf, config.workers);

    std::ostringstream surface;
    surface << "delay_s,eta,abs_chi,normalized\n";
    for (std::size_t i = 0; i < r.etas.size(); ++i) {
      for (std::size_t j = 0; j < r.delays.size(); ++j) {
        const double v = r.magnitude(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        surface << format_number(r.delays[j]) << ',' << format_number(r.etas[i]) << ',' << format_number(v) << ','
                << format_number(v / r.zero_lag_value) << '\n';
      }
    }
    write_text(out_dir / ("wbaf_" + name + ".csv"), surface.str());

    std::ostringstream cuts;
    cuts << "axis,value,abs_chi,normalized\n";
    for (std::size_t j = 0; j < r.delays.size(); ++j) {
      cuts << "delay," << format_number(r.delays[j]) << ',' << format_number(r.delay_cut[j]) << ','
           << format_number(r.delay_cut[j] / r.zero_lag_value) << '\n';
    }
    for (std::size_t i = 0; i < r.etas.size(); ++i) {
      cuts << "eta," << format_number(r.etas[i]) << ',' << format_number(r.doppler_cut[i]) << ','
           << format_number(r.doppler_cut[i] / r.zero_lag_value) << '\n';
    }
    write_text(out_dir / ("wbaf_" + name + "_cuts.csv"), cuts.str());

    const MainlobeMetrics m = mainlobe_metrics(r);
    const auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
    metrics[name] = {{"family", to_string(waveforms[w].family)},
                     {"duration_s", waveforms[w].duration()},
                     {"zero_lag_value", r.zero_lag_value},
                     {"peak_delay_s", r.delays[static_cast<std::size_t>(r.peak_delay_index)]},
                     {"peak_eta", r.etas[static_cast<std::size_t>(r.peak_eta_index)]},
                     {"doppler_3db_width", finite_or_null(m.doppler_width)},
                     {"delay_3db_width_s", finite_or_null(m.delay_width)},
                     {"doppler_sidelobe_db", finite_or_null(m.doppler_sidelobe_db)},
                     {"delay_sidelobe_db", finite_or_null(m.delay_sidelobe_db)}};
  }
  write_text(out_dir / "wbaf_metrics.json", metrics.dump(2) + "\n");
}

}  // namespace sonarcrlb
