#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "random_scenarios.hpp"
#include "sonarcrlb/bistatic_fim.hpp"
#include "sonarcrlb/config.hpp"
#include "sonarcrlb/crlb.hpp"
#include "sonarcrlb/mc_validate.hpp"
#include "sonarcrlb/noise.hpp"
#include "sonarcrlb/passive_fim.hpp"
#include "sonarcrlb/scenario.hpp"
#include "sonarcrlb/sonar_equation.hpp"
#include "sonarcrlb/sweep.hpp"
#include "sonarcrlb/waveform.hpp"

namespace fs = std::filesystem;
using namespace sonarcrlb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
  std::printf("%s %-22s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

template <typename F>
void run(const std::string& name, F&& body) {
  try {
    report(name, body());
  } catch (const std::exception& e) {
    report(name, {false, std::string("exception: ") + e.what()});
  }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double rel2(const Vec2& a, const Vec2& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

// Fourth-order central difference.
Vec2 fd_gradient(const std::function<double(const Vec2&)>& f, const Vec2& p, double h) {
  Vec2 g;
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e(i) = h;
    g(i) = (8.0 * (f(p + e) - f(p - e)) - (f(p + 2.0 * e) - f(p - 2.0 * e))) / (12.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------------

Outcome gradient_suite() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  const auto wf = testing_support::short_burst(2);
  constexpr int kScenarios = 60;
  double worst_scalar = 0.0;
  double worst_operator = 0.0;
  double worst_jacobian = 0.0;
  for (int s = 0; s < kScenarios; ++s) {
    Scenario sc = testing_support::random_scenario(rng);
    sc.passive.num_samples = 16;
    const Vec2 p = sc.target.position;

    const SignalParamGradients g0 = signal_param_gradients(sc, kReceiverNode, 0);
    worst_scalar = std::max(worst_scalar, rel2(g0.eta, fd_gradient([&](const Vec2& q) { return doppler_scale_at(sc, q); }, p, 0.5)));
    worst_scalar = std::max(worst_scalar, rel2(g0.tau0, fd_gradient([&](const Vec2& q) { return bistatic_delay_at(sc, q); }, p, 0.5)));
    for (int node = 0; node < 2; ++node) {
      for (int m = 1; m < sc.node(node).num_sensors; ++m) {
        const SignalParamGradients g = signal_param_gradients(sc, node, m);
        const Vec2 fd = fd_gradient([&](const Vec2& q) { return intersensor_delay_at(sc, q, node, m); }, p, 0.5);
        worst_scalar = std::max(worst_scalar, rel2(g.tau_m, fd));
      }
    }
    const int m = sc.node(kReceiverNode).num_sensors - 1;
    const double t = bistatic_delay(sc) + 0.01;
    const auto k_at = [&](const Vec2& q, double delta) {
      return (doppler_scale_at(sc, q) + delta) *
             (t - bistatic_delay_at(sc, q) - intersensor_delay_at(sc, q, kReceiverNode, m));
    };
    const KDerivatives kd = k_derivatives(sc, kReceiverNode, m, t);
    worst_scalar = std::max(worst_scalar, rel2(kd.d_p, fd_gradient([&](const Vec2& q) { return k_at(q, 0.0); }, p, 0.5)));
    worst_scalar = std::max(worst_scalar, rel(kd.d_eta, (k_at(p, 1e-7) - k_at(p, -1e-7)) / 2e-7));

    for (int node = 0; node < 2; ++node) {
      for (const Axis axis : {Axis::x, Axis::y}) {
        Vec2 e = Vec2::Zero();
        e(static_cast<int>(axis)) = 1e-3;
        const Eigen::MatrixXd fd =
            (oracle::delay_operator(sc, p + e, node) - oracle::delay_operator(sc, p - e, node)) / 2e-3;
        const Eigen::MatrixXd analytic = delay_operator_derivative(sc, node, axis);
        worst_operator = std::max(worst_operator, (analytic - fd).norm() / fd.norm());
      }
    }

    const BistaticSetup setup = make_bistatic_setup(sc, wf);
    const Eigen::MatrixXd j = bistatic_jacobian(sc, wf, setup);
    const Eigen::Vector3d phi0(p.x(), p.y(), 0.0);
    const Eigen::Vector3d steps(1e-5, 1e-5, 1e-8);
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e(c) = steps(c);
      const Eigen::VectorXd fd = (oracle::bistatic_mean_offset(sc, wf, setup, phi0 + e) -
                                  oracle::bistatic_mean_offset(sc, wf, setup, phi0 - e)) /
                                 (2.0 * steps(c));
      worst_jacobian = std::max(worst_jacobian, (j.col(c) - fd).norm() / fd.norm());
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass = worst_scalar < 1e-6 && worst_operator < 1e-4 && worst_jacobian < 1e-4 && elapsed < 60.0;
  return {pass, std::to_string(kScenarios) + " scenarios; " +
                    fmt("scalar %.2e (<1e-6), delay operator %.2e (<1e-4), jacobian %.2e (<1e-4), %.1f s",
                        worst_scalar, worst_operator, worst_jacobian, elapsed)};
}

Outcome fim_structure_suite() {
  const auto start = Clock::now();
  std::mt19937_64 rng(77);
  const auto wf = testing_support::short_burst(2);
  int checked = 0;
  int bad_psd = 0;
  int bad_eta = 0;
  int bad_sum = 0;
  for (int s = 0; s < 40; ++s) {
    Scenario sc = testing_support::random_scenario(rng);
    sc.passive.num_samples = 32;
    std::array<FimMatrix, 2> passive;
    for (int node = 0; node < 2; ++node) {
      const double power = s % 2 == 0 ? 1.5 : passive_signal_power(sc, node);
      passive[static_cast<std::size_t>(node)] = fim_passive(sc, node, power);
      const FimMatrix& f = passive[static_cast<std::size_t>(node)];
      if (!is_symmetric_psd(f)) ++bad_psd;
      if (f.row(2).cwiseAbs().maxCoeff() != 0.0 || f.col(2).cwiseAbs().maxCoeff() != 0.0) ++bad_eta;
    }
    const FimMatrix bs = fim_bistatic(sc, wf);
    for (const FusionCase c : {FusionCase::passive_only, FusionCase::fused, FusionCase::bistatic_only}) {
      if (!is_symmetric_psd(fuse(c, passive[0], passive[1], bs))) ++bad_psd;
    }
    const FimMatrix case1 = fuse(FusionCase::passive_only, passive[0], passive[1], bs);
    if (fuse(FusionCase::fused, passive[0], passive[1], bs) != FimMatrix(case1 + bs)) ++bad_sum;
    ++checked;
  }
  const double elapsed = seconds_since(start);
  const bool pass = bad_psd == 0 && bad_eta == 0 && bad_sum == 0;
  return {pass, std::to_string(checked) + " scenarios; non-PSD " + std::to_string(bad_psd) + ", nonzero passive eta " +
                    std::to_string(bad_eta) + ", case 2 != case 1 + bistatic " + std::to_string(bad_sum) +
                    fmt(", %.1f s", elapsed)};
}

Scenario toy_scenario() {
  Scenario sc;
  sc.nodes[0].origin = Vec2(-100.0, 0.0);
  sc.nodes[1].origin = Vec2(150.0, 40.0);
  for (auto& node : sc.nodes) {
    node.num_sensors = 2;
    node.element_spacing = 0.5;
  }
  sc.target.position = Vec2(120.0, 260.0);
  sc.target.velocity = Vec2(1.0, 4.0);
  sc.passive.num_samples = 8;
  sc.num_samples = 8;
  sc.ar_coefficient = 0.4;
  return sc;
}

Outcome oracle_equivalence() {
  const Scenario sc = toy_scenario();
  double worst_passive = 0.0;
  for (double s2 : {0.05, 2.0, 40.0}) {
    for (int node = 0; node < 2; ++node) {
      const FimMatrix fim = fim_passive(sc, node, s2);
      worst_passive = std::max(worst_passive,
                               oracle::relative_error(fim.topLeftCorner<2, 2>(), oracle::passive_fim_trace(sc, node, s2)));
    }
  }
  const auto wf = testing_support::short_burst(1);
  const BistaticSetup setup = make_bistatic_setup(sc, wf);
  const FimMatrix fim = fim_bistatic(sc, wf, setup);
  const Eigen::Matrix3d ref = oracle::bistatic_curvature(sc, wf, setup, Eigen::Vector3d(2e-4, 2e-4, 1e-8));
  const double bistatic = oracle::relative_error(fim, ref);
  const bool pass = worst_passive < 1e-3 && bistatic < 1e-3 && setup.window.num_samples == 8;
  return {pass, fmt("N=8 M=2; passive vs trace formula %.2e, bistatic vs curvature %.2e (<1e-3)", worst_passive,
                    bistatic)};
}

// ---------------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing column " + name);
    return static_cast<int>(it - header.begin());
  }
  std::vector<double> values(const std::string& name) const {
    const int c = column(name);
    std::vector<double> out;
    for (const auto& r : rows) {
      out.push_back(r[static_cast<std::size_t>(c)].empty() ? std::nan("") : std::stod(r[static_cast<std::size_t>(c)]));
    }
    return out;
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  std::getline(in, line);
  t.header = split(line);
  while (std::getline(in, line)) t.rows.push_back(split(line));
  return t;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct SweepRun {
  fs::path dir;
  double seconds = 0.0;
  int exit_code = 0;
};

SweepRun run_cli_sweep(const std::string& cli, const std::string& config, const fs::path& dir, int workers) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cmd = "\"" + cli + "\" sweep --config \"" + config + "\" --out \"" + dir.string() +
                          "\" --workers " + std::to_string(workers) + " > \"" + (dir / "stdout.txt").string() + "\" 2>&1";
  const auto start = Clock::now();
  SweepRun r;
  r.dir = dir;
  r.exit_code = std::system(cmd.c_str());
  r.seconds = seconds_since(start);
  return r;
}

Outcome fusion_property(const SweepRun& run, const SweepConfig& cfg) {
  if (run.exit_code != 0) return {false, "sweep exited with " + std::to_string(run.exit_code)};
  const CsvTable c1 = read_csv(run.dir / "case1.csv");
  const std::vector<double> p1 = c1.values("sqrt_crlb_p_m");
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t ratio_points = 0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (const auto& spec : cfg.waveforms) {
    const std::vector<double> p2 = read_csv(run.dir / ("case2_" + spec.name + ".csv")).values("sqrt_crlb_p_m");
    const std::vector<double> p3 = read_csv(run.dir / ("case3_" + spec.name + ".csv")).values("sqrt_crlb_p_m");
    for (std::size_t i = 0; i < p2.size(); ++i) {
      if (!std::isfinite(p2[i])) continue;
      double best = std::numeric_limits<double>::infinity();
      if (std::isfinite(p1[i])) best = std::min(best, p1[i]);
      if (std::isfinite(p3[i])) best = std::min(best, p3[i]);
      ++checked;
      if (p2[i] > best * (1.0 + 1e-9)) ++violations;
    }
    for (const char* q : {"position", "doppler"}) {
      const auto r = read_csv(run.dir / ("ratio_" + std::string(q) + "_" + spec.name + ".csv")).values("ratio");
      for (double v : r) {
        if (!std::isfinite(v)) continue;
        ++ratio_points;
        worst_ratio = std::min(worst_ratio, v);
      }
    }
  }
  const bool grid_ok = cfg.grid.nx == 21 && cfg.grid.ny == 21;
  const bool pass = grid_ok && checked > 0 && violations == 0 && worst_ratio >= 1.0 - 1e-9 && run.seconds < 600.0;
  return {pass, std::to_string(cfg.grid.nx) + "x" + std::to_string(cfg.grid.ny) + " grid; " + std::to_string(checked) +
                    " finite case-2 points, " + std::to_string(violations) + " above min(case 1, case 3); min ratio " +
                    fmt("%.12f over %.0f points (>= 1 - 1e-9); sweep %.1f s (<600)", worst_ratio,
                        static_cast<double>(ratio_points), run.seconds)};
}

Outcome waveform_comparison(const SweepRun& run, const SweepConfig& cfg) {
  if (run.exit_code != 0) return {false, "sweep exited with " + std::to_string(run.exit_code)};
  const SweepConfig& c = cfg;
  const std::vector<SampledWaveform> waveforms = c.materialize_waveforms();
  int spfsk = -1;
  int mfsk = -1;
  for (std::size_t i = 0; i < waveforms.size(); ++i) {
    if (waveforms[i].family == WaveformFamily::spfsk && spfsk < 0) spfsk = static_cast<int>(i);
    if (waveforms[i].family == WaveformFamily::pc_mfsk && mfsk < 0) mfsk = static_cast<int>(i);
  }
  if (spfsk < 0 || mfsk < 0) return {false, "config needs one SPFSK-like and one PC-MFSK-like waveform"};
  const auto& a = c.waveforms[static_cast<std::size_t>(spfsk)];
  const auto& b = c.waveforms[static_cast<std::size_t>(mfsk)];
  const double med_a = median(read_csv(run.dir / ("case2_" + a.name + ".csv")).values("sqrt_crlb_eta"));
  const double med_b = median(read_csv(run.dir / ("case2_" + b.name + ".csv")).values("sqrt_crlb_eta"));

  const std::vector<double> delays{0.0};
  const std::vector<double> etas = linspace(1.0 - 2e-2, 1.0 + 2e-2, 4001);
  const auto width = [&](const SampledWaveform& w) {
    const WbafResult r = wbaf(w, delays, etas);
    return mainlobe_width(r.etas, r.doppler_cut, static_cast<std::size_t>(r.peak_eta_index), -3.0);
  };
  const double w_a = width(waveforms[static_cast<std::size_t>(spfsk)]);
  const double w_b = width(waveforms[static_cast<std::size_t>(mfsk)]);
  const bool equal_energy = a.energy == b.energy;
  const bool pass = equal_energy && std::isfinite(med_a) && std::isfinite(med_b) && med_a < med_b &&
                    std::isfinite(w_a) && w_a < w_b;
  return {pass, fmt("case-2 median sqrt CRLB eta: SPFSK-like %.4e < PC-MFSK-like %.4e; -3 dB Doppler mainlobe %.4e < %.4e",
                    med_a, med_b, w_a, w_b) +
                    (equal_energy ? "" : " (energies differ)")};
}

Outcome determinism(const SweepRun& first, const SweepRun& second) {
  if (first.exit_code != 0 || second.exit_code != 0) return {false, "a sweep run failed"};
  int files = 0;
  int mismatched = 0;
  for (const auto& entry : fs::directory_iterator(first.dir)) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const fs::path other = second.dir / entry.path().filename();
    if (!fs::exists(other) || read_bytes(entry.path()) != read_bytes(other)) ++mismatched;
  }
  for (const auto& entry : fs::directory_iterator(second.dir)) {
    if (entry.path().extension() == ".csv" && !fs::exists(first.dir / entry.path().filename())) ++mismatched;
  }
  return {files > 0 && mismatched == 0,
          std::to_string(files) + " CSVs compared between --workers 1 and --workers 2 runs, " +
              std::to_string(mismatched) + " differ"};
}

// ---------------------------------------------------------------------------------

Outcome wbaf_suite() {
  double worst_oracle = 0.0;
  double worst_excess = 0.0;
  bool peak_at_origin = true;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto wf = testing_support::short_burst(2, seed);
    const std::vector<double> delays = linspace(-2e-3, 2e-3, 97);
    std::vector<double> etas = linspace(0.97, 1.03, 61);
    const WbafResult r = wbaf(wf, delays, etas);
    const double chi0 = r.zero_lag_value;
    const double reference = oracle::wbaf_cell(wf.samples, wf.sample_rate, 0.0, 1.0);
    worst_oracle = std::max(worst_oracle, rel(chi0, reference));
    for (int i = 0; i < r.magnitude.rows(); ++i) {
      for (int k = 0; k < r.magnitude.cols(); ++k) {
        const double ref = std::abs(oracle::wbaf_cell(wf.samples, wf.sample_rate, delays[static_cast<std::size_t>(k)],
                                                      etas[static_cast<std::size_t>(i)]));
        worst_oracle = std::max(worst_oracle, std::abs(r.magnitude(i, k) - ref) / chi0);
        worst_excess = std::max(worst_excess, r.magnitude(i, k) / chi0 - 1.0);
      }
    }
    if (std::abs(r.delays[static_cast<std::size_t>(r.peak_delay_index)]) > 0.0 ||
        std::abs(r.etas[static_cast<std::size_t>(r.peak_eta_index)] - 1.0) > 1e-12) {
      peak_at_origin = false;
    }
  }
  const bool pass = worst_oracle < 1e-10 && worst_excess <= 1e-12 && peak_at_origin;
  return {pass, std::string("peak at (0, 1): ") + (peak_at_origin ? "yes" : "no") +
                    fmt("; max |chi|/chi(0,1) - 1 = %.2e; brute-force oracle %.2e (<1e-10)", worst_excess, worst_oracle)};
}

Outcome sonar_spot_values() {
  const double sl_passive = passive_source_level_db(9.72, 1.0, 6.0);
  const double nl = noise_level_db(6.0, 6.0);
  const double sl_active = active_source_level_db(1.0);
  const bool pass = std::abs(sl_passive - 78.695) <= 0.01 && std::abs(nl - 42.055) <= 0.01 &&
                    std::abs(sl_active - 171.0) <= 0.01;
  return {pass, fmt("SL_passive %.4f (78.695), NL %.4f (42.055), SL_active %.4f (171) dB, tol 0.01", sl_passive, nl,
                    sl_active)};
}

Outcome monte_carlo(const std::string& config_path) {
  const SweepConfig cfg = load_config(config_path);
  const auto waveforms = cfg.materialize_waveforms();
  McOptions opt;
  opt.case_id = fusion_case_from_int(cfg.mc.case_id);
  opt.num_trials = cfg.mc.trials;
  opt.seed = cfg.mc.seed;
  opt.workers = 0;
  const auto start = Clock::now();
  const McReport r = mc_crlb_check(cfg.scenario, waveforms.front(), opt);
  const double elapsed = seconds_since(start);
  const int n = cfg.scenario.passive.num_samples;
  const int m = cfg.scenario.nodes[kReceiverNode].num_sensors;
  const bool instance_ok = cfg.scenario.num_samples == 64 && n == 64 && m == 2 && r.num_trials == 500;
  const bool pass = instance_ok && r.bound_respected() && elapsed < 300.0;
  std::string eff;
  for (Eigen::Index k = 0; k < r.efficiency.size(); ++k) eff += fmt(k == 0 ? "%.4f" : ", %.4f", r.efficiency(k));
  return {pass, "case " + std::to_string(to_int(r.case_id)) + ", N=64, M=2, " + std::to_string(r.num_trials) +
                    " trials; var/CRLB " + eff + fmt("; min eig %.4f > -%.4f (3 SE); %.1f s", r.min_whitened_eigenvalue,
                                                     3.0 * r.standard_error, elapsed) +
                    (r.unconverged_trials > 0 ? "; " + std::to_string(r.unconverged_trials) + " unconverged" : "")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli;
  std::string config;
  std::string mc_config;
  std::string work_dir = "acceptance_work";
  app.add_option("--cli", cli, "sonarcrlb executable")->required();
  app.add_option("--config", config, "sweep configuration")->required();
  app.add_option("--mc-config", mc_config, "Monte-Carlo configuration")->required();
  app.add_option("--work-dir", work_dir, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  run("gradient_suite", gradient_suite);
  run("fim_structure", fim_structure_suite);
  run("oracle_equivalence", oracle_equivalence);

  const SweepConfig cfg = load_config(config);
  const SweepRun first = run_cli_sweep(cli, config, fs::path(work_dir) / "sweep_w1", 1);
  const SweepRun second = run_cli_sweep(cli, config, fs::path(work_dir) / "sweep_w2", 2);
  run("fusion_dominance", [&] { return fusion_property(first, cfg); });
  run("spfsk_vs_pc_mfsk", [&] { return waveform_comparison(first, cfg); });
  run("wbaf_suite", wbaf_suite);
  run("sonar_spot_values", sonar_spot_values);
  run("monte_carlo_bound", [&] { return monte_carlo(mc_config); });
  run("determinism", [&] { return determinism(first, second); });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
