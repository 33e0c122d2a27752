#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sonarcrlb/bistatic_fim.hpp"
#include "sonarcrlb/config.hpp"
#include "sonarcrlb/crlb.hpp"
#include "sonarcrlb/errors.hpp"
#include "sonarcrlb/mc_validate.hpp"
#include "sonarcrlb/passive_fim.hpp"
#include "sonarcrlb/scenario.hpp"
#include "sonarcrlb/sonar_equation.hpp"
#include "sonarcrlb/sweep.hpp"
#include "sonarcrlb/waveform.hpp"

namespace py = pybind11;
using namespace sonarcrlb;

namespace {

py::dict crlb_dict(const CrlbResult& r) {
  py::dict d;
  d["case"] = to_int(r.case_id);
  d["sqrt_crlb_position"] = r.sqrt_crlb_position;
  d["sqrt_crlb_eta"] = r.sqrt_crlb_eta;
  d["condition_number"] = r.condition_number;
  return d;
}

py::dict grid_dict(const CrlbGrid& g) {
  py::dict out;
  out["x"] = g.grid.xs();
  out["y"] = g.grid.ys();
  py::list maps;
  for (const auto& m : g.maps) {
    py::dict d;
    d["case"] = to_int(m.case_id);
    d["waveform"] = m.waveform;
    d["sqrt_crlb_position"] = m.sqrt_crlb_position;
    d["sqrt_crlb_eta"] = m.sqrt_crlb_eta;
    d["flag"] = m.flag;
    maps.append(d);
  }
  out["maps"] = maps;
  py::list ratios;
  for (const auto& r : g.ratios) {
    py::dict d;
    d["waveform"] = r.waveform;
    d["quantity"] = r.quantity;
    d["ratio"] = r.ratio;
    d["flag"] = r.flag;
    ratios.append(d);
  }
  out["ratios"] = ratios;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bistatic two-node ULA localization bounds";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConditioningError>(m, "ConditioningError", PyExc_ArithmeticError);

  py::enum_<FusionCase>(m, "FusionCase")
      .value("passive_only", FusionCase::passive_only)
      .value("fused", FusionCase::fused)
      .value("bistatic_only", FusionCase::bistatic_only);

  py::class_<SensorNode>(m, "SensorNode")
      .def(py::init<>())
      .def_readwrite("origin", &SensorNode::origin)
      .def_readwrite("num_sensors", &SensorNode::num_sensors)
      .def_readwrite("element_spacing", &SensorNode::element_spacing);

  py::class_<TargetState>(m, "TargetState")
      .def(py::init<>())
      .def_readwrite("position", &TargetState::position)
      .def_readwrite("velocity", &TargetState::velocity)
      .def_readwrite("weight_tonnes", &TargetState::weight_tonnes)
      .def_readwrite("emitted_power", &TargetState::emitted_power)
      .def_property_readonly("speed_knots", &TargetState::speed_knots);

  py::class_<PassiveSampling>(m, "PassiveSampling")
      .def(py::init<>())
      .def_readwrite("sample_rate", &PassiveSampling::sample_rate)
      .def_readwrite("num_samples", &PassiveSampling::num_samples);

  py::class_<Environment>(m, "Environment")
      .def(py::init<>())
      .def_readwrite("wind_speed_knots", &Environment::wind_speed_knots)
      .def_readwrite("listening_frequency_khz", &Environment::listening_frequency_khz);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("nodes", &Scenario::nodes)
      .def_readwrite("target", &Scenario::target)
      .def_readwrite("sound_speed", &Scenario::sound_speed)
      .def_readwrite("sample_rate", &Scenario::sample_rate)
      .def_readwrite("num_samples", &Scenario::num_samples)
      .def_readwrite("passive", &Scenario::passive)
      .def_readwrite("ar_coefficient", &Scenario::ar_coefficient)
      .def_readwrite("environment", &Scenario::environment)
      .def_readwrite("transmit_power_watt", &Scenario::transmit_power_watt)
      .def("validate", &Scenario::validate)
      .def("with_target_position", &Scenario::with_target_position);

  m.def("doppler_scale", &doppler_scale);
  m.def("bistatic_delay", &bistatic_delay);
  m.def("intersensor_delay", &intersensor_delay, py::arg("scenario"), py::arg("node"), py::arg("sensor"));

  m.def("passive_source_level_db", &passive_source_level_db, py::arg("speed_knots"), py::arg("weight_tonnes"),
        py::arg("frequency_khz"));
  m.def("noise_level_db", &noise_level_db, py::arg("wind_speed_knots"), py::arg("frequency_khz"));
  m.def("active_source_level_db", &active_source_level_db, py::arg("power_watt"));
  m.def("transmission_loss_db", &transmission_loss_db, py::arg("range_m"));

  py::class_<WaveformConfig>(m, "WaveformConfig")
      .def(py::init<>())
      .def_readwrite("name", &WaveformConfig::name)
      .def_readwrite("mary", &WaveformConfig::mary)
      .def_readwrite("frame_length", &WaveformConfig::frame_length)
      .def_readwrite("guard_fraction", &WaveformConfig::guard_fraction)
      .def_readwrite("tones", &WaveformConfig::tones)
      .def_readwrite("num_bits", &WaveformConfig::num_bits)
      .def_readwrite("num_symbols", &WaveformConfig::num_symbols)
      .def_readwrite("center_frequency", &WaveformConfig::center_frequency)
      .def_readwrite("bandwidth", &WaveformConfig::bandwidth)
      .def_readwrite("energy", &WaveformConfig::energy)
      .def_readwrite("sample_rate", &WaveformConfig::sample_rate)
      .def_readwrite("seed", &WaveformConfig::seed)
      .def_property(
          "family", [](const WaveformConfig& c) { return to_string(c.family); },
          [](WaveformConfig& c, const std::string& s) { c.family = waveform_family_from_string(s); });
  m.def("spfsk_like_config", &spfsk_like_config);
  m.def("pc_mfsk_like_config", &pc_mfsk_like_config);

  py::class_<SampledWaveform>(m, "SampledWaveform")
      .def_property_readonly("samples",
                             [](const SampledWaveform& w) {
                               return Eigen::Map<const Eigen::VectorXd>(w.samples.data(),
                                                                        static_cast<Eigen::Index>(w.samples.size()))
                                   .eval();
                             })
      .def_readonly("sample_rate", &SampledWaveform::sample_rate)
      .def_readonly("energy", &SampledWaveform::energy)
      .def_property_readonly("duration", &SampledWaveform::duration)
      .def("with_energy", &SampledWaveform::with_energy);
  m.def("generate", &generate, py::arg("config"));
  m.def(
      "make_waveform",
      [](const Eigen::VectorXd& x, double fs) {
        return make_waveform(std::vector<double>(x.data(), x.data() + x.size()), fs);
      },
      py::arg("samples"), py::arg("sample_rate"));

  m.def(
      "wbaf",
      [](const SampledWaveform& w, const std::vector<double>& delays, const std::vector<double>& etas, int workers) {
        const WbafResult r = wbaf(w, delays, etas, workers);
        py::dict d;
        d["delays"] = r.delays;
        d["etas"] = r.etas;
        d["magnitude"] = r.magnitude;
        d["zero_lag_value"] = r.zero_lag_value;
        d["delay_cut"] = r.delay_cut;
        d["doppler_cut"] = r.doppler_cut;
        return d;
      },
      py::arg("waveform"), py::arg("delays"), py::arg("etas"), py::arg("workers") = 1);

  m.def("fim_passive", &fim_passive, py::arg("scenario"), py::arg("node"), py::arg("signal_power"));
  m.def("passive_signal_power", &passive_signal_power, py::arg("scenario"), py::arg("node"));
  m.def("fim_bistatic", py::overload_cast<const Scenario&, const SampledWaveform&>(&fim_bistatic),
        py::arg("scenario"), py::arg("waveform"));
  m.def("fuse", &fuse, py::arg("case"), py::arg("fim_n1"), py::arg("fim_n2"), py::arg("fim_bs"));
  m.def(
      "crlb", [](const FimMatrix& f, FusionCase c) { return crlb_dict(crlb(f, c)); }, py::arg("fim"),
      py::arg("case"));

  py::class_<SweepConfig>(m, "SweepConfig")
      .def_readwrite("scenario", &SweepConfig::scenario)
      .def_readwrite("workers", &SweepConfig::workers)
      .def_readwrite("seed", &SweepConfig::seed)
      .def_property(
          "grid",
          [](const SweepConfig& c) {
            py::dict d;
            d["x_min"] = c.grid.x_min;
            d["x_max"] = c.grid.x_max;
            d["y_min"] = c.grid.y_min;
            d["y_max"] = c.grid.y_max;
            d["nx"] = c.grid.nx;
            d["ny"] = c.grid.ny;
            return d;
          },
          [](SweepConfig& c, const py::dict& d) {
            c.grid = {d["x_min"].cast<double>(), d["x_max"].cast<double>(), d["y_min"].cast<double>(),
                      d["y_max"].cast<double>(),  d["nx"].cast<int>(),       d["ny"].cast<int>()};
          })
      .def_property(
          "cases",
          [](const SweepConfig& c) {
            std::vector<int> out;
            for (auto f : c.cases) out.push_back(to_int(f));
            return out;
          },
          [](SweepConfig& c, const std::vector<int>& ids) {
            c.cases.clear();
            for (int id : ids) c.cases.push_back(fusion_case_from_int(id));
          })
      .def_property_readonly("waveform_names",
                             [](const SweepConfig& c) {
                               std::vector<std::string> out;
                               for (const auto& w : c.waveforms) out.push_back(w.name);
                               return out;
                             })
      .def("materialize_waveforms", &SweepConfig::materialize_waveforms)
      .def("validate", &SweepConfig::validate)
      .def("to_json", [](const SweepConfig& c) { return to_json(c); });
  m.def("default_config", &default_config);
  m.def("parse_config", &parse_config, py::arg("json_text"), py::arg("base_dir") = std::filesystem::path{});
  m.def("load_config", &load_config, py::arg("path"));

  m.def(
      "run_sweep",
      [](const SweepConfig& c) {
        CrlbGrid g;
        {
          py::gil_scoped_release release;
          g = run_sweep(c);
        }
        return grid_dict(g);
      },
      py::arg("config"));
  m.def(
      "sweep_to_directory",
      [](const SweepConfig& c, const std::filesystem::path& out) {
        py::gil_scoped_release release;
        write_sweep_outputs(run_sweep(c), c, out, 0.0);
      },
      py::arg("config"), py::arg("out_dir"));

  m.def(
      "mc_crlb_check",
      [](const Scenario& sc, const SampledWaveform& wf, FusionCase c, int trials, std::uint64_t seed, int workers) {
        McOptions opt;
        opt.case_id = c;
        opt.num_trials = trials;
        opt.seed = seed;
        opt.workers = workers;
        McReport r;
        {
          py::gil_scoped_release release;
          r = mc_crlb_check(sc, wf, opt);
        }
        py::dict d;
        d["case"] = to_int(r.case_id);
        d["num_trials"] = r.num_trials;
        d["parameters"] = r.parameters;
        d["mean_error"] = r.mean_error;
        d["empirical_covariance"] = r.empirical_covariance;
        d["crlb"] = r.crlb;
        d["efficiency"] = r.efficiency;
        d["min_whitened_eigenvalue"] = r.min_whitened_eigenvalue;
        d["standard_error"] = r.standard_error;
        d["unconverged_trials"] = r.unconverged_trials;
        d["bound_respected"] = r.bound_respected();
        d["report"] = format_report(r);
        return d;
      },
      py::arg("scenario"), py::arg("waveform"), py::arg("case") = FusionCase::bistatic_only,
      py::arg("trials") = 500, py::arg("seed") = 1, py::arg("workers") = 1);

  m.attr("__version__") = version();
}
