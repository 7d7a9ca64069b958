#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "spraysim/commands.hpp"
#include "spraysim/errors.hpp"
#include "spraysim/harness.hpp"

namespace py = pybind11;
using namespace spraysim;

namespace {

std::string report_csv(const Report& report) {
  std::ostringstream os;
  write_report_csv(os, report);
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Variable flow rate spraying simulator: perception ingest, PWM "
            "control laws, valve/flow simulation, deposition and the field "
            "experiment harness.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  // --- rasters ---
  py::enum_<SegClass>(m, "SegClass")
      .value("Tree", SegClass::Tree)
      .value("Fruit", SegClass::Fruit)
      .value("Ground", SegClass::Ground)
      .value("Sky", SegClass::Sky)
      .value("Pipe", SegClass::Pipe);

  py::class_<SegmentedFrame>(m, "SegmentedFrame")
      .def(py::init<>())
      .def(py::init<int, int, SegClass>(), py::arg("width"), py::arg("height"),
           py::arg("fill") = SegClass::Sky)
      .def_readwrite("width", &SegmentedFrame::width)
      .def_readwrite("height", &SegmentedFrame::height)
      .def_readwrite("frame_id", &SegmentedFrame::frame_id)
      .def_readwrite("timestamp", &SegmentedFrame::timestamp)
      .def("at", &SegmentedFrame::at)
      .def("set", &SegmentedFrame::set)
      .def("pixel_count", &SegmentedFrame::pixel_count)
      .def_property(
          "classes", [](const SegmentedFrame& f) { return f.classes; },
          [](SegmentedFrame& f, const std::vector<std::uint8_t>& v) {
            if (v.size() != f.pixel_count())
              throw py::value_error("raster length does not match dimensions");
            f.classes = v;
          });

  py::class_<DepthFrame>(m, "DepthFrame")
      .def(py::init<>())
      .def(py::init<int, int, float>(), py::arg("width"), py::arg("height"),
           py::arg("fill") = 0.0f)
      .def_readwrite("width", &DepthFrame::width)
      .def_readwrite("height", &DepthFrame::height)
      .def("at", &DepthFrame::at)
      .def("set", &DepthFrame::set)
      .def_property(
          "depth_m", [](const DepthFrame& f) { return f.depth_m; },
          [](DepthFrame& f, const std::vector<float>& v) {
            if (v.size() != f.depth_m.size())
              throw py::value_error("raster length does not match dimensions");
            f.depth_m = v;
          });

  m.def("load_mask", &load_mask, py::arg("path"));
  m.def("save_mask", &save_mask, py::arg("frame"), py::arg("path"));
  m.def("load_depth", &load_depth, py::arg("path"));
  m.def("save_depth", &save_depth, py::arg("frame"), py::arg("path"));

  // --- perception ---
  py::enum_<SplitAxis>(m, "SplitAxis")
      .value("Width", SplitAxis::Width)
      .value("Height", SplitAxis::Height);
  py::enum_<DistanceStat>(m, "DistanceStat")
      .value("Median", DistanceStat::Median)
      .value("Mean", DistanceStat::Mean);

  py::class_<ZoneRect>(m, "ZoneRect")
      .def_readonly("x0", &ZoneRect::x0)
      .def_readonly("y0", &ZoneRect::y0)
      .def_readonly("w", &ZoneRect::w)
      .def_readonly("h", &ZoneRect::h);

  py::class_<ZoneFeatures>(m, "ZoneFeatures")
      .def(py::init<>())
      .def_readwrite("zone_index", &ZoneFeatures::zone_index)
      .def_readwrite("a_p", &ZoneFeatures::a_p)
      .def_readwrite("d_c", &ZoneFeatures::d_c)
      .def_readwrite("v_p", &ZoneFeatures::v_p)
      .def_readwrite("valid_pixel_count", &ZoneFeatures::valid_pixel_count);

  m.def("fuse_depth_gate", &fuse_depth_gate, py::arg("seg"), py::arg("depth"),
        py::arg("max_depth_m") = 2.0);
  m.def("partition_zones",
        py::overload_cast<int, int, int, SplitAxis>(&partition_zones),
        py::arg("width"), py::arg("height"), py::arg("n_zones") = 4,
        py::arg("axis") = SplitAxis::Width);
  m.def("compute_zone_features", &compute_zone_features, py::arg("seg"),
        py::arg("depth"), py::arg("zone"), py::arg("zone_index"), py::arg("v_p"),
        py::arg("stat") = DistanceStat::Median);
  m.def("frame_features", &frame_features, py::arg("seg"), py::arg("depth"),
        py::arg("v_p"), py::arg("n_zones") = 4, py::arg("axis") = SplitAxis::Width,
        py::arg("stat") = DistanceStat::Median, py::arg("max_depth_m") = 2.0);

  // --- control laws ---
  py::enum_<ControlMode>(m, "ControlMode")
      .value("AllOpen", ControlMode::AllOpen)
      .value("OnOff", ControlMode::OnOff)
      .value("VariableFlow", ControlMode::VariableFlow);
  m.def("control_mode_from_string", &control_mode_from_string);

  py::class_<ControllerConfig>(m, "ControllerConfig")
      .def(py::init<>())
      .def_readwrite("thres_nozzle", &ControllerConfig::thres_nozzle)
      .def_readwrite("k_p", &ControllerConfig::k_p)
      .def_readwrite("c_v", &ControllerConfig::c_v)
      .def_readwrite("duty_floor", &ControllerConfig::duty_floor)
      .def_readwrite("duty_ceiling", &ControllerConfig::duty_ceiling)
      .def_readwrite("near_distance_m", &ControllerConfig::near_distance_m)
      .def_readwrite("mode", &ControllerConfig::mode)
      .def_readwrite("variable_gate_by_threshold",
                     &ControllerConfig::variable_gate_by_threshold)
      .def("validate", &ControllerConfig::validate);

  py::class_<NozzleCommand>(m, "NozzleCommand")
      .def_readonly("nozzle_index", &NozzleCommand::nozzle_index)
      .def_readonly("duty", &NozzleCommand::duty)
      .def_readonly("mode", &NozzleCommand::mode)
      .def_readonly("frame_id", &NozzleCommand::frame_id)
      .def_readonly("diagnostic", &NozzleCommand::diagnostic);

  m.def("all_open", &all_open);
  m.def("on_off", &on_off);
  m.def("variable_rate", &variable_rate);
  m.def("command_frame", &command_frame, py::arg("zones"), py::arg("cfg"),
        py::arg("frame_id"), py::arg("expected_zones") = 4);

  // --- valve / flow ---
  py::enum_<PwmMode>(m, "PwmMode")
      .value("Waveform", PwmMode::Waveform)
      .value("Averaged", PwmMode::Averaged);

  py::class_<ValveParams>(m, "ValveParams")
      .def(py::init<>())
      .def_readwrite("c_n", &ValveParams::c_n)
      .def_readwrite("a_n", &ValveParams::a_n)
      .def_readwrite("p_n", &ValveParams::p_n)
      .def_readwrite("rho", &ValveParams::rho)
      .def_readwrite("plunger_tau", &ValveParams::plunger_tau)
      .def("validate", &ValveParams::validate);

  py::class_<PwmSignal>(m, "PwmSignal")
      .def(py::init<>())
      .def(py::init([](double f, double d, double p) {
             return PwmSignal{f, d, p};
           }),
           py::arg("frequency_hz"), py::arg("duty"), py::arg("phase_s") = 0.0)
      .def_readwrite("frequency_hz", &PwmSignal::frequency_hz)
      .def_readwrite("duty", &PwmSignal::duty)
      .def_readwrite("phase_s", &PwmSignal::phase_s);

  py::class_<PlungerState>(m, "PlungerState")
      .def(py::init<>())
      .def(py::init([](double x, double t) {
             return PlungerState{x, t};
           }),
           py::arg("x_n") = 0.0, py::arg("t") = 0.0)
      .def_readwrite("x_n", &PlungerState::x_n)
      .def_readwrite("t", &PlungerState::t);

  py::class_<FlowSample>(m, "FlowSample")
      .def_readonly("t", &FlowSample::t)
      .def_readonly("nozzle", &FlowSample::nozzle)
      .def_readonly("duty", &FlowSample::duty)
      .def_readonly("x_n", &FlowSample::x_n)
      .def_readonly("q_n", &FlowSample::q_n)
      .def_readonly("q_total", &FlowSample::q_total)
      .def_readonly("volume_accum_l", &FlowSample::volume_accum_l);

  m.def("pwm_waveform", &pwm_waveform);
  m.def("plunger_step", &plunger_step);
  m.def("nozzle_flow", &nozzle_flow);
  m.def("steady_flow", &steady_flow);
  m.def("integrate_volume",
        py::overload_cast<const std::vector<std::vector<double>>&, double,
                          const ValveParams&, PwmMode, double>(&integrate_volume),
        py::arg("duty_steps"), py::arg("dt"), py::arg("params"), py::arg("mode"),
        py::arg("pwm_frequency_hz") = 10.0);

  // --- spray deposition ---
  py::class_<PlumeModel>(m, "PlumeModel")
      .def(py::init<>())
      .def_readwrite("full_reach_m", &PlumeModel::full_reach_m)
      .def_readwrite("min_reach_duty", &PlumeModel::min_reach_duty)
      .def_readwrite("near_full_coverage_distance_m",
                     &PlumeModel::near_full_coverage_distance_m)
      .def_readwrite("full_coverage_duty", &PlumeModel::full_coverage_duty)
      .def_readwrite("cone_half_angle_at_100_deg",
                     &PlumeModel::cone_half_angle_at_100_deg)
      .def_readwrite("cone_angle_exponent", &PlumeModel::cone_angle_exponent)
      .def_readwrite("droplet_rate_per_l", &PlumeModel::droplet_rate_per_l)
      .def_readwrite("rng_seed", &PlumeModel::rng_seed)
      .def("validate", &PlumeModel::validate);

  m.def("plume_reach", &plume_reach);
  m.def("cone_half_angle", &cone_half_angle);

  py::class_<WaterSensitivePaper>(m, "WaterSensitivePaper")
      .def(py::init<>())
      .def(py::init<int, double, double, double, std::string, int, int>(),
           py::arg("zone"), py::arg("distance_m"), py::arg("offset_m"),
           py::arg("boom_m"), py::arg("tag") = std::string(), py::arg("rows") = 76,
           py::arg("cols") = 26)
      .def_readwrite("id", &WaterSensitivePaper::id)
      .def_readwrite("zone", &WaterSensitivePaper::zone)
      .def_readwrite("distance_m", &WaterSensitivePaper::distance_m)
      .def_readwrite("offset_m", &WaterSensitivePaper::offset_m)
      .def_readwrite("boom_m", &WaterSensitivePaper::boom_m)
      .def_readwrite("tag", &WaterSensitivePaper::tag)
      .def_readonly("rows", &WaterSensitivePaper::rows)
      .def_readonly("cols", &WaterSensitivePaper::cols)
      .def_property(
          "stained", [](const WaterSensitivePaper& p) { return p.stained; },
          [](WaterSensitivePaper& p, const std::vector<std::uint8_t>& v) {
            if (v.size() != p.stained.size())
              throw py::value_error("stain raster length mismatch");
            p.stained = v;
          })
      .def("stained_count", &WaterSensitivePaper::stained_count);

  m.def("adhesion_rate", &adhesion_rate);
  m.def("save_paper_raster", &save_paper_raster);

  py::class_<DepositionField>(m, "DepositionField")
      .def_readonly("papers", &DepositionField::papers)
      .def_readonly("zone_emitted_l", &DepositionField::zone_emitted_l)
      .def_readonly("droplets_emitted", &DepositionField::droplets_emitted)
      .def_readonly("droplets_deposited", &DepositionField::droplets_deposited);

  py::class_<Depositor>(m, "Depositor")
      .def(py::init<const PlumeModel&, int, double, std::uint64_t>(),
           py::arg("model"), py::arg("n_nozzles"), py::arg("boom_span_m"),
           py::arg("seed"))
      .def("attach_papers", &Depositor::attach_papers)
      .def("nozzle_boom_center", &Depositor::nozzle_boom_center)
      .def("step",
           [](Depositor& d, double s_m, const std::vector<double>& duty,
              const std::vector<double>& flow, double dt) {
             d.step(s_m, duty, flow, dt);
           })
      .def("expose_stationary", &Depositor::expose_stationary)
      .def("take_field", &Depositor::take_field);

  py::class_<CoverageCell>(m, "CoverageCell")
      .def_readonly("duty", &CoverageCell::duty)
      .def_readonly("x", &CoverageCell::x)
      .def_readonly("mean_rp", &CoverageCell::mean_rp)
      .def_readonly("sd_rp", &CoverageCell::sd_rp);

  py::class_<CalibrationConfig>(m, "CalibrationConfig")
      .def(py::init<>())
      .def_readwrite("exposure_s", &CalibrationConfig::exposure_s)
      .def_readwrite("zone_span_m", &CalibrationConfig::zone_span_m)
      .def_readwrite("pe1_distance_m", &CalibrationConfig::pe1_distance_m)
      .def_readwrite("pe1_papers", &CalibrationConfig::pe1_papers);

  m.def("replicate_pe1", &replicate_pe1, py::call_guard<py::gil_scoped_release>());
  m.def("replicate_pe2", &replicate_pe2, py::call_guard<py::gil_scoped_release>());

  // --- scenarios and the experiment harness ---
  py::enum_<ZoneTag>(m, "ZoneTag")
      .value("Target", ZoneTag::Target)
      .value("NoTarget", ZoneTag::NoTarget);

  py::class_<ScenarioZone>(m, "ScenarioZone")
      .def(py::init([](std::string name, ZoneTag tag, double length_m) {
             return ScenarioZone{std::move(name), tag, length_m};
           }),
           py::arg("name"), py::arg("tag"), py::arg("length_m"))
      .def_readwrite("name", &ScenarioZone::name)
      .def_readwrite("tag", &ScenarioZone::tag)
      .def_readwrite("length_m", &ScenarioZone::length_m);

  py::class_<PaperPlacement>(m, "PaperPlacement")
      .def(py::init<>())
      .def_readwrite("tag", &PaperPlacement::tag)
      .def_readwrite("nozzle_zone", &PaperPlacement::nozzle_zone)
      .def_readwrite("distance_m", &PaperPlacement::distance_m)
      .def_readwrite("row_pos_m", &PaperPlacement::row_pos_m);

  py::class_<GeneratorSpec>(m, "GeneratorSpec")
      .def(py::init<>())
      .def_readwrite("frame_width", &GeneratorSpec::frame_width)
      .def_readwrite("frame_height", &GeneratorSpec::frame_height)
      .def_readwrite("fov_m", &GeneratorSpec::fov_m)
      .def_readwrite("frame_interval_s", &GeneratorSpec::frame_interval_s)
      .def_readwrite("canopy_density_min", &GeneratorSpec::canopy_density_min)
      .def_readwrite("canopy_density_max", &GeneratorSpec::canopy_density_max)
      .def_readwrite("canopy_face_min_m", &GeneratorSpec::canopy_face_min_m)
      .def_readwrite("canopy_face_max_m", &GeneratorSpec::canopy_face_max_m)
      .def_readwrite("canopy_depth_m", &GeneratorSpec::canopy_depth_m)
      .def_readwrite("fruit_fraction", &GeneratorSpec::fruit_fraction)
      .def_readwrite("cell_m", &GeneratorSpec::cell_m)
      .def_readwrite("background_tree_density",
                     &GeneratorSpec::background_tree_density)
      .def_readwrite("background_tree_min_m", &GeneratorSpec::background_tree_min_m)
      .def_readwrite("background_tree_max_m", &GeneratorSpec::background_tree_max_m)
      .def_readwrite("nt_paper_distance_m", &GeneratorSpec::nt_paper_distance_m)
      .def_readwrite("papers_per_tag", &GeneratorSpec::papers_per_tag);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("name", &Scenario::name)
      .def_readwrite("row_length_m", &Scenario::row_length_m)
      .def_readwrite("v_p", &Scenario::v_p)
      .def_readwrite("boom_span_m", &Scenario::boom_span_m)
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("zones", &Scenario::zones)
      .def_readwrite("papers", &Scenario::papers)
      .def("duration_s", &Scenario::duration_s)
      .def("frame_count", &Scenario::frame_count)
      .def("frame_interval_s", &Scenario::frame_interval_s);

  m.def("generate_scenario", &generate_scenario, py::arg("spec"), py::arg("zones"),
        py::arg("v_p"), py::arg("seed"), py::arg("name"),
        py::arg("gate_threshold") = 0.10);
  m.def("builtin_naju_default", &builtin_naju_default, py::arg("seed") = 1);
  m.def("load_scenario", &load_scenario);
  m.def("save_scenario", &save_scenario);
  m.def("dump_scenario", &dump_scenario);
  m.def("resolve_scenario", &resolve_scenario);
  m.def("materialize_scenario", &materialize_scenario,
        py::call_guard<py::gil_scoped_release>());
  m.def("validate_scenario", &validate_scenario);
  m.def("synthesize_frame", [](const Scenario& s, int index) {
    SegmentedFrame seg;
    DepthFrame depth;
    synthesize_frame(s, index, seg, depth);
    return py::make_tuple(seg, depth);
  });

  py::class_<PaperResult>(m, "PaperResult")
      .def_readonly("paper_index", &PaperResult::paper_index)
      .def_readonly("tag", &PaperResult::tag)
      .def_readonly("rp", &PaperResult::rp);

  py::class_<TrialResult>(m, "TrialResult")
      .def_readonly("mode", &TrialResult::mode)
      .def_readonly("seed", &TrialResult::seed)
      .def_readonly("papers", &TrialResult::papers)
      .def_readonly("volume_l", &TrialResult::volume_l)
      .def_readonly("trace", &TrialResult::trace)
      .def_readonly("field", &TrialResult::field);

  py::class_<TagStats>(m, "TagStats")
      .def_readonly("mean", &TagStats::mean)
      .def_readonly("sd", &TagStats::sd)
      .def_readonly("max", &TagStats::max)
      .def_readonly("min", &TagStats::min)
      .def_readonly("n", &TagStats::n);

  py::class_<ModeReport>(m, "ModeReport")
      .def_readonly("mode", &ModeReport::mode)
      .def_readonly("target", &ModeReport::target)
      .def_readonly("no_target", &ModeReport::no_target)
      .def_readonly("volume_l", &ModeReport::volume_l)
      .def_readonly("reduction_pct", &ModeReport::reduction_pct);

  py::class_<Report>(m, "Report")
      .def_readonly("modes", &Report::modes)
      .def("mode", &Report::mode, py::return_value_policy::reference_internal)
      .def("self_consistent", &Report::self_consistent, py::arg("tol") = 1e-12)
      .def("csv", &report_csv);

  m.def("summarize_values", &summarize_values);
  m.def("run_trial", &run_trial, py::arg("scenario"), py::arg("mode"),
        py::arg("config"), py::arg("seed"), py::arg("keep_trace") = false,
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "compare_controls",
      [](const Scenario& scenario, const std::vector<std::uint64_t>& seeds,
         const AppConfig& config, int jobs) {
        py::gil_scoped_release release;
        return compare_controls(scenario, seeds, config, jobs);
      },
      py::arg("scenario"), py::arg("seeds"), py::arg("config"), py::arg("jobs") = 0);

  // --- configuration and CLI-level commands ---
  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("dt_averaged_s", &SimConfig::dt_averaged_s)
      .def_readwrite("dt_waveform_s", &SimConfig::dt_waveform_s)
      .def_readwrite("pwm_mode", &SimConfig::pwm_mode)
      .def_readwrite("pwm_frequency_hz", &SimConfig::pwm_frequency_hz)
      .def_readwrite("n_zones", &SimConfig::n_zones)
      .def_readwrite("axis", &SimConfig::axis)
      .def_readwrite("distance_stat", &SimConfig::distance_stat)
      .def_readwrite("max_depth_m", &SimConfig::max_depth_m)
      .def_readwrite("nt_bleed_tolerance_pct", &SimConfig::nt_bleed_tolerance_pct);

  py::class_<AppConfig>(m, "AppConfig")
      .def(py::init<>())
      .def_readwrite("controller", &AppConfig::controller)
      .def_readwrite("valve", &AppConfig::valve)
      .def_readwrite("plume", &AppConfig::plume)
      .def_readwrite("sim", &AppConfig::sim)
      .def_readwrite("calibration", &AppConfig::calibration)
      .def_readwrite("scenario", &AppConfig::scenario)
      .def_readwrite("out_dir", &AppConfig::out_dir)
      .def_readwrite("seeds", &AppConfig::seeds)
      .def_readwrite("jobs", &AppConfig::jobs)
      .def("validate", &AppConfig::validate);

  m.def("default_config", &default_config);
  m.def("load_config_file", &load_config_file, py::arg("path"), py::arg("base"));
  m.def("dump_config", &dump_config);
  m.def("parse_seed_list", &parse_seed_list);

  m.def("cmd_run", &cmd_run, py::arg("config"), py::arg("mode"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("cmd_compare", &cmd_compare, py::call_guard<py::gil_scoped_release>());
  m.def("cmd_calibrate", &cmd_calibrate, py::arg("config"), py::arg("which"),
        py::call_guard<py::gil_scoped_release>());
}
