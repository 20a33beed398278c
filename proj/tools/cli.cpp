#include "cli.hpp"

#include "fibrebend/config.hpp"
#include "fibrebend/csv.hpp"
#include "fibrebend/deck.hpp"
#include "fibrebend/errors.hpp"
#include "fibrebend/fiberpath.hpp"
#include "fibrebend/geometry.hpp"
#include "fibrebend/materials.hpp"
#include "fibrebend/mechanics.hpp"
#include "fibrebend/plot.hpp"
#include "fibrebend/postprocess.hpp"
#include "fibrebend/schedule.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <future>
#include <ostream>
#include <thread>

namespace fibrebend::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

const std::set<std::string> kSections = {"", "geometry", "device", "winding", "schedule", "model", "corridor"};

struct Options {
  std::string out;
  std::string config;
  std::string material_db;
  std::vector<std::string> overrides;

  // sweep
  std::vector<int> turns{9, 18, 30, 50, 100};
  std::vector<std::string> styles{"SH", "DH"};
  int jobs = 0;

  // analyze
  std::string nodes;
  std::string displacements;
  long long tip_node = -1;
  int pairs = 12;
  double spacing = 2.5;
  std::string bench_log;

  // calibrate
  std::string anchors;
};

/// State shared by every subcommand: resolved inputs and the list of files
/// written, which ends up in the manifest.
class Run {
 public:
  Run(std::string command, std::vector<std::string> args, const Options& opt, std::ostream& log)
      : command_(std::move(command)), args_(std::move(args)), log(log) {
    out_dir = opt.out.empty() ? default_output_dir() : fs::path(opt.out);
    if (!opt.config.empty()) {
      config = parse_config(read_input(opt.config));
    }
    for (const auto& o : opt.overrides) apply_override(o);
    for (const auto& [name, kv] : config) {
      if (!kSections.count(name)) throw ValidationError("config: unknown section [" + name + "]");
      if (name.empty() && !kv.empty()) throw ValidationError("config: key '" + kv.begin()->first + "' outside a section");
    }
    if (!opt.material_db.empty()) {
      const std::string text = read_input(opt.material_db);
      const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
      if (j.is_discarded()) throw ValidationError("material database '" + opt.material_db + "' is not valid JSON");
      materials = MaterialLibrary::from_json(j);
    }
  }

  const KeyValues& section(const std::string& name) const {
    static const KeyValues empty;
    auto it = config.find(name);
    return it == config.end() ? empty : it->second;
  }
  bool has_section(const std::string& name) const { return config.count(name) != 0; }

  std::string read_input(const std::string& path) {
    std::string text = read_text(path);
    inputs_.push_back({path, sha256_hex(text)});
    return text;
  }

  void write(const std::string& name, const std::string& text) {
    write_text(out_dir / name, text);
    record(name, text);
  }

  /// Lists a file some other writer produced.
  void record(const std::string& name, const std::string& text) { outputs_.push_back({name, sha256_hex(text)}); }

  void write_manifest(const std::string& status, const std::string& message) {
    nlohmann::json m;
    m["tool"] = "fibrebend";
    m["version"] = kVersion;
    m["command"] = command_;
    m["arguments"] = args_;
    m["libraries"] = {
        {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
        {"fmt", FMT_VERSION},
        {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                      NLOHMANN_JSON_VERSION_PATCH)},
    };
    nlohmann::json ins = nlohmann::json::array();
    for (const auto& [p, h] : inputs_) ins.push_back({{"path", p}, {"sha256", h}});
    m["inputs"] = ins;
    auto outs = outputs_;
    std::sort(outs.begin(), outs.end());
    nlohmann::json os = nlohmann::json::array();
    for (const auto& [p, h] : outs) os.push_back({{"path", p}, {"sha256", h}});
    m["outputs"] = os;
    m["config"] = config;
    m["materials"] = materials.to_json();
    m["status"] = status;
    if (!message.empty()) m["message"] = message;
    write_text(out_dir / "manifest.json", m.dump(2) + "\n");
  }

  Config config;
  MaterialLibrary materials = MaterialLibrary::defaults();
  fs::path out_dir;

 private:
  void apply_override(const std::string& o) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ValidationError("--set expects section.key=value, got '" + o + "'");
    config[o.substr(0, dot)][o.substr(dot + 1, eq - dot - 1)] = o.substr(eq + 1);
  }

  std::string command_;
  std::vector<std::string> args_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;

 public:
  std::ostream& log;
};

// ---------------------------------------------------------------------------
// Shared setup

ActuatorSpec build_spec(const Run& run) {
  ActuatorSpec spec = build_from_kv(run.section("geometry"));
  if (run.has_section("device")) {
    const DeviceSpec d = device_from_kv(run.section("device"));
    spec = compose_device(spec, d, d.embedded_payload.has_value());
  }
  return spec;
}

WindingSpec build_winding(const Run& run, const ActuatorSpec& spec) {
  WindingSpec w = winding_from_kv(run.section("winding"));
  if (spec.kind == GeometryKind::B && !run.section("winding").count("chirality"))
    w.chirality = spec.chambers.at(w.chamber_index).chirality;
  return w;
}

/// One path per chamber; the second chamber of Geometry B carries the
/// mirror image of the first.
std::vector<FiberPath> build_paths(const ActuatorSpec& spec, const WindingSpec& w) {
  std::vector<FiberPath> paths{generate_helix(spec, w)};
  if (spec.chambers.size() == 2) paths.push_back(mirror_path(paths.front()));
  return paths;
}

Series column_series(const std::string& label, const std::vector<double>& x, const std::vector<double>& y) {
  return {label, x, y};
}

Series trajectory_series(const std::string& label, const Eigen::Matrix3Xd& tips) {
  Series s{label, {}, {}};
  for (Eigen::Index i = 0; i < tips.cols(); ++i) {
    s.x.push_back(tips(2, i));
    s.y.push_back(tips(1, i));
  }
  return s;
}

void write_result_plots(Run& run, const SolveResult& r, const std::string& label) {
  if (r.pressures.empty()) return;
  run.write("angle_pressure.svg", render_plot(PlotKind::AnglePressure, {column_series(label, r.pressures, r.theta)},
                                              "Bending angle"));
  run.write("expansion_pressure.svg",
            render_plot(PlotKind::ExpansionPressure, {column_series(label, r.pressures, r.radial_expansion)},
                        "Radial expansion"));
  run.write("trajectory.svg", render_plot(PlotKind::Trajectory, {trajectory_series(label, r.tip_xyz)}, "Tip trajectory"));
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_design(Run& run) {
  const ActuatorSpec spec = build_spec(run);
  run.write("spec.json", to_json(spec).dump(2) + "\n");
  run.write("cross_section.csv", cross_section_csv(spec));
  run.log << fmt::format("geometry {}: chamber area {:.4f} mm^2, volume {:.2f} mm^3, min wall {:.3f} mm\n",
                         spec.kind == GeometryKind::A ? "A" : "B", spec.metrics.cross_section_area,
                         spec.metrics.nominal_volume, spec.metrics.min_wall());
  for (const auto& w : spec.warnings) run.log << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_wind(Run& run) {
  const ActuatorSpec spec = build_spec(run);
  const WindingSpec w = build_winding(run, spec);
  const std::vector<FiberPath> paths = build_paths(spec, w);
  nlohmann::json summary = nlohmann::json::array();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::string name = paths.size() == 1 ? "fiber.csv" : fmt::format("fiber_{}.csv", i + 1);
    run.write(name, fiber_csv(paths[i]));
    const PathMetrics m = path_metrics(paths[i]);
    const int crossings = crossing_count(paths[i]);
    summary.push_back({{"file", name},
                       {"style", to_string(paths[i].style)},
                       {"turns", paths[i].turns},
                       {"chirality", to_string(paths[i].chirality)},
                       {"pitch_mm", m.pitch},
                       {"total_length_mm", m.total_length},
                       {"turn_density_per_mm", m.turn_density},
                       {"crossings", crossings}});
    run.log << fmt::format("{}: {} {} turns {}, pitch {:.4f} mm, length {:.2f} mm, {} crossings\n", name,
                           to_string(paths[i].style), paths[i].turns, to_string(paths[i].chirality), m.pitch,
                           m.total_length, crossings);
  }
  run.write("wind.json", summary.dump(2) + "\n");
  return kExitOk;
}

int cmd_simulate(Run& run) {
  const ActuatorSpec spec = build_spec(run);
  const WindingSpec w = build_winding(run, spec);
  const PressureSchedule schedule = schedule_from_kv(run.section("schedule"));
  const SegmentModel seg = segment_model_from_kv(run.section("model"));
  const std::string label = fmt::format("{} {}", w.turns, to_string(w.style));
  SolveResult r;
  try {
    r = solve_quasi_static(spec, w, run.materials, schedule, seg);
  } catch (const InstabilityError& e) {
    run.write("result.csv", solve_csv(e.partial()));
    write_result_plots(run, e.partial(), label);
    throw;
  }
  run.write("result.csv", solve_csv(r));
  write_result_plots(run, r, label);
  const std::size_t nf = forward_count(schedule);
  if (nf < r.pressures.size()) {
    AngleSeries fwd, bwd;
    fwd.pressures.assign(r.pressures.begin(), r.pressures.begin() + static_cast<std::ptrdiff_t>(nf));
    fwd.theta.assign(r.theta.begin(), r.theta.begin() + static_cast<std::ptrdiff_t>(nf));
    bwd.pressures.assign(r.pressures.begin() + static_cast<std::ptrdiff_t>(nf) - 1, r.pressures.end());
    bwd.theta.assign(r.theta.begin() + static_cast<std::ptrdiff_t>(nf) - 1, r.theta.end());
    const HysteresisResult h = hysteresis_ratio(fwd, bwd);
    run.write("hysteresis.csv", hysteresis_csv(h));
    run.write("hysteresis.svg", render_plot(PlotKind::Hysteresis,
                                            {column_series("forward", fwd.pressures, fwd.theta),
                                             column_series("backward", bwd.pressures, bwd.theta)},
                                            "Hysteresis"));
  }
  const std::size_t last = r.pressures.size() - 1;
  run.log << fmt::format("{} at {:.2f} kPa: theta {:.2f} deg, expansion {:.3f} mm, twist {:.2f} %\n", label,
                         r.pressures[last], r.theta[last], r.radial_expansion[last], r.twist_pct[last]);
  return kExitOk;
}

struct SweepCase {
  HelixStyle style;
  int turns;
  std::string label;
  SolveResult result;
  std::optional<double> critical;
  std::exception_ptr error;
};

int cmd_sweep(Run& run, const Options& opt) {
  const ActuatorSpec spec = build_spec(run);
  const WindingSpec base = build_winding(run, spec);
  const PressureSchedule schedule = schedule_from_kv(run.section("schedule"));
  const SegmentModel seg = segment_model_from_kv(run.section("model"));
  if (opt.turns.empty() || opt.styles.empty()) throw ValidationError("sweep needs at least one style and turn count");

  std::vector<SweepCase> cases;
  for (const auto& s : opt.styles) {
    const HelixStyle style = helix_style_from_string(s);
    for (int n : opt.turns) {
      if (n < 1 || n > 1000) throw ValidationError(fmt::format("turns must be in [1, 1000], got {}", n));
      cases.push_back({style, n, fmt::format("{}_{:03d}", to_string(style), n), {}, std::nullopt, nullptr});
    }
  }
  fs::create_directories(run.out_dir / "sweep");

  // Workers pull case indices; each writes only its own CSV.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      SweepCase& c = cases[i];
      WindingSpec w = base;
      w.style = c.style;
      w.turns = c.turns;
      try {
        c.result = solve_quasi_static(spec, w, run.materials, schedule, seg);
        write_text(run.out_dir / "sweep" / (c.label + ".csv"), solve_csv(c.result));
      } catch (const InstabilityError& e) {
        c.result = e.partial();
        c.critical = e.critical_pressure();
        write_text(run.out_dir / "sweep" / (c.label + ".partial.csv"), solve_csv(c.result));
      } catch (...) {
        c.error = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t jobs = std::min<std::size_t>(cases.size(), opt.jobs > 0 ? static_cast<std::size_t>(opt.jobs) : hw);
  std::vector<std::future<void>> pool;
  for (std::size_t j = 0; j < jobs; ++j) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();

  // Ordered merge.
  std::string summary = "configuration,style,turns,pressure_kPa,theta_deg,expansion_mm,twist_pct,status,critical_kPa\n";
  std::vector<Series> series;
  int failures = 0;
  for (auto& c : cases) {
    if (c.error) std::rethrow_exception(c.error);
    const std::string file = c.label + (c.critical ? ".partial.csv" : ".csv");
    run.record("sweep/" + file, solve_csv(c.result));
    const auto& r = c.result;
    if (r.pressures.empty()) {
      summary += fmt::format("{} turns {} unstable,{},{},,,,,unstable,{:.2f}\n", c.turns, to_string(c.style),
                             to_string(c.style), c.turns, *c.critical);
      ++failures;
      continue;
    }
    const std::size_t k = r.pressures.size() - 1;
    const std::string status = c.critical ? "unstable" : "ok";
    summary += fmt::format("{} turns {} at {:g} kPa,{},{},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", c.turns,
                           to_string(c.style), r.pressures[k], to_string(c.style), c.turns, r.pressures[k], r.theta[k],
                           r.radial_expansion[k], r.twist_pct[k], status,
                           c.critical ? fmt::format("{:.2f}", *c.critical) : std::string());
    series.push_back(column_series(fmt::format("{} {}{}", c.turns, to_string(c.style), c.critical ? " (unstable)" : ""),
                                   r.pressures, r.theta));
    if (c.critical) ++failures;
    run.log << fmt::format("{:>4} {}  theta {:7.2f} deg at {:6.2f} kPa  {}\n", c.turns, to_string(c.style), r.theta[k],
                           r.pressures[k],
                           c.critical ? fmt::format("unstable above {:.2f} kPa", *c.critical) : std::string("ok"));
  }
  run.write("summary.csv", summary);
  if (!series.empty()) run.write("summary.svg", render_plot(PlotKind::AnglePressure, series, "Sweep"));
  run.log << fmt::format("{} configurations, {} reported unstable\n", cases.size(), failures);
  return kExitOk;
}

int cmd_analyze(Run& run, const Options& opt) {
  const bool fem = !opt.nodes.empty() || !opt.displacements.empty();
  const bool bench = !opt.bench_log.empty();
  if (fem == bench) throw ValidationError("analyze needs either --nodes/--displacements or --bench-log");
  if (bench) {
    const AngleSeries record = load_bench_log(run.read_input(opt.bench_log));
    const auto [fwd, bwd] = split_legs(record);
    const HysteresisResult h = hysteresis_ratio(fwd, bwd);
    run.write("hysteresis.csv", hysteresis_csv(h));
    run.write("hysteresis.svg", render_plot(PlotKind::Hysteresis,
                                            {column_series("forward", fwd.pressures, fwd.theta),
                                             column_series("backward", bwd.pressures, bwd.theta)},
                                            "Hysteresis"));
    run.log << fmt::format("hysteresis ratio {:.4f} %, loop area ratio {:.4f} %\n", h.ratio_pct, h.loop_area_ratio_pct);
    return kExitOk;
  }
  if (opt.nodes.empty() || opt.displacements.empty()) throw ValidationError("analyze needs both --nodes and --displacements");
  if (opt.tip_node < 0) throw ValidationError("analyze needs --tip-node");
  const ActuatorSpec spec = build_spec(run);
  const PressureSchedule schedule = schedule_from_kv(run.section("schedule"));
  const std::string nodes = run.read_input(opt.nodes);
  const std::string disp = run.read_input(opt.displacements);
  const HistoryMap histories = load_histories(nodes, disp);
  const auto rows = analyze_histories(histories, spec, opt.tip_node, schedule, opt.pairs, opt.spacing);
  run.write("analysis.csv", analysis_csv(rows));
  Series angle{"theta", {}, {}}, expansion{"mean expansion", {}, {}};
  for (const auto& r : rows) {
    angle.x.push_back(r.pressure);
    angle.y.push_back(r.theta);
    expansion.x.push_back(r.pressure);
    expansion.y.push_back(r.mean_expansion);
  }
  run.write("angle_pressure.svg", render_plot(PlotKind::AnglePressure, {angle}, "Bending angle"));
  run.write("expansion_pressure.svg", render_plot(PlotKind::ExpansionPressure, {expansion}, "Radial expansion"));
  run.log << fmt::format("{} samples, final theta {:.4f} deg, final mean expansion {:.4f} mm\n", rows.size(),
                         rows.back().theta, rows.back().mean_expansion);
  return kExitOk;
}

int cmd_export_deck(Run& run) {
  const ActuatorSpec spec = build_spec(run);
  const WindingSpec w = build_winding(run, spec);
  const PressureSchedule schedule = schedule_from_kv(run.section("schedule"));
  const FemDeck deck = emit_deck(spec, build_paths(spec, w), run.materials, schedule);
  run.write("model.deck", serialize(deck));
  run.log << fmt::format("deck: {} surfaces, {} materials, {} fibre polylines, {} loads\n", deck.surfaces.size(),
                         deck.materials.size(), deck.fibres.empty() ? 0 : deck.fibres.front().polylines.size(),
                         deck.loads.size());
  return kExitOk;
}

AnchorQuantity quantity_from_string(const std::string& s) {
  if (s == "theta") return AnchorQuantity::Theta;
  if (s == "expansion") return AnchorQuantity::Expansion;
  if (s == "twist") return AnchorQuantity::Twist;
  throw ValidationError("anchor quantity must be theta, expansion or twist, got '" + s + "'");
}

bool flag_cell(const std::string& s) {
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no" || s.empty()) return false;
  throw ValidationError("expected a boolean cell, got '" + s + "'");
}

int cmd_calibrate(Run& run, const Options& opt) {
  std::vector<Anchor> anchors = default_anchors();
  if (!opt.anchors.empty()) {
    const CsvTable t = parse_csv(run.read_input(opt.anchors));
    const auto cs = t.column("style"), cn = t.column("turns"), cd = t.column("device"), cp = t.column("payload"),
               ch = t.column("halve_fibre"), cpr = t.column("pressure_kPa"), ct = t.column("target"),
               cq = t.column("quantity");
    anchors.clear();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      Anchor a;
      a.config.style = helix_style_from_string(t.rows[r][cs]);
      a.config.turns = static_cast<int>(t.integer(r, cn));
      a.config.device = flag_cell(t.rows[r][cd]);
      a.config.payload = flag_cell(t.rows[r][cp]);
      a.config.halve_fibre = flag_cell(t.rows[r][ch]);
      a.pressure = t.number(r, cpr);
      a.target = t.number(r, ct);
      a.quantity = quantity_from_string(t.rows[r][cq]);
      anchors.push_back(a);
    }
  }
  const ActuatorSpec base = build_from_kv(run.section("geometry"));
  const SegmentModel seg = segment_model_from_kv(run.section("model"));
  const CalibrationResult cal = calibrate(anchors, base, run.materials, seg);

  static const char* qnames[] = {"theta", "expansion", "twist"};
  nlohmann::json j;
  j["constants"] = {{"n0", cal.constants.n0},
                    {"k_twist", cal.constants.k_twist},
                    {"expansion_scale", cal.constants.expansion_scale},
                    {"device_body_scale", cal.constants.device_body_scale},
                    {"instability_fraction", cal.constants.instability_fraction}};
  j["evaluations"] = cal.evaluations;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    rows.push_back({{"config", anchors[i].config.label()},
                    {"pressure_kPa", anchors[i].pressure},
                    {"quantity", qnames[static_cast<int>(anchors[i].quantity)]},
                    {"target", anchors[i].target},
                    {"predicted", cal.predicted[i]},
                    {"residual", cal.residuals[i]}});
    run.log << fmt::format("{:<22} {:>6.1f} kPa {:<9} target {:8.3f} predicted {:8.3f}\n", anchors[i].config.label(),
                           anchors[i].pressure, qnames[static_cast<int>(anchors[i].quantity)], anchors[i].target,
                           cal.predicted[i]);
  }
  j["anchors"] = rows;
  run.write("calibration.json", j.dump(2) + "\n");
  run.write("calibration.ini", fmt::format("[model]\nn0 = {:.17g}\nk_twist = {:.17g}\nexpansion_scale = {:.17g}\n"
                                           "device_body_scale = {:.17g}\n",
                                           cal.constants.n0, cal.constants.k_twist, cal.constants.expansion_scale,
                                           cal.constants.device_body_scale));
  run.log << fmt::format("{} model evaluations\n", cal.evaluations);
  return kExitOk;
}

int cmd_workspace(Run& run) {
  const ActuatorSpec spec = build_spec(run);
  const WindingSpec w = build_winding(run, spec);
  const PressureSchedule schedule = schedule_from_kv(run.section("schedule"));
  const SegmentModel seg = segment_model_from_kv(run.section("model"));
  KvReader cr(run.section("corridor"), "corridor");
  Corridor corridor;
  corridor.radius = cr.get_double("radius", corridor.radius);
  corridor.length = cr.get_double("length", corridor.length);
  cr.finish();
  const WorkspaceResult ws = workspace(spec, w, run.materials, schedule, seg, corridor);
  run.write("workspace.csv", workspace_csv(ws));
  nlohmann::json j = {{"max_reach_mm", ws.max_reach},
                      {"swept_area_mm2", ws.swept_area},
                      {"path_length_mm", ws.path_length},
                      {"fits_corridor", ws.fits},
                      {"corridor", {{"radius_mm", corridor.radius}, {"length_mm", corridor.length}}}};
  if (ws.failure_pressure) j["instability_kPa"] = *ws.failure_pressure;
  run.write("workspace.json", j.dump(2) + "\n");
  if (ws.tips.cols() > 0)
    run.write("trajectory.svg", render_plot(PlotKind::Trajectory, {trajectory_series("tip", ws.tips)}, "Workspace"));
  run.log << fmt::format("reach {:.2f} mm, swept area {:.1f} mm^2, {} the corridor\n", ws.max_reach, ws.swept_area,
                         ws.fits ? "fits" : "leaves");
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design, simulate and post-process fibre-reinforced bending actuators.", "fibrebend"};
  app.set_version_flag("--version", kVersion);
  Options opt;
  app.add_option("-o,--out", opt.out, "Output directory (default $FIBREBEND_OUT, else ./out)");
  app.add_option("-c,--config", opt.config, "Config file with [geometry] [device] [winding] [schedule] [model] [corridor]");
  app.add_option("--material-db", opt.material_db, "JSON material database overriding the defaults");
  app.add_option("-s,--set", opt.overrides, "Config override section.key=value (repeatable)")->allow_extra_args(false);
  app.require_subcommand(1);

  app.add_subcommand("design", "Build the cross-section and report chamber metrics");
  app.add_subcommand("wind", "Generate fibre paths");
  app.add_subcommand("simulate", "Quasi-static bending over the pressure schedule");
  auto* sweep = app.add_subcommand("sweep", "Solve SH/DH windings over several turn counts");
  sweep->add_option("--turns", opt.turns, "Turn counts")->delimiter(',');
  sweep->add_option("--styles", opt.styles, "Helix styles")->delimiter(',');
  sweep->add_option("-j,--jobs", opt.jobs, "Parallel workers (default: hardware threads)");
  auto* analyze = app.add_subcommand("analyze", "Angle, expansion or hysteresis from recorded data");
  analyze->add_option("--nodes", opt.nodes, "Node sidecar CSV node_id,x0,y0,z0");
  analyze->add_option("--displacements", opt.displacements, "History CSV node_id,t,ux_mm,uy_mm,uz_mm");
  analyze->add_option("--tip-node", opt.tip_node, "Id of the tip node");
  analyze->add_option("--pairs", opt.pairs, "Radial node pairs");
  analyze->add_option("--spacing", opt.spacing, "Axial station spacing (mm)");
  analyze->add_option("--bench-log", opt.bench_log, "Bench log CSV pressure_kPa,theta_deg,timestamp");
  app.add_subcommand("export-deck", "Write the neutral FEM exchange deck");
  auto* cal = app.add_subcommand("calibrate", "Fit model constants to anchors");
  cal->add_option("--anchors", opt.anchors,
                  "Anchor CSV style,turns,device,payload,halve_fibre,pressure_kPa,target,quantity");
  app.add_subcommand("workspace", "Tip trajectory, reach and corridor check");

  if (args.empty()) {
    err << app.help();
    return kExitValidation;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitValidation;
  }

  const CLI::App* sub = app.get_subcommands().front();
  std::unique_ptr<Run> run;
  try {
    run = std::make_unique<Run>(sub->get_name(), args, opt, out);
    const std::string& name = sub->get_name();
    int code = kExitOk;
    if (name == "design") code = cmd_design(*run);
    else if (name == "wind") code = cmd_wind(*run);
    else if (name == "simulate") code = cmd_simulate(*run);
    else if (name == "sweep") code = cmd_sweep(*run, opt);
    else if (name == "analyze") code = cmd_analyze(*run, opt);
    else if (name == "export-deck") code = cmd_export_deck(*run);
    else if (name == "calibrate") code = cmd_calibrate(*run, opt);
    else if (name == "workspace") code = cmd_workspace(*run);
    run->write_manifest("ok", "");
    return code;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InstabilityError& e) {
    err << fmt::format("simulation aborted: instability above {:.2f} kPa (requested {:.2f} kPa)\n",
                       e.critical_pressure(), e.failed_pressure());
    if (run) run->write_manifest("failed", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    try {
      if (run) run->write_manifest("failed", e.what());
    } catch (const std::exception&) {
    }
    return kExitRuntime;
  }
}

}  // namespace fibrebend::cli
