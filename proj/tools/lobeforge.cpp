// Command-line front end: design generation, batch indentation runs,
// bistability and reopening reports, and statistical analysis with plots.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lobeforge/analysis/anova.hpp"
#include "lobeforge/analysis/shapiro.hpp"
#include "lobeforge/analysis/svg_plots.hpp"
#include "lobeforge/analysis/trace_csv.hpp"
#include "lobeforge/analysis/tukey.hpp"
#include "lobeforge/config/run_config.hpp"
#include "lobeforge/core/rng.hpp"
#include "lobeforge/geometry/stl_io.hpp"
#include "lobeforge/protocol/indentation.hpp"
#include "lobeforge/protocol/reopening.hpp"
#include "lobeforge/protocol/slenderness.hpp"
#include "lobeforge/protocol/transitions.hpp"
#include "lobeforge/solver/bistability.hpp"
#include "lobeforge/solver/opening_angle.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int g_verbosity = 0;

int read_verbosity_env() {
  const char* env = std::getenv("LOBEFORGE_LOG");
  if (env == nullptr) return 0;
  std::string v(env);
  if (v == "debug" || v == "2") return 2;
  if (v == "info" || v == "1") return 1;
  return 0;
}

std::mutex g_log_mutex;

void log_info(const std::string& message) {
  if (g_verbosity < 1) return;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "[lobeforge] " << message << "\n";
}

void log_debug(const std::string& message) {
  if (g_verbosity < 2) return;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "[lobeforge] " << message << "\n";
}

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::string input = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  std::string model;
  std::string thickness;
  std::string direction;
};

lobeforge::RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return lobeforge::RunConfig{};
  std::ifstream in(path);
  lobeforge::require(in.good(), lobeforge::ErrorCode::IoFailure,
                     "cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    lobeforge::fail(lobeforge::ErrorCode::InvalidConfig, path + ": " + e.what());
  }
  return lobeforge::parse_run_config(j);
}

// The manifest of designs a command operates on: the config batch (or its
// single design), or the four presets when no config is given, narrowed by
// the --model and --thickness filters.
std::vector<lobeforge::DesignConfig> select_designs(const lobeforge::RunConfig& cfg,
                                                    bool config_given,
                                                    const CliOptions& o) {
  std::vector<lobeforge::DesignConfig> designs;
  if (config_given) {
    designs = cfg.batch.empty() ? std::vector<lobeforge::DesignConfig>{cfg.design}
                                : cfg.batch;
  } else {
    designs = lobeforge::preset_designs();
  }
  if (!o.model.empty()) {
    std::erase_if(designs, [&](const lobeforge::DesignConfig& d) {
      return d.family != o.model;
    });
  }
  if (!o.thickness.empty()) {
    auto want = o.thickness == "const" ? lobeforge::ThicknessField::Kind::Constant
                                       : lobeforge::ThicknessField::Kind::Taper;
    std::erase_if(designs, [&](const lobeforge::DesignConfig& d) {
      return d.thickness.kind != want;
    });
  }
  lobeforge::require(!designs.empty(), lobeforge::ErrorCode::InvalidConfig,
                     "no designs match the requested model/thickness filters");
  return designs;
}

std::vector<lobeforge::Direction> select_directions(const lobeforge::RunConfig& cfg,
                                                    const CliOptions& o) {
  using lobeforge::Direction;
  if (o.direction == "loading") return {Direction::Loading};
  if (o.direction == "snapping") return {Direction::Snapping};
  if (!cfg.batch_directions.empty()) return cfg.batch_directions;
  return {Direction::Loading, Direction::Snapping};
}

// All outputs go through a temp file and a rename so a crashed run never
// leaves a half-written artifact behind.
void write_text_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    lobeforge::require(out.good(), lobeforge::ErrorCode::IoFailure,
                       "cannot write " + tmp.string());
    out << content;
    lobeforge::require(out.good(), lobeforge::ErrorCode::IoFailure,
                       "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json_file(const fs::path& path, const ordered_json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

// NaN and infinity have no JSON representation; reports carry null there.
ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string sanitize_token(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '.')
               ? c
               : '_';
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ordered_json material_to_json(const lobeforge::Material& m) {
  ordered_json j;
  j["youngs_modulus"] = m.youngs_modulus;
  j["poisson"] = m.poisson;
  j["density"] = m.density;
  return j;
}

ordered_json mesh_to_json(const lobeforge::TriMesh& mesh) {
  ordered_json j;
  ordered_json positions = ordered_json::array();
  for (const auto& p : mesh.positions)
    positions.push_back(ordered_json::array({p.x(), p.y(), p.z()}));
  j["positions_mm"] = positions;
  j["thickness_mm"] = mesh.thickness;
  ordered_json triangles = ordered_json::array();
  for (const auto& t : mesh.triangles)
    triangles.push_back(ordered_json::array({t[0], t[1], t[2]}));
  j["triangles"] = triangles;
  j["tags"] = mesh.tags;
  j["apex"] = mesh.apex;
  return j;
}

ordered_json mesh_stats_json(const lobeforge::TriMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles)
    area += lobeforge::triangle_area(mesh.positions[t[0]], mesh.positions[t[1]],
                                     mesh.positions[t[2]]);
  double t_min = std::numeric_limits<double>::infinity();
  double t_max = 0.0;
  for (double t : mesh.thickness) {
    t_min = std::min(t_min, t);
    t_max = std::max(t_max, t);
  }
  lobeforge::SlendernessReport slender = lobeforge::slenderness(mesh);
  lobeforge::Configuration rest = lobeforge::configuration_from_mesh(mesh);

  ordered_json j;
  j["vertices"] = mesh.vertex_count();
  j["triangles"] = mesh.triangle_count();
  j["surface_area_mm2"] = area;
  j["volume_mm3"] = lobeforge::mesh_volume_estimate(mesh);
  j["thickness_min_mm"] = t_min;
  j["thickness_max_mm"] = t_max;
  j["mean_thickness_mm"] = slender.mean_thickness;
  j["hinge_to_apex_mm"] = slender.length;
  j["slenderness"] = slender.slenderness;
  j["rest_opening_angle_deg"] = lobeforge::opening_angle(mesh, rest);
  return j;
}

void export_stl_atomic(const lobeforge::TriMesh& mesh, const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  lobeforge::export_stl(mesh, tmp);
  fs::rename(tmp, path);
}

int cmd_generate(const CliOptions& o) {
  lobeforge::RunConfig cfg = load_run_config(o.config_path);
  auto designs = select_designs(cfg, !o.config_path.empty(), o);
  fs::create_directories(o.out_dir);
  for (const auto& d : designs) {
    log_info("generate " + d.name);
    lobeforge::TriMesh mesh = lobeforge::build_design_mesh(d);
    fs::path out(o.out_dir);
    export_stl_atomic(mesh, out / (d.name + ".stl"));
    write_json_file(out / (d.name + "_mesh.json"), mesh_to_json(mesh));
    ordered_json params;
    params["design"] = lobeforge::design_to_json(d);
    params["material"] = material_to_json(cfg.material);
    write_json_file(out / (d.name + "_params.json"), params);
    ordered_json meta;
    meta["print_settings"] = lobeforge::print_settings_to_json(cfg.print);
    meta["mesh"] = mesh_stats_json(mesh);
    write_json_file(out / (d.name + "_meta.json"), meta);
    std::cout << "generate " << d.name << ": wrote " << d.name << ".stl, "
              << d.name << "_mesh.json, " << d.name << "_params.json, " << d.name
              << "_meta.json\n";
  }
  return 0;
}

struct RunSpec {
  lobeforge::DesignConfig design;
  lobeforge::Direction direction = lobeforge::Direction::Loading;
  int rep = 1;
};

struct RunResult {
  std::string model;
  std::string direction;
  int rep = 1;
  bool ok = false;
  bool completed = false;
  bool snapped = false;
  bool has_transitions = false;
  double peak = std::numeric_limits<double>::quiet_NaN();
  double work = std::numeric_limits<double>::quiet_NaN();
  double x1 = std::numeric_limits<double>::quiet_NaN();
  double x2 = std::numeric_limits<double>::quiet_NaN();
  double snap_stroke = std::numeric_limits<double>::quiet_NaN();
  double final_angle = std::numeric_limits<double>::quiet_NaN();
  std::string note;
  std::string error;
  std::vector<lobeforge::TracePoint> trace;
  bool has_trace = false;
};

RunResult simulate_one(const RunSpec& spec, const lobeforge::RunConfig& cfg) {
  using lobeforge::Direction;
  RunResult r;
  r.model = spec.design.name;
  r.direction = lobeforge::direction_name(spec.direction);
  r.rep = spec.rep;
  try {
    const lobeforge::SimulationConfig& sim = cfg.simulation;
    // Every repetition gets its own stream derived from the batch seed and
    // the run identity, so results do not depend on scheduling order.
    std::uint64_t salt =
        fnv1a(r.model + "/" + r.direction + "/" + std::to_string(spec.rep));
    lobeforge::SplitMix64 rng = lobeforge::SplitMix64(sim.seed).fork(salt);

    lobeforge::DesignConfig d = spec.design;
    double dt = rng.uniform(-sim.thickness_variation, sim.thickness_variation);
    if (d.thickness.kind == lobeforge::ThicknessField::Kind::Constant) {
      d.thickness.value += dt;
    } else {
      d.thickness.tip += dt;
      d.thickness.base += dt;
    }

    lobeforge::TriMesh mesh = lobeforge::build_design_mesh(d);
    log_debug(r.model + "/" + r.direction + " rep " + std::to_string(spec.rep) +
              ": mesh with " + std::to_string(mesh.vertex_count()) + " vertices");
    lobeforge::ShellModel shell = lobeforge::build_shell(mesh, cfg.material);
    lobeforge::ProtocolOptions opt = sim.protocol;
    opt.apex_offset =
        spec.direction == Direction::Loading ? d.loading_apex_offset : 0.0;
    lobeforge::IndentationScene scene =
        lobeforge::build_indentation_scene(shell, spec.direction, opt);

    if (sim.guess_jitter > 0.0) {
      std::vector<bool> frozen(mesh.vertex_count(), false);
      for (int v : scene.holder.fixed) frozen[v] = true;
      for (int v : scene.indenter_vertices) frozen[v] = true;
      for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (frozen[v]) continue;
        for (int axis = 0; axis < 3; ++axis)
          scene.start(3 * v + axis) += rng.uniform(-sim.guess_jitter, sim.guess_jitter);
      }
    }

    lobeforge::IndentationTrace trace = lobeforge::run_indentation(scene, opt);
    r.trace.reserve(trace.samples.size());
    for (const auto& s : trace.samples)
      r.trace.push_back({s.time_s, s.stroke_mm, s.force_n});
    r.has_trace = true;
    r.completed = trace.completed;
    r.snapped = trace.snap_detected;
    r.snap_stroke = trace.snap_stroke;
    r.peak = lobeforge::peak_force(trace);
    r.final_angle = lobeforge::opening_angle(mesh, trace.final_state);
    try {
      lobeforge::TransitionPoints tp = lobeforge::detect_transition_points(
          trace, opt.force_threshold, opt.drop_fraction);
      r.x1 = tp.x1;
      r.x2 = tp.x2;
      r.work = lobeforge::compute_work(trace, tp.x1, tp.x2);
      r.has_transitions = true;
    } catch (const lobeforge::Error& e) {
      r.note = e.what();
    }
    if (!trace.completed) {
      r.error = "solver failed mid-sweep";
    } else if (!trace.snap_detected) {
      r.note = spec.direction == Direction::Loading && opt.apex_offset == 0.0
                   ? "no snap within the stroke range; retry with "
                     "design.loading_apex_offset moving the probe toward the hinge"
                   : "no snap within the stroke range";
    }
    r.ok = trace.completed;
  } catch (const lobeforge::Error& e) {
    r.error = e.what();
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

std::string csv_note(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return out;
}

int cmd_simulate(const CliOptions& o) {
  lobeforge::RunConfig cfg = load_run_config(o.config_path);
  if (o.seed_given) cfg.simulation.seed = o.seed;
  auto designs = select_designs(cfg, !o.config_path.empty(), o);
  auto directions = select_directions(cfg, o);
  int reps = cfg.simulation.repetitions;

  std::vector<RunSpec> specs;
  for (const auto& d : designs)
    for (auto dir : directions)
      for (int rep = 1; rep <= reps; ++rep) specs.push_back({d, dir, rep});

  std::vector<RunResult> results(specs.size());
  int workers = std::max(1, o.threads);
  workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), specs.size()));
  log_info("simulate: " + std::to_string(specs.size()) + " runs on " +
           std::to_string(workers) + " worker(s)");
  if (workers <= 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      results[i] = simulate_one(specs[i], cfg);
      log_info("run " + results[i].model + "/" + results[i].direction + " rep " +
               std::to_string(results[i].rep) + " done");
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= specs.size()) break;
          results[i] = simulate_one(specs[i], cfg);
          log_info("run " + results[i].model + "/" + results[i].direction +
                   " rep " + std::to_string(results[i].rep) + " done");
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  fs::create_directories(o.out_dir);
  fs::path out(o.out_dir);
  std::vector<lobeforge::Observation> observations;
  std::string summary_csv =
      "model,direction,repetition,completed,snapped,peak_force_n,work_mj,x1_mm,"
      "x2_mm,snap_stroke_mm,final_opening_angle_deg,note\n";
  int n_ok = 0;
  int n_snapped = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RunResult& r = results[i];
    if (r.has_trace) {
      fs::path trace_path = out / (r.model + "_" + r.direction + "_rep" +
                                   std::to_string(r.rep) + "_trace.csv");
      fs::path tmp = trace_path;
      tmp += ".tmp";
      lobeforge::write_force_trace(tmp.string(), r.trace);
      fs::rename(tmp, trace_path);
    }
    if (r.ok && r.has_transitions) {
      observations.push_back({r.model, r.direction, "peak_force_n", r.peak});
      observations.push_back({r.model, r.direction, "work_mj", r.work});
    }
    if (r.ok) ++n_ok;
    if (r.snapped) ++n_snapped;
    std::ostringstream row;
    row << r.model << ',' << r.direction << ',' << r.rep << ','
        << (r.completed ? 1 : 0) << ',' << (r.snapped ? 1 : 0) << ','
        << lobeforge::detail::format_number(r.peak) << ','
        << lobeforge::detail::format_number(r.work) << ','
        << lobeforge::detail::format_number(r.x1) << ','
        << lobeforge::detail::format_number(r.x2) << ','
        << lobeforge::detail::format_number(r.snap_stroke) << ','
        << lobeforge::detail::format_number(r.final_angle) << ','
        << csv_note(r.error.empty() ? r.note : r.error) << '\n';
    summary_csv += row.str();

    std::cout << "simulate " << r.model << "/" << r.direction << " rep " << r.rep
              << ": ";
    if (!r.error.empty()) {
      std::cout << "FAILED (" << r.error << ")\n";
      std::cerr << "error in run " << r.model << "/" << r.direction << " rep "
                << r.rep << ": " << r.error << "\n";
    } else if (r.snapped) {
      std::cout << "snap at " << r.snap_stroke << " mm, peak "
                << lobeforge::detail::format_number(r.peak) << " N\n";
    } else {
      std::cout << "no snap (" << r.note << ")\n";
    }
  }
  write_text_atomic(out / "summary.csv", summary_csv);
  {
    fs::path tmp = out / "observations.csv.tmp";
    lobeforge::write_observations(tmp.string(), observations);
    fs::rename(tmp, out / "observations.csv");
  }

  ordered_json js;
  js["seed"] = cfg.simulation.seed;
  js["repetitions"] = reps;
  ordered_json model_names = ordered_json::array();
  for (const auto& d : designs) model_names.push_back(d.name);
  js["models"] = model_names;
  ordered_json dir_names = ordered_json::array();
  for (auto dir : directions) dir_names.push_back(lobeforge::direction_name(dir));
  js["directions"] = dir_names;
  js["runs"] = specs.size();
  js["succeeded"] = n_ok;
  js["snapped"] = n_snapped;
  ordered_json per_model;
  for (const auto& d : designs) {
    ordered_json per_dir;
    for (auto dir : directions) {
      const char* dname = lobeforge::direction_name(dir);
      double peak_sum = 0.0, work_sum = 0.0;
      int peak_n = 0, work_n = 0, snap_n = 0, run_n = 0;
      for (const auto& r : results) {
        if (r.model != d.name || r.direction != dname) continue;
        ++run_n;
        if (r.snapped) ++snap_n;
        if (r.ok && std::isfinite(r.peak)) {
          peak_sum += r.peak;
          ++peak_n;
        }
        if (r.ok && r.has_transitions && std::isfinite(r.work)) {
          work_sum += r.work;
          ++work_n;
        }
      }
      ordered_json entry;
      entry["runs"] = run_n;
      entry["snap_rate"] = run_n > 0 ? static_cast<double>(snap_n) / run_n : 0.0;
      entry["mean_peak_force_n"] =
          peak_n > 0 ? json_number(peak_sum / peak_n) : ordered_json(nullptr);
      entry["mean_work_mj"] =
          work_n > 0 ? json_number(work_sum / work_n) : ordered_json(nullptr);
      per_dir[dname] = entry;
    }
    per_model[d.name] = per_dir;
  }
  js["per_model"] = per_model;
  ordered_json failures = ordered_json::array();
  for (const auto& r : results) {
    if (r.error.empty()) continue;
    ordered_json f;
    f["model"] = r.model;
    f["direction"] = r.direction;
    f["repetition"] = r.rep;
    f["error"] = r.error;
    failures.push_back(f);
  }
  js["failures"] = failures;
  write_json_file(out / "summary.json", js);

  return n_ok == static_cast<int>(results.size()) ? 0 : 1;
}

int cmd_bistable_check(const CliOptions& o) {
  lobeforge::RunConfig cfg = load_run_config(o.config_path);
  auto designs = select_designs(cfg, !o.config_path.empty(), o);
  fs::create_directories(o.out_dir);
  lobeforge::SolverOptions sopt = cfg.simulation.protocol.solver;
  if (o.threads > 1) sopt.threads = o.threads;

  ordered_json models = ordered_json::array();
  for (const auto& d : designs) {
    log_info("bistable-check " + d.name);
    lobeforge::TriMesh mesh = lobeforge::build_design_mesh(d);
    lobeforge::ShellModel shell = lobeforge::build_shell(mesh, cfg.material);
    lobeforge::Constraints holder = lobeforge::make_holder_constraints(
        mesh, cfg.simulation.protocol.holder_width);
    lobeforge::BistabilityReport rep =
        lobeforge::check_bistability(shell, holder, sopt);
    ordered_json m;
    m["model"] = d.name;
    m["bistable"] = rep.bistable();
    m["distinct"] = rep.distinct;
    m["both_stable"] = rep.both_stable;
    m["max_vertex_distance_mm"] = json_number(rep.max_vertex_distance);
    m["min_eigenvalue_a"] = json_number(rep.min_eigenvalue_a);
    m["min_eigenvalue_b"] = json_number(rep.min_eigenvalue_b);
    m["opening_angle_a_deg"] =
        json_number(lobeforge::opening_angle(mesh, rep.state_a.x));
    m["opening_angle_b_deg"] =
        json_number(lobeforge::opening_angle(mesh, rep.state_b.x));
    models.push_back(m);
    std::cout << "bistable-check " << d.name << ": "
              << (rep.bistable() ? "bistable" : "NOT bistable") << " (separation "
              << lobeforge::detail::format_number(rep.max_vertex_distance)
              << " mm, min eigenvalues "
              << lobeforge::detail::format_number(rep.min_eigenvalue_a) << " / "
              << lobeforge::detail::format_number(rep.min_eigenvalue_b) << ")\n";
  }
  ordered_json js;
  js["models"] = models;
  write_json_file(fs::path(o.out_dir) / "bistability.json", js);
  return 0;
}

int cmd_reopen(const CliOptions& o) {
  lobeforge::RunConfig cfg = load_run_config(o.config_path);
  auto designs = select_designs(cfg, !o.config_path.empty(), o);
  fs::create_directories(o.out_dir);
  lobeforge::SolverOptions sopt = cfg.simulation.protocol.solver;
  if (o.threads > 1) sopt.threads = o.threads;

  // Actuation ramps down from a fully developed contraction to zero; the
  // path classification tells smooth reopening from a two-phase snap.
  std::vector<double> schedule;
  for (int k = 10; k >= 0; --k) schedule.push_back(0.005 * k);

  bool any_failed = false;
  ordered_json models = ordered_json::array();
  for (const auto& d : designs) {
    log_info("reopen " + d.name);
    ordered_json m;
    m["model"] = d.name;
    try {
      lobeforge::TriMesh mesh = lobeforge::build_design_mesh(d);
      lobeforge::ShellModel shell = lobeforge::build_shell(mesh, cfg.material);
      lobeforge::Constraints holder = lobeforge::make_holder_constraints(
          mesh, cfg.simulation.protocol.holder_width);
      lobeforge::Configuration rest = lobeforge::configuration_from_mesh(mesh);
      lobeforge::EquilibriumState open_state =
          lobeforge::find_equilibrium(shell, rest, holder, sopt);
      lobeforge::require(open_state.converged, lobeforge::ErrorCode::DegenerateDesign,
                         d.name + ": as-built state does not relax");
      lobeforge::EquilibriumState closed_state =
          lobeforge::detail::relax_inverted(shell, open_state.x, holder, sopt);
      lobeforge::require(closed_state.converged,
                         lobeforge::ErrorCode::DegenerateDesign,
                         d.name + ": inverted state does not relax");
      double dist = 0.0;
      for (int v = 0; v < mesh.vertex_count(); ++v)
        dist = std::max(dist, (lobeforge::config_position(closed_state.x, v) -
                               lobeforge::config_position(open_state.x, v))
                                  .norm());
      lobeforge::require(dist > 0.5, lobeforge::ErrorCode::DegenerateDesign,
                         d.name + ": no distinct inverted state to reopen from");

      lobeforge::ContinuationOptions copts;
      copts.solver = sopt;
      lobeforge::ReopeningResult rr =
          lobeforge::run_reopening(shell, closed_state.x, holder, schedule, copts);
      lobeforge::SlendernessReport sl = lobeforge::slenderness(mesh);

      m["mode"] = lobeforge::reopening_mode_name(rr.mode);
      m["snap_count"] = rr.path.snap_count();
      m["completed"] = rr.path.completed;
      ordered_json slj;
      slj["hinge_to_apex_mm"] = sl.length;
      slj["mean_thickness_mm"] = sl.mean_thickness;
      slj["ratio"] = sl.slenderness;
      slj["threshold"] = sl.threshold;
      slj["snap_expected"] = sl.snap_expected;
      m["slenderness"] = slj;
      ordered_json samples = ordered_json::array();
      for (const auto& s : rr.path.samples) {
        ordered_json sj;
        sj["alpha"] = s.alpha;
        sj["opening_angle_deg"] = json_number(s.opening_angle_deg);
        sj["energy_mj"] = json_number(s.energy);
        sj["max_abs_strain"] = json_number(s.max_abs_strain);
        sj["snap"] = s.snap;
        samples.push_back(sj);
      }
      m["samples"] = samples;
      std::cout << "reopen " << d.name << ": " << lobeforge::reopening_mode_name(rr.mode)
                << " (" << rr.path.snap_count() << " snap(s), slenderness "
                << lobeforge::detail::format_number(sl.slenderness) << ")\n";
    } catch (const lobeforge::Error& e) {
      m["error"] = e.what();
      any_failed = true;
      std::cerr << "error in reopen " << d.name << ": " << e.what() << "\n";
    }
    models.push_back(m);
  }
  ordered_json js;
  js["models"] = models;
  write_json_file(fs::path(o.out_dir) / "reopening.json", js);
  return any_failed ? 1 : 0;
}

ordered_json anova_row_json(const lobeforge::AnovaRow& row, bool tested) {
  ordered_json j;
  j["ss"] = json_number(row.ss);
  j["df"] = row.df;
  j["ms"] = json_number(row.ms);
  if (tested) {
    j["f"] = json_number(row.f);
    j["p_value"] = json_number(row.p_value);
  }
  return j;
}

ordered_json anova_to_json(const lobeforge::AnovaTable& t) {
  ordered_json j;
  j["levels_a"] = t.levels_a;
  j["levels_b"] = t.levels_b;
  j["factor_a"] = anova_row_json(t.factor_a, true);
  j["factor_b"] = anova_row_json(t.factor_b, true);
  j["interaction"] = anova_row_json(t.interaction, true);
  j["residual"] = anova_row_json(t.residual, false);
  j["balanced"] = t.balanced;
  if (!t.weighting_note.empty()) j["weighting_note"] = t.weighting_note;
  return j;
}

struct AnalysisInputs {
  std::string observations_path;
  std::vector<fs::path> trace_files;
};

AnalysisInputs scan_analysis_inputs(const fs::path& input) {
  AnalysisInputs in;
  if (fs::is_directory(input)) {
    fs::path candidate = input / "observations.csv";
    if (fs::exists(candidate)) in.observations_path = candidate.string();
    for (const auto& entry : fs::directory_iterator(input)) {
      if (!entry.is_regular_file()) continue;
      std::string name = entry.path().filename().string();
      if (name.size() > 10 && name.ends_with("_trace.csv"))
        in.trace_files.push_back(entry.path());
    }
    std::sort(in.trace_files.begin(), in.trace_files.end());
  } else if (fs::exists(input)) {
    in.observations_path = input.string();
  } else {
    lobeforge::fail(lobeforge::ErrorCode::IoFailure,
                    "input path not found: " + input.string());
  }
  lobeforge::require(!in.observations_path.empty() || !in.trace_files.empty(),
                     lobeforge::ErrorCode::EmptyData,
                     "no observations.csv or *_trace.csv found in " + input.string());
  return in;
}

// Splits "<model>_<direction>_rep<k>_trace.csv" into its run identity.
// Returns false for trace files that do not follow the batch naming.
bool parse_trace_name(const fs::path& path, std::string* model,
                      std::string* direction, std::string* rep) {
  std::string stem = path.filename().string();
  stem = stem.substr(0, stem.size() - std::string("_trace.csv").size());
  std::vector<std::string> tokens;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= stem.size(); ++i) {
    if (i == stem.size() || stem[i] == '_') {
      tokens.push_back(stem.substr(start, i - start));
      start = i + 1;
    }
  }
  if (tokens.size() < 3) return false;
  *rep = tokens.back();
  *direction = tokens[tokens.size() - 2];
  if (*direction != "loading" && *direction != "snapping") return false;
  std::string m = tokens[0];
  for (std::size_t i = 1; i + 2 < tokens.size(); ++i) m += "_" + tokens[i];
  *model = m;
  return true;
}

int cmd_analyze(const CliOptions& o, bool with_stats) {
  AnalysisInputs in = scan_analysis_inputs(o.input);
  lobeforge::RunConfig cfg = load_run_config(o.config_path);
  fs::create_directories(o.out_dir);
  fs::path out(o.out_dir);

  std::vector<lobeforge::Observation> obs;
  if (!in.observations_path.empty())
    obs = lobeforge::read_observations(in.observations_path);

  std::set<std::string> metric_set;
  for (const auto& ob : obs) metric_set.insert(ob.metric);

  ordered_json report;
  // Input identity is recorded by file name only, so reports from reruns in
  // different directories stay byte-identical.
  report["observations_file"] = in.observations_path.empty()
                                    ? ordered_json(nullptr)
                                    : ordered_json(fs::path(in.observations_path)
                                                       .filename()
                                                       .string());
  report["observation_count"] = obs.size();

  std::vector<std::string> written;

  if (with_stats && !obs.empty()) {
    ordered_json metrics_json;
    for (const std::string& metric : metric_set) {
      ordered_json mj;

      std::vector<lobeforge::FactorSample> fsamples;
      for (const auto& ob : obs)
        if (ob.metric == metric) fsamples.push_back({ob.actuator, ob.direction, ob.value});
      try {
        mj["anova"] = anova_to_json(lobeforge::two_way_anova(fsamples));
      } catch (const lobeforge::Error& e) {
        mj["anova"] = ordered_json{{"error", e.what()}};
      }

      std::set<std::string> directions;
      for (const auto& ob : obs)
        if (ob.metric == metric) directions.insert(ob.direction);
      ordered_json tukey_json;
      for (const std::string& dir : directions) {
        std::vector<lobeforge::GroupSample> gsamples;
        for (const auto& ob : obs)
          if (ob.metric == metric && ob.direction == dir)
            gsamples.push_back({ob.actuator, ob.value});
        try {
          ordered_json comps = ordered_json::array();
          for (const auto& c : lobeforge::tukey_hsd(gsamples)) {
            ordered_json cj;
            cj["group_i"] = c.group_i;
            cj["group_j"] = c.group_j;
            cj["mean_i"] = json_number(c.mean_i);
            cj["mean_j"] = json_number(c.mean_j);
            cj["difference"] = json_number(c.difference);
            cj["q"] = json_number(c.q);
            cj["p_value"] = json_number(c.p_value);
            comps.push_back(cj);
          }
          tukey_json[dir] = comps;
        } catch (const lobeforge::Error& e) {
          tukey_json[dir] = ordered_json{{"error", e.what()}};
        }
      }
      mj["tukey_by_direction"] = tukey_json;

      std::map<std::string, std::vector<double>> groups;
      for (const auto& ob : obs)
        if (ob.metric == metric)
          groups[ob.actuator + "/" + ob.direction].push_back(ob.value);
      ordered_json shapiro_json;
      for (const auto& [key, values] : groups) {
        ordered_json gj;
        gj["n"] = values.size();
        try {
          lobeforge::ShapiroResult sr = lobeforge::shapiro_wilk(values);
          gj["w"] = json_number(sr.w);
          gj["p_value"] = json_number(sr.p_value);
        } catch (const lobeforge::Error& e) {
          gj["error"] = e.what();
        }
        shapiro_json[key] = gj;
      }
      mj["shapiro_by_group"] = shapiro_json;

      // Direction contrast per actuator, the headline consistency check for
      // simulated batches: pushing the as-built dome in costs more than
      // pushing it back out.
      std::map<std::string, std::map<std::string, std::pair<double, int>>> sums;
      for (const auto& ob : obs)
        if (ob.metric == metric) {
          auto& cell = sums[ob.actuator][ob.direction];
          cell.first += ob.value;
          cell.second += 1;
        }
      ordered_json ordering;
      for (const auto& [actuator, by_dir] : sums) {
        auto l = by_dir.find("loading");
        auto s = by_dir.find("snapping");
        if (l == by_dir.end() || s == by_dir.end()) continue;
        double mean_l = l->second.first / l->second.second;
        double mean_s = s->second.first / s->second.second;
        ordered_json oj;
        oj["loading_mean"] = json_number(mean_l);
        oj["snapping_mean"] = json_number(mean_s);
        oj["loading_exceeds_snapping"] = mean_l > mean_s;
        ordering[actuator] = oj;
      }
      mj["direction_ordering"] = ordering;

      metrics_json[metric] = mj;
    }
    report["metrics"] = metrics_json;
  }

  if (!obs.empty()) {
    for (const std::string& metric : metric_set) {
      std::map<std::string, std::vector<double>> groups;
      for (const auto& ob : obs)
        if (ob.metric == metric)
          groups[ob.actuator + "/" + ob.direction].push_back(ob.value);
      std::vector<lobeforge::BoxplotSeries> series;
      for (const auto& [key, values] : groups) series.push_back({key, values});
      std::string name = "boxplot_" + sanitize_token(metric) + ".svg";
      write_text_atomic(out / name,
                        lobeforge::boxplot_svg(series, metric, metric));
      written.push_back(name);
    }
  }

  if (!in.trace_files.empty()) {
    std::map<std::pair<std::string, std::string>, std::vector<fs::path>> grouped;
    for (const auto& path : in.trace_files) {
      std::string model, direction, rep;
      if (parse_trace_name(path, &model, &direction, &rep)) {
        grouped[{model, direction}].push_back(path);
      } else {
        grouped[{path.stem().string(), ""}].push_back(path);
      }
    }
    for (const auto& [key, files] : grouped) {
      std::vector<lobeforge::ForceStrokeSeries> series;
      for (const auto& file : files) {
        lobeforge::ForceStrokeSeries s;
        std::string model, direction, rep;
        s.label = parse_trace_name(file, &model, &direction, &rep)
                      ? rep
                      : file.stem().string();
        s.trace = lobeforge::read_force_trace(file.string());
        lobeforge::IndentationTrace trace;
        for (const auto& p : s.trace)
          trace.samples.push_back({p.time_s, p.stroke_mm, p.force_n});
        try {
          lobeforge::TransitionPoints tp = lobeforge::detect_transition_points(
              trace, cfg.simulation.protocol.force_threshold,
              cfg.simulation.protocol.drop_fraction);
          s.has_first_transition = true;
          s.first_transition_stroke = tp.x1;
          s.has_second_transition = true;
          s.second_transition_stroke = tp.x2;
        } catch (const lobeforge::Error&) {
        }
        series.push_back(std::move(s));
      }
      std::string title = key.second.empty() ? key.first : key.first + " " + key.second;
      std::string name = "trace_" + sanitize_token(key.first) +
                         (key.second.empty() ? "" : "_" + sanitize_token(key.second)) +
                         ".svg";
      write_text_atomic(out / name, lobeforge::force_stroke_svg(series, title));
      written.push_back(name);
    }
  }

  report["plots"] = written;
  if (with_stats) {
    write_json_file(out / "analysis_report.json", report);
    std::cout << "analyze: report written to "
              << (out / "analysis_report.json").string() << " with "
              << written.size() << " plot(s)\n";
  } else {
    std::cout << "plot: wrote " << written.size() << " plot(s) to " << o.out_dir
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  g_verbosity = read_verbosity_env();
  CLI::App app{
      "lobeforge: parametric design and quasi-static characterization of "
      "bistable lobe actuators"};
  app.require_subcommand(1);
  CliOptions o;

  auto add_io = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "Run configuration JSON file");
    cmd->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  };
  auto add_selection = [&](CLI::App* cmd) {
    cmd->add_option("--model", o.model, "Restrict to one surface family")
        ->check(CLI::IsMember({"sg", "atl"}));
    cmd->add_option("--thickness", o.thickness, "Restrict to one wall profile")
        ->check(CLI::IsMember({"const", "taper"}));
  };

  CLI::App* gen = app.add_subcommand(
      "generate", "Build meshes and write STL, mesh, parameter, and print metadata files");
  add_io(gen);
  add_selection(gen);

  CLI::App* sim = app.add_subcommand(
      "simulate", "Run the indentation batch and write traces, summaries, and observations");
  add_io(sim);
  add_selection(sim);
  sim->add_option("--direction", o.direction, "Restrict to one indentation direction")
      ->check(CLI::IsMember({"loading", "snapping"}));
  sim->add_option("--seed", o.seed, "Override the batch seed")
      ->each([&](const std::string&) { o.seed_given = true; });
  sim->add_option("--threads", o.threads, "Worker threads for the batch fan-out")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* bis = app.add_subcommand(
      "bistable-check", "Verify that each design has two distinct stable states");
  add_io(bis);
  add_selection(bis);
  bis->add_option("--threads", o.threads, "Solver threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* reo = app.add_subcommand(
      "reopen", "Ramp actuation down from the closed state and classify the reopening");
  add_io(reo);
  add_selection(reo);
  reo->add_option("--threads", o.threads, "Solver threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* ana = app.add_subcommand(
      "analyze", "Statistics report and plots from observations and trace files");
  ana->add_option("input", o.input, "observations.csv or a directory of batch outputs")
      ->capture_default_str();
  add_io(ana);

  CLI::App* plo = app.add_subcommand("plot", "Plots only, no statistics report");
  plo->add_option("input", o.input, "observations.csv or a directory of batch outputs")
      ->capture_default_str();
  add_io(plo);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(o);
    if (sim->parsed()) return cmd_simulate(o);
    if (bis->parsed()) return cmd_bistable_check(o);
    if (reo->parsed()) return cmd_reopen(o);
    if (ana->parsed()) return cmd_analyze(o, true);
    if (plo->parsed()) return cmd_analyze(o, false);
  } catch (const lobeforge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
