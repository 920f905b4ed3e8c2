#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "lobeforge/core/error.hpp"
#include "lobeforge/geometry/atl.hpp"
#include "lobeforge/geometry/sg.hpp"
#include "lobeforge/geometry/thickness.hpp"
#include "lobeforge/geometry/triangulate.hpp"
#include "lobeforge/material.hpp"
#include "lobeforge/protocol/scene.hpp"

namespace lobeforge {

// Printer profile recorded alongside every generated part. These are the
// settings the parts are tuned for; simulation does not consume them.
struct PrintSettings {
  double nozzle_diameter_mm = 0.6;
  double nozzle_temperature_c = 220.0;
  double bed_temperature_c = 60.0;
  double first_layer_fan_percent = 20.0;
  double fan_percent = 60.0;
  double layer_height_mm = 0.2;
  int perimeters = 3;
  double extrusion_multiplier = 1.1;
  double print_speed_mm_s = 30.0;
  bool supports = true;
  bool ironing = true;
};

// Complete description of one lobe design. The family selects the surface
// generator: "atl" projects the leaf sketch onto an ellipsoid, "sg" uses
// the biquadratic rectangle.
struct DesignConfig {
  std::string name = "atl-constant";
  std::string family = "atl";  // "atl" | "sg"

  // atl parameters
  double span = 40.0;    // mm
  double height = 25.0;  // mm
  bool tab = true;
  double rib_offset = 3.0;  // mm band from the hinge; 0 disables the rib
  Eigen::Vector3d ellipsoid_semi_axes{30.0, 25.0, 15.0};

  // sg parameters
  SGPatchSpec sg;

  ThicknessField thickness = ThicknessField::constant(0.93);
  double target_edge = 1.5;  // mm
  // Loading-direction indenter offset from the apex; designs whose apex
  // region flattens out need the probe moved toward the hinge.
  double loading_apex_offset = 0.0;
};

struct SimulationConfig {
  int repetitions = 1;
  std::uint64_t seed = 20240817;
  double thickness_variation = 0.05;   // mm, uniform +/- print tolerance
  double guess_jitter = 0.01;          // mm, initial-guess perturbation
  ProtocolOptions protocol;
};

struct RunConfig {
  DesignConfig design;
  Material material = default_material();
  SimulationConfig simulation;
  PrintSettings print;

  // Optional batch manifest. When empty the manifest is the single design
  // above crossed with both directions.
  std::vector<DesignConfig> batch;
  std::vector<Direction> batch_directions;
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::string& path,
                       const std::vector<std::string>& allowed) {
  require(obj.is_object(), ErrorCode::InvalidConfig, path + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const auto& a : allowed) known = known || a == key;
    require(known, ErrorCode::InvalidConfig, "unknown key '" + path + "." + key + "'");
  }
}

inline double get_number(const nlohmann::json& obj, const std::string& path,
                         const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_number(), ErrorCode::InvalidConfig,
          path + "." + key + " must be a number");
  return obj[key].get<double>();
}

inline bool get_bool(const nlohmann::json& obj, const std::string& path, const char* key,
                     bool fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_boolean(), ErrorCode::InvalidConfig,
          path + "." + key + " must be a boolean");
  return obj[key].get<bool>();
}

inline std::string get_string(const nlohmann::json& obj, const std::string& path,
                              const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_string(), ErrorCode::InvalidConfig,
          path + "." + key + " must be a string");
  return obj[key].get<std::string>();
}

}  // namespace detail

inline DesignConfig parse_design_config(const nlohmann::json& j, const std::string& path) {
  detail::check_keys(j, path,
                     {"name", "family", "span", "height", "tab", "rib_offset",
                      "ellipsoid_semi_axes", "sg", "thickness", "target_edge",
                      "loading_apex_offset"});
  DesignConfig d;
  d.name = detail::get_string(j, path, "name", d.name);
  d.family = detail::get_string(j, path, "family", d.family);
  require(d.family == "atl" || d.family == "sg", ErrorCode::InvalidConfig,
          path + ".family must be 'atl' or 'sg'");
  d.span = detail::get_number(j, path, "span", d.span);
  d.height = detail::get_number(j, path, "height", d.height);
  d.tab = detail::get_bool(j, path, "tab", d.tab);
  d.rib_offset = detail::get_number(j, path, "rib_offset", d.rib_offset);
  if (j.contains("ellipsoid_semi_axes")) {
    const auto& axes = j["ellipsoid_semi_axes"];
    require(axes.is_array() && axes.size() == 3, ErrorCode::InvalidConfig,
            path + ".ellipsoid_semi_axes must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i) {
      require(axes[i].is_number(), ErrorCode::InvalidConfig,
              path + ".ellipsoid_semi_axes entries must be numbers");
      d.ellipsoid_semi_axes(i) = axes[i].get<double>();
    }
  }
  if (j.contains("sg")) {
    const auto& s = j["sg"];
    std::string sg_path = path + ".sg";
    detail::check_keys(s, sg_path,
                       {"chord", "width", "kappa_long", "kappa_trans",
                        "restraining_edge", "restraining_width"});
    d.sg.chord = detail::get_number(s, sg_path, "chord", d.sg.chord);
    d.sg.width = detail::get_number(s, sg_path, "width", d.sg.width);
    d.sg.kappa_long = detail::get_number(s, sg_path, "kappa_long", d.sg.kappa_long);
    d.sg.kappa_trans = detail::get_number(s, sg_path, "kappa_trans", d.sg.kappa_trans);
    d.sg.restraining_edge =
        detail::get_bool(s, sg_path, "restraining_edge", d.sg.restraining_edge);
    d.sg.restraining_width =
        detail::get_number(s, sg_path, "restraining_width", d.sg.restraining_width);
  }
  if (j.contains("thickness")) {
    const auto& t = j["thickness"];
    std::string t_path = path + ".thickness";
    detail::check_keys(t, t_path, {"kind", "value", "tip", "base"});
    std::string kind = detail::get_string(t, t_path, "kind", "constant");
    if (kind == "constant") {
      d.thickness = ThicknessField::constant(
          detail::get_number(t, t_path, "value", d.thickness.value));
    } else if (kind == "taper") {
      d.thickness = ThicknessField::taper(detail::get_number(t, t_path, "tip", 0.9),
                                          detail::get_number(t, t_path, "base", 1.3));
    } else {
      fail(ErrorCode::InvalidConfig, t_path + ".kind must be 'constant' or 'taper'");
    }
  }
  d.target_edge = detail::get_number(j, path, "target_edge", d.target_edge);
  d.loading_apex_offset =
      detail::get_number(j, path, "loading_apex_offset", d.loading_apex_offset);
  require(d.target_edge > 0.0, ErrorCode::InvalidConfig,
          path + ".target_edge must be positive");
  require(d.rib_offset >= 0.0, ErrorCode::InvalidConfig,
          path + ".rib_offset must be non-negative");
  require(d.loading_apex_offset >= 0.0, ErrorCode::InvalidConfig,
          path + ".loading_apex_offset must be non-negative");
  validate_thickness_field(d.thickness);
  return d;
}

inline DesignConfig preset_design(const std::string& name);

inline RunConfig parse_run_config(const nlohmann::json& j) {
  detail::check_keys(j, "config", {"design", "material", "simulation", "batch"});
  RunConfig config;
  if (j.contains("design")) config.design = parse_design_config(j["design"], "design");
  if (j.contains("batch")) {
    const auto& b = j["batch"];
    detail::check_keys(b, "batch", {"designs", "directions"});
    if (b.contains("designs")) {
      const auto& ds = b["designs"];
      require(ds.is_array() && !ds.empty(), ErrorCode::InvalidConfig,
              "batch.designs must be a non-empty array");
      for (size_t i = 0; i < ds.size(); ++i) {
        std::string path = "batch.designs[" + std::to_string(i) + "]";
        if (ds[i].is_string()) {
          config.batch.push_back(preset_design(ds[i].get<std::string>()));
        } else {
          config.batch.push_back(parse_design_config(ds[i], path));
        }
        for (size_t k = 0; k + 1 < config.batch.size(); ++k)
          require(config.batch[k].name != config.batch.back().name,
                  ErrorCode::InvalidConfig,
                  "batch.designs has a duplicate name '" + config.batch.back().name + "'");
      }
    }
    if (b.contains("directions")) {
      const auto& dirs = b["directions"];
      require(dirs.is_array() && !dirs.empty() && dirs.size() <= 2,
              ErrorCode::InvalidConfig,
              "batch.directions must list 1 or 2 directions");
      for (const auto& entry : dirs) {
        require(entry.is_string(), ErrorCode::InvalidConfig,
                "batch.directions entries must be strings");
        std::string s = entry.get<std::string>();
        if (s == "loading") {
          config.batch_directions.push_back(Direction::Loading);
        } else if (s == "snapping") {
          config.batch_directions.push_back(Direction::Snapping);
        } else {
          fail(ErrorCode::InvalidConfig,
               "batch.directions entries must be 'loading' or 'snapping'");
        }
      }
      require(config.batch_directions.size() < 2 ||
                  config.batch_directions[0] != config.batch_directions[1],
              ErrorCode::InvalidConfig, "batch.directions has a duplicate entry");
    }
  }
  if (j.contains("material")) {
    const auto& m = j["material"];
    detail::check_keys(m, "material", {"youngs_modulus", "poisson", "density"});
    config.material.youngs_modulus = detail::get_number(
        m, "material", "youngs_modulus", config.material.youngs_modulus);
    config.material.poisson =
        detail::get_number(m, "material", "poisson", config.material.poisson);
    config.material.density =
        detail::get_number(m, "material", "density", config.material.density);
    require(config.material.youngs_modulus > 0.0, ErrorCode::InvalidConfig,
            "material.youngs_modulus must be positive");
    require(config.material.poisson > -1.0 && config.material.poisson < 0.5,
            ErrorCode::InvalidConfig, "material.poisson outside (-1, 0.5)");
  }
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    detail::check_keys(s, "simulation",
                       {"repetitions", "seed", "thickness_variation", "guess_jitter",
                        "protocol"});
    if (s.contains("repetitions")) {
      require(s["repetitions"].is_number_integer(), ErrorCode::InvalidConfig,
              "simulation.repetitions must be an integer");
      config.simulation.repetitions = s["repetitions"].get<int>();
      require(config.simulation.repetitions >= 1, ErrorCode::InvalidConfig,
              "simulation.repetitions must be at least 1");
    }
    if (s.contains("seed")) {
      require(s["seed"].is_number_unsigned() || s["seed"].is_number_integer(),
              ErrorCode::InvalidConfig, "simulation.seed must be an integer");
      config.simulation.seed = s["seed"].get<std::uint64_t>();
    }
    config.simulation.thickness_variation = detail::get_number(
        s, "simulation", "thickness_variation", config.simulation.thickness_variation);
    config.simulation.guess_jitter = detail::get_number(
        s, "simulation", "guess_jitter", config.simulation.guess_jitter);
    require(config.simulation.thickness_variation >= 0.0, ErrorCode::InvalidConfig,
            "simulation.thickness_variation must be non-negative");
    if (s.contains("protocol")) {
      const auto& p = s["protocol"];
      std::string pp = "simulation.protocol";
      detail::check_keys(p, pp,
                         {"indenter_radius", "holder_width", "stroke_step", "stroke_max",
                          "force_threshold", "drop_fraction", "snap_factor",
                          "indentation_speed", "threads"});
      ProtocolOptions& o = config.simulation.protocol;
      o.indenter_radius = detail::get_number(p, pp, "indenter_radius", o.indenter_radius);
      o.holder_width = detail::get_number(p, pp, "holder_width", o.holder_width);
      o.stroke_step = detail::get_number(p, pp, "stroke_step", o.stroke_step);
      o.stroke_max = detail::get_number(p, pp, "stroke_max", o.stroke_max);
      o.force_threshold = detail::get_number(p, pp, "force_threshold", o.force_threshold);
      o.drop_fraction = detail::get_number(p, pp, "drop_fraction", o.drop_fraction);
      o.snap_factor = detail::get_number(p, pp, "snap_factor", o.snap_factor);
      o.indentation_speed =
          detail::get_number(p, pp, "indentation_speed", o.indentation_speed);
      if (p.contains("threads")) {
        require(p["threads"].is_number_integer(), ErrorCode::InvalidConfig,
                pp + ".threads must be an integer");
        o.solver.threads = p["threads"].get<int>();
        require(o.solver.threads >= 1, ErrorCode::InvalidConfig,
                pp + ".threads must be at least 1");
      }
    }
  }
  return config;
}

inline nlohmann::ordered_json design_to_json(const DesignConfig& d) {
  nlohmann::ordered_json j;
  j["name"] = d.name;
  j["family"] = d.family;
  if (d.family == "atl") {
    j["span"] = d.span;
    j["height"] = d.height;
    j["tab"] = d.tab;
    j["rib_offset"] = d.rib_offset;
    j["ellipsoid_semi_axes"] = {d.ellipsoid_semi_axes(0), d.ellipsoid_semi_axes(1),
                                d.ellipsoid_semi_axes(2)};
  } else {
    j["sg"] = {{"chord", d.sg.chord},
               {"width", d.sg.width},
               {"kappa_long", d.sg.kappa_long},
               {"kappa_trans", d.sg.kappa_trans},
               {"restraining_edge", d.sg.restraining_edge},
               {"restraining_width", d.sg.restraining_width}};
  }
  if (d.thickness.kind == ThicknessField::Kind::Constant) {
    j["thickness"] = {{"kind", "constant"}, {"value", d.thickness.value}};
  } else {
    j["thickness"] = {{"kind", "taper"}, {"tip", d.thickness.tip}, {"base", d.thickness.base}};
  }
  j["target_edge"] = d.target_edge;
  j["loading_apex_offset"] = d.loading_apex_offset;
  return j;
}

inline nlohmann::ordered_json print_settings_to_json(const PrintSettings& p) {
  nlohmann::ordered_json j;
  j["nozzle_diameter_mm"] = p.nozzle_diameter_mm;
  j["nozzle_temperature_c"] = p.nozzle_temperature_c;
  j["bed_temperature_c"] = p.bed_temperature_c;
  j["first_layer_fan_percent"] = p.first_layer_fan_percent;
  j["fan_percent"] = p.fan_percent;
  j["layer_height_mm"] = p.layer_height_mm;
  j["perimeters"] = p.perimeters;
  j["extrusion_multiplier"] = p.extrusion_multiplier;
  j["print_speed_mm_s"] = p.print_speed_mm_s;
  j["supports"] = p.supports;
  j["ironing"] = p.ironing;
  return j;
}

// Builds the surface mesh described by a design, with thickness and the
// hinge rib applied.
inline TriMesh build_design_mesh(const DesignConfig& design) {
  TriangulateOptions opt;
  opt.target_edge = design.target_edge;
  TriMesh mesh;
  double hinge_line_y = 0.0;
  if (design.family == "atl") {
    LobeContour contour = make_lobe_contour(design.span, design.height);
    if (design.tab) contour.tab = TabSpec{};
    EllipsoidSpec ellipsoid;
    ellipsoid.semi_axes = design.ellipsoid_semi_axes;
    mesh = triangulate(generate_atl_surface(contour, ellipsoid), opt);
    hinge_line_y = -design.height / 2.0;
  } else {
    SGPatchSpec sg = design.sg;
    if (design.tab) sg.tab = TabSpec{};
    mesh = triangulate(generate_sg_surface(sg), opt);
    hinge_line_y = -sg.width / 2.0 -
                   (sg.restraining_edge ? sg.restraining_width : 0.0);
  }
  // Both sketch-to-surface maps preserve the sketch xy plane, so the clamp
  // tab is exactly the material protruding past the hinge line.
  if (design.tab)
    for (int v = 0; v < mesh.vertex_count(); ++v)
      if (mesh.positions[v].y() < hinge_line_y - 1e-6) mesh.tags[v] |= kTagTab;
  mesh = assign_thickness(mesh, design.thickness);
  if (design.family == "atl" && design.rib_offset > 0.0)
    mesh = apply_rib(mesh, design.rib_offset);
  return mesh;
}

// The four reference designs characterized by the toolkit: both surface
// families, each with a constant wall and a hinge-heavy taper.
inline std::vector<DesignConfig> preset_designs() {
  DesignConfig atl_constant;
  atl_constant.name = "atl-constant";

  DesignConfig atl_tapered = atl_constant;
  atl_tapered.name = "atl-tapered";
  atl_tapered.thickness = ThicknessField::taper(0.9, 1.3);

  DesignConfig sg_constant;
  sg_constant.name = "sg-constant";
  sg_constant.family = "sg";
  sg_constant.tab = false;
  sg_constant.rib_offset = 0.0;
  sg_constant.sg.restraining_edge = true;

  DesignConfig sg_tapered = sg_constant;
  sg_tapered.name = "sg-tapered";
  sg_tapered.thickness = ThicknessField::taper(0.9, 1.3);
  sg_tapered.loading_apex_offset = 3.0;

  return {atl_constant, atl_tapered, sg_constant, sg_tapered};
}

inline DesignConfig preset_design(const std::string& name) {
  for (const auto& d : preset_designs())
    if (d.name == name) return d;
  fail(ErrorCode::InvalidConfig, "unknown preset '" + name + "'");
}

}  // namespace lobeforge
