#include "topt/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace topt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("scenario config: field '" + field + "' " + what);
}

const json& need(const json& j, const std::string& ctx, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(ctx + key, "is missing");
  return *it;
}

double need_number(const json& j, const std::string& ctx, const char* key) {
  const json& v = need(j, ctx, key);
  if (!v.is_number()) fail(ctx + key, "must be a number");
  return v.get<double>();
}

double opt_number(const json& j, const std::string& ctx, const char* key,
                  double fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) fail(ctx + key, "must be a number");
  return it->get<double>();
}

std::size_t need_count(const json& j, const std::string& ctx, const char* key) {
  const json& v = need(j, ctx, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
    fail(ctx + key, "must be a positive integer");
  return v.get<std::size_t>();
}

std::size_t opt_count(const json& j, const std::string& ctx, const char* key,
                      std::size_t fallback) {
  return j.contains(key) ? need_count(j, ctx, key) : fallback;
}

bool opt_bool(const json& j, const std::string& ctx, const char* key, bool fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) fail(ctx + key, "must be a boolean");
  return it->get<bool>();
}

std::vector<double> number_list(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) fail(field, "must be a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number()) fail(field, "must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<double> need_list(const json& j, const std::string& ctx, const char* key) {
  return number_list(need(j, ctx, key), ctx + key);
}

PathConfig parse_path(const json& j) {
  PathConfig cfg;
  const std::string ctx = "path.";
  const json& type = need(j, ctx, "type");
  const std::string kind = type.is_string() ? type.get<std::string>() : "";

  if (kind == "polynomial") {
    cfg.kind = PathConfig::Kind::polynomial;
    const json& coeffs = need(j, ctx, "coefficients");
    if (!coeffs.is_array() || coeffs.empty())
      fail("path.coefficients", "must be an array of per-joint arrays");
    for (const json& per_joint : coeffs)
      cfg.coefficients.push_back(number_list(per_joint, "path.coefficients[]"));
    return cfg;
  }
  if (kind == "waypoints") {
    cfg.kind = PathConfig::Kind::waypoints;
    const json& points = need(j, ctx, "points");
    if (!points.is_array() || points.size() < 3)
      fail("path.points", "must be an array of >= 3 waypoints");
    for (const json& p : points) {
      Waypoint w;
      w.s = need_number(p, "path.points[].", "s");
      w.q = need_list(p, "path.points[].", "q");
      cfg.waypoints.push_back(std::move(w));
    }
    return cfg;
  }
  if (kind == "demo_2link") {
    const json& shape = need(j, ctx, "shape");
    const std::string shape_name = shape.is_string() ? shape.get<std::string>() : "";
    if (j.contains("arm")) {
      const json& arm = j["arm"];
      cfg.arm.l1 = opt_number(arm, "path.arm.", "l1", cfg.arm.l1);
      cfg.arm.l2 = opt_number(arm, "path.arm.", "l2", cfg.arm.l2);
    }
    if (shape_name == "line") {
      cfg.kind = PathConfig::Kind::demo_line;
      cfg.samples = opt_count(j, ctx, "samples", 201);
      if (j.contains("from")) {
        const auto from = number_list(j["from"], "path.from");
        if (from.size() != 2) fail("path.from", "must be [x, y]");
        cfg.line.from = {from[0], from[1]};
      }
      if (j.contains("to")) {
        const auto to = number_list(j["to"], "path.to");
        if (to.size() != 2) fail("path.to", "must be [x, y]");
        cfg.line.to = {to[0], to[1]};
      }
      return cfg;
    }
    if (shape_name == "cosine") {
      cfg.kind = PathConfig::Kind::demo_cosine;
      cfg.samples = opt_count(j, ctx, "samples", 401);
      cfg.cosine.x0 = opt_number(j, ctx, "x0", cfg.cosine.x0);
      cfg.cosine.amplitude = opt_number(j, ctx, "amplitude", cfg.cosine.amplitude);
      cfg.cosine.frequency = opt_number(j, ctx, "frequency", cfg.cosine.frequency);
      if (j.contains("y_range")) {
        const auto range = number_list(j["y_range"], "path.y_range");
        if (range.size() != 2) fail("path.y_range", "must be [y_min, y_max]");
        cfg.cosine.y_min = range[0];
        cfg.cosine.y_max = range[1];
      }
      return cfg;
    }
    fail("path.shape", "must be 'line' or 'cosine'");
  }
  fail("path.type", "must be 'polynomial', 'waypoints', or 'demo_2link'");
}

Constraints parse_constraints(const json& j) {
  Constraints c;
  const std::string ctx = "constraints.";
  if (j.contains("qddot_abs")) {
    c.qddot_max = need_list(j, ctx, "qddot_abs");
    c.qddot_min.reserve(c.qddot_max.size());
    for (double v : c.qddot_max) c.qddot_min.push_back(-v);
  } else {
    c.qddot_min = need_list(j, ctx, "qddot_min");
    c.qddot_max = need_list(j, ctx, "qddot_max");
  }
  if (j.contains("qdot_max")) c.qdot_max = need_list(j, ctx, "qdot_max");
  if (j.contains("tau_abs")) {
    c.tau_max = need_list(j, ctx, "tau_abs");
    c.tau_min.reserve(c.tau_max.size());
    for (double v : c.tau_max) c.tau_min.push_back(-v);
  } else if (j.contains("tau_min") || j.contains("tau_max")) {
    c.tau_min = need_list(j, ctx, "tau_min");
    c.tau_max = need_list(j, ctx, "tau_max");
  }
  return c;
}

GridConfig parse_grid(const json& j) {
  GridConfig g;
  const std::string ctx = "grid.";
  g.n_s = need_count(j, ctx, "N");
  g.n_sdot = need_count(j, ctx, "M");
  if (j.contains("sdot_ceiling")) g.sdot_ceiling = need_number(j, ctx, "sdot_ceiling");
  g.headroom = opt_number(j, ctx, "headroom", 1.0);
  return g;
}

RLParams parse_rl(const json& j) {
  RLParams p;
  const std::string ctx = "rl.";
  p.alpha = opt_number(j, ctx, "alpha", p.alpha);
  p.gamma = opt_number(j, ctx, "gamma", p.gamma);
  p.epsilon = opt_number(j, ctx, "epsilon", p.epsilon);
  p.rho = opt_number(j, ctx, "rho", p.rho);
  p.max_episodes = opt_count(j, ctx, "max_episodes", p.max_episodes);
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_integer()) fail("rl.seed", "must be an integer");
    p.rng_seed = s.get<std::uint64_t>();
  }
  return p;
}

PlantConfig parse_plant(const json& j) {
  PlantConfig p;
  p.present = true;
  const std::string ctx = "plant.";
  const json& preset = need(j, ctx, "preset");
  const std::string name = preset.is_string() ? preset.get<std::string>() : "";
  std::size_t n_joints = 0;
  if (name == "decoupled") {
    p.preset = PlantModel::Preset::decoupled;
    p.decoupled.inertia = need_list(j, ctx, "inertia");
    p.decoupled.coupling = opt_number(j, ctx, "coupling", 0.0);
    n_joints = p.decoupled.inertia.size();
  } else if (name == "two_link_planar") {
    p.preset = PlantModel::Preset::two_link_planar;
    p.two_link.m1 = opt_number(j, ctx, "m1", p.two_link.m1);
    p.two_link.m2 = opt_number(j, ctx, "m2", p.two_link.m2);
    p.two_link.l1 = opt_number(j, ctx, "l1", p.two_link.l1);
    p.two_link.l2 = opt_number(j, ctx, "l2", p.two_link.l2);
    p.two_link.gravity = opt_number(j, ctx, "gravity", p.two_link.gravity);
    n_joints = 2;
  } else {
    fail("plant.preset", "must be 'decoupled' or 'two_link_planar'");
  }

  p.friction.viscous = j.contains("viscous") ? need_list(j, ctx, "viscous")
                                             : std::vector<double>(n_joints, 0.0);
  p.friction.coulomb = j.contains("coulomb") ? need_list(j, ctx, "coulomb")
                                             : std::vector<double>(n_joints, 0.0);
  if (j.contains("mismatch")) {
    const json& mm = j["mismatch"];
    p.mismatch.inertia_scale =
        opt_number(mm, "plant.mismatch.", "inertia_scale", p.mismatch.inertia_scale);
    p.mismatch.viscous_scale =
        opt_number(mm, "plant.mismatch.", "viscous_scale", p.mismatch.viscous_scale);
    p.mismatch.omit_coulomb =
        opt_bool(mm, "plant.mismatch.", "omit_coulomb", p.mismatch.omit_coulomb);
  }
  p.noise_std = opt_number(j, ctx, "noise_std", 0.0);
  if (j.contains("noise_seed")) {
    const json& s = j["noise_seed"];
    if (!s.is_number_integer()) fail("plant.noise_seed", "must be an integer");
    p.noise_seed = s.get<std::uint64_t>();
  }
  return p;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

Scenario parse_scenario(const std::string& text, const std::string& default_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario config: top level must be an object");

  Scenario sc;
  sc.content_hash = fnv1a64(text);
  sc.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>()
                                                        : default_name;
  sc.path = parse_path(need(j, "", "path"));
  sc.constraints = parse_constraints(need(j, "", "constraints"));
  sc.grid = parse_grid(need(j, "", "grid"));
  sc.rl = j.contains("rl") ? parse_rl(j["rl"]) : RLParams{};
  if (j.contains("plant")) sc.plant = parse_plant(j["plant"]);
  sc.dt = opt_number(j, "", "dt", 0.001);
  if (!(sc.dt > 0.0)) fail("dt", "must be positive");
  if (j.contains("ni")) {
    const json& ni = j["ni"];
    sc.ni_samples = opt_count(ni, "ni.", "samples", sc.ni_samples);
    sc.ni_step = opt_number(ni, "ni.", "step", sc.ni_step);
    if (!(sc.ni_step > 0.0 && sc.ni_step < 1.0)) fail("ni.step", "must be in (0,1)");
  }
  if (j.contains("interaction")) {
    const json& it = j["interaction"];
    sc.interaction.max_rounds =
        opt_count(it, "interaction.", "max_rounds", sc.interaction.max_rounds);
    sc.interaction.noise_margin_sigma = opt_number(
        it, "interaction.", "noise_margin_sigma", sc.interaction.noise_margin_sigma);
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("scenario config: cannot open " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), file.stem().string());
}

JointPath Scenario::build_path() const {
  try {
    switch (path.kind) {
      case PathConfig::Kind::polynomial:
        return JointPath::polynomial(path.coefficients);
      case PathConfig::Kind::waypoints:
        return spline_from_waypoints(path.waypoints);
      case PathConfig::Kind::demo_line:
        return demo_path_2link(path.line, path.arm, path.samples);
      case PathConfig::Kind::demo_cosine:
        return demo_path_2link(path.cosine, path.arm, path.samples);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario config: path: ") + e.what());
  }
  throw ConfigError("scenario config: path.type unknown");
}

GridSpec Scenario::resolve_grid_spec(const JointPath& built_path) const {
  GridSpec spec;
  spec.n_s = grid.n_s;
  spec.n_sdot = grid.n_sdot;
  if (grid.sdot_ceiling) {
    spec.sdot_ceiling = *grid.sdot_ceiling;
  } else {
    try {
      spec.sdot_ceiling = compute_sdot_ceiling(built_path, constraints, grid.headroom);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("scenario config: grid.sdot_ceiling: ") + e.what());
    }
  }
  return spec;
}

PhaseGrid Scenario::make_grid(const JointPath& built_path) const {
  try {
    return PhaseGrid(built_path, constraints, resolve_grid_spec(built_path));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
}

PlantModel Scenario::make_plant() const {
  if (!plant.present) throw ConfigError("scenario config: field 'plant' is missing");
  try {
    if (plant.preset == PlantModel::Preset::decoupled) {
      return PlantModel::make_decoupled(plant.decoupled, plant.friction,
                                        plant.mismatch, plant.noise_std,
                                        plant.noise_seed);
    }
    return PlantModel::make_two_link_planar(plant.two_link, plant.friction,
                                            plant.mismatch, plant.noise_std,
                                            plant.noise_seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario config: plant: ") + e.what());
  }
}

}  // namespace topt
