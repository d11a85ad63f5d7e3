#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "topt/path.hpp"
#include "topt/phase_grid.hpp"
#include "topt/plant.hpp"
#include "topt/rl.hpp"
#include "topt/interaction.hpp"

namespace topt {

/// Scenario-file problem: message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PathConfig {
  enum class Kind { polynomial, waypoints, demo_line, demo_cosine };
  Kind kind = Kind::polynomial;
  std::vector<std::vector<double>> coefficients;  // polynomial
  std::vector<Waypoint> waypoints;                // waypoints
  TwoLinkArm arm;                                 // demo kinds
  LineShape line;
  CosineShape cosine;
  std::size_t samples = 201;
};

struct GridConfig {
  std::size_t n_s = 0;
  std::size_t n_sdot = 0;
  std::optional<double> sdot_ceiling;
  double headroom = 1.0;
};

struct PlantConfig {
  bool present = false;
  PlantModel::Preset preset = PlantModel::Preset::decoupled;
  DecoupledParams decoupled;
  TwoLinkPlanarParams two_link;
  FrictionParams friction;
  MismatchSpec mismatch;
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;
};

/// Fully self-contained experiment description: two runs of the same file
/// with the same seeds produce identical outputs.
struct Scenario {
  std::string name;
  PathConfig path;
  Constraints constraints;
  GridConfig grid;
  RLParams rl;
  PlantConfig plant;
  double dt = 0.001;
  std::size_t ni_samples = 200;
  double ni_step = 0.001;
  InteractionSettings interaction;
  std::uint64_t content_hash = 0;

  JointPath build_path() const;
  GridSpec resolve_grid_spec(const JointPath& path) const;
  PhaseGrid make_grid(const JointPath& path) const;
  PlantModel make_plant() const;  // throws ConfigError when absent
};

std::uint64_t fnv1a64(std::string_view text);

Scenario parse_scenario(const std::string& text, const std::string& default_name);
Scenario load_scenario(const std::filesystem::path& file);

}  // namespace topt
