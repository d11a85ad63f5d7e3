#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "topt/interaction.hpp"
#include "topt/plant.hpp"
#include "topt/rl.hpp"

namespace topt {

/// Round-trip text form of a double ("%.17g").
std::string format_double(double value);

/// Writes scenario-stamped data files into one directory. Every file starts
/// with a header recording scenario name, content hash, seed, and tool
/// version, so artifacts are self-describing and reruns are byte-comparable.
class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, std::string scenario_name,
                 std::uint64_t scenario_hash, std::uint64_t seed);

  const std::filesystem::path& dir() const { return dir_; }
  std::string header() const;

  void write_text(const std::string& filename, const std::string& body) const;

  void write_trajectory_csv(const std::string& filename,
                            const PhaseTrajectory& traj) const;
  void write_stats_csv(const std::string& filename, const TrainingStats& stats) const;
  void write_torque_csv(const std::string& filename, const TorqueTrace& trace,
                        const std::vector<Violation>& violations) const;
  void write_rounds_csv(const std::string& filename,
                        const std::vector<InteractionRecord>& records) const;
  /// Adds a "provenance" object (scenario, hash, seed, version) and writes
  /// pretty-printed JSON.
  void write_json(const std::string& filename, nlohmann::ordered_json summary) const;

 private:
  std::filesystem::path dir_;
  std::string scenario_name_;
  std::uint64_t scenario_hash_;
  std::uint64_t seed_;
};

}  // namespace topt
