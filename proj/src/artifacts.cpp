#include "topt/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "topt/version.hpp"

namespace topt {

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(v));
  return buffer;
}

}  // namespace

ArtifactWriter::ArtifactWriter(std::filesystem::path dir, std::string scenario_name,
                               std::uint64_t scenario_hash, std::uint64_t seed)
    : dir_(std::move(dir)), scenario_name_(std::move(scenario_name)),
      scenario_hash_(scenario_hash), seed_(seed) {
  std::filesystem::create_directories(dir_);
}

std::string ArtifactWriter::header() const {
  std::ostringstream out;
  out << "# scenario=" << scenario_name_ << " hash=" << hex64(scenario_hash_)
      << " seed=" << seed_ << " version=" << kVersion << "\n";
  return out.str();
}

void ArtifactWriter::write_text(const std::string& filename,
                                const std::string& body) const {
  std::ofstream out(dir_ / filename, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write artifact " + filename);
  out << body;
}

void ArtifactWriter::write_trajectory_csv(const std::string& filename,
                                          const PhaseTrajectory& traj) const {
  std::ostringstream out;
  out << header() << "j,s,sdot,dt_segment\n";
  for (std::size_t j = 0; j < traj.rows.size(); ++j) {
    out << j << ',' << format_double(static_cast<double>(j) * traj.ds) << ','
        << format_double(traj.sdot[j]) << ',';
    if (j < traj.dt.size()) out << format_double(traj.dt[j]);
    out << '\n';
  }
  write_text(filename, out.str());
}

void ArtifactWriter::write_stats_csv(const std::string& filename,
                                     const TrainingStats& stats) const {
  std::ostringstream out;
  out << header() << "episode,outcome,extracted_T\n";
  for (std::size_t i = 0; i < stats.episodes.size(); ++i) {
    const TrainingStats::EpisodeRecord& r = stats.episodes[i];
    out << (i + 1) << ','
        << (r.outcome == Outcome::success ? "success" : "failure") << ',';
    if (r.has_extracted) out << format_double(r.extracted_time);
    out << '\n';
  }
  write_text(filename, out.str());
}

void ArtifactWriter::write_torque_csv(const std::string& filename,
                                      const TorqueTrace& trace,
                                      const std::vector<Violation>& violations) const {
  // violated_joints column: ';'-joined joint indices of this sample's
  // violations, empty when compliant.
  std::vector<std::string> flags(trace.sample_count());
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < trace.sample_count(); ++k) {
    std::string& cell = flags[k];
    while (cursor < violations.size() && violations[cursor].t == trace.t[k]) {
      if (!cell.empty()) cell += ';';
      cell += std::to_string(violations[cursor].joint);
      ++cursor;
    }
  }

  std::ostringstream out;
  out << header() << "t";
  for (std::size_t i = 0; i < trace.n_joints; ++i) out << ",tau_" << (i + 1);
  out << ",violated_joints\n";
  for (std::size_t k = 0; k < trace.sample_count(); ++k) {
    out << format_double(trace.t[k]);
    for (std::size_t i = 0; i < trace.n_joints; ++i)
      out << ',' << format_double(trace.tau[k * trace.n_joints + i]);
    out << ',' << flags[k] << '\n';
  }
  write_text(filename, out.str());
}

void ArtifactWriter::write_rounds_csv(const std::string& filename,
                                      const std::vector<InteractionRecord>& records) const {
  std::ostringstream out;
  out << header() << "round,T,violations,marked_states\n";
  for (const InteractionRecord& r : records) {
    out << r.round << ',' << format_double(r.execution_time) << ','
        << r.violation_count << ',' << r.newly_marked.size() << '\n';
  }
  write_text(filename, out.str());
}

void ArtifactWriter::write_json(const std::string& filename,
                                nlohmann::ordered_json summary) const {
  nlohmann::ordered_json provenance;
  provenance["scenario"] = scenario_name_;
  provenance["hash"] = hex64(scenario_hash_);
  provenance["seed"] = seed_;
  provenance["version"] = kVersion;
  summary["provenance"] = std::move(provenance);
  write_text(filename, summary.dump(2) + "\n");
}

}  // namespace topt
