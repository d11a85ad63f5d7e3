#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "topt/commands.hpp"
#include "topt/scenario.hpp"

using namespace topt;
namespace fs = std::filesystem;

namespace {

const char* kTinyScenario = R"json({
  "name": "tiny",
  "path": {"type": "polynomial", "coefficients": [[0.0, 1.0]]},
  "constraints": {"qddot_abs": [1.0], "tau_abs": [0.9]},
  "grid": {"N": 21, "M": 17, "sdot_ceiling": 1.2},
  "rl": {"seed": 3, "max_episodes": 5000},
  "plant": {"preset": "decoupled", "inertia": [1.0], "viscous": [0.25], "coulomb": [0.0],
            "mismatch": {"inertia_scale": 1.0, "omit_coulomb": false}},
  "dt": 0.001,
  "interaction": {"max_rounds": 50}
})json";

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "topt_test_scenarios";
  fs::create_directories(dir);
  const fs::path file = dir / name;
  std::ofstream out(file, std::ios::binary);
  out << content;
  return file;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TOPT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    files[fs::relative(entry.path(), dir).string()] = body.str();
  }
  return files;
}

}  // namespace

TEST_CASE("parse_scenario: defaults and field values") {
  const Scenario sc = parse_scenario(kTinyScenario, "fallback");
  CHECK(sc.name == "tiny");
  CHECK(sc.grid.n_s == 21);
  CHECK(sc.grid.n_sdot == 17);
  CHECK(sc.grid.sdot_ceiling.value() == 1.2);
  CHECK(sc.rl.rng_seed == 3);
  CHECK(sc.rl.alpha == 0.8);  // default
  CHECK(sc.plant.present);
  CHECK(sc.interaction.max_rounds == 50);
  CHECK(sc.interaction.noise_margin_sigma == 3.0);  // default
  CHECK(sc.dt == 0.001);
  CHECK(sc.content_hash != 0);

  const JointPath path = sc.build_path();
  CHECK(path.joint_count() == 1);
  const PhaseGrid grid = sc.make_grid(path);
  CHECK(grid.spec().n_s == 21);
  CHECK_NOTHROW(sc.make_plant());
}

TEST_CASE("parse_scenario: errors name the offending field") {
  SUBCASE("missing grid.N") {
    const char* text = R"({"path": {"type": "polynomial", "coefficients": [[0,1]]},
                           "constraints": {"qddot_abs": [1.0]},
                           "grid": {"M": 17, "sdot_ceiling": 1.0}})";
    CHECK_THROWS_WITH_AS(parse_scenario(text, "x"), doctest::Contains("grid.N"),
                         ConfigError);
  }
  SUBCASE("bad path type") {
    const char* text = R"({"path": {"type": "bezier"},
                           "constraints": {"qddot_abs": [1.0]},
                           "grid": {"N": 5, "M": 4, "sdot_ceiling": 1.0}})";
    CHECK_THROWS_WITH_AS(parse_scenario(text, "x"), doctest::Contains("path.type"),
                         ConfigError);
  }
  SUBCASE("invalid JSON") {
    CHECK_THROWS_AS(parse_scenario("{not json", "x"), ConfigError);
  }
  SUBCASE("no ceiling and no qdot_max") {
    const char* text = R"({"path": {"type": "polynomial", "coefficients": [[0,1]]},
                           "constraints": {"qddot_abs": [1.0]},
                           "grid": {"N": 5, "M": 4}})";
    const Scenario sc = parse_scenario(text, "x");
    const JointPath path = sc.build_path();
    CHECK_THROWS_WITH_AS(sc.make_grid(path), doctest::Contains("sdot_ceiling"),
                         ConfigError);
  }
  SUBCASE("missing plant") {
    const char* text = R"({"path": {"type": "polynomial", "coefficients": [[0,1]]},
                           "constraints": {"qddot_abs": [1.0]},
                           "grid": {"N": 5, "M": 4, "sdot_ceiling": 1.0}})";
    const Scenario sc = parse_scenario(text, "x");
    CHECK_THROWS_AS(sc.make_plant(), ConfigError);
  }
}

TEST_CASE("shipped scenario files parse and build") {
  const fs::path dir = TOPT_SCENARIO_DIR;
  REQUIRE(fs::exists(dir));
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const Scenario sc = load_scenario(entry.path());
    const JointPath path = sc.build_path();
    CHECK(path.joint_count() >= 1);
    CHECK_NOTHROW(sc.resolve_grid_spec(path));
  }
  CHECK(count >= 4);
}

TEST_CASE("fnv1a64 is stable") {
  CHECK(fnv1a64("") == 0xCBF29CE484222325ull);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8Cull);
  CHECK(fnv1a64("abc") != fnv1a64("acb"));
}

TEST_CASE("CLI: config errors exit with code 2") {
  const fs::path bad = write_temp("bad.json", "{\"path\": 3}");
  CHECK(run_cli("plan-rl --scenario " + bad.string() + " --out /tmp/topt_bad_out") ==
        exit_code::config_error);
  const fs::path malformed = write_temp("malformed.json", "{nope");
  CHECK(run_cli("oracle --scenario " + malformed.string() +
                " --out /tmp/topt_bad_out2") == exit_code::config_error);
}

TEST_CASE("CLI: oracle and plan-rl succeed on the tiny scenario") {
  const fs::path file = write_temp("tiny.json", kTinyScenario);
  const fs::path out = fs::temp_directory_path() / "topt_tiny_out";
  fs::remove_all(out);
  CHECK(run_cli("oracle --scenario " + file.string() + " --out " +
                (out / "oracle").string()) == exit_code::ok);
  CHECK(run_cli("plan-rl --scenario " + file.string() + " --out " +
                (out / "rl").string()) == exit_code::ok);
  CHECK(fs::exists(out / "oracle" / "trajectory.csv"));
  CHECK(fs::exists(out / "oracle" / "summary.json"));
  CHECK(fs::exists(out / "rl" / "trajectory.csv"));
  CHECK(fs::exists(out / "rl" / "stats.csv"));
  CHECK(fs::exists(out / "rl" / "summary.json"));

  // Artifact headers carry the provenance stamp.
  std::ifstream in(out / "rl" / "trajectory.csv");
  std::string first_line;
  std::getline(in, first_line);
  CHECK(first_line.find("# scenario=tiny hash=") == 0);
  CHECK(first_line.find("seed=3") != std::string::npos);
}

TEST_CASE("CLI: rerun with identical scenario and seed is byte-identical") {
  const fs::path file = write_temp("tiny.json", kTinyScenario);
  const fs::path base = fs::temp_directory_path() / "topt_det";
  fs::remove_all(base);

  for (const std::string command : {"plan-rl", "oracle", "interact", "compare",
                                    "plan-ni"}) {
    const fs::path out_a = base / (command + "_a");
    const fs::path out_b = base / (command + "_b");
    const int code_a =
        run_cli(command + " --scenario " + file.string() + " --out " + out_a.string());
    const int code_b =
        run_cli(command + " --scenario " + file.string() + " --out " + out_b.string());
    REQUIRE(code_a == code_b);
    const auto files_a = read_dir(out_a);
    const auto files_b = read_dir(out_b);
    REQUIRE(!files_a.empty());
    REQUIRE(files_a == files_b);
  }
}

TEST_CASE("CLI: --seed override changes artifacts deterministically") {
  const fs::path file = write_temp("tiny.json", kTinyScenario);
  const fs::path base = fs::temp_directory_path() / "topt_seed";
  fs::remove_all(base);
  REQUIRE(run_cli("plan-rl --scenario " + file.string() + " --seed 9 --out " +
                  (base / "a").string()) == exit_code::ok);
  REQUIRE(run_cli("plan-rl --scenario " + file.string() + " --seed 9 --out " +
                  (base / "b").string()) == exit_code::ok);
  CHECK(read_dir(base / "a") == read_dir(base / "b"));

  std::ifstream in(base / "a" / "stats.csv");
  std::string first_line;
  std::getline(in, first_line);
  CHECK(first_line.find("seed=9") != std::string::npos);
}

TEST_CASE("CLI: batch mode with --jobs writes per-scenario directories") {
  const fs::path file_a = write_temp("batch_a.json", kTinyScenario);
  const fs::path file_b = write_temp("batch_b.json", kTinyScenario);
  const fs::path out = fs::temp_directory_path() / "topt_batch";
  fs::remove_all(out);
  const int code = run_cli("oracle --scenario " + file_a.string() + " --scenario " +
                           file_b.string() + " --jobs 2 --out " + out.string());
  CHECK(code == exit_code::ok);
  CHECK(fs::exists(out / "batch_a" / "summary.json"));
  CHECK(fs::exists(out / "batch_b" / "summary.json"));
}

namespace {

nlohmann::json read_json(const fs::path& file) {
  std::ifstream in(file);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("cmd_plan_rl summary time matches the oracle on the reference scenario") {
  const fs::path out = fs::temp_directory_path() / "topt_cmd_ref";
  fs::remove_all(out);
  CommandOptions rl_options;
  rl_options.scenario_file = fs::path(TOPT_SCENARIO_DIR) / "reference_single_joint.json";
  rl_options.out_dir = out / "rl";
  REQUIRE(cmd_plan_rl(rl_options, Algorithm::topto_sarsa) == exit_code::ok);

  CommandOptions oracle_options = rl_options;
  oracle_options.out_dir = out / "oracle";
  REQUIRE(cmd_oracle(oracle_options) == exit_code::ok);

  const auto rl_summary = read_json(out / "rl" / "summary.json");
  const auto oracle_summary = read_json(out / "oracle" / "summary.json");
  REQUIRE(rl_summary.at("converged").get<bool>());
  CHECK(rl_summary.at("T").get<double>() == oracle_summary.at("T_star").get<double>());
}

TEST_CASE("cmd_compare: no mismatch and generous torque keeps both planners clean") {
  // qdot_max caps both the grid box and the NI profile at the same velocity,
  // and keeps the braking funnel shallow enough for quick convergence.
  const char* text = R"json({
    "name": "clean_compare",
    "path": {"type": "polynomial", "coefficients": [[0.0, 1.0]]},
    "constraints": {"qddot_abs": [1.0], "qdot_max": [0.45], "tau_abs": [50.0]},
    "grid": {"N": 21, "M": 257, "headroom": 1.0},
    "rl": {"seed": 11, "max_episodes": 20000},
    "plant": {"preset": "decoupled", "inertia": [1.0],
              "mismatch": {"inertia_scale": 1.0, "omit_coulomb": false}},
    "dt": 0.001
  })json";
  const fs::path file = write_temp("clean_compare.json", text);
  const fs::path out = fs::temp_directory_path() / "topt_cmd_compare";
  fs::remove_all(out);

  CommandOptions options;
  options.scenario_file = file;
  options.out_dir = out;
  REQUIRE(cmd_compare(options) == exit_code::ok);

  const auto comparison = read_json(out / "comparison.json");
  CHECK(comparison.at("ni").at("measured_violations").get<std::size_t>() == 0);
  CHECK(comparison.at("rl").at("measured_violations").get<std::size_t>() == 0);
  CHECK(comparison.at("rl").at("status").get<std::string>() == "success");
  // Same grid, same quantum argument as the planner-level agreement test.
  const double t_ni = comparison.at("ni").at("T").get<double>();
  const double t_rl = comparison.at("rl").at("T").get<double>();
  const double quantum = t_rl * t_rl * (0.45 / 256.0);
  CHECK(std::fabs(t_ni - t_rl) <= quantum);
}

TEST_CASE("cmd_interact with dump_traces writes per-round torque traces") {
  const fs::path file = write_temp("tiny.json", kTinyScenario);
  const fs::path out = fs::temp_directory_path() / "topt_cmd_dump";
  fs::remove_all(out);
  CommandOptions options;
  options.scenario_file = file;
  options.out_dir = out;
  options.dump_traces = true;
  const int code = cmd_interact(options);
  CHECK(code == exit_code::ok);
  CHECK(fs::exists(out / "rounds.csv"));
  CHECK(fs::exists(out / "torque_round_1.csv"));
}
