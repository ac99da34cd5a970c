#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string binary_path() {
  const char* env = std::getenv("HJBSOLVE");
  REQUIRE(env != nullptr);
  return env;
}

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run(const std::string& args) {
  const fs::path out_file = fs::temp_directory_path() / "hjb_cli_out.txt";
  const std::string cmd = binary_path() + " " + args + " > " + out_file.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(status), ss.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("catalog list prints the four problem names") {
  auto res = run("catalog list");
  CHECK(res.exit_code == 0);
  CHECK(res.output == "oscillator\neikonal_channel\neikonal_obstacles\nvanderpol\n");
}

TEST_CASE("solve TREE produces the documented artifacts") {
  TempDir tmp("hjb_cli_solve");
  write_file(tmp.path / "cfg.json", R"({
    "problem": {"name": "oscillator", "overrides": {"T": 0.25}},
    "solver": "TREE",
    "out": ")" + (tmp.path / "run").string() + R"("
  })");
  auto res = run("solve --config " + (tmp.path / "cfg.json").string());
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  for (const char* name :
       {"tree_nodes.csv", "tree_edges.csv", "tree_values.csv", "trajectory.csv",
        "summary.json"})
    CHECK(fs::exists(tmp.path / "run" / name));
  json summary = json::parse(slurp(tmp.path / "run" / "summary.json"));
  CHECK(summary.at("solver") == "TREE");
  CHECK(summary.at("v0").is_number());
  CHECK(summary.at("cost").is_number());
  CHECK(summary.at("nodes_total").is_number_integer());
  CHECK(summary.at("nodes_per_level").is_array());
  CHECK(summary.at("wall_time_s").is_number());
  CHECK(summary.at("switches").is_number_integer());
}

TEST_CASE("solve GRID and VI run end to end") {
  TempDir tmp("hjb_cli_grid");
  write_file(tmp.path / "grid.json", R"({
    "problem": {"name": "eikonal_channel", "overrides": {"T": 0.1}},
    "solver": "GRID",
    "grid": {"dx": 0.005},
    "out": ")" + (tmp.path / "g").string() + R"("
  })");
  auto res = run("solve --config " + (tmp.path / "grid.json").string());
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  CHECK(fs::exists(tmp.path / "g" / "grid_values.csv"));
  CHECK(fs::exists(tmp.path / "g" / "trajectory.csv"));

  write_file(tmp.path / "vi.json", R"({
    "problem": {"name": "oscillator", "overrides": {"lambda": 1.0}},
    "solver": "VI",
    "vi": {"h": 0.1, "tol": 1e-6, "max_iters": 500, "dx": 0.1},
    "out": ")" + (tmp.path / "v").string() + R"("
  })");
  res = run("solve --config " + (tmp.path / "vi.json").string());
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  CHECK(fs::exists(tmp.path / "v" / "vi_values.csv"));
  CHECK(fs::exists(tmp.path / "v" / "vi_residuals.csv"));
  json summary = json::parse(slurp(tmp.path / "v" / "summary.json"));
  CHECK(summary.at("converged") == true);
}

TEST_CASE("identical configs give byte-identical CSV artifacts") {
  TempDir tmp("hjb_cli_det");
  for (const char* dir : {"r1", "r2"}) {
    write_file(tmp.path / "cfg.json", R"({
      "problem": {"name": "eikonal_channel", "overrides": {"T": 0.1}},
      "solver": "TREE",
      "out": ")" + (tmp.path / dir).string() + R"("
    })");
    auto res = run("solve --config " + (tmp.path / "cfg.json").string());
    REQUIRE(res.exit_code == 0);
  }
  for (const char* name : {"tree_nodes.csv", "tree_edges.csv", "tree_values.csv",
                           "trajectory.csv"})
    CHECK(slurp(tmp.path / "r1" / name) == slurp(tmp.path / "r2" / name));
}

TEST_CASE("the effective config reproduces the run") {
  TempDir tmp("hjb_cli_rt");
  write_file(tmp.path / "cfg.json", R"({
    "problem": {"name": "oscillator", "overrides": {"T": 0.25, "k": 0.8}},
    "solver": "TREE",
    "tree": {"eps_merge": 1e-6},
    "out": ")" + (tmp.path / "a").string() + R"("
  })");
  auto res = run("solve --config " + (tmp.path / "cfg.json").string());
  REQUIRE(res.exit_code == 0);
  REQUIRE(fs::exists(tmp.path / "a" / "effective_config.json"));
  // feed the effective config back, redirected to a fresh directory
  res = run("solve --config " + (tmp.path / "a" / "effective_config.json").string() +
            " --out " + (tmp.path / "b").string());
  REQUIRE(res.exit_code == 0);
  for (const char* name : {"tree_nodes.csv", "tree_edges.csv", "tree_values.csv",
                           "trajectory.csv"})
    CHECK(slurp(tmp.path / "a" / name) == slurp(tmp.path / "b" / name));
}

TEST_CASE("thread count does not change the numbers") {
  TempDir tmp("hjb_cli_threads");
  for (int threads : {1, 4}) {
    write_file(tmp.path / "cfg.json", R"({
      "problem": {"name": "eikonal_channel", "overrides": {"T": 0.1}},
      "solver": "GRID",
      "grid": {"dx": 0.005},
      "out": ")" + (tmp.path / ("t" + std::to_string(threads))).string() + R"(",
      "threads": )" + std::to_string(threads) + R"(
    })");
    auto res = run("solve --config " + (tmp.path / "cfg.json").string());
    REQUIRE(res.exit_code == 0);
  }
  CHECK(slurp(tmp.path / "t1" / "grid_values.csv") == slurp(tmp.path / "t4" / "grid_values.csv"));
  CHECK(slurp(tmp.path / "t1" / "trajectory.csv") == slurp(tmp.path / "t4" / "trajectory.csv"));
}

TEST_CASE("config errors exit with code 2 and a helpful message") {
  TempDir tmp("hjb_cli_err");

  SECTION("unknown solver lists the valid ones") {
    write_file(tmp.path / "bad.json",
               R"({"problem": {"name": "oscillator"}, "solver": "MAGIC"})");
    auto res = run("solve --config " + (tmp.path / "bad.json").string());
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("TREE") != std::string::npos);
    CHECK(res.output.find("GRID") != std::string::npos);
    CHECK(res.output.find("VI") != std::string::npos);
  }
  SECTION("parse errors carry a line number") {
    write_file(tmp.path / "syntax.json", "{\n  \"problem\": {\n  oops\n}\n");
    auto res = run("solve --config " + (tmp.path / "syntax.json").string());
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("line 3") != std::string::npos);
  }
  SECTION("unknown catalog problem") {
    write_file(tmp.path / "name.json", R"({"problem": {"name": "warp_drive"}})");
    auto res = run("solve --config " + (tmp.path / "name.json").string());
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("oscillator") != std::string::npos);
  }
  SECTION("unknown override key") {
    write_file(tmp.path / "key.json",
               R"({"problem": {"name": "oscillator", "overrides": {"zeta": 2}}})");
    auto res = run("solve --config " + (tmp.path / "key.json").string());
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("zeta") != std::string::npos);
  }
  SECTION("unknown test id for reproduce") {
    auto res = run("reproduce test9");
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("test2a") != std::string::npos);
  }
}

TEST_CASE("failed reproduce thresholds exit with code 4") {
  TempDir tmp("hjb_cli_thresh");
  // a horizon too short to reach the origin makes the final-norm check fail
  write_file(tmp.path / "cfg.json", R"({
    "problem": {"name": "vanderpol", "overrides": {"T": 0.2}},
    "out": ")" + (tmp.path / "rep").string() + R"("
  })");
  auto res = run("reproduce test3 --config " + (tmp.path / "cfg.json").string());
  INFO(res.output);
  CHECK(res.exit_code == 4);
  CHECK(res.output.find("FAIL") != std::string::npos);
  CHECK(fs::exists(tmp.path / "rep" / "checks.json"));
}

TEST_CASE("compare emits the two-method table") {
  TempDir tmp("hjb_cli_cmp");
  write_file(tmp.path / "cfg.json", R"({
    "problem": {"name": "eikonal_channel", "overrides": {"T": 0.25}},
    "grid": {"dx": 0.005},
    "feedback": {"gamma": 7.0},
    "out": ")" + (tmp.path / "cmp").string() + R"("
  })");
  auto res = run("compare --config " + (tmp.path / "cfg.json").string());
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("TSA") != std::string::npos);
  CHECK(res.output.find("Classic") != std::string::npos);
  const std::string csv = slurp(tmp.path / "cmp" / "compare.csv");
  CHECK(csv.rfind("method,v0,cost_plain,switches_plain,cost_inertia,switches_inertia\n", 0) ==
        0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  json report = json::parse(slurp(tmp.path / "cmp" / "compare.json"));
  CHECK(report.at("tsa").at("plain").at("cost").is_number());
  CHECK(report.at("classic").at("inertia").at("switches").is_number_integer());
}
