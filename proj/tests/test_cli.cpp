// End-to-end tests of the command-line tool: exit codes, output files,
// determinism. Spawns the real binary (path injected by the build).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const std::string kCli = XDIFF_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("xdiff_cli_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

std::string write_config(const TempDir& dir, const std::string& name, const Json& j) {
  const std::string p = (dir.path / name).string();
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("check: all-pass configuration exits 0") {
  TempDir dir("pass");
  const Json cfg = {
      {"model", {{"name", "thin_film"}}},
      {"experiment",
       {{"checks", {"H3", "H4ii", "H5", "LemG", "GPL"}}, {"samples", 1500},
        {"pairs", 1500}, {"seed", 11}}},
      {"output", {{"dir", (dir.path / "out").string()}}}};
  const std::string cp = write_config(dir, "cfg.json", cfg);
  CHECK(run("check --config " + cp) == 0);

  const Json reports = Json::parse(slurp(dir.path / "out" / "reports.json"));
  CHECK(reports["reports"].size() == 5);
  for (const auto& r : reports["reports"]) CHECK(r["verdict"] == "PASS");
}

TEST_CASE("check: known-failing boundedness exits 2 with a near-face witness") {
  TempDir dir("fail");
  const Json cfg = {{"model", {{"name", "ion_channel"}}},
                    {"experiment", {{"checks", {"H4ii"}}, {"samples", 1500}, {"seed", 3}}},
                    {"output", {{"dir", (dir.path / "out").string()}}}};
  const std::string cp = write_config(dir, "cfg.json", cfg);
  CHECK(run("check --config " + cp) == 2);
  const Json reports = Json::parse(slurp(dir.path / "out" / "reports.json"));
  CHECK(reports["reports"][0]["verdict"] == "FAIL");
  CHECK(reports["reports"][0]["witness"][0].get<double>() <= 0.05);
}

TEST_CASE("check: empty check list is a configuration error") {
  TempDir dir("empty");
  const Json cfg = {{"model", {{"name", "scalar"}}},
                    {"experiment", {{"checks", Json::array()}}},
                    {"output", {{"dir", (dir.path / "out").string()}}}};
  CHECK(run("check --config " + write_config(dir, "cfg.json", cfg)) == 1);
  CHECK(run("check --config /nonexistent/cfg.json") == 1);
}

TEST_CASE("simulate: T = tau produces exactly two time blocks") {
  TempDir dir("sim");
  const Json cfg = {{"model", {{"name", "scalar"}}},
                    {"solver", {{"tau", 1e-3}, {"T", 1e-3}, {"cells", 16}}},
                    {"output", {{"dir", (dir.path / "out").string()}}}};
  CHECK(run("simulate --config " + write_config(dir, "cfg.json", cfg)) == 0);

  std::set<std::string> stamps;
  std::istringstream csv(slurp(dir.path / "out" / "trajectory.csv"));
  std::string line;
  bool header_seen = false;
  while (std::getline(csv, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      CHECK(line == "t,x,u1,u0");
      header_seen = true;
      continue;
    }
    stamps.insert(line.substr(0, line.find(',')));
  }
  CHECK(stamps.size() == 2);

  const Json ledger = Json::parse(slurp(dir.path / "out" / "ledger.json"));
  CHECK(ledger["status"] == "ok");
  CHECK(ledger["ledger"]["steps"].size() == 1);
}

TEST_CASE("simulate: ledger entropy column is non-increasing") {
  TempDir dir("led");
  const Json cfg = {{"model", {{"name", "maxwell_stefan"}}},
                    {"solver", {{"tau", 1e-3}, {"T", 0.03}, {"cells", 32}}},
                    {"output", {{"dir", (dir.path / "out").string()}}}};
  CHECK(run("simulate --config " + write_config(dir, "cfg.json", cfg)) == 0);
  const Json ledger = Json::parse(slurp(dir.path / "out" / "ledger.json"));
  double prev = ledger["ledger"]["initial"]["entropy"].get<double>();
  for (const auto& s : ledger["ledger"]["steps"]) {
    CHECK(s["entropy"].get<double>() <= prev + 1e-12);
    prev = s["entropy"].get<double>();
  }
}

TEST_CASE("simulate: unwritable output directory exits 1") {
  TempDir dir("rofail");
  const Json cfg = {{"model", {{"name", "scalar"}}},
                    {"solver", {{"tau", 1e-3}, {"T", 1e-3}, {"cells", 16}}},
                    {"output", {{"dir", "/proc/definitely/not/writable"}}}};
  CHECK(run("simulate --config " + write_config(dir, "cfg.json", cfg)) == 1);
}

TEST_CASE("twin: delta = 0 with identical configurations") {
  TempDir dir("twin0");
  const Json cfg = {{"model", {{"name", "tumor"}}},
                    {"solver", {{"tau", 1e-3}, {"T", 0.01}, {"cells", 16}}},
                    {"experiment",
                     {{"delta", 0.0}, {"refine_tau", 1}, {"refine_cells", 1}}},
                    {"output", {{"dir", (dir.path / "out").string()}}}};
  CHECK(run("twin --config " + write_config(dir, "cfg.json", cfg)) == 0);
  const Json twin = Json::parse(slurp(dir.path / "out" / "twin.json"));
  for (const auto& h : twin["result"]["H_series"])
    CHECK(std::abs(h.get<double>()) <= 1e-10);
}

TEST_CASE("twin: negative delta is a configuration error") {
  TempDir dir("twinneg");
  const Json cfg = {{"model", {{"name", "tumor"}}},
                    {"experiment", {{"delta", -0.5}}},
                    {"output", {{"dir", (dir.path / "out").string()}}}};
  CHECK(run("twin --config " + write_config(dir, "cfg.json", cfg)) == 1);
}

TEST_CASE("sweep: delta axis reproduces the quadratic scaling") {
  TempDir dir("sweep");
  const Json cfg = {{"model", {{"name", "maxwell_stefan"}}},
                    {"solver", {{"tau", 2e-3}, {"T", 0.01}, {"cells", 16}}},
                    {"experiment",
                     {{"axis", {{"name", "delta"}, {"values", {1e-3, 1e-2}}}}}},
                    {"output", {{"dir", (dir.path / "out").string()}}}};
  CHECK(run("sweep --config " + write_config(dir, "cfg.json", cfg)) == 0);

  std::istringstream csv(slurp(dir.path / "out" / "sweep.csv"));
  std::string line;
  std::vector<double> h0;
  while (std::getline(csv, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("axis,", 0) == 0) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');  // axis
    std::getline(row, cell, ',');  // value
    std::getline(row, cell, ',');  // H0
    h0.push_back(std::stod(cell));
  }
  REQUIRE(h0.size() == 2);
  CHECK(h0[1] / h0[0] >= 80.0);
  CHECK(h0[1] / h0[0] <= 120.0);
}

TEST_CASE("sweep: missing axis is a configuration error") {
  TempDir dir("sweepbad");
  const Json cfg = {{"model", {{"name", "scalar"}}},
                    {"output", {{"dir", (dir.path / "out").string()}}}};
  CHECK(run("sweep --config " + write_config(dir, "cfg.json", cfg)) == 1);
}

TEST_CASE("outputs are byte-identical across reruns (timestamp aside)") {
  TempDir dir("det");
  const Json cfg = {{"model", {{"name", "multiphase"}}},
                    {"experiment", {{"checks", {"H3", "GPL"}}, {"samples", 500}, {"seed", 5}}},
                    {"output", {{"dir", (dir.path / "out").string()}}}};
  const std::string cp = write_config(dir, "cfg.json", cfg);
  CHECK(run("check --config " + cp) == 0);
  const std::string csv_first = slurp(dir.path / "out" / "reports.csv");
  Json json_first = Json::parse(slurp(dir.path / "out" / "reports.json"));

  CHECK(run("check --config " + cp) == 0);  // same config, same directory
  CHECK(slurp(dir.path / "out" / "reports.csv") == csv_first);
  Json json_second = Json::parse(slurp(dir.path / "out" / "reports.json"));
  json_first["header"].erase("timestamp");
  json_second["header"].erase("timestamp");
  CHECK(json_first == json_second);
}

TEST_CASE("toml configuration surface is accepted") {
  TempDir dir("toml");
  const std::string p = (dir.path / "cfg.toml").string();
  std::ofstream(p) << "[model]\nname = \"scalar\"\n[experiment]\nchecks = [\"H3\"]\n"
                   << "samples = 300\n[output]\ndir = \"" << (dir.path / "out").string()
                   << "\"\n";
  CHECK(run("check --config " + p) == 0);
}
