#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bicscat/commands.hpp"
#include "bicscat/config.hpp"
#include "bicscat/csv.hpp"
#include "doctest.h"

using namespace bicscat;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bicscat_test_" + name);
  fs::remove_all(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BICSCAT_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("configuration round trip") {
  const RunConfig defaults;
  CHECK(config_from_json(to_json(defaults)) == defaults);
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const auto [command, cfg] = preset(name);
    CHECK_NOTHROW(cfg.validate());
    const RunConfig back = config_from_json(to_json(cfg));
    CHECK(back == cfg);
    CHECK(to_json(back) == to_json(cfg));
  }
  CHECK(preset_names().size() == 12);
  CHECK_THROWS_AS(preset("paper-fig13"), InvalidConfig);
}

TEST_CASE("partial JSON keeps defaults") {
  const RunConfig cfg = config_from_json(R"({"lattice": {"asymmetry": 0.02}, "poles": {"state_filter": "all"}})");
  CHECK(cfg.lattice.asymmetry == 0.02);
  CHECK(cfg.lattice.well_depth == RunConfig{}.lattice.well_depth);
  CHECK(cfg.region == RunConfig{}.region);
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(config_from_json(R"({"lattice": {"depth": 1}})"), InvalidConfig);
  CHECK_THROWS_AS(config_from_json(R"({"unknown": {}})"), InvalidConfig);
  CHECK_THROWS_AS(config_from_json("{not json"), InvalidConfig);
  CHECK_THROWS_AS(config_from_json(R"({"region": {"fourier_cutoff": "eight"}})"), InvalidConfig);

  RunConfig cfg;
  cfg.region.half_width = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = RunConfig{};
  cfg.smatrix.energies.count = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = RunConfig{};
  cfg.poles.im_lo = 0.1;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = RunConfig{};
  cfg.poles.filter.kind = "nearest";
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg.poles.filter.kind = "largest";
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}

TEST_CASE("grids") {
  CHECK(Grid{0.0, 1.0, 5}.values() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(Grid{2.0, 3.0, 1}.values() == std::vector<double>{2.0});
  CHECK_THROWS_AS(Grid({1.0, 0.0, 4}).validate("g"), InvalidConfig);
}

TEST_CASE("number formatting and hashing") {
  CHECK(format_number(1.0) == "1.00000000000e+00");
  CHECK(format_number(-0.0) == "0.00000000000e+00");
  CHECK(format_number(-2.5e-7) == "-2.50000000000e-07");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("csv writer checks row width") {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  {
    CsvWriter w((dir / "t.csv").string(), {"a", "b"});
    w.row({1.0, std::string("x")});
    CHECK_THROWS(w.row({1.0}));
    CHECK(w.rows() == 1);
  }
  CHECK(slurp(dir / "t.csv") == "a,b\n1.00000000000e+00,x\n");
  fs::remove_all(dir);
}

TEST_CASE("reruns write byte-identical CSV") {
  RunConfig cfg;
  cfg.potential.x = {-1.0, 1.0, 21};
  cfg.potential.z = {-1.0, 1.0, 21};
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  const CommandResult ra = run_command("potential", cfg, a.string());
  const CommandResult rb = run_command("potential", cfg, b.string());
  CHECK(ra.ok);
  CHECK(slurp(a / "potential.csv") == slurp(b / "potential.csv"));
  CHECK(fs::exists(a / "potential.manifest.json"));
  CHECK_THROWS_AS(run_command("nonsense", cfg, a.string()), InvalidConfig);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("command-line exit codes") {
  const fs::path out = scratch("cli");
  CHECK(run_cli("--list-presets") == 0);
  CHECK(run_cli("nonsense") == 1);
  CHECK(run_cli("potential --config /nonexistent.json") == 1);
  CHECK(run_cli("potential --preset paper-fig99") == 1);
  CHECK(run_cli("--preset paper-fig1 --dump-config") == 0);
  CHECK(run_cli("--preset paper-fig1 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "potential.csv"));

  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << R"({"region": {"half_width": 0}})";
  CHECK(run_cli("potential --config " + bad.string()) == 1);
  fs::remove_all(out);
}
