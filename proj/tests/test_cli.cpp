#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "shearmix/io.hpp"
#include "cli.hpp"

using namespace shearmix;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "shearmix_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kSweepConfig = R"({
  "experiment": "mixing_sweep",
  "amplitude": 0.5,
  "kappa_list": [0.02, 0.01, 0.005, 0.0025],
  "seeds": [4, 5],
  "grid_size": 128,
  "sources_per_axis": 2,
  "n_max": 400
})";

}  // namespace

TEST_CASE("missing config exits 2 and names the path") {
  const Result r = run({"mixing-sweep", "--config", "/nonexistent/sweep.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("/nonexistent/sweep.json") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"exponent"}).code == 2);
  const Result help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("mixing-sweep") != std::string::npos);
}

TEST_CASE("experiment field must match the subcommand") {
  const fs::path dir = scratch_dir("mismatch");
  write_text_file(dir / "cfg.json", kSweepConfig);
  const Result r = run({"drift-cert", "--config", (dir / "cfg.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("does not match") != std::string::npos);

  write_text_file(dir / "bad.json", R"({"experiment": "mixing_sweep", "seeds": [1], "kappa_list": [0.1], "grid": 64})");
  const Result bad = run({"mixing-sweep", "--config", (dir / "bad.json").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("unknown config key \"grid\"") != std::string::npos);
}

TEST_CASE("mixing-sweep writes its artifacts and is thread-count independent") {
  const fs::path dir = scratch_dir("sweep");
  write_text_file(dir / "cfg.json", kSweepConfig);
  const std::string cfg = (dir / "cfg.json").string();
  const Result one = run({"mixing-sweep", "--config", cfg, "--out", (dir / "t1").string(),
                          "--threads", "1"});
  REQUIRE_MESSAGE(one.code == 0, one.err);
  const Result three = run({"mixing-sweep", "--config", cfg, "--out", (dir / "t3").string(),
                            "--threads", "3"});
  REQUIRE_MESSAGE(three.code == 0, three.err);

  for (const char* name : {"t_mix.csv", "fit.json"}) {
    REQUIRE(fs::exists(dir / "t1" / name));
    CHECK(read_text_file(dir / "t1" / name) == read_text_file(dir / "t3" / name));
  }
  const json manifest = json::parse(read_text_file(dir / "t1" / "manifest.json"));
  CHECK(manifest.at("subcommand") == "mixing-sweep");
  CHECK(manifest.at("threads") == 1);
  CHECK(manifest.at("config").at("seeds") == json::array({4, 5}));
  CHECK(manifest.at("outputs") == json::array({"t_mix.csv", "fit.json"}));
  CHECK(manifest.contains("version"));
  CHECK(manifest.contains("wall_time_seconds"));

  const json fit = json::parse(read_text_file(dir / "t1" / "fit.json"));
  CHECK(fit.contains("log_fit"));
  CHECK(fit.contains("inverse_fit"));
}

TEST_CASE("seed override replaces the config seeds") {
  const fs::path dir = scratch_dir("seed");
  write_text_file(dir / "cfg.json", R"({"experiment": "exponent", "amplitude": 2.0,
    "seeds": [1, 2], "n_steps": 200, "n_samples": 20})");
  const Result r = run({"exponent", "--config", (dir / "cfg.json").string(), "--seed", "9",
                        "--out", (dir / "o").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string csv = read_text_file(dir / "o" / "exponent.csv");
  CHECK(csv.find("\n9,2,") != std::string::npos);
  CHECK(csv.find("\n1,") == std::string::npos);
}
