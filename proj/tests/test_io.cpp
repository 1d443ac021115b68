#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "shearmix/io.hpp"
#include "shearmix/rng.hpp"

using namespace shearmix;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "shearmix_test_io" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  RngStream rng(1, 0);
  for (int k = 0; k < 1000; ++k) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, 20.0 * (rng.uniform() - 0.5));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("field snapshots round-trip through raw float64 and a sidecar") {
  const fs::path dir = scratch_dir("field");
  RngStream rng(2, 0);
  ScalarField f(16);
  for (double& v : f.values()) v = rng.normal();
  f.at(3, 0) = std::numeric_limits<double>::denorm_min();
  write_field_snapshot(dir / "rho.bin", f, {16, 12.0, 1e-4, 77});

  CHECK(fs::file_size(dir / "rho.bin") == 16u * 16u * 8u);
  std::ifstream raw(dir / "rho.bin", std::ios::binary);
  unsigned char bytes[8];
  raw.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t word = 0;
  for (int b = 7; b >= 0; --b) word = (word << 8) | bytes[b];  // little endian
  double first;
  std::memcpy(&first, &word, 8);
  CHECK(first == f.at(0, 0));

  const auto meta_json = nlohmann::json::parse(read_text_file(dir / "rho.bin.json"));
  CHECK(meta_json.at("n").get<int>() == 16);
  CHECK(meta_json.at("time").get<double>() == 12.0);
  CHECK(meta_json.at("kappa").get<double>() == 1e-4);
  CHECK(meta_json.at("seed").get<std::uint64_t>() == 77);

  FieldMeta meta;
  const ScalarField back = read_field_snapshot(dir / "rho.bin", &meta);
  CHECK(meta.n == 16);
  CHECK(meta.seed == 77);
  CHECK(meta.kappa == 1e-4);
  REQUIRE(back.n() == 16);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(back.values()[k] == f.values()[k]);

  CHECK_THROWS_AS(read_field_snapshot(dir / "missing.bin"), std::runtime_error);
  write_text_file(dir / "short.bin", "abc");
  write_text_file(dir / "short.bin.json", R"({"n": 16, "time": 0, "kappa": 0, "seed": 0})");
  CHECK_THROWS_AS(read_field_snapshot(dir / "short.bin"), std::runtime_error);
}

TEST_CASE("norm series CSV") {
  NormSeries s;
  s.sobolev_order = -1.0;
  s.push({0.0, 1.0, 0.5, 2.0, {0.25}});
  s.push({2.0, 0.5, 0.25, 1.0, {0.125}});
  const std::string csv = norm_series_csv(s);
  CHECK(csv == "t,l1,l2,linf,h_alpha\n0,1,0.5,2,0.25\n2,0.5,0.25,1,0.125\n");
  const fs::path dir = scratch_dir("csv");
  write_norm_series_csv(dir / "nested" / "norms.csv", s);
  CHECK(read_text_file(dir / "nested" / "norms.csv") == csv);
}

TEST_CASE("matrix binary with sidecar") {
  const fs::path dir = scratch_dir("matrix");
  const std::vector<double> m{1.0, 0.0, 0.25, 0.75, 0.5, 0.5};
  write_matrix_binary(dir / "P.bin", m, 2, 3, R"({"kappa": 0.001})");
  CHECK(fs::file_size(dir / "P.bin") == 6u * 8u);
  const auto j = nlohmann::json::parse(read_text_file(dir / "P.bin.json"));
  CHECK(j.at("rows").get<int>() == 2);
  CHECK(j.at("cols").get<int>() == 3);
  CHECK(j.at("kappa").get<double>() == 0.001);
  CHECK_THROWS(write_matrix_binary(dir / "bad.bin", m, 4, 4));
}
