#include "shearmix/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace shearmix {

using nlohmann::json;

namespace {

std::uint64_t to_little_endian(std::uint64_t v) noexcept {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xFFULL) << (8 * (7 - b));
    return r;
  }
}

void write_doubles(const std::filesystem::path& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (double v : values) {
    const std::uint64_t le = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &le, 8);
    out.write(bytes, 8);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_field_snapshot(const std::filesystem::path& path, const ScalarField& f,
                          const FieldMeta& meta) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_doubles(path, f.values());
  json side = {{"n", f.n()}, {"time", meta.time}, {"kappa", meta.kappa}, {"seed", meta.seed}};
  write_text_file(sidecar(path), side.dump(2) + "\n");
}

ScalarField read_field_snapshot(const std::filesystem::path& path, FieldMeta* meta) {
  const json side = json::parse(read_text_file(sidecar(path)));
  const int n = side.at("n").get<int>();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<double> values(static_cast<std::size_t>(n) * n);
  for (double& v : values) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw std::runtime_error("snapshot truncated: " + path.string());
    std::uint64_t le;
    std::memcpy(&le, bytes, 8);
    v = std::bit_cast<double>(to_little_endian(le));
  }
  if (meta) {
    meta->n = n;
    meta->time = side.value("time", 0.0);
    meta->kappa = side.value("kappa", 0.0);
    meta->seed = side.value("seed", std::uint64_t{0});
  }
  return ScalarField(n, std::move(values));
}

std::string norm_series_csv(const NormSeries& series) {
  std::string out = "t,l1,l2,linf,h_alpha\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    out += format_double(series.times[k]) + ',' + format_double(series.l1[k]) + ',' +
           format_double(series.l2[k]) + ',' + format_double(series.linf[k]) + ',' +
           format_double(series.sobolev[k]) + '\n';
  }
  return out;
}

void write_norm_series_csv(const std::filesystem::path& path, const NormSeries& series) {
  write_text_file(path, norm_series_csv(series));
}

void write_matrix_binary(const std::filesystem::path& path, std::span<const double> values,
                         int rows, int cols, const std::string& extra_json) {
  if (values.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("write_matrix_binary: size mismatch");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_doubles(path, values);
  json side = json::parse(extra_json);
  side["rows"] = rows;
  side["cols"] = cols;
  side["dtype"] = "float64-le";
  write_text_file(sidecar(path), side.dump(2) + "\n");
}

}  // namespace shearmix
