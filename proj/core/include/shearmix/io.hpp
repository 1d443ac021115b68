#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "shearmix/field.hpp"

namespace shearmix {

/// Shortest round-trip decimal form of v ("%.17g"), so CSV output is a pure
/// function of the bits.
std::string format_double(double v);

/// Sidecar metadata for a raw field snapshot.
struct FieldMeta {
  int n = 0;
  double time = 0.0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
};

/// Writes `<path>` as n*n little-endian float64 values (row major, row j is
/// x2 = j / n) and `<path>.json` with {n, time, kappa, seed}.
void write_field_snapshot(const std::filesystem::path& path, const ScalarField& f,
                          const FieldMeta& meta);

/// Reads a snapshot written by write_field_snapshot. Throws std::runtime_error
/// on missing files or size mismatch.
ScalarField read_field_snapshot(const std::filesystem::path& path, FieldMeta* meta = nullptr);

/// Header `t,l1,l2,linf,h_alpha`.
void write_norm_series_csv(const std::filesystem::path& path, const NormSeries& series);
std::string norm_series_csv(const NormSeries& series);

/// Dense little-endian float64 matrix plus `<path>.json` sidecar with
/// {rows, cols} and any extra JSON members given in `extra_json` (an object).
void write_matrix_binary(const std::filesystem::path& path, std::span<const double> values,
                         int rows, int cols, const std::string& extra_json = "{}");

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace shearmix
