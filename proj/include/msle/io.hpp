#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "msle/loewner.hpp"
#include "msle/sde.hpp"

namespace msle::io {

// FNV-1a 64 over the file bytes, hex encoded
std::string digest_hex(const std::filesystem::path& file);
std::uint64_t digest_bytes(std::span<const char> bytes);

// write-to-temp + rename
void atomic_write(const std::filesystem::path& file, const std::string& content);

std::string format_double(double v);  // shortest round-trip-safe decimal

// CSV emission; every file carries a comment header naming parameters
std::string driving_paths_csv(const sde::DrivingPaths& paths);
std::string trace_csv(const loewner::Trace& trace);
std::string grid_mask_csv(const loewner::SwallowGridResult& grid);

// binary columnar record: magic, n, steps, times, then column-major values
std::string driving_paths_binary(const sde::DrivingPaths& paths);
sde::DrivingPaths driving_paths_from_binary(std::span<const char> bytes);

std::vector<loewner::Trace> traces_from_csv(const std::string& content);

struct SvgStyle {
  double width = 640.0, height = 480.0;
  std::string caption;
};
std::string traces_svg(std::span<const loewner::Trace> traces, const SvgStyle& style = {});
std::string heatmap_svg(const std::vector<double>& values, int nx, int ny,
                        const SvgStyle& style = {});

} // namespace msle::io
