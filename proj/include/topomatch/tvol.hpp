#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "topomatch/volume.hpp"

namespace topomatch {

/// TVOL1 volume files: one ASCII header line
///     TVOL1 nx ny nz ox oy oz h
/// followed by nx*ny*nz values, x fastest, either as bytes {0,1}
/// (occupancy) or as little-endian IEEE-754 doubles (fields). The payload
/// kind is implied by its length.
struct TvolFile {
  GridGeometry grid;
  std::variant<std::vector<std::uint8_t>, std::vector<double>> data;

  bool is_field() const { return std::holds_alternative<std::vector<double>>(data); }
};

void write_tvol(const std::filesystem::path& path, const GridGeometry& grid, const std::vector<std::uint8_t>& occupancy);
void write_tvol(const std::filesystem::path& path, const GridGeometry& grid, const std::vector<double>& values);
TvolFile read_tvol(const std::filesystem::path& path);

void save_volume(const std::filesystem::path& path, const VoxelVolume& volume);
/// Throws ParseError when the file holds a field instead of occupancy.
VoxelVolume load_volume(const std::filesystem::path& path);

}  // namespace topomatch
