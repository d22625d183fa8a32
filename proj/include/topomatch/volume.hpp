#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "topomatch/mesh.hpp"

namespace topomatch {

/// Isotropic regular grid. Node/voxel (i, j, k) is centred at
/// `origin + spacing * (i, j, k)`; linear index is x-fastest.
struct GridGeometry {
  std::array<int, 3> dims{0, 0, 0};
  Vec3 origin = Vec3::Zero();
  double spacing = 1.0;

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(dims[0]) * (j + static_cast<std::size_t>(dims[1]) * k);
  }
  std::array<int, 3> coords(std::size_t idx) const {
    const int i = static_cast<int>(idx % dims[0]);
    const std::size_t rest = idx / dims[0];
    return {i, static_cast<int>(rest % dims[1]), static_cast<int>(rest / dims[1])};
  }
  Vec3 center(int i, int j, int k) const { return origin + spacing * Vec3(i, j, k); }
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }
  friend bool operator==(const GridGeometry& a, const GridGeometry& b) {
    return a.dims == b.dims && a.origin == b.origin && a.spacing == b.spacing;
  }
};

/// Binary occupancy grid (1 = inside the shape).
struct VoxelVolume {
  GridGeometry grid;
  std::vector<std::uint8_t> occupancy;

  std::size_t occupied_count() const;
};

/// Checks sizes, spacing and the presence of both occupied and empty voxels.
void validate_volume(const VoxelVolume& volume);

struct VoxelizeOptions {
  /// Empty voxel layers guaranteed around the occupied set (at least 1).
  int padding = 1;
  /// Accepted relative deviation of the occupied count from the target.
  double tolerance = 0.2;
};

/// Picks the spacing by bracketed search so the occupied count lands within
/// `tolerance` of `target_voxels`. Requires a closed, single-component mesh.
VoxelVolume voxelize(const TriMesh& mesh, std::size_t target_voxels, const VoxelizeOptions& options = {});

/// Centre-inside rasterisation at a fixed spacing. A voxel is occupied iff a
/// +x ray from its centre crosses the surface an odd number of times.
VoxelVolume voxelize_with_spacing(const TriMesh& mesh, double spacing, int padding = 1);

/// Ray-parity point-in-mesh test with the same degeneracy handling as
/// voxelization; `scale` sets the perturbation length.
bool inside_mesh(const TriMesh& mesh, const Vec3& point, double scale = 1.0);

/// Exact Euclidean distance (model units) from each occupied voxel centre to
/// the nearest empty voxel centre; zero on empty voxels.
std::vector<double> distance_transform(const VoxelVolume& volume);

/// Maximal inscribed radius: the largest value of `distance_transform`.
double compute_rho(const VoxelVolume& volume);

}  // namespace topomatch
