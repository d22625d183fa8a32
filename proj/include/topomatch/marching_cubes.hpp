#pragma once

#include <span>

#include "topomatch/mesh.hpp"
#include "topomatch/volume.hpp"

namespace topomatch {

/// Iso-surface of a node-sampled scalar grid (nodes at voxel centres).
///
/// A node is positive iff its value is strictly greater than `iso`. Each
/// cell's contour is traced face by face: on a face with four crossings the
/// positive corners are joined iff a0*a2 > a1*a3 (asymptotic decider, with
/// a0, a2 the positive corners' values minus `iso`); equality separates them.
/// Crossings closer than 1e-6 (edge parameter) to a node are snapped onto it
/// and shared. Triangles face toward lower values unless
/// `normals_toward_higher` is set.
TriMesh marching_cubes(const GridGeometry& grid, std::span<const double> values, double iso,
                       bool normals_toward_higher = false);

}  // namespace topomatch
