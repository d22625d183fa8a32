#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "topomatch/mesh.hpp"
#include "topomatch/volume.hpp"

namespace fixtures {

using topomatch::TriMesh;
using topomatch::Vec3;

TriMesh tetrahedron();
TriMesh octahedron(double scale = 1.0, const Vec3& offset = Vec3::Zero());
/// Axis-aligned box [lo, hi] with 12 outward triangles.
TriMesh box(const Vec3& lo, const Vec3& hi);
TriMesh icosphere(int subdivisions, double radius = 1.0, const Vec3& center = Vec3::Zero());
/// Torus around the z axis, nu x nv quads split into triangles.
TriMesh torus(double major, double minor, int nu, int nv);
/// Flat strip of `segments` squares along x, unit width.
TriMesh strip(int segments, double length = 1.0);

/// Iso-surface {f > 0} of an implicit function sampled on a grid of `step`
/// covering [lo, hi]; largest component only.
TriMesh implicit_surface(const std::function<double(const Vec3&)>& f, const Vec3& lo, const Vec3& hi, double step);

/// Positive inside: r - distance to segment [a, b].
double capsule(const Vec3& p, const Vec3& a, const Vec3& b, double r);

/// Sphere of radius `radius` at the origin with a thin handle: a tube of
/// radius `tube` around a ring of radius 0.5 radius, centred at (radius, 0, 0)
/// in the xz-plane.
TriMesh sphere_with_handle(double radius, double tube, double step);
TriMesh sphere(double radius, double step);

/// Asymmetric humanoid from capsules. With `bridge`, a thin tube fuses the
/// left hand to the left foot (genus 1).
TriMesh body(bool bridge, double step = 0.5);

/// Solid block of occupied voxels [lo, hi) in a grid of `dims`, spacing `h`.
topomatch::VoxelVolume block_volume(std::array<int, 3> dims, std::array<int, 3> lo, std::array<int, 3> hi,
                                    double h = 1.0);

/// Random rotation + translation applied to every vertex.
TriMesh rigid_transform(const TriMesh& mesh, std::uint32_t seed);

/// Vertex order permuted (faces remapped).
TriMesh permute_vertices(const TriMesh& mesh, std::uint32_t seed);

/// Fresh scratch directory under the system temp path.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace fixtures
