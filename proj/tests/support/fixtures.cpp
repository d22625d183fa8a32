#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "topomatch/marching_cubes.hpp"

namespace fixtures {

using topomatch::Face;

TriMesh tetrahedron() {
  return TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}});
}

TriMesh octahedron(double scale, const Vec3& offset) {
  std::vector<Vec3> v = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (auto& p : v) p = p * scale + offset;
  return TriMesh(v, {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}});
}

TriMesh box(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) v.emplace_back(i ? hi.x() : lo.x(), j ? hi.y() : lo.y(), k ? hi.z() : lo.z());
  // Vertex id = i + 2j + 4k.
  return TriMesh(v, {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                     {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}});
}

TriMesh icosphere(int subdivisions, double radius, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                         {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                         {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& p : v) p.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    for (const auto& tri : f) {
      const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  for (auto& p : v) p = center + radius * p;
  return TriMesh(v, f);
}

TriMesh torus(double major, double minor, int nu, int nv) {
  std::vector<Vec3> v;
  std::vector<Face> f;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double u = 2 * M_PI * i / nu, w = 2 * M_PI * j / nv;
      v.emplace_back((major + minor * std::cos(w)) * std::cos(u), (major + minor * std::cos(w)) * std::sin(u),
                     minor * std::sin(w));
    }
  auto id = [&](int i, int j) { return ((i + nu) % nu) * nv + (j + nv) % nv; };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return TriMesh(v, f);
}

TriMesh strip(int segments, double length) {
  std::vector<Vec3> v;
  std::vector<Face> f;
  for (int i = 0; i <= segments; ++i) {
    v.emplace_back(length * i, 0, 0);
    v.emplace_back(length * i, 1, 0);
  }
  for (int i = 0; i < segments; ++i) {
    f.push_back({2 * i, 2 * i + 2, 2 * i + 1});
    f.push_back({2 * i + 1, 2 * i + 2, 2 * i + 3});
  }
  return TriMesh(v, f);
}

TriMesh implicit_surface(const std::function<double(const Vec3&)>& f, const Vec3& lo, const Vec3& hi, double step) {
  topomatch::GridGeometry g;
  g.spacing = step;
  g.origin = lo - Vec3::Constant(step);
  for (int a = 0; a < 3; ++a) g.dims[a] = static_cast<int>(std::ceil((hi[a] - lo[a]) / step)) + 3;
  std::vector<double> values(g.size());
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        const bool border = i == 0 || j == 0 || k == 0 || i + 1 == g.dims[0] || j + 1 == g.dims[1] ||
                            k + 1 == g.dims[2];
        values[g.index(i, j, k)] = border ? -1.0 : f(g.center(i, j, k));
      }
  return topomatch::largest_component(topomatch::marching_cubes(g, values, 0.0));
}

double capsule(const Vec3& p, const Vec3& a, const Vec3& b, double r) {
  const Vec3 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return r - (p - (a + t * ab)).norm();
}

TriMesh sphere(double radius, double step) {
  const Vec3 ext = Vec3::Constant(radius + 2 * step);
  return implicit_surface([radius](const Vec3& p) { return radius - p.norm(); }, -ext, ext, step);
}

TriMesh sphere_with_handle(double radius, double tube, double step) {
  const double ring = 0.5 * radius;
  const Vec3 center(radius, 0, 0);
  auto f = [=](const Vec3& p) {
    const Vec3 q = p - center;
    const double in_plane = std::hypot(q.x(), q.z()) - ring;
    const double handle = tube - std::hypot(in_plane, q.y());
    return std::max(radius - p.norm(), handle);
  };
  const double m = 2 * step;
  return implicit_surface(f, Vec3(-radius - m, -radius - m, -radius - m),
                          Vec3(radius + ring + tube + m, radius + m, radius + m), step);
}

TriMesh body(bool bridge, double step) {
  const Vec3 l_hand(-18, -6, 0), l_foot(-8, -3, -28);
  auto f = [=](const Vec3& p) {
    double v = capsule(p, {0, 0, -10}, {0, 0, 10}, 9.0);
    v = std::max(v, 6.5 - (p - Vec3(1, 0, 21)).norm());
    v = std::max(v, capsule(p, {4, 0, 6}, {22, 3, 12}, 4.0));
    v = std::max(v, capsule(p, {-4, 0, 6}, l_hand, 4.5));
    v = std::max(v, capsule(p, {3, 0, -10}, {7, 2, -32}, 4.5));
    v = std::max(v, capsule(p, {-3, 0, -10}, l_foot, 5.0));
    if (bridge) v = std::max(v, capsule(p, l_hand, l_foot, 1.6));
    return v;
  };
  return implicit_surface(f, Vec3(-24, -12, -38), Vec3(28, 12, 30), step);
}

topomatch::VoxelVolume block_volume(std::array<int, 3> dims, std::array<int, 3> lo, std::array<int, 3> hi, double h) {
  topomatch::VoxelVolume vol;
  vol.grid.dims = dims;
  vol.grid.spacing = h;
  vol.occupancy.assign(vol.grid.size(), 0);
  for (int k = lo[2]; k < hi[2]; ++k)
    for (int j = lo[1]; j < hi[1]; ++j)
      for (int i = lo[0]; i < hi[0]; ++i) vol.occupancy[vol.grid.index(i, j, k)] = 1;
  return vol;
}

TriMesh rigid_transform(const TriMesh& mesh, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  const Vec3 shift(n(rng) * 10, n(rng) * 10, n(rng) * 10);
  std::vector<Vec3> v = mesh.vertices();
  for (auto& p : v) p = q * p + shift;
  return TriMesh(v, mesh.faces());
}

TriMesh permute_vertices(const TriMesh& mesh, std::uint32_t seed) {
  std::vector<int> perm(mesh.vertex_count());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Vec3> v(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) v[perm[i]] = mesh.vertices()[i];
  std::vector<Face> f = mesh.faces();
  for (auto& tri : f)
    for (int& x : tri) x = perm[x];
  return TriMesh(v, f);
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("topomatch_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
