#include "topomatch/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "topomatch/errors.hpp"

namespace topomatch {

namespace {

constexpr double kPerturbation = 1e-4;  // ray-origin shift on degenerate hits, in voxels
constexpr int kMaxRetries = 16;

/// Orientation of `p` against the directed edge (u, v) in the yz-plane,
/// always evaluated from the lower vertex index so that the two faces
/// sharing an edge see exactly negated values.
double edge_function(const TriMesh& mesh, int u, int v, double y, double z) {
  const bool flip = u > v;
  if (flip) std::swap(u, v);
  const Vec3& a = mesh.vertices()[u];
  const Vec3& b = mesh.vertices()[v];
  const double w = (b.y() - a.y()) * (z - a.z()) - (b.z() - a.z()) * (y - a.y());
  return flip ? -w : w;
}

enum class Hit { Miss, Inside, Degenerate };

/// Intersects the +x line through (y, z) with face `f`.
Hit intersect(const TriMesh& mesh, int f, double y, double z, double& x_hit) {
  const Face& t = mesh.faces()[f];
  const double wa = edge_function(mesh, t[1], t[2], y, z);
  const double wb = edge_function(mesh, t[2], t[0], y, z);
  const double wc = edge_function(mesh, t[0], t[1], y, z);
  const bool has_neg = wa < 0 || wb < 0 || wc < 0;
  const bool has_pos = wa > 0 || wb > 0 || wc > 0;
  if (has_neg && has_pos) return Hit::Miss;
  if (wa == 0 || wb == 0 || wc == 0) {
    // On an edge or vertex of the projected triangle (or the face is parallel to the ray).
    return (has_neg || has_pos) ? Hit::Degenerate : Hit::Miss;
  }
  const double sum = wa + wb + wc;
  const auto& p = mesh.vertices();
  x_hit = (wa * p[t[0]].x() + wb * p[t[1]].x() + wc * p[t[2]].x()) / sum;
  return Hit::Inside;
}

/// Casts one line against a set of faces; false on a degenerate hit.
template <typename FaceRange>
bool cast_line(const TriMesh& mesh, const FaceRange& faces, double y, double z, std::vector<double>& hits) {
  hits.clear();
  for (int f : faces) {
    double x = 0.0;
    const Hit h = intersect(mesh, f, y, z, x);
    if (h == Hit::Degenerate) return false;
    if (h == Hit::Inside) hits.push_back(x);
  }
  return true;
}

Eigen::Vector2d perturbation_direction(int attempt) {
  const double angle = 0.7 + 2.1 * attempt;
  return {std::cos(angle), std::sin(angle)};
}

struct FaceBox {
  double ymin, ymax, zmin, zmax;
};

FaceBox yz_box(const TriMesh& mesh, int f) {
  const Face& t = mesh.faces()[f];
  const auto& p = mesh.vertices();
  FaceBox b{p[t[0]].y(), p[t[0]].y(), p[t[0]].z(), p[t[0]].z()};
  for (int k = 1; k < 3; ++k) {
    b.ymin = std::min(b.ymin, p[t[k]].y());
    b.ymax = std::max(b.ymax, p[t[k]].y());
    b.zmin = std::min(b.zmin, p[t[k]].z());
    b.zmax = std::max(b.zmax, p[t[k]].z());
  }
  return b;
}

/// Faces whose yz bounding box contains (y, z).
std::vector<int> faces_covering(const TriMesh& mesh, double y, double z) {
  std::vector<int> out;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const FaceBox b = yz_box(mesh, f);
    if (y >= b.ymin && y <= b.ymax && z >= b.zmin && z <= b.zmax) out.push_back(f);
  }
  return out;
}

/// Hits along the line at (y, z) using all faces, retrying with a shifted
/// origin while the line grazes an edge or vertex.
std::vector<double> robust_line_hits(const TriMesh& mesh, double y, double z, double scale) {
  std::vector<double> hits;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    double yy = y, zz = z;
    if (attempt > 0) {
      const Eigen::Vector2d d = perturbation_direction(attempt - 1);
      const double len = scale * kPerturbation * attempt;
      yy += len * d.x();
      zz += len * d.y();
    }
    if (cast_line(mesh, faces_covering(mesh, yy, zz), yy, zz, hits)) return hits;
  }
  throw PreconditionError("ray casting stayed degenerate after " + std::to_string(kMaxRetries) + " retries");
}

}  // namespace

std::size_t VoxelVolume::occupied_count() const {
  return static_cast<std::size_t>(std::count(occupancy.begin(), occupancy.end(), std::uint8_t{1}));
}

void validate_volume(const VoxelVolume& volume) {
  const auto& g = volume.grid;
  if (g.dims[0] <= 0 || g.dims[1] <= 0 || g.dims[2] <= 0) throw PreconditionError("volume: non-positive dims");
  if (!(g.spacing > 0.0)) throw PreconditionError("volume: spacing must be positive");
  if (volume.occupancy.size() != g.size()) throw PreconditionError("volume: occupancy size mismatch");
  const std::size_t occupied = volume.occupied_count();
  if (occupied == 0) throw PreconditionError("volume: no occupied voxel");
  if (occupied == volume.occupancy.size()) throw PreconditionError("volume: no empty voxel");
}

bool inside_mesh(const TriMesh& mesh, const Vec3& point, double scale) {
  const auto hits = robust_line_hits(mesh, point.y(), point.z(), scale);
  const auto beyond = std::count_if(hits.begin(), hits.end(), [&](double x) { return x > point.x(); });
  return beyond % 2 == 1;
}

VoxelVolume voxelize_with_spacing(const TriMesh& mesh, double spacing, int padding) {
  if (!(spacing > 0.0)) throw PreconditionError("voxelize: spacing must be positive");
  if (padding < 1) throw PreconditionError("voxelize: padding must be at least 1");
  if (mesh.empty()) throw PreconditionError("voxelize: empty mesh");

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = -lo;
  for (const Face& f : mesh.faces())
    for (int v : f) {
      lo = lo.cwiseMin(mesh.vertices()[v]);
      hi = hi.cwiseMax(mesh.vertices()[v]);
    }

  VoxelVolume vol;
  GridGeometry& g = vol.grid;
  g.spacing = spacing;
  for (int a = 0; a < 3; ++a) {
    const double extent = hi[a] - lo[a];
    const int covering = static_cast<int>(std::ceil(extent / spacing)) + 1;
    g.dims[a] = covering + 2 * padding;
    g.origin[a] = 0.5 * (lo[a] + hi[a]) - 0.5 * spacing * (g.dims[a] - 1);
  }
  vol.occupancy.assign(g.size(), 0);

  const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(ny) * nz);
  std::vector<char> degenerate(rows.size(), 0);

  for (int f = 0; f < mesh.face_count(); ++f) {
    const FaceBox b = yz_box(mesh, f);
    const int j0 = std::max(0, static_cast<int>(std::ceil((b.ymin - g.origin.y()) / spacing)));
    const int j1 = std::min(ny - 1, static_cast<int>(std::floor((b.ymax - g.origin.y()) / spacing)));
    const int k0 = std::max(0, static_cast<int>(std::ceil((b.zmin - g.origin.z()) / spacing)));
    const int k1 = std::min(nz - 1, static_cast<int>(std::floor((b.zmax - g.origin.z()) / spacing)));
    for (int k = k0; k <= k1; ++k) {
      const double z = g.origin.z() + spacing * k;
      for (int j = j0; j <= j1; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * k;
        if (degenerate[row]) continue;
        const double y = g.origin.y() + spacing * j;
        double x = 0.0;
        const Hit h = intersect(mesh, f, y, z, x);
        if (h == Hit::Inside) rows[row].push_back(x);
        else if (h == Hit::Degenerate) degenerate[row] = 1;
      }
    }
  }

  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * k;
      auto& hits = rows[row];
      if (degenerate[row])
        hits = robust_line_hits(mesh, g.origin.y() + spacing * j, g.origin.z() + spacing * k, spacing);
      if (hits.empty()) continue;
      std::sort(hits.begin(), hits.end());
      // Parity of the crossings strictly to the right of each centre.
      std::size_t next = 0;
      for (int i = 0; i < nx; ++i) {
        const double x = g.origin.x() + spacing * i;
        while (next < hits.size() && hits[next] <= x) ++next;
        if ((hits.size() - next) % 2 == 1) vol.occupancy[g.index(i, j, k)] = 1;
      }
    }
  }
  return vol;
}

VoxelVolume voxelize(const TriMesh& mesh, std::size_t target_voxels, const VoxelizeOptions& options) {
  if (target_voxels == 0) throw PreconditionError("voxelize: target voxel count must be positive");
  const TopologyReport topo = analyze_topology(mesh);
  if (!topo.is_closed) throw PreconditionError("voxelize: mesh is not closed");
  if (topo.component_count != 1) throw PreconditionError("voxelize: mesh has more than one component");
  const double volume = std::abs(mesh.signed_volume());
  if (!(volume > 0.0)) throw PreconditionError("voxelize: mesh encloses zero volume");

  const double target = static_cast<double>(target_voxels);
  double h = std::cbrt(volume / target);
  double too_fine = 0.0;                                   // spacing known to give too many voxels
  double too_coarse = std::numeric_limits<double>::infinity();  // ... too few
  for (int iter = 0; iter < 60; ++iter) {
    VoxelVolume vol = voxelize_with_spacing(mesh, h, options.padding);
    const double count = static_cast<double>(vol.occupied_count());
    if (std::abs(count - target) <= options.tolerance * target && count > 0) return vol;
    if (count > target) too_fine = std::max(too_fine, h);
    else too_coarse = std::min(too_coarse, h);
    double next = count > 0 ? h * std::cbrt(count / target) : 0.5 * h;
    if (!(next > too_fine && next < too_coarse))
      next = std::isfinite(too_coarse) && too_fine > 0.0 ? std::sqrt(too_fine * too_coarse)
             : std::isfinite(too_coarse)                  ? 0.5 * too_coarse
                                                          : 2.0 * too_fine;
    h = next;
  }
  throw PreconditionError("voxelize: could not reach " + std::to_string(target_voxels) + " voxels within tolerance");
}

namespace {

/// Exact squared distance transform along one line (Felzenszwalb and
/// Huttenlocher lower envelope). Infinite entries are not sites.
void distance_1d(const double* f, double* out, int n, std::vector<int>& v, std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  v.resize(n);
  z.resize(n + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    // z[0] is -inf, so k never drops below zero.
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(out, out + n, inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = q - v[j];
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

std::vector<double> distance_transform(const VoxelVolume& volume) {
  validate_volume(volume);
  const GridGeometry& g = volume.grid;
  const int n[3] = {g.dims[0], g.dims[1], g.dims[2]};
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n[0]), static_cast<std::size_t>(n[0]) * n[1]};

  std::vector<double> d2(g.size());
  for (std::size_t i = 0; i < d2.size(); ++i)
    d2[i] = volume.occupancy[i] ? std::numeric_limits<double>::infinity() : 0.0;

  std::vector<double> line_in, line_out, z;
  std::vector<int> v;
  for (int axis = 0; axis < 3; ++axis) {
    const int len = n[axis];
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    line_in.resize(len);
    line_out.resize(len);
    for (int jb = 0; jb < n[b]; ++jb) {
      for (int ja = 0; ja < n[a]; ++ja) {
        const std::size_t base = ja * stride[a] + jb * stride[b];
        for (int q = 0; q < len; ++q) line_in[q] = d2[base + q * stride[axis]];
        distance_1d(line_in.data(), line_out.data(), len, v, z);
        for (int q = 0; q < len; ++q) d2[base + q * stride[axis]] = line_out[q];
      }
    }
  }
  for (double& x : d2) x = std::sqrt(x) * g.spacing;
  return d2;
}

double compute_rho(const VoxelVolume& volume) {
  const auto dist = distance_transform(volume);
  return *std::max_element(dist.begin(), dist.end());
}

}  // namespace topomatch
