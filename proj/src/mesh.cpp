#include "topomatch/mesh.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <Eigen/Geometry>

#include "topomatch/errors.hpp"
#include "union_find.hpp"

namespace topomatch {

namespace {

std::unique_ptr<const MeshAdjacency> build_adjacency(const std::vector<Vec3>& vertices,
                                                     const std::vector<Face>& faces) {
  auto adj = std::make_unique<MeshAdjacency>();
  const int nv = static_cast<int>(vertices.size());
  const int nf = static_cast<int>(faces.size());

  auto& edges = adj->edges;
  edges.reserve(3 * static_cast<std::size_t>(nf));
  for (const Face& f : faces) {
    for (int k = 0; k < 3; ++k) {
      int a = f[k], b = f[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.push_back({a, b});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  const int ne = static_cast<int>(edges.size());

  adj->edge_face_offsets.assign(ne + 1, 0);
  std::vector<int> face_edge(3 * static_cast<std::size_t>(nf));
  for (int fi = 0; fi < nf; ++fi) {
    for (int k = 0; k < 3; ++k) {
      const int e = adj->edge_index(faces[fi][k], faces[fi][(k + 1) % 3]);
      face_edge[3 * fi + k] = e;
      ++adj->edge_face_offsets[e + 1];
    }
  }
  std::partial_sum(adj->edge_face_offsets.begin(), adj->edge_face_offsets.end(),
                   adj->edge_face_offsets.begin());
  adj->edge_faces.resize(adj->edge_face_offsets.back());
  {
    std::vector<int> cursor(adj->edge_face_offsets.begin(), adj->edge_face_offsets.end() - 1);
    for (int fi = 0; fi < nf; ++fi)
      for (int k = 0; k < 3; ++k) adj->edge_faces[cursor[face_edge[3 * fi + k]]++] = fi;
  }

  adj->vertex_face_offsets.assign(nv + 1, 0);
  for (const Face& f : faces)
    for (int v : f) ++adj->vertex_face_offsets[v + 1];
  std::partial_sum(adj->vertex_face_offsets.begin(), adj->vertex_face_offsets.end(),
                   adj->vertex_face_offsets.begin());
  adj->vertex_faces.resize(adj->vertex_face_offsets.back());
  {
    std::vector<int> cursor(adj->vertex_face_offsets.begin(), adj->vertex_face_offsets.end() - 1);
    for (int fi = 0; fi < nf; ++fi)
      for (int v : faces[fi]) adj->vertex_faces[cursor[v]++] = fi;
  }

  adj->neighbor_offsets.assign(nv + 1, 0);
  for (const auto& e : edges) {
    ++adj->neighbor_offsets[e[0] + 1];
    ++adj->neighbor_offsets[e[1] + 1];
  }
  std::partial_sum(adj->neighbor_offsets.begin(), adj->neighbor_offsets.end(),
                   adj->neighbor_offsets.begin());
  adj->neighbors.resize(adj->neighbor_offsets.back());
  {
    std::vector<int> cursor(adj->neighbor_offsets.begin(), adj->neighbor_offsets.end() - 1);
    for (const auto& e : edges) {
      adj->neighbors[cursor[e[0]]++] = e[1];
      adj->neighbors[cursor[e[1]]++] = e[0];
    }
  }
  for (int v = 0; v < nv; ++v)
    std::sort(adj->neighbors.begin() + adj->neighbor_offsets[v],
              adj->neighbors.begin() + adj->neighbor_offsets[v + 1]);
  return adj;
}

}  // namespace

int MeshAdjacency::edge_index(int a, int b) const {
  if (a > b) std::swap(a, b);
  const std::array<int, 2> key{a, b};
  auto it = std::lower_bound(edges.begin(), edges.end(), key);
  if (it == edges.end() || *it != key) return -1;
  return static_cast<int>(it - edges.begin());
}

TriMesh::TriMesh() : cache_(std::make_shared<Cache>()) {}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)), cache_(std::make_shared<Cache>()) {
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
    const Face& f = faces_[fi];
    for (int v : f) {
      if (v < 0 || v >= nv)
        throw PreconditionError("face " + std::to_string(fi) + " references vertex " +
                                std::to_string(v) + " of " + std::to_string(nv));
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw PreconditionError("face " + std::to_string(fi) + " is degenerate (repeated index)");
  }
}

const MeshAdjacency& TriMesh::adjacency() const {
  std::call_once(cache_->once, [this] { cache_->data = build_adjacency(vertices_, faces_); });
  return *cache_->data;
}

double TriMesh::face_area(int f) const {
  const Face& t = faces_[f];
  return 0.5 * (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]).norm();
}

double TriMesh::area() const {
  double sum = 0.0;
  for (int f = 0; f < face_count(); ++f) sum += face_area(f);
  return sum;
}

double TriMesh::signed_volume() const {
  double sum = 0.0;
  for (const Face& t : faces_)
    sum += vertices_[t[0]].dot(vertices_[t[1]].cross(vertices_[t[2]]));
  return sum / 6.0;
}

TopologyReport analyze_topology(const TriMesh& mesh) {
  TopologyReport report;
  const auto& faces = mesh.faces();
  const int nf = mesh.face_count();
  const int nv = mesh.vertex_count();
  const MeshAdjacency& adj = mesh.adjacency();

  std::vector<char> referenced(nv, 0);
  for (const Face& f : faces)
    for (int v : f) referenced[v] = 1;
  report.vertex_count = static_cast<int>(std::count(referenced.begin(), referenced.end(), 1));
  report.edge_count = static_cast<int>(adj.edges.size());
  report.face_count = nf;
  report.euler_characteristic = report.vertex_count - report.edge_count + report.face_count;

  bool closed = nf > 0;
  bool manifold = true;
  // Corners (face, local vertex) around a vertex are merged across shared
  // edges; a manifold vertex ends up with a single corner group.
  detail::UnionFind corners(3 * nf);
  auto corner = [&](int f, int v) {
    const Face& t = faces[f];
    return 3 * f + (t[0] == v ? 0 : t[1] == v ? 1 : 2);
  };
  for (int e = 0; e < static_cast<int>(adj.edges.size()); ++e) {
    const int count = adj.edge_face_count(e);
    if (count != 2) closed = false;
    if (count > 2) {
      manifold = false;
      continue;
    }
    if (count == 2) {
      const int f1 = adj.edge_faces[adj.edge_face_offsets[e]];
      const int f2 = adj.edge_faces[adj.edge_face_offsets[e] + 1];
      for (int v : adj.edges[e]) corners.unite(corner(f1, v), corner(f2, v));
    }
  }
  if (manifold) {
    for (int v = 0; v < nv && manifold; ++v) {
      const int begin = adj.vertex_face_offsets[v], end = adj.vertex_face_offsets[v + 1];
      if (begin == end) continue;
      const int root = corners.find(corner(adj.vertex_faces[begin], v));
      for (int i = begin + 1; i < end; ++i) {
        if (corners.find(corner(adj.vertex_faces[i], v)) != root) {
          manifold = false;
          break;
        }
      }
    }
  }
  face_components(mesh, &report.component_count);

  report.is_closed = closed;
  report.is_manifold = manifold;
  const int chi = report.euler_characteristic;
  if (closed && manifold && report.component_count == 1 && chi % 2 == 0 && chi <= 2)
    report.genus = (2 - chi) / 2;
  return report;
}

std::vector<int> face_components(const TriMesh& mesh, int* component_count) {
  const auto& faces = mesh.faces();
  detail::UnionFind uf(mesh.vertex_count());
  for (const Face& f : faces) {
    uf.unite(f[0], f[1]);
    uf.unite(f[1], f[2]);
  }
  std::vector<int> label(mesh.vertex_count(), -1);
  std::vector<int> out(faces.size());
  int next = 0;
  for (std::size_t fi = 0; fi < faces.size(); ++fi) {
    const int root = uf.find(faces[fi][0]);
    if (label[root] < 0) label[root] = next++;
    out[fi] = label[root];
  }
  if (component_count) *component_count = next;
  return out;
}

TriMesh submesh(const TriMesh& mesh, std::span<const int> face_ids) {
  std::vector<int> remap(mesh.vertex_count(), -1);
  for (int f : face_ids)
    for (int v : mesh.faces()[f]) remap[v] = 0;
  std::vector<Vec3> vertices;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (remap[v] == 0) {
      remap[v] = static_cast<int>(vertices.size());
      vertices.push_back(mesh.vertices()[v]);
    }
  }
  std::vector<Face> faces;
  faces.reserve(face_ids.size());
  for (int f : face_ids) {
    const Face& t = mesh.faces()[f];
    faces.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

TriMesh largest_component(const TriMesh& mesh) {
  if (mesh.empty()) throw PreconditionError("largest_component: empty mesh");
  int count = 0;
  const std::vector<int> comp = face_components(mesh, &count);
  std::vector<int> faces_in(count, 0);
  std::vector<double> area(count, 0.0);
  std::vector<int> min_vertex(count, mesh.vertex_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const int c = comp[f];
    ++faces_in[c];
    area[c] += mesh.face_area(f);
    for (int v : mesh.faces()[f]) min_vertex[c] = std::min(min_vertex[c], v);
  }
  int best = 0;
  for (int c = 1; c < count; ++c) {
    if (faces_in[c] != faces_in[best]) {
      if (faces_in[c] > faces_in[best]) best = c;
    } else if (area[c] != area[best]) {
      if (area[c] > area[best]) best = c;
    } else if (min_vertex[c] < min_vertex[best]) {
      best = c;
    }
  }
  std::vector<int> keep;
  keep.reserve(faces_in[best]);
  for (int f = 0; f < mesh.face_count(); ++f)
    if (comp[f] == best) keep.push_back(f);
  return submesh(mesh, keep);
}

}  // namespace topomatch
