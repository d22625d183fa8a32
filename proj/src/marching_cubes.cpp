#include "topomatch/marching_cubes.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "topomatch/errors.hpp"

namespace topomatch {

namespace {

constexpr double kSnap = 1e-6;

constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
// Corners of each cell face, counter-clockwise seen from outside the cell.
constexpr int kFace[6][4] = {{0, 4, 7, 3}, {1, 2, 6, 5}, {0, 1, 5, 4},
                             {3, 7, 6, 2}, {0, 3, 2, 1}, {4, 5, 6, 7}};

struct Tables {
  int edge_of[8][8];
  int face_edges[6][4];      // edge between face corner q and q+1
  unsigned edge_faces[12];   // bitmask of faces containing the edge
  unsigned corner_faces[8];  // bitmask of faces containing the corner
};

constexpr Tables make_tables() {
  Tables t{};
  for (auto& row : t.edge_of)
    for (int& e : row) e = -1;
  for (int e = 0; e < 12; ++e) {
    t.edge_of[kEdge[e][0]][kEdge[e][1]] = e;
    t.edge_of[kEdge[e][1]][kEdge[e][0]] = e;
  }
  for (int f = 0; f < 6; ++f)
    for (int q = 0; q < 4; ++q) {
      const int e = t.edge_of[kFace[f][q]][kFace[f][(q + 1) % 4]];
      t.face_edges[f][q] = e;
      t.edge_faces[e] |= 1u << f;
      t.corner_faces[kFace[f][q]] |= 1u << f;
    }
  return t;
}

constexpr Tables kTables = make_tables();

class Extractor {
 public:
  Extractor(const GridGeometry& grid, std::span<const double> values, double iso, bool toward_higher)
      : g_(grid), values_(values), iso_(iso), toward_higher_(toward_higher),
        edge_vertex_(3 * grid.size(), -1), node_vertex_(grid.size(), -1) {}

  TriMesh run() {
    const int nx = g_.dims[0], ny = g_.dims[1], nz = g_.dims[2];
    const std::size_t sx = 1, sy = static_cast<std::size_t>(nx), sz = sy * ny;
    const std::size_t corner_step[8] = {0, sx, sx + sy, sy, sz, sz + sx, sz + sx + sy, sz + sy};
    for (int k = 0; k + 1 < nz; ++k)
      for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
          const std::size_t base = g_.index(i, j, k);
          unsigned mask = 0;
          for (int c = 0; c < 8; ++c) {
            node_[c] = base + corner_step[c];
            value_[c] = values_[node_[c]] - iso_;
            if (values_[node_[c]] > iso_) mask |= 1u << c;
          }
          if (mask == 0 || mask == 0xffu) continue;
          cell_ = {i, j, k};
          process_cell(mask);
        }
    return TriMesh(std::move(vertices_), std::move(faces_));
  }

 private:
  struct LoopVertex {
    int id;
    unsigned faces;
  };

  void process_cell(unsigned mask) {
    auto positive = [mask](int c) { return ((mask >> c) & 1u) != 0; };
    int next[12];
    std::fill(std::begin(next), std::end(next), -1);

    for (int f = 0; f < 6; ++f) {
      int crossing[4];
      bool exits[4];
      int count = 0;
      for (int q = 0; q < 4; ++q) {
        const bool a = positive(kFace[f][q]), b = positive(kFace[f][(q + 1) % 4]);
        if (a == b) continue;
        crossing[count] = kTables.face_edges[f][q];
        exits[count] = a;
        ++count;
      }
      if (count == 2) {
        const int x = exits[0] ? 0 : 1;
        next[crossing[x]] = crossing[1 - x];
      } else if (count == 4) {
        const int* fc = kFace[f];
        const int p = positive(fc[0]) ? 0 : 1;  // a positive corner of the face
        const bool joined = value_[fc[p]] * value_[fc[p + 2]] > value_[fc[p + 1]] * value_[fc[(p + 3) % 4]];
        for (int s = 0; s < 4; ++s)
          if (exits[s]) next[crossing[s]] = crossing[joined ? (s + 1) % 4 : (s + 3) % 4];
      }
    }

    bool used[12] = {};
    for (int start = 0; start < 12; ++start) {
      if (next[start] < 0 || used[start]) continue;
      loop_.clear();
      for (int e = start; !used[e]; e = next[e]) {
        used[e] = true;
        const LoopVertex v = crossing_vertex(e);
        if (loop_.empty() || loop_.back().id != v.id) loop_.push_back(v);
        if (next[e] < 0) throw Error("marching cubes: open contour in cell");
      }
      while (loop_.size() > 1 && loop_.front().id == loop_.back().id) loop_.pop_back();
      emit_loop();
    }
  }

  LoopVertex crossing_vertex(int e) {
    int c0 = kEdge[e][0], c1 = kEdge[e][1];
    if (node_[c1] < node_[c0]) std::swap(c0, c1);
    const double a = value_[c0], b = value_[c1];
    const double t = a / (a - b);
    if (t < kSnap) return {snap_to(c0), kTables.corner_faces[c0]};
    if (t > 1.0 - kSnap) return {snap_to(c1), kTables.corner_faces[c1]};

    int axis = 0;
    while (kCorner[c1][axis] == kCorner[c0][axis]) ++axis;
    int& slot = edge_vertex_[3 * node_[c0] + axis];
    if (slot < 0) {
      slot = static_cast<int>(vertices_.size());
      const Vec3 p0 = corner_position(c0), p1 = corner_position(c1);
      vertices_.push_back(p0 + t * (p1 - p0));
    }
    return {slot, kTables.edge_faces[e]};
  }

  int snap_to(int c) {
    int& slot = node_vertex_[node_[c]];
    if (slot < 0) {
      slot = static_cast<int>(vertices_.size());
      vertices_.push_back(corner_position(c));
    }
    return slot;
  }

  Vec3 corner_position(int c) const {
    return g_.center(cell_[0] + kCorner[c][0], cell_[1] + kCorner[c][1], cell_[2] + kCorner[c][2]);
  }

  void emit(int a, int b, int c) {
    if (a == b || b == c || a == c) return;
    // Traced loops wind with the normal toward the positive side.
    if (toward_higher_)
      faces_.push_back({a, b, c});
    else
      faces_.push_back({a, c, b});
  }

  // Fans from a vertex whose diagonals all cross the cell interior, so no
  // new edge lies on a face shared with a neighbouring cell.
  void emit_loop() {
    const int m = static_cast<int>(loop_.size());
    if (m < 3) return;
    if (m == 3) {
      emit(loop_[0].id, loop_[1].id, loop_[2].id);
      return;
    }
    for (int apex = 0; apex < m; ++apex) {
      bool ok = true;
      for (int d = 2; d + 1 < m && ok; ++d)
        ok = (loop_[apex].faces & loop_[(apex + d) % m].faces) == 0;
      if (!ok) continue;
      for (int d = 1; d + 1 < m; ++d)
        emit(loop_[apex].id, loop_[(apex + d) % m].id, loop_[(apex + d + 1) % m].id);
      return;
    }
    Vec3 centroid = Vec3::Zero();
    for (const auto& v : loop_) centroid += vertices_[v.id];
    const int mid = static_cast<int>(vertices_.size());
    vertices_.push_back(centroid / m);
    for (int q = 0; q < m; ++q) emit(mid, loop_[q].id, loop_[(q + 1) % m].id);
  }

  const GridGeometry& g_;
  std::span<const double> values_;
  double iso_;
  bool toward_higher_;
  std::vector<int> edge_vertex_;
  std::vector<int> node_vertex_;
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;

  std::size_t node_[8] = {};
  double value_[8] = {};
  std::array<int, 3> cell_{};
  std::vector<LoopVertex> loop_;
};

}  // namespace

TriMesh marching_cubes(const GridGeometry& grid, std::span<const double> values, double iso,
                       bool normals_toward_higher) {
  if (values.size() != grid.size()) throw PreconditionError("marching_cubes: value count does not match grid");
  return Extractor(grid, values, iso, normals_toward_higher).run();
}

}  // namespace topomatch
