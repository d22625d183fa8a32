#include "topomatch/geodesy.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

#include "topomatch/errors.hpp"

namespace topomatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> dijkstra(const TriMesh& mesh, int source) {
  const MeshAdjacency& adj = mesh.adjacency();
  const auto& pos = mesh.vertices();
  std::vector<double> dist(pos.size(), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (int n = adj.neighbor_offsets[v]; n < adj.neighbor_offsets[v + 1]; ++n) {
      const int w = adj.neighbors[n];
      const double nd = d + (pos[w] - pos[v]).norm();
      if (nd < dist[w]) {
        dist[w] = nd;
        heap.emplace(nd, w);
      }
    }
  }
  for (double d : dist)
    if (d == kInf) throw PreconditionError("mesh is disconnected: a vertex is unreachable");
  return dist;
}

void check_vertex(const TriMesh& mesh, int v) {
  if (v < 0 || v >= mesh.vertex_count()) throw PreconditionError("vertex index out of range");
}

}  // namespace

std::vector<double> geodesic_distances(const TriMesh& mesh, int source) {
  check_vertex(mesh, source);
  return dijkstra(mesh, source);
}

std::vector<std::vector<double>> geodesic_distances(const TriMesh& mesh, std::span<const int> sources) {
  std::vector<std::vector<double>> rows;
  rows.reserve(sources.size());
  for (int s : sources) rows.push_back(geodesic_distances(mesh, s));
  return rows;
}

SampleSet farthest_point_sample(const TriMesh& mesh, int n, int seed_vertex) {
  if (n < 1) throw PreconditionError("sample count must be positive");
  if (n > mesh.vertex_count()) throw PreconditionError("more samples requested than vertices");
  check_vertex(mesh, seed_vertex);

  SampleSet out;
  std::vector<char> chosen(mesh.vertex_count(), 0);
  std::vector<double> nearest = dijkstra(mesh, seed_vertex);
  std::vector<std::vector<double>> rows{nearest};
  out.vertex_ids.push_back(seed_vertex);
  chosen[seed_vertex] = 1;

  double insertion = kInf;
  while (static_cast<int>(out.vertex_ids.size()) < n) {
    int best = -1;
    for (int v = 0; v < mesh.vertex_count(); ++v)
      if (!chosen[v] && (best < 0 || nearest[v] > nearest[best])) best = v;
    insertion = nearest[best];
    out.vertex_ids.push_back(best);
    chosen[best] = 1;
    rows.push_back(dijkstra(mesh, best));
    const auto& row = rows.back();
    for (int v = 0; v < mesh.vertex_count(); ++v) nearest[v] = std::min(nearest[v], row[v]);
  }

  // Symmetrized exactly as in build_table so both normalizers agree.
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b)
      out.normalizer = std::max(out.normalizer, 0.5 * (rows[a][out.vertex_ids[b]] + rows[b][out.vertex_ids[a]]));
  out.radius_model = insertion;
  out.radius_r = n == 1 ? kInf : insertion / out.normalizer;
  return out;
}

GeodesicTable build_table(const TriMesh& mesh, std::span<const int> sample_ids) {
  if (sample_ids.empty()) throw PreconditionError("build_table: no samples");
  const auto rows = geodesic_distances(mesh, sample_ids);
  const auto n = static_cast<Eigen::Index>(sample_ids.size());
  GeodesicTable table;
  table.sample_ids.assign(sample_ids.begin(), sample_ids.end());
  table.distances = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = 0.5 * (rows[i][sample_ids[j]] + rows[j][sample_ids[i]]);
      table.distances(i, j) = table.distances(j, i) = d;
    }
  table.normalizer = table.distances.maxCoeff();
  if (table.normalizer > 0.0) table.distances /= table.normalizer;
  return table;
}

}  // namespace topomatch
