#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "topomatch/mesh.hpp"

namespace topomatch {

/// Shortest-path distances over the edge graph (Euclidean edge lengths),
/// one row per source. Throws PreconditionError if any vertex is unreachable.
std::vector<std::vector<double>> geodesic_distances(const TriMesh& mesh, std::span<const int> sources);
std::vector<double> geodesic_distances(const TriMesh& mesh, int source);

struct SampleSet {
  std::vector<int> vertex_ids;
  /// Insertion distance of the last sample divided by `normalizer`;
  /// +inf for a single sample, where no insertion happened.
  double radius_r = 0.0;
  /// The same insertion distance in model units.
  double radius_model = 0.0;
  /// Largest pairwise geodesic distance among the samples (model units).
  double normalizer = 0.0;
};

/// Farthest-point sampling from `seed_vertex`; ties go to the smallest index.
SampleSet farthest_point_sample(const TriMesh& mesh, int n, int seed_vertex = 0);

struct GeodesicTable {
  std::vector<int> sample_ids;
  Eigen::MatrixXd distances;  ///< normalized to a maximum entry of 1
  double normalizer = 0.0;    ///< the maximum before normalization (model units)
};

/// Pairwise sample distances, symmetrized and divided by their maximum.
GeodesicTable build_table(const TriMesh& mesh, std::span<const int> sample_ids);
inline GeodesicTable build_table(const TriMesh& mesh, const SampleSet& samples) {
  return build_table(mesh, samples.vertex_ids);
}

}  // namespace topomatch
