#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topomatch/correspondence.hpp"
#include "topomatch/field_solver.hpp"
#include "topomatch/geodesy.hpp"
#include "topomatch/level_extractor.hpp"
#include "topomatch/topo_select.hpp"
#include "topomatch/volume.hpp"

namespace topomatch {

enum class ModeChoice { Inside, Outside, Auto };

std::string to_string(ModeChoice mode);
ModeChoice mode_choice_from_string(const std::string& name);

struct PipelineConfig {
  std::size_t target_voxels = 500000;
  double level_step = 0.01;
  ModeChoice mode = ModeChoice::Auto;
  int samples = 80;
  int spectral_k = 6;
  int seed_vertex = 0;
  EmOptions em;
  SolveOptions solve;
};

/// Voxelization, field and level sweep of one shape in one mode.
struct ShapeLevels {
  VoxelVolume volume;
  double rho = 0.0;
  ScalarField field;
  std::vector<LevelEntry> levels;
};

/// Empty layers around the shape for a solve in `mode`: 1 inside; outside,
/// enough room for the inflated surfaces to close before the grid boundary.
int padding_for(FieldMode mode, double rho, double spacing);

ShapeLevels prepare_shape(const TriMesh& mesh, FieldMode mode, const PipelineConfig& config);

/// Sampling, geodesic tables, MDS and EM between two surfaces.
struct MatchResult {
  SampleSet source_samples;
  SampleSet target_samples;
  GeodesicTable source_table;
  GeodesicTable target_table;
  EmResult em;
};

MatchResult match_meshes(const TriMesh& source, const TriMesh& target, const PipelineConfig& config);

struct TransferredMap {
  std::vector<std::pair<int, int>> pairs;  ///< original-mesh vertex ids, in source sample order
  std::vector<double> source_distance;     ///< level-surface sample to chosen vertex, model units
  std::vector<double> target_distance;
};

/// Nearest vertex by Euclidean distance; ties go to the lowest index.
int nearest_vertex(const TriMesh& mesh, const Vec3& point);

/// Pairs of level-surface vertices (ids into each level mesh) carried to
/// the nearest vertices of the original meshes.
TransferredMap transfer_pairs(const std::vector<std::pair<int, int>>& level_pairs, const TriMesh& source_level,
                              const TriMesh& target_level, const TriMesh& source_orig, const TriMesh& target_orig);

/// Level-surface vertex pairs of a map over sampled tables.
std::vector<std::pair<int, int>> vertex_pairs(const CorrespondenceMap& map, const GeodesicTable& source,
                                              const GeodesicTable& target);

TransferredMap transfer_map(const CorrespondenceMap& map, const MatchResult& match, const LevelPair& pair,
                            const TriMesh& source_orig, const TriMesh& target_orig);

/// Ground truth: source vertex -> target vertex.
using GroundTruth = std::map<int, int>;

/// Two integer columns per line (source target); '#' starts a comment.
GroundTruth load_ground_truth(const std::filesystem::path& path);

struct EvalReport {
  double d_grd = 0.0;             ///< mean geodesic error, units of `normalizer`
  double d_grd_normalized = 0.0;  ///< d_grd / r
  bool optimal = false;           ///< d_grd_normalized <= 1
  std::vector<double> per_pair;   ///< normalized geodesic error per pair
};

/// Mean geodesic distance on the target between each ground-truth image and
/// the computed image, divided by `normalizer`, and by `r` for the
/// normalized error.
EvalReport evaluate(const std::vector<std::pair<int, int>>& pairs, const GroundTruth& ground_truth,
                    const TriMesh& target, double r, double normalizer);

/// Evaluation scale from farthest-point sampling the original target with
/// the pipeline's sample count and seed.
EvalReport evaluate(const std::vector<std::pair<int, int>>& pairs, const GroundTruth& ground_truth,
                    const TriMesh& target, const PipelineConfig& config);

struct ModeAttempt {
  FieldMode mode = FieldMode::Inside;
  std::optional<SelectionRank> rank;  ///< absent when no admissible pair exists
};

struct PipelineResult {
  FieldMode mode = FieldMode::Inside;
  std::vector<ModeAttempt> attempts;
  LevelPair pair;
  MatchResult match;
  TransferredMap transferred;
  double source_rho = 0.0;
  double target_rho = 0.0;
};

/// End to end: level sweeps per mode, pair selection, EM on the pair and
/// transfer to the originals. Auto runs inside first and adds outside when
/// no pair is found or its genus is positive, keeping the smaller rank
/// (inside on ties).
PipelineResult run_pipeline(const TriMesh& source, const TriMesh& target, const PipelineConfig& config);

/// Writes correspondence.json and transferred.json (and colored meshes when
/// asked) under `out_dir`.
void write_artifacts(const std::filesystem::path& out_dir, const PipelineResult& result,
                     const std::string& source_name, const std::string& target_name, const TriMesh& source_orig,
                     const TriMesh& target_orig, bool colored_meshes);

/// Per-vertex colors marking matched vertices with the same color on both sides.
std::pair<std::vector<Rgb>, std::vector<Rgb>> pair_colors(const std::vector<std::pair<int, int>>& pairs,
                                                          int source_vertices, int target_vertices);

}  // namespace topomatch
