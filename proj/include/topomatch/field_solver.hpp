#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "topomatch/volume.hpp"

namespace topomatch {

/// Which side of the shape boundary the field lives on: `Inside` deflates,
/// `Outside` inflates.
enum class FieldMode { Inside, Outside };

std::string to_string(FieldMode mode);
FieldMode field_mode_from_string(const std::string& name);

struct FieldConfig {
  double rho = 0.0;  ///< smoothness length, model units; must be >= grid spacing
  FieldMode mode = FieldMode::Inside;
};

enum class SolverKind { Auto, Direct, ConjugateGradient };

struct SolveOptions {
  SolverKind kind = SolverKind::Auto;
  /// Auto switches to conjugate gradients when the estimated Cholesky
  /// factor exceeds this many bytes.
  std::size_t direct_memory_cap = std::size_t{2} << 30;
  /// Target for ||A v - b||_inf / ||b||_inf in the iterative path.
  double cg_tolerance = 1e-10;
};

struct SolveInfo {
  SolverKind solver = SolverKind::Direct;
  std::size_t unknowns = 0;
  double estimated_factor_bytes = 0.0;
  long iterations = 0;
  double relative_residual = 0.0;  ///< ||A v - b||_inf / ||b||_inf
};

/// Field on the voxel grid. `values` covers the whole grid and is zero
/// outside the solve domain; `domain` flags the voxels that were unknowns.
struct ScalarField {
  GridGeometry grid;
  std::vector<double> values;
  std::vector<std::uint8_t> domain;
  double v_max = 0.0;
  FieldConfig config;
  SolveInfo info;
};

/// Discrete system (I - rho^2 L) v = 1 over the domain voxels. Neighbours
/// outside the domain but inside the grid are Dirichlet zeros folded into
/// the diagonal; neighbours beyond the grid are mirrored (zero flux).
struct FieldSystem {
  Eigen::SparseMatrix<double> matrix;  ///< full symmetric storage
  Eigen::VectorXd rhs;
  std::vector<std::size_t> voxel_of_unknown;
};

std::vector<std::uint8_t> solve_domain(const VoxelVolume& volume, FieldMode mode);
FieldSystem assemble_field_system(const VoxelVolume& volume, const FieldConfig& config);

/// Minimiser of the screened-Poisson energy: solves v - rho^2 Δv = 1 with
/// v = 0 against the shape boundary (7-point stencil, spacing h). Uses a
/// supernodal Cholesky factorisation unless `options` routes the solve to
/// preconditioned conjugate gradients.
ScalarField solve_field(const VoxelVolume& volume, const FieldConfig& config, const SolveOptions& options = {});

/// Check of the flat-boundary expansion 1 - v ≈ rho ∂v/∂n at every
/// Dirichlet face that has three domain voxels along its inward normal.
/// The normal derivative is the third-order one-sided difference
/// (18 v1 - 9 v2 + 2 v3) / (6 h), with v = 0 on the face.
struct ExpansionReport {
  bool applicable = false;
  std::size_t samples = 0;
  double max_relative_deviation = 0.0;
  double mean_relative_deviation = 0.0;
};
ExpansionReport verify_near_boundary_expansion(const ScalarField& field);

/// Writes values as a TVOL1 field file.
void save_field(const std::filesystem::path& path, const ScalarField& field);
/// Reads a TVOL1 field; the domain is recovered as the positive voxels.
ScalarField load_field(const std::filesystem::path& path);

}  // namespace topomatch
