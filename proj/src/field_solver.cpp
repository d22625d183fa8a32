#include "topomatch/field_solver.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <Eigen/CholmodSupport>
#include <Eigen/IterativeLinearSolvers>

#include "topomatch/errors.hpp"
#include "topomatch/tvol.hpp"

namespace topomatch {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

constexpr int kSteps[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

double residual_inf(const SpMat& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const Eigen::VectorXd r = a * x - b;
  return r.lpNorm<Eigen::Infinity>() / b.lpNorm<Eigen::Infinity>();
}

}  // namespace

std::string to_string(FieldMode mode) { return mode == FieldMode::Inside ? "inside" : "outside"; }

FieldMode field_mode_from_string(const std::string& name) {
  if (name == "inside") return FieldMode::Inside;
  if (name == "outside") return FieldMode::Outside;
  throw PreconditionError("unknown field mode '" + name + "'");
}

std::vector<std::uint8_t> solve_domain(const VoxelVolume& volume, FieldMode mode) {
  std::vector<std::uint8_t> domain(volume.occupancy.size());
  const std::uint8_t want = mode == FieldMode::Inside ? 1 : 0;
  std::transform(volume.occupancy.begin(), volume.occupancy.end(), domain.begin(),
                 [want](std::uint8_t o) { return static_cast<std::uint8_t>(o == want); });
  return domain;
}

FieldSystem assemble_field_system(const VoxelVolume& volume, const FieldConfig& config) {
  validate_volume(volume);
  const GridGeometry& g = volume.grid;
  if (!(config.rho >= g.spacing))
    throw PreconditionError("rho must be at least the grid spacing");

  const auto domain = solve_domain(volume, config.mode);
  FieldSystem sys;
  std::vector<int> unknown(g.size(), -1);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (!domain[idx]) continue;
    unknown[idx] = static_cast<int>(sys.voxel_of_unknown.size());
    sys.voxel_of_unknown.push_back(idx);
  }
  const auto n = static_cast<Eigen::Index>(sys.voxel_of_unknown.size());
  if (n == 0) throw PreconditionError("solve domain is empty");

  const double c = (config.rho * config.rho) / (g.spacing * g.spacing);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * 7);
  for (Eigen::Index row = 0; row < n; ++row) {
    const auto [i, j, k] = g.coords(sys.voxel_of_unknown[row]);
    double diag = 1.0;
    for (const auto& s : kSteps) {
      const int ni = i + s[0], nj = j + s[1], nk = k + s[2];
      if (!g.contains(ni, nj, nk)) continue;  // mirrored ghost: zero flux
      diag += c;
      const int col = unknown[g.index(ni, nj, nk)];
      if (col >= 0) triplets.emplace_back(row, col, -c);
    }
    triplets.emplace_back(row, row, diag);
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  sys.rhs = Eigen::VectorXd::Ones(n);
  return sys;
}

ScalarField solve_field(const VoxelVolume& volume, const FieldConfig& config, const SolveOptions& options) {
  FieldSystem sys = assemble_field_system(volume, config);
  const auto n = sys.matrix.rows();

  ScalarField field;
  field.grid = volume.grid;
  field.config = config;
  field.domain = solve_domain(volume, config.mode);
  field.info.unknowns = static_cast<std::size_t>(n);

  Eigen::VectorXd x;
  bool solved = false;
  if (options.kind != SolverKind::ConjugateGradient) {
    // CHOLMOD work is serialized: the fill-reducing ordering keeps global
    // state, and one factor at a time bounds peak memory when shapes are
    // prepared concurrently.
    static std::mutex cholmod_mutex;
    std::lock_guard<std::mutex> lock(cholmod_mutex);
    Eigen::CholmodSupernodalLLT<SpMat, Eigen::Lower> llt;
    llt.analyzePattern(sys.matrix);
    if (llt.info() != Eigen::Success) throw SolverError("symbolic factorization failed");
    // Supernodal storage is dominated by one double per factor entry.
    field.info.estimated_factor_bytes = llt.cholmod().lnz * sizeof(double);
    if (options.kind == SolverKind::Direct ||
        field.info.estimated_factor_bytes <= static_cast<double>(options.direct_memory_cap)) {
      llt.factorize(sys.matrix);
      if (llt.info() != Eigen::Success) throw SolverError("matrix is not positive definite");
      x = llt.solve(sys.rhs);
      if (llt.info() != Eigen::Success) throw SolverError("triangular solve failed");
      field.info.solver = SolverKind::Direct;
      solved = true;
    }
  }

  if (!solved) {
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
    // Eigen measures ||r||_2 / ||b||_2; with b = 1 this bound makes the
    // max-norm relative residual at most cg_tolerance.
    cg.setTolerance(options.cg_tolerance / std::sqrt(static_cast<double>(n)));
    cg.setMaxIterations(10 * n);
    cg.compute(sys.matrix);
    if (cg.info() != Eigen::Success) throw SolverError("preconditioner construction failed");
    x = cg.solve(sys.rhs);
    if (cg.info() != Eigen::Success)
      throw SolverError("conjugate gradients did not converge in " + std::to_string(10 * n) + " iterations");
    field.info.solver = SolverKind::ConjugateGradient;
    field.info.iterations = cg.iterations();
  }
  field.info.relative_residual = residual_inf(sys.matrix, x, sys.rhs);
  if (!std::isfinite(field.info.relative_residual)) throw SolverError("solution is not finite");

  field.values.assign(volume.grid.size(), 0.0);
  for (Eigen::Index u = 0; u < n; ++u) field.values[sys.voxel_of_unknown[u]] = x[u];
  field.v_max = x.maxCoeff();
  return field;
}

ExpansionReport verify_near_boundary_expansion(const ScalarField& field) {
  ExpansionReport report;
  const GridGeometry& g = field.grid;
  const double h = g.spacing;
  const double rho = field.config.rho;
  double sum = 0.0;
  auto in_domain = [&](int i, int j, int k) { return g.contains(i, j, k) && field.domain[g.index(i, j, k)] != 0; };

  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        if (field.domain[g.index(i, j, k)]) continue;
        for (const auto& s : kSteps) {
          const int a[3] = {i + s[0], j + s[1], k + s[2]};
          const int b[3] = {a[0] + s[0], a[1] + s[1], a[2] + s[2]};
          const int c[3] = {b[0] + s[0], b[1] + s[1], b[2] + s[2]};
          if (!in_domain(a[0], a[1], a[2]) || !in_domain(b[0], b[1], b[2]) || !in_domain(c[0], c[1], c[2]))
            continue;
          const double v1 = field.values[g.index(a[0], a[1], a[2])];
          const double v2 = field.values[g.index(b[0], b[1], b[2])];
          const double v3 = field.values[g.index(c[0], c[1], c[2])];
          const double dvdn = (18.0 * v1 - 9.0 * v2 + 2.0 * v3) / (6.0 * h);
          const double dev = std::abs(1.0 - rho * dvdn);
          report.max_relative_deviation = std::max(report.max_relative_deviation, dev);
          sum += dev;
          ++report.samples;
        }
      }
  report.applicable = report.samples > 0;
  if (report.applicable) report.mean_relative_deviation = sum / static_cast<double>(report.samples);
  return report;
}

void save_field(const std::filesystem::path& path, const ScalarField& field) {
  write_tvol(path, field.grid, field.values);
}

ScalarField load_field(const std::filesystem::path& path) {
  TvolFile file = read_tvol(path);
  if (!file.is_field()) throw ParseError("expected a field, found an occupancy volume", 0, path.string());
  ScalarField field;
  field.grid = file.grid;
  field.values = std::get<std::vector<double>>(std::move(file.data));
  field.domain.resize(field.values.size());
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    if (!std::isfinite(field.values[i])) throw ParseError("non-finite field value", 0, path.string());
    field.domain[i] = field.values[i] > 0.0;
  }
  field.v_max = *std::max_element(field.values.begin(), field.values.end());
  if (!(field.v_max > 0.0)) throw ParseError("field has no positive values", 0, path.string());
  return field;
}

}  // namespace topomatch
