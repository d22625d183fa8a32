#pragma once

#include <optional>
#include <vector>

#include "topomatch/field_solver.hpp"
#include "topomatch/mesh.hpp"

namespace topomatch {

/// Levels t = 0, step, 2 step, ..., 1 mapped to iso = v_max (e^{4t} - 1) / (e^4 - 1).
struct LevelSchedule {
  double v_max = 0.0;
  std::vector<double> t_values;
  std::vector<double> iso_values;
};

double iso_for_level(double v_max, double t);
LevelSchedule build_schedule(double v_max, double step);

struct LevelSurface {
  double level_t = 0.0;
  double iso_value = 0.0;
  TriMesh mesh;
  TopologyReport topology;
};

/// Marching cubes at `iso_value`, reduced to the largest component.
/// Throws EmptySurfaceError when no triangles remain.
LevelSurface extract_level(const ScalarField& field, double iso_value, double level_t = 0.0);

struct LevelEntry {
  double t = 0.0;
  double iso = 0.0;
  std::optional<LevelSurface> surface;  ///< empty when the level has no surface
};

/// Every interior level of the schedule (t = 0 and t = 1 skipped), in t order.
std::vector<LevelEntry> extract_all(const ScalarField& field, const LevelSchedule& schedule);

}  // namespace topomatch
