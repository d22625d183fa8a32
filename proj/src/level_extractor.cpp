#include "topomatch/level_extractor.hpp"

#include <cmath>

#include "topomatch/errors.hpp"
#include "topomatch/marching_cubes.hpp"

namespace topomatch {

double iso_for_level(double v_max, double t) {
  return v_max * std::expm1(4.0 * t) / std::expm1(4.0);
}

LevelSchedule build_schedule(double v_max, double step) {
  if (!(v_max > 0.0)) throw PreconditionError("v_max must be positive");
  if (!(step > 0.0) || step > 1.0) throw PreconditionError("level step must lie in (0, 1]");
  LevelSchedule s;
  s.v_max = v_max;
  for (long i = 0;; ++i) {
    const double t = static_cast<double>(i) * step;
    // Treat values within rounding of 1 as the endpoint itself.
    if (t >= 1.0 - 1e-9) break;
    s.t_values.push_back(t);
  }
  s.t_values.push_back(1.0);
  for (double t : s.t_values) s.iso_values.push_back(iso_for_level(v_max, t));
  return s;
}

LevelSurface extract_level(const ScalarField& field, double iso_value, double level_t) {
  if (!(iso_value > 0.0)) throw PreconditionError("iso value must be positive");
  if (iso_value >= field.v_max) throw EmptySurfaceError("iso value at or above the field maximum");
  const bool outside = field.config.mode == FieldMode::Outside;
  TriMesh raw = marching_cubes(field.grid, field.values, iso_value, outside);
  if (raw.empty()) throw EmptySurfaceError("iso value produced no triangles");
  LevelSurface level;
  level.level_t = level_t;
  level.iso_value = iso_value;
  level.mesh = largest_component(raw);
  level.topology = analyze_topology(level.mesh);
  return level;
}

std::vector<LevelEntry> extract_all(const ScalarField& field, const LevelSchedule& schedule) {
  std::vector<LevelEntry> out;
  for (std::size_t i = 0; i < schedule.t_values.size(); ++i) {
    const double t = schedule.t_values[i];
    if (t <= 0.0 || t >= 1.0) continue;
    LevelEntry entry{t, schedule.iso_values[i], std::nullopt};
    try {
      entry.surface = extract_level(field, entry.iso, t);
    } catch (const EmptySurfaceError&) {
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace topomatch
