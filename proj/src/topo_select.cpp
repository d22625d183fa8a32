#include "topomatch/topo_select.hpp"

#include <algorithm>
#include <utility>
#include <vector>

#include "topomatch/errors.hpp"

namespace topomatch {

bool admissible(const LevelSurface& level) {
  const TopologyReport& r = level.topology;
  return r.is_closed && r.is_manifold && r.component_count == 1 && r.genus.has_value();
}

SelectionRank selection_rank(int genus, double t_source, double t_target) {
  return {static_cast<double>(genus), std::max(t_source, t_target), t_source + t_target, t_source};
}

namespace {

LevelPair scan(const std::vector<const LevelSurface*>& source_levels,
               const std::vector<const LevelSurface*>& target_levels) {
  const LevelSurface* best_s = nullptr;
  const LevelSurface* best_t = nullptr;
  SelectionRank best{};
  for (const LevelSurface* s : source_levels) {
    if (!admissible(*s)) continue;
    for (const LevelSurface* t : target_levels) {
      if (!admissible(*t) || *t->topology.genus != *s->topology.genus) continue;
      const SelectionRank r = selection_rank(*s->topology.genus, s->level_t, t->level_t);
      // Exact rank ties only arise from duplicated levels; break them on
      // iso values so the result does not depend on input order.
      const bool better = !best_s || r < best ||
                          (r == best && std::make_pair(s->iso_value, t->iso_value) <
                                            std::make_pair(best_s->iso_value, best_t->iso_value));
      if (better) {
        best = r;
        best_s = s;
        best_t = t;
      }
    }
  }
  if (!best_s) throw NoAdmissiblePairError("no manifold level surfaces with equal genus");
  return LevelPair{*best_s, *best_t, *best_s->topology.genus, best};
}

}  // namespace

LevelPair select_pair(std::span<const LevelSurface> source_levels, std::span<const LevelSurface> target_levels) {
  if (source_levels.empty() || target_levels.empty()) throw PreconditionError("select_pair: empty level list");
  std::vector<const LevelSurface*> s, t;
  for (const auto& l : source_levels) s.push_back(&l);
  for (const auto& l : target_levels) t.push_back(&l);
  return scan(s, t);
}

LevelPair select_pair(const std::vector<LevelEntry>& source_levels, const std::vector<LevelEntry>& target_levels) {
  std::vector<const LevelSurface*> s, t;
  for (const auto& e : source_levels)
    if (e.surface) s.push_back(&*e.surface);
  for (const auto& e : target_levels)
    if (e.surface) t.push_back(&*e.surface);
  if (s.empty() || t.empty()) throw NoAdmissiblePairError("a shape has no level surfaces");
  return scan(s, t);
}

}  // namespace topomatch
