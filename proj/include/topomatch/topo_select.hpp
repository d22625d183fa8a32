#pragma once

#include <array>
#include <span>

#include "topomatch/level_extractor.hpp"

namespace topomatch {

/// Lexicographic key (genus, max(t_s, t_t), t_s + t_t, t_s); smaller wins.
using SelectionRank = std::array<double, 4>;

struct LevelPair {
  LevelSurface source;
  LevelSurface target;
  int shared_genus = 0;
  SelectionRank rank{};
};

/// Closed, connected and manifold, so the genus is defined.
bool admissible(const LevelSurface& level);

SelectionRank selection_rank(int genus, double t_source, double t_target);

/// Exhaustive scan over all cross pairs of admissible surfaces with equal
/// genus. Throws NoAdmissiblePairError when none exists.
LevelPair select_pair(std::span<const LevelSurface> source_levels, std::span<const LevelSurface> target_levels);

/// Same, over extraction results (absent levels ignored).
LevelPair select_pair(const std::vector<LevelEntry>& source_levels, const std::vector<LevelEntry>& target_levels);

}  // namespace topomatch
