#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "topomatch/correspondence.hpp"
#include "topomatch/mesh.hpp"
#include "topomatch/pipeline.hpp"

namespace topomatch {

nlohmann::json topology_json(const TopologyReport& report);

/// {source_mesh, target_mesh, level_s, level_t, pairs, D_iso, per_pair_d_iso};
/// `pairs` holds level-surface vertex ids.
nlohmann::json correspondence_json(const std::string& source_mesh, const std::string& target_mesh, double level_s,
                                   double level_t, const std::vector<std::pair<int, int>>& pairs,
                                   const CorrespondenceMap& map);

nlohmann::json transferred_json(const TransferredMap& map);
TransferredMap transferred_from_json(const nlohmann::json& j);

nlohmann::json eval_json(const EvalReport& report);

std::vector<std::pair<int, int>> pairs_from_json(const nlohmann::json& j);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace topomatch
