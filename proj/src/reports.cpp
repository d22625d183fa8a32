#include "topomatch/reports.hpp"

#include <fstream>

#include "topomatch/errors.hpp"

namespace topomatch {

using nlohmann::json;

json topology_json(const TopologyReport& r) {
  json j{{"V", r.vertex_count},
         {"E", r.edge_count},
         {"F", r.face_count},
         {"euler_characteristic", r.euler_characteristic},
         {"components", r.component_count},
         {"closed", r.is_closed},
         {"manifold", r.is_manifold}};
  j["genus"] = r.genus ? json(*r.genus) : json(nullptr);
  return j;
}

json correspondence_json(const std::string& source_mesh, const std::string& target_mesh, double level_s,
                         double level_t, const std::vector<std::pair<int, int>>& pairs, const CorrespondenceMap& map) {
  json p = json::array();
  for (const auto& [a, b] : pairs) p.push_back({a, b});
  return json{{"source_mesh", source_mesh}, {"target_mesh", target_mesh}, {"level_s", level_s},
              {"level_t", level_t},         {"pairs", p},                 {"D_iso", map.d_iso_mean},
              {"per_pair_d_iso", map.per_pair_d_iso}};
}

json transferred_json(const TransferredMap& map) {
  json p = json::array();
  for (const auto& [a, b] : map.pairs) p.push_back({a, b});
  return json{{"pairs", p}, {"source_distance", map.source_distance}, {"target_distance", map.target_distance}};
}

std::vector<std::pair<int, int>> pairs_from_json(const json& j) {
  std::vector<std::pair<int, int>> out;
  try {
    for (const auto& p : j.at("pairs")) out.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad pairs array: ") + e.what(), 0);
  }
  return out;
}

TransferredMap transferred_from_json(const json& j) {
  TransferredMap map;
  map.pairs = pairs_from_json(j);
  try {
    map.source_distance = j.at("source_distance").get<std::vector<double>>();
    map.target_distance = j.at("target_distance").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad transferred map: ") + e.what(), 0);
  }
  return map;
}

json eval_json(const EvalReport& r) {
  return json{{"D_grd", r.d_grd}, {"D_grd_normalized", r.d_grd_normalized}, {"optimal", r.optimal}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 0, path.string());
  }
}

}  // namespace topomatch
