#include "topomatch/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include "topomatch/errors.hpp"
#include "topomatch/reports.hpp"

namespace topomatch {

std::string to_string(ModeChoice mode) {
  switch (mode) {
    case ModeChoice::Inside:
      return "inside";
    case ModeChoice::Outside:
      return "outside";
    case ModeChoice::Auto:
      return "auto";
  }
  return "auto";
}

ModeChoice mode_choice_from_string(const std::string& name) {
  if (name == "inside") return ModeChoice::Inside;
  if (name == "outside") return ModeChoice::Outside;
  if (name == "auto") return ModeChoice::Auto;
  throw PreconditionError("unknown mode '" + name + "' (expected inside, outside or auto)");
}

int padding_for(FieldMode mode, double rho, double spacing) {
  if (mode == FieldMode::Inside) return 1;
  return std::max(4, static_cast<int>(std::ceil(0.25 * rho / spacing)));
}

ShapeLevels prepare_shape(const TriMesh& mesh, FieldMode mode, const PipelineConfig& config) {
  ShapeLevels out;
  out.volume = voxelize(mesh, config.target_voxels);
  out.rho = compute_rho(out.volume);
  if (mode == FieldMode::Outside) {
    const double h = out.volume.grid.spacing;
    out.volume = voxelize_with_spacing(mesh, h, padding_for(mode, out.rho, h));
  }
  out.field = solve_field(out.volume, FieldConfig{out.rho, mode}, config.solve);
  out.levels = extract_all(out.field, build_schedule(out.field.v_max, config.level_step));
  return out;
}

MatchResult match_meshes(const TriMesh& source, const TriMesh& target, const PipelineConfig& config) {
  MatchResult r;
  r.source_samples = farthest_point_sample(source, config.samples, config.seed_vertex);
  r.target_samples = farthest_point_sample(target, config.samples, config.seed_vertex);
  r.source_table = build_table(source, r.source_samples);
  r.target_table = build_table(target, r.target_samples);
  const SpectralEmbedding es = mds_embed(r.source_table, config.spectral_k);
  const SpectralEmbedding et = mds_embed(r.target_table, config.spectral_k);
  r.em = run_em(r.source_table, r.target_table, es, et, config.em);
  return r;
}

int nearest_vertex(const TriMesh& mesh, const Vec3& point) {
  if (mesh.vertex_count() == 0) throw PreconditionError("nearest_vertex: mesh has no vertices");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const auto& v = mesh.vertices();
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const double d = (v[i] - point).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

TransferredMap transfer_pairs(const std::vector<std::pair<int, int>>& level_pairs, const TriMesh& source_level,
                              const TriMesh& target_level, const TriMesh& source_orig, const TriMesh& target_orig) {
  TransferredMap out;
  for (const auto& [a, b] : level_pairs) {
    if (a < 0 || a >= source_level.vertex_count() || b < 0 || b >= target_level.vertex_count())
      throw PreconditionError("pair refers to a vertex outside the level surface");
    const Vec3& pa = source_level.vertices()[a];
    const Vec3& pb = target_level.vertices()[b];
    const int sa = nearest_vertex(source_orig, pa);
    const int tb = nearest_vertex(target_orig, pb);
    out.pairs.emplace_back(sa, tb);
    out.source_distance.push_back((source_orig.vertices()[sa] - pa).norm());
    out.target_distance.push_back((target_orig.vertices()[tb] - pb).norm());
  }
  return out;
}

std::vector<std::pair<int, int>> vertex_pairs(const CorrespondenceMap& map, const GeodesicTable& source,
                                              const GeodesicTable& target) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < map.size(); ++i)
    out.emplace_back(source.sample_ids.at(i), target.sample_ids.at(map.target_of[i]));
  return out;
}

TransferredMap transfer_map(const CorrespondenceMap& map, const MatchResult& match, const LevelPair& pair,
                            const TriMesh& source_orig, const TriMesh& target_orig) {
  return transfer_pairs(vertex_pairs(map, match.source_table, match.target_table), pair.source.mesh,
                        pair.target.mesh, source_orig, target_orig);
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  GroundTruth gt;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long s = 0, t = 0;
    if (!(ls >> s)) continue;  // blank line
    std::string extra;
    if (!(ls >> t) || (ls >> extra)) throw ParseError("expected two vertex indices", line_no, path.string());
    if (s < 0 || t < 0 || s > std::numeric_limits<int>::max() || t > std::numeric_limits<int>::max())
      throw ParseError("vertex index out of range", line_no, path.string());
    const auto [it, inserted] = gt.emplace(static_cast<int>(s), static_cast<int>(t));
    if (!inserted && it->second != t)
      throw ParseError("conflicting entries for source vertex " + std::to_string(s), line_no, path.string());
  }
  return gt;
}

EvalReport evaluate(const std::vector<std::pair<int, int>>& pairs, const GroundTruth& ground_truth,
                    const TriMesh& target, double r, double normalizer) {
  if (pairs.empty()) throw PreconditionError("evaluate: no pairs");
  if (!(r > 0.0) || !std::isfinite(r)) throw PreconditionError("sampling radius must be positive and finite");
  if (!(normalizer > 0.0)) throw PreconditionError("geodesic normalizer must be positive");
  EvalReport report;
  std::map<int, std::vector<double>> rows;
  for (const auto& [s, t] : pairs) {
    const auto it = ground_truth.find(s);
    if (it == ground_truth.end())
      throw PreconditionError("ground truth has no entry for source vertex " + std::to_string(s));
    if (t < 0 || t >= target.vertex_count() || it->second >= target.vertex_count())
      throw PreconditionError("target vertex index out of range");
    auto row = rows.find(it->second);
    if (row == rows.end()) row = rows.emplace(it->second, geodesic_distances(target, it->second)).first;
    report.per_pair.push_back(row->second[t] / normalizer);
  }
  double sum = 0.0;
  for (double e : report.per_pair) sum += e;
  report.d_grd = sum / static_cast<double>(report.per_pair.size());
  report.d_grd_normalized = report.d_grd / r;
  report.optimal = report.d_grd_normalized <= 1.0;
  return report;
}

EvalReport evaluate(const std::vector<std::pair<int, int>>& pairs, const GroundTruth& ground_truth,
                    const TriMesh& target, const PipelineConfig& config) {
  const SampleSet scale = farthest_point_sample(target, config.samples, config.seed_vertex);
  return evaluate(pairs, ground_truth, target, scale.radius_r, scale.normalizer);
}

namespace {

struct Attempt {
  FieldMode mode;
  std::optional<LevelPair> pair;
  double source_rho = 0.0;
  double target_rho = 0.0;
};

Attempt attempt_mode(const TriMesh& source, const TriMesh& target, FieldMode mode, const PipelineConfig& config) {
  auto target_future = std::async(std::launch::async, [&] { return prepare_shape(target, mode, config); });
  ShapeLevels s = prepare_shape(source, mode, config);
  ShapeLevels t = target_future.get();
  Attempt a{mode, std::nullopt, s.rho, t.rho};
  try {
    a.pair = select_pair(s.levels, t.levels);
  } catch (const NoAdmissiblePairError&) {
  }
  return a;
}

}  // namespace

PipelineResult run_pipeline(const TriMesh& source, const TriMesh& target, const PipelineConfig& config) {
  std::vector<Attempt> attempts;
  if (config.mode != ModeChoice::Outside) attempts.push_back(attempt_mode(source, target, FieldMode::Inside, config));
  const bool need_outside = config.mode == ModeChoice::Outside ||
                            (config.mode == ModeChoice::Auto &&
                             (!attempts.back().pair || attempts.back().pair->shared_genus > 0));
  if (need_outside) attempts.push_back(attempt_mode(source, target, FieldMode::Outside, config));

  const Attempt* chosen = nullptr;
  for (const auto& a : attempts)
    if (a.pair && (!chosen || a.pair->rank < chosen->pair->rank)) chosen = &a;

  PipelineResult result;
  for (const auto& a : attempts)
    result.attempts.push_back({a.mode, a.pair ? std::optional<SelectionRank>(a.pair->rank) : std::nullopt});
  if (!chosen) throw NoAdmissiblePairError("no admissible level pair in any attempted mode");

  result.mode = chosen->mode;
  result.pair = *chosen->pair;
  result.source_rho = chosen->source_rho;
  result.target_rho = chosen->target_rho;
  result.match = match_meshes(result.pair.source.mesh, result.pair.target.mesh, config);
  result.transferred = transfer_map(result.match.em.map, result.match, result.pair, source, target);
  return result;
}

std::pair<std::vector<Rgb>, std::vector<Rgb>> pair_colors(const std::vector<std::pair<int, int>>& pairs,
                                                          int source_vertices, int target_vertices) {
  const Rgb base{170, 170, 170};
  std::vector<Rgb> cs(source_vertices, base), ct(target_vertices, base);
  const double golden = 0.6180339887498949;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    // Hue stepped by the golden ratio, full saturation and value.
    const double hue = std::fmod(static_cast<double>(i) * golden, 1.0) * 6.0;
    const int sector = static_cast<int>(hue) % 6;
    const double f = hue - std::floor(hue);
    const auto up = static_cast<std::uint8_t>(std::lround(255.0 * f));
    const auto down = static_cast<std::uint8_t>(255 - up);
    const Rgb wheel[6] = {{255, up, 0}, {down, 255, 0}, {0, 255, up}, {0, down, 255}, {up, 0, 255}, {255, 0, down}};
    const auto [s, t] = pairs[i];
    if (s >= 0 && s < source_vertices) cs[s] = wheel[sector];
    if (t >= 0 && t < target_vertices) ct[t] = wheel[sector];
  }
  return {cs, ct};
}

void write_artifacts(const std::filesystem::path& out_dir, const PipelineResult& result,
                     const std::string& source_name, const std::string& target_name, const TriMesh& source_orig,
                     const TriMesh& target_orig, bool colored_meshes) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  const auto level_pairs = vertex_pairs(result.match.em.map, result.match.source_table, result.match.target_table);
  auto corr = correspondence_json(source_name, target_name, result.pair.source.level_t, result.pair.target.level_t,
                                  level_pairs, result.match.em.map);
  corr["mode"] = to_string(result.mode);
  corr["genus"] = result.pair.shared_genus;
  write_json(out_dir / "correspondence.json", corr);

  auto transferred = transferred_json(result.transferred);
  transferred["mode"] = to_string(result.mode);
  transferred["level_s"] = result.pair.source.level_t;
  transferred["level_t"] = result.pair.target.level_t;
  write_json(out_dir / "transferred.json", transferred);

  save_mesh(result.pair.source.mesh, out_dir / "source_level.off");
  save_mesh(result.pair.target.mesh, out_dir / "target_level.off");
  if (colored_meshes) {
    const auto [cs, ct] = pair_colors(result.transferred.pairs, source_orig.vertex_count(), target_orig.vertex_count());
    save_mesh(source_orig, out_dir / "source_colored.off", MeshFormat::Off, cs);
    save_mesh(target_orig, out_dir / "target_colored.off", MeshFormat::Off, ct);
  }
}

}  // namespace topomatch
