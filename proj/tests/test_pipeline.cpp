#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "topomatch/errors.hpp"
#include "topomatch/pipeline.hpp"
#include "topomatch/reports.hpp"
#include "topomatch/tvol.hpp"

using namespace topomatch;

namespace {

PipelineConfig small_config() {
  PipelineConfig c;
  c.target_voxels = 15000;
  c.level_step = 0.05;
  c.samples = 30;
  return c;
}

const TriMesh& blob() {
  // Four fused balls of different sizes around non-coplanar centres:
  // genus 0 and no mirror plane.
  static const TriMesh m = fixtures::implicit_surface(
      [](const Vec3& p) {
        double v = 4.0 - p.norm();
        v = std::max(v, 2.5 - (p - Vec3(4.5, 1, 0)).norm());
        v = std::max(v, 2.0 - (p - Vec3(-1, 4.5, 1.5)).norm());
        v = std::max(v, 1.6 - (p - Vec3(0.5, -1.5, 4.2)).norm());
        return v;
      },
      Vec3(-5, -5, -5), Vec3(8, 7.5, 6.5), 0.25);
  return m;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("nearest vertex equals exhaustive search") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Vec3> pts(10);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  const TriMesh toy(pts, {{0, 1, 2}});
  const TriMesh big = fixtures::icosphere(3, 1.5);  // 642 vertices
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 q(u(rng), u(rng), u(rng));
    for (const TriMesh* m : {&toy, &big}) {
      int best = -1;
      double best_d = INFINITY;
      for (int i = 0; i < m->vertex_count(); ++i) {
        const double d = (m->vertices()[i] - q).norm();
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      CHECK(nearest_vertex(*m, q) == best);
    }
  }
  // Equidistant: lowest index.
  const TriMesh pair({{1, 0, 0}, {-1, 0, 0}, {0, 5, 0}}, {{0, 1, 2}});
  CHECK(nearest_vertex(pair, Vec3::Zero()) == 0);
}

TEST_CASE("transfer onto the level surface itself is the identity") {
  const TriMesh m = fixtures::icosphere(2);
  const std::vector<std::pair<int, int>> pairs = {{0, 5}, {7, 3}, {40, 40}};
  const TransferredMap t = transfer_pairs(pairs, m, m, m, m);
  CHECK(t.pairs == pairs);
  for (double d : t.source_distance) CHECK(d == 0.0);
  for (double d : t.target_distance) CHECK(d == 0.0);
}

TEST_CASE("transfer records the distance to the chosen vertex") {
  const TriMesh level({{0, 0, 0.3}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  const TriMesh orig({{0, 0, 0}, {5, 0, 0}, {0, 5, 0}}, {{0, 1, 2}});
  const TransferredMap t = transfer_pairs({{0, 1}}, level, level, orig, orig);
  CHECK(t.pairs.front() == std::pair<int, int>{0, 0});
  CHECK(t.source_distance.front() == doctest::Approx(0.3));
  CHECK(t.target_distance.front() == doctest::Approx(1.0));
}

TEST_CASE("evaluation toy values") {
  // Bottom row of a strip: vertices 0, 2, 4, ... spaced 0.5 apart.
  const TriMesh target = fixtures::strip(12, 0.5);
  GroundTruth gt;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < 10; ++i) {
    gt[i] = 2 * i;
    pairs.emplace_back(i, 2 * i);
  }
  const EvalReport perfect = evaluate(pairs, gt, target, 0.1, 1.0);
  CHECK(perfect.d_grd == 0.0);
  CHECK(perfect.optimal);

  pairs[3].second = 2 * 4;  // one pair off by 0.5
  const EvalReport one_off = evaluate(pairs, gt, target, 0.1, 1.0);
  CHECK(one_off.d_grd == doctest::Approx(0.05));
  CHECK(one_off.d_grd_normalized == doctest::Approx(0.5));
  CHECK(one_off.optimal);
  CHECK(one_off.per_pair[3] == doctest::Approx(0.5));

  const EvalReport coarse = evaluate(pairs, gt, target, 0.02, 0.5);
  CHECK(coarse.d_grd == doctest::Approx(0.1));
  CHECK(coarse.d_grd_normalized == doctest::Approx(5.0));
  CHECK_FALSE(coarse.optimal);

  gt.erase(9);
  CHECK_THROWS_AS(evaluate(pairs, gt, target, 0.1, 1.0), PreconditionError);
}

TEST_CASE("ground-truth files") {
  const auto dir = fixtures::scratch_dir("gt");
  std::ofstream(dir / "ok.txt") << "# source target\n0 5\n1 6  # trailing comment\n\n2 7\n2 7\n";
  const GroundTruth gt = load_ground_truth(dir / "ok.txt");
  CHECK(gt == GroundTruth{{0, 5}, {1, 6}, {2, 7}});

  std::ofstream(dir / "three.txt") << "0 1\n1 2 3\n";
  try {
    load_ground_truth(dir / "three.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::ofstream(dir / "conflict.txt") << "0 1\n0 2\n";
  CHECK_THROWS_AS(load_ground_truth(dir / "conflict.txt"), ParseError);
  std::ofstream(dir / "neg.txt") << "0 -1\n";
  CHECK_THROWS_AS(load_ground_truth(dir / "neg.txt"), ParseError);
  std::ofstream(dir / "word.txt") << "0 x\n";
  CHECK_THROWS_AS(load_ground_truth(dir / "word.txt"), ParseError);
  CHECK_THROWS_AS(load_ground_truth(dir / "missing.txt"), IoError);
}

TEST_CASE("mode names and outside padding") {
  CHECK(mode_choice_from_string("auto") == ModeChoice::Auto);
  CHECK(to_string(ModeChoice::Inside) == "inside");
  CHECK_THROWS_AS(mode_choice_from_string("both"), PreconditionError);
  CHECK(padding_for(FieldMode::Inside, 50.0, 1.0) == 1);
  CHECK(padding_for(FieldMode::Outside, 4.0, 1.0) == 4);
  CHECK(padding_for(FieldMode::Outside, 40.0, 1.0) == 10);
  CHECK(padding_for(FieldMode::Outside, 41.0, 1.0) == 11);
}

TEST_CASE("pair colors mark matched vertices alike") {
  const auto [cs, ct] = pair_colors({{0, 3}, {2, 1}}, 4, 5);
  REQUIRE(cs.size() == 4);
  REQUIRE(ct.size() == 5);
  CHECK(cs[0] == ct[3]);
  CHECK(cs[2] == ct[1]);
  CHECK_FALSE(cs[0] == cs[2]);
  CHECK(cs[1] == ct[0]);  // both unmatched: base color
  CHECK(cs[1] == cs[3]);
}

TEST_CASE("self-match is exact") {
  const PipelineConfig cfg = small_config();
  const PipelineResult r = run_pipeline(blob(), blob(), cfg);
  CHECK(r.mode == FieldMode::Inside);
  CHECK(r.pair.shared_genus == 0);
  CHECK(r.pair.source.level_t == r.pair.target.level_t);
  CHECK(r.match.em.map.d_iso_mean <= 1e-15);
  for (std::size_t i = 0; i < r.match.em.map.size(); ++i) CHECK(r.match.em.map.target_of[i] == static_cast<int>(i));
  GroundTruth gt;
  for (int v = 0; v < blob().vertex_count(); ++v) gt[v] = v;
  const EvalReport e = evaluate(r.transferred.pairs, gt, blob(), cfg);
  CHECK(e.d_grd == 0.0);
  CHECK(e.optimal);
}

TEST_CASE("pipeline runs are byte-identical") {
  const PipelineConfig cfg = small_config();
  const TriMesh other = fixtures::rigid_transform(blob(), 9);
  const auto dir = fixtures::scratch_dir("determinism");
  GroundTruth gt;
  for (int v = 0; v < blob().vertex_count(); ++v) gt[v] = v;
  for (const char* run : {"a", "b"}) {
    const PipelineResult r = run_pipeline(blob(), other, cfg);
    write_artifacts(dir / run, r, "blob.off", "moved.off", blob(), other, true);
    const EvalReport e = evaluate(r.transferred.pairs, gt, other, cfg);
    MESSAGE("rigid copy: D_iso ", r.match.em.map.d_iso_mean, ", normalized error ", e.d_grd_normalized);
    CHECK(e.optimal);
  }
  for (const char* file : {"correspondence.json", "transferred.json", "source_colored.off", "target_level.off"}) {
    const std::string a = slurp(dir / "a" / file);
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b" / file));
  }
  const nlohmann::json j = read_json(dir / "a" / "correspondence.json");
  CHECK(j.at("pairs").size() == 30);
}

TEST_CASE("persisted intermediate artifacts give the same map") {
  const PipelineConfig cfg = small_config();
  const TriMesh other = fixtures::rigid_transform(blob(), 4);
  PipelineConfig inside = cfg;
  inside.mode = ModeChoice::Inside;
  const PipelineResult direct = run_pipeline(blob(), other, inside);

  const auto dir = fixtures::scratch_dir("stages");
  std::vector<std::vector<LevelEntry>> sweeps;
  for (const TriMesh* m : {&blob(), &other}) {
    const VoxelVolume v = voxelize(*m, cfg.target_voxels);
    save_volume(dir / "v.tvol", v);
    const VoxelVolume back = load_volume(dir / "v.tvol");
    save_field(dir / "f.tvol", solve_field(back, {compute_rho(back), FieldMode::Inside}));
    const ScalarField f = load_field(dir / "f.tvol");
    std::vector<LevelEntry> levels = extract_all(f, build_schedule(f.v_max, cfg.level_step));
    // Round-trip every level surface through OFF.
    for (auto& e : levels) {
      if (!e.surface) continue;
      save_mesh(e.surface->mesh, dir / "level.off");
      e.surface->mesh = load_mesh(dir / "level.off");
      e.surface->topology = analyze_topology(e.surface->mesh);
    }
    sweeps.push_back(std::move(levels));
  }
  const LevelPair pair = select_pair(sweeps[0], sweeps[1]);
  CHECK(pair.rank == direct.pair.rank);
  const MatchResult m = match_meshes(pair.source.mesh, pair.target.mesh, cfg);
  CHECK(m.em.map.target_of == direct.match.em.map.target_of);
  CHECK(m.source_samples.vertex_ids == direct.match.source_samples.vertex_ids);
}

TEST_CASE("auto mode inflates a cut ring to match an intact one") {
  auto ring = [](const Vec3& p) { return 4.0 - std::hypot(std::hypot(p.x(), p.y()) - 12.0, p.z()); };
  const Vec3 lo(-17, -17, -5), hi(17, 17, 5);
  const TriMesh intact = fixtures::implicit_surface(ring, lo, hi, 0.5);
  const TriMesh cut = fixtures::implicit_surface(
      [&](const Vec3& p) { return std::min(ring(p), -std::min(1.0 - std::abs(p.y()), p.x())); }, lo, hi, 0.5);
  REQUIRE(analyze_topology(intact).genus == 1);
  REQUIRE(analyze_topology(cut).genus == 0);

  PipelineConfig cfg = small_config();
  cfg.target_voxels = 40000;
  cfg.level_step = 0.01;
  const PipelineResult r = run_pipeline(cut, intact, cfg);
  REQUIRE(r.attempts.size() == 2);
  CHECK(r.attempts[0].mode == FieldMode::Inside);
  CHECK(r.mode == FieldMode::Outside);
  CHECK(r.pair.shared_genus == 1);
  if (r.attempts[0].rank) CHECK(*r.attempts[1].rank < *r.attempts[0].rank);
}
