#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "topomatch/errors.hpp"
#include "topomatch/field_solver.hpp"
#include "topomatch/level_extractor.hpp"
#include "topomatch/pipeline.hpp"
#include "topomatch/reports.hpp"
#include "topomatch/topo_select.hpp"
#include "topomatch/tvol.hpp"
#include "topomatch/volume.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace topomatch;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitPrecondition = 2;
constexpr int kExitNoPair = 3;

void emit(const json& j, bool as_json, const std::string& text) {
  if (as_json)
    std::cout << j.dump(2) << '\n';
  else
    std::cout << text << '\n';
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

fs::path sidecar(const fs::path& field_path) { return fs::path(field_path.string() + ".json"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

json level_index_entry(const LevelEntry& e, const std::string& file) {
  json j{{"t", e.t}, {"iso", e.iso}};
  if (!e.surface) {
    j["file"] = nullptr;
    return j;
  }
  const TopologyReport& r = e.surface->topology;
  j["file"] = file;
  j["V"] = r.vertex_count;
  j["E"] = r.edge_count;
  j["F"] = r.face_count;
  j["genus"] = r.genus ? json(*r.genus) : json(nullptr);
  j["manifold"] = r.is_manifold;
  j["closed"] = r.is_closed;
  return j;
}

std::vector<LevelSurface> load_level_dir(const fs::path& dir) {
  const json index = read_json(dir / "index.json");
  std::vector<LevelSurface> out;
  for (const auto& e : index.at("levels")) {
    if (e.at("file").is_null()) continue;
    LevelSurface s;
    s.level_t = e.at("t").get<double>();
    s.iso_value = e.at("iso").get<double>();
    s.mesh = load_mesh(dir / e.at("file").get<std::string>());
    s.topology = analyze_topology(s.mesh);
    out.push_back(std::move(s));
  }
  return out;
}

struct Options {
  bool as_json = false;
  PipelineConfig config;
  std::string mode = "auto";
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_flag("--json", o.as_json, "Machine-readable report on stdout");
}

void add_matching(CLI::App* cmd, Options& o) {
  cmd->add_option("--samples", o.config.samples, "Farthest-point samples per shape")->check(CLI::PositiveNumber);
  cmd->add_option("--spectral-dim", o.config.spectral_k, "MDS embedding dimension")->check(CLI::Range(1, 16));
  cmd->add_option("--seed-vertex", o.config.seed_vertex, "First farthest-point sample")->check(CLI::NonNegativeNumber);
  cmd->add_option("--em-iters", o.config.em.max_iters, "Maximum EM iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--em-tol", o.config.em.tol, "EM stopping tolerance on D_iso");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape correspondence under topological noise via level surfaces of a screened-Poisson field"};
  app.require_subcommand(1);
  Options o;

  // voxelize
  auto* vox = app.add_subcommand("voxelize", "Rasterize a closed mesh into a TVOL1 occupancy volume");
  std::string vox_in, vox_out;
  int padding = 1;
  vox->add_option("mesh", vox_in, "Input OFF/OBJ mesh")->required()->check(CLI::ExistingFile);
  vox->add_option("-o,--output", vox_out, "Output .tvol")->required();
  vox->add_option("--target-voxels", o.config.target_voxels, "Approximate occupied voxel count");
  vox->add_option("--padding", padding, "Empty layers around the shape")->check(CLI::PositiveNumber);
  add_common(vox, o);

  // field
  auto* fld = app.add_subcommand("field", "Solve the screened-Poisson field on a volume");
  std::string fld_in, fld_out, fld_mode = "inside";
  double rho = 0.0;
  fld->add_option("volume", fld_in, "Occupancy .tvol")->required()->check(CLI::ExistingFile);
  fld->add_option("-o,--output", fld_out, "Output field .tvol")->required();
  fld->add_option("--mode", fld_mode, "inside | outside")->check(CLI::IsMember({"inside", "outside"}));
  fld->add_option("--rho", rho, "Smoothness length (default: maximal inscribed radius)");
  add_common(fld, o);

  // levels
  auto* lev = app.add_subcommand("levels", "Extract level surfaces of a field");
  std::string lev_in, lev_dir;
  lev->add_option("field", lev_in, "Field .tvol")->required()->check(CLI::ExistingFile);
  lev->add_option("--out-dir", lev_dir, "Directory for level OFF files and index.json")->required();
  lev->add_option("--level-step", o.config.level_step, "Spacing of t in (0, 1]");
  lev->add_option("--mode", fld_mode, "Field side when no sidecar is present")
      ->check(CLI::IsMember({"inside", "outside"}));
  add_common(lev, o);

  // select
  auto* sel = app.add_subcommand("select", "Pick the comparable level pair from two level directories");
  std::string sel_src, sel_tgt;
  sel->add_option("source_levels", sel_src, "Source level directory")->required()->check(CLI::ExistingDirectory);
  sel->add_option("target_levels", sel_tgt, "Target level directory")->required()->check(CLI::ExistingDirectory);
  add_common(sel, o);

  // match
  auto* mat = app.add_subcommand("match", "EM correspondence between two surfaces");
  std::string mat_src, mat_tgt, mat_out;
  double level_s = 0.0, level_t = 0.0;
  mat->add_option("source", mat_src, "Source surface mesh")->required()->check(CLI::ExistingFile);
  mat->add_option("target", mat_tgt, "Target surface mesh")->required()->check(CLI::ExistingFile);
  mat->add_option("-o,--output", mat_out, "Correspondence JSON")->required();
  mat->add_option("--level-s", level_s, "Level of the source surface (recorded)");
  mat->add_option("--level-t", level_t, "Level of the target surface (recorded)");
  add_matching(mat, o);
  add_common(mat, o);

  // transfer
  auto* tra = app.add_subcommand("transfer", "Carry a level-surface correspondence to the original meshes");
  std::string tra_in, tra_src, tra_tgt, tra_out, tra_dir;
  bool colored = false;
  tra->add_option("correspondence", tra_in, "Correspondence JSON")->required()->check(CLI::ExistingFile);
  tra->add_option("--source", tra_src, "Original source mesh")->required()->check(CLI::ExistingFile);
  tra->add_option("--target", tra_tgt, "Original target mesh")->required()->check(CLI::ExistingFile);
  tra->add_option("-o,--output", tra_out, "Transferred map JSON")->required();
  tra->add_option("--out-dir", tra_dir, "Directory for colored meshes (default: next to the output)");
  tra->add_flag("--emit-colored-mesh", colored, "Write COFF meshes with matched vertices colored alike");
  add_common(tra, o);

  // eval
  auto* evl = app.add_subcommand("eval", "Ground-truth error of a transferred map");
  std::string evl_in, evl_gt, evl_tgt;
  evl->add_option("transferred", evl_in, "Transferred map JSON")->required()->check(CLI::ExistingFile);
  evl->add_option("--ground-truth", evl_gt, "Two-column source/target vertex file")->required()->check(CLI::ExistingFile);
  evl->add_option("--target", evl_tgt, "Original target mesh")->required()->check(CLI::ExistingFile);
  evl->add_option("--samples", o.config.samples, "Samples defining the radius r")->check(CLI::PositiveNumber);
  evl->add_option("--seed-vertex", o.config.seed_vertex, "First farthest-point sample");
  add_common(evl, o);

  // run
  auto* run = app.add_subcommand("run", "End-to-end pipeline");
  std::string run_src, run_tgt, run_dir = "out", run_gt;
  bool baseline = false;
  run->add_option("source", run_src, "Source mesh")->required()->check(CLI::ExistingFile);
  run->add_option("target", run_tgt, "Target mesh")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", run_dir, "Artifact directory");
  run->add_option("--target-voxels", o.config.target_voxels, "Approximate occupied voxel count");
  run->add_option("--mode", o.mode, "inside | outside | auto")->check(CLI::IsMember({"inside", "outside", "auto"}));
  run->add_option("--level-step", o.config.level_step, "Spacing of t in (0, 1]");
  run->add_option("--ground-truth", run_gt, "Evaluate against this ground truth")->check(CLI::ExistingFile);
  run->add_flag("--baseline", baseline, "Also match the originals directly (needs --ground-truth)");
  run->add_flag("--emit-colored-mesh", colored, "Write COFF meshes with matched vertices colored alike");
  add_matching(run, o);
  add_common(run, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version exit 0; any usage error is a precondition failure.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*vox) {
      const TriMesh mesh = load_mesh(vox_in);
      VoxelizeOptions vo;
      vo.padding = padding;
      const VoxelVolume vol = voxelize(mesh, o.config.target_voxels, vo);
      save_volume(vox_out, vol);
      const double r = compute_rho(vol);
      const json j{{"dims", vol.grid.dims},
                   {"origin", {vol.grid.origin.x(), vol.grid.origin.y(), vol.grid.origin.z()}},
                   {"spacing", vol.grid.spacing},
                   {"occupied", vol.occupied_count()},
                   {"rho", r}};
      emit(j, o.as_json,
           "grid " + std::to_string(vol.grid.dims[0]) + "x" + std::to_string(vol.grid.dims[1]) + "x" +
               std::to_string(vol.grid.dims[2]) + ", h " + fmt(vol.grid.spacing) + ", occupied " +
               std::to_string(vol.occupied_count()) + ", rho " + fmt(r));
    } else if (*fld) {
      const VoxelVolume vol = load_volume(fld_in);
      const double use_rho = rho > 0.0 ? rho : compute_rho(vol);
      const ScalarField field = solve_field(vol, FieldConfig{use_rho, field_mode_from_string(fld_mode)});
      save_field(fld_out, field);
      const json j{{"mode", fld_mode},
                   {"rho", use_rho},
                   {"v_max", field.v_max},
                   {"unknowns", field.info.unknowns},
                   {"solver", field.info.solver == SolverKind::Direct ? "cholesky" : "cg"},
                   {"relative_residual", field.info.relative_residual}};
      write_json(sidecar(fld_out), j);
      emit(j, o.as_json,
           fld_mode + " field, rho " + fmt(use_rho) + ", v_max " + fmt(field.v_max) + ", residual " +
               fmt(field.info.relative_residual));
    } else if (*lev) {
      ScalarField field = load_field(lev_in);
      field.config.mode = field_mode_from_string(fld_mode);
      if (fs::exists(sidecar(lev_in))) {
        const json side = read_json(sidecar(lev_in));
        field.config.mode = field_mode_from_string(side.at("mode").get<std::string>());
        field.config.rho = side.at("rho").get<double>();
      }
      ensure_dir(lev_dir);
      const auto levels = extract_all(field, build_schedule(field.v_max, o.config.level_step));
      json index{{"v_max", field.v_max}, {"mode", to_string(field.config.mode)}, {"levels", json::array()}};
      int written = 0;
      for (std::size_t i = 0; i < levels.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "level_%03zu.off", i + 1);
        if (levels[i].surface) {
          save_mesh(levels[i].surface->mesh, fs::path(lev_dir) / name);
          ++written;
        }
        index["levels"].push_back(level_index_entry(levels[i], name));
      }
      write_json(fs::path(lev_dir) / "index.json", index);
      emit(index, o.as_json, std::to_string(written) + " level surfaces written to " + lev_dir);
    } else if (*sel) {
      const auto s = load_level_dir(sel_src);
      const auto t = load_level_dir(sel_tgt);
      if (s.empty() || t.empty()) throw NoAdmissiblePairError("a level directory holds no surfaces");
      const LevelPair p = select_pair(std::span<const LevelSurface>(s), std::span<const LevelSurface>(t));
      const json j{{"t_s", p.source.level_t}, {"t_t", p.target.level_t}, {"genus", p.shared_genus}};
      emit(j, o.as_json, fmt(p.source.level_t) + " " + fmt(p.target.level_t) + " " + std::to_string(p.shared_genus));
    } else if (*mat) {
      const TriMesh s = load_mesh(mat_src);
      const TriMesh t = load_mesh(mat_tgt);
      const MatchResult m = match_meshes(s, t, o.config);
      const auto pairs = vertex_pairs(m.em.map, m.source_table, m.target_table);
      const json j = correspondence_json(mat_src, mat_tgt, level_s, level_t, pairs, m.em.map);
      write_json(mat_out, j);
      emit(j, o.as_json, "D_iso " + fmt(m.em.map.d_iso_mean) + " over " + std::to_string(pairs.size()) + " pairs");
    } else if (*tra) {
      const json corr = read_json(tra_in);
      const TriMesh sl = load_mesh(corr.at("source_mesh").get<std::string>());
      const TriMesh tl = load_mesh(corr.at("target_mesh").get<std::string>());
      const TriMesh so = load_mesh(tra_src);
      const TriMesh to = load_mesh(tra_tgt);
      const TransferredMap tm = transfer_pairs(pairs_from_json(corr), sl, tl, so, to);
      json j = transferred_json(tm);
      j["level_s"] = corr.at("level_s");
      j["level_t"] = corr.at("level_t");
      write_json(tra_out, j);
      if (colored) {
        const fs::path dir = tra_dir.empty() ? fs::absolute(tra_out).parent_path() : fs::path(tra_dir);
        ensure_dir(dir);
        const auto [cs, ct] = pair_colors(tm.pairs, so.vertex_count(), to.vertex_count());
        save_mesh(so, dir / "source_colored.off", MeshFormat::Off, cs);
        save_mesh(to, dir / "target_colored.off", MeshFormat::Off, ct);
      }
      emit(j, o.as_json, std::to_string(tm.pairs.size()) + " pairs transferred");
    } else if (*evl) {
      const TransferredMap tm = transferred_from_json(read_json(evl_in));
      const EvalReport r = evaluate(tm.pairs, load_ground_truth(evl_gt), load_mesh(evl_tgt), o.config);
      emit(eval_json(r), o.as_json,
           "D_grd " + fmt(r.d_grd) + ", normalized " + fmt(r.d_grd_normalized) + (r.optimal ? " (optimal)" : ""));
    } else if (*run) {
      o.config.mode = mode_choice_from_string(o.mode);
      if (baseline && run_gt.empty()) throw PreconditionError("--baseline needs --ground-truth");
      const TriMesh s = load_mesh(run_src);
      const TriMesh t = load_mesh(run_tgt);
      const PipelineResult result = run_pipeline(s, t, o.config);
      write_artifacts(run_dir, result, run_src, run_tgt, s, t, colored);
      json j{{"mode", to_string(result.mode)},
             {"level_s", result.pair.source.level_t},
             {"level_t", result.pair.target.level_t},
             {"genus", result.pair.shared_genus},
             {"D_iso", result.match.em.map.d_iso_mean}};
      std::string text = to_string(result.mode) + " levels " + fmt(result.pair.source.level_t) + "/" +
                         fmt(result.pair.target.level_t) + ", genus " + std::to_string(result.pair.shared_genus) +
                         ", D_iso " + fmt(result.match.em.map.d_iso_mean);
      if (!run_gt.empty()) {
        const GroundTruth gt = load_ground_truth(run_gt);
        const EvalReport r = evaluate(result.transferred.pairs, gt, t, o.config);
        j["eval"] = eval_json(r);
        text += ", normalized error " + fmt(r.d_grd_normalized);
        if (baseline) {
          const MatchResult b = match_meshes(s, t, o.config);
          const EvalReport rb = evaluate(vertex_pairs(b.em.map, b.source_table, b.target_table), gt, t, o.config);
          j["baseline_eval"] = eval_json(rb);
          text += ", baseline " + fmt(rb.d_grd_normalized);
        }
        write_json(fs::path(run_dir) / "eval.json", j);
      }
      emit(j, o.as_json, text);
    }
  } catch (const NoAdmissiblePairError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoPair;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const EmptySurfaceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
