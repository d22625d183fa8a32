#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "topomatch/errors.hpp"
#include "topomatch/mesh.hpp"

using namespace topomatch;

namespace {

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

bool same_report(const TopologyReport& a, const TopologyReport& b) {
  return a.is_closed == b.is_closed && a.is_manifold == b.is_manifold && a.genus == b.genus &&
         a.component_count == b.component_count && a.euler_characteristic == b.euler_characteristic &&
         a.vertex_count == b.vertex_count && a.edge_count == b.edge_count && a.face_count == b.face_count;
}

TriMesh merge(const TriMesh& a, const TriMesh& b) {
  std::vector<Vec3> v = a.vertices();
  std::vector<Face> f = a.faces();
  const int off = a.vertex_count();
  v.insert(v.end(), b.vertices().begin(), b.vertices().end());
  for (auto t : b.faces()) f.push_back({t[0] + off, t[1] + off, t[2] + off});
  return TriMesh(v, f);
}

}  // namespace

TEST_CASE("construction rejects bad faces") {
  CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 3}}), PreconditionError);
  CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 1}}), PreconditionError);
}

TEST_CASE("OFF tetrahedron loads with V=4, F=4") {
  const auto dir = fixtures::scratch_dir("mesh_off");
  const auto path = write_text(dir / "tet.off",
                               "OFF\n# a comment\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
                               "3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n");
  const TriMesh m = load_mesh(path);
  CHECK(m.vertex_count() == 4);
  CHECK(m.face_count() == 4);
  CHECK(m.vertices()[3] == Vec3(0, 0, 1));
}

TEST_CASE("OBJ quad is fan-triangulated along the first-vertex diagonal") {
  const auto dir = fixtures::scratch_dir("mesh_obj");
  const auto path = write_text(dir / "quad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\n");
  const TriMesh m = load_mesh(path);
  REQUIRE(m.face_count() == 2);
  CHECK(m.faces()[0] == Face{0, 1, 2});
  CHECK(m.faces()[1] == Face{0, 2, 3});
}

TEST_CASE("OBJ negative indices are relative") {
  const auto dir = fixtures::scratch_dir("mesh_obj_neg");
  const auto path = write_text(dir / "tri.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
  CHECK(load_mesh(path).faces()[0] == Face{0, 1, 2});
}

TEST_CASE("load errors carry line numbers") {
  const auto dir = fixtures::scratch_dir("mesh_errors");
  SUBCASE("index out of range") {
    const auto path = write_text(dir / "bad.off", "OFF\n5 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 1\n3 0 1 9\n");
    try {
      load_mesh(path);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 8);
      CHECK(std::string(e.what()).find("out of range") != std::string::npos);
    }
  }
  SUBCASE("non-triangulatable face") {
    const auto path = write_text(dir / "rep.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 2\n");
    CHECK_THROWS_AS(load_mesh(path), ParseError);
  }
  SUBCASE("empty mesh") {
    const auto path = write_text(dir / "empty.off", "OFF\n0 0 0\n");
    CHECK_THROWS_AS(load_mesh(path), ParseError);
  }
  SUBCASE("garbage number") {
    const auto path = write_text(dir / "nan.obj", "v 0 x 0\n");
    try {
      load_mesh(path);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_mesh(dir / "missing.off"), IoError); }
}

TEST_CASE("save/load round trip") {
  const auto dir = fixtures::scratch_dir("mesh_roundtrip");
  const TriMesh m = fixtures::rigid_transform(fixtures::icosphere(2, 1.3), 7);
  for (const char* name : {"m.off", "m.obj"}) {
    save_mesh(m, dir / name);
    const TriMesh r = load_mesh(dir / name);
    REQUIRE(r.vertex_count() == m.vertex_count());
    CHECK(r.faces() == m.faces());
    double err = 0;
    for (int i = 0; i < m.vertex_count(); ++i) err = std::max(err, (r.vertices()[i] - m.vertices()[i]).norm());
    CHECK(err <= 1e-9);
  }
}

TEST_CASE("colors are written in vertex order") {
  const auto dir = fixtures::scratch_dir("mesh_colors");
  const TriMesh m({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  const std::vector<Rgb> c = {{255, 0, 0}, {0, 255, 0}, {0, 0, 255}};
  save_mesh(m, dir / "c.off", MeshFormat::Off, c);
  std::ifstream in(dir / "c.off");
  std::string header;
  std::getline(in, header);
  CHECK(header == "COFF");
  std::string counts;
  std::getline(in, counts);
  for (const auto& expect : c) {
    double x, y, z;
    int r, g, b;
    in >> x >> y >> z >> r >> g >> b;
    CHECK(r == expect.r);
    CHECK(g == expect.g);
    CHECK(b == expect.b);
  }
  CHECK(load_mesh(dir / "c.off").vertex_count() == 3);

  save_mesh(m, dir / "c.obj", MeshFormat::Obj, c);
  CHECK(load_mesh(dir / "c.obj").face_count() == 1);
}

TEST_CASE("unwritable path is an IO error") {
  CHECK_THROWS_AS(save_mesh(fixtures::tetrahedron(), "/nonexistent_dir/x/y.off"), IoError);
}

TEST_CASE("topology of reference meshes") {
  SUBCASE("octahedron") {
    const auto r = analyze_topology(fixtures::octahedron());
    CHECK(r.vertex_count == 6);
    CHECK(r.edge_count == 12);
    CHECK(r.face_count == 8);
    CHECK(r.euler_characteristic == 2);
    CHECK(r.is_closed);
    CHECK(r.is_manifold);
    CHECK(r.genus == 0);
  }
  SUBCASE("torus") {
    const auto r = analyze_topology(fixtures::torus(3, 1, 16, 8));
    CHECK(r.euler_characteristic == 0);
    CHECK(r.genus == 1);
  }
  SUBCASE("three faces on one edge") {
    const TriMesh m({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}}, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}});
    const auto r = analyze_topology(m);
    CHECK_FALSE(r.is_manifold);
    CHECK_FALSE(r.genus.has_value());
  }
  SUBCASE("bowtie vertex") {
    // Two tetrahedra sharing one vertex: every edge has two faces, but the
    // fan around the shared vertex splits in two.
    const TriMesh a = fixtures::tetrahedron();
    std::vector<Vec3> v = a.vertices();
    v.push_back({-1, 0, 0});
    v.push_back({0, -1, 0});
    v.push_back({0, 0, -1});
    std::vector<Face> f = a.faces();
    f.push_back({0, 4, 5});
    f.push_back({0, 6, 4});
    f.push_back({0, 5, 6});
    f.push_back({4, 6, 5});
    const auto r = analyze_topology(TriMesh(v, f));
    CHECK(r.is_closed);
    CHECK_FALSE(r.is_manifold);
    CHECK_FALSE(r.genus.has_value());
  }
  SUBCASE("open disk") {
    const auto r = analyze_topology(fixtures::strip(3));
    CHECK_FALSE(r.is_closed);
    CHECK(r.is_manifold);
    CHECK_FALSE(r.genus.has_value());
  }
  SUBCASE("two spheres are not connected") {
    const auto r = analyze_topology(merge(fixtures::octahedron(), fixtures::octahedron(1, Vec3(5, 0, 0))));
    CHECK(r.component_count == 2);
    CHECK(r.euler_characteristic == 4);
    CHECK_FALSE(r.genus.has_value());
  }
}

TEST_CASE("Euler formula holds on closed connected manifolds") {
  for (const TriMesh& m : {fixtures::icosphere(3), fixtures::torus(2, 0.5, 20, 9), fixtures::tetrahedron(),
                           fixtures::box({0, 0, 0}, {1, 2, 3})}) {
    const auto r = analyze_topology(m);
    REQUIRE(r.genus.has_value());
    CHECK(2 - 2 * *r.genus == r.vertex_count - r.edge_count + r.face_count);
  }
}

TEST_CASE("topology is invariant under vertex reindexing") {
  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    const TriMesh m = fixtures::torus(2, 0.7, 12, 7);
    CHECK(same_report(analyze_topology(m), analyze_topology(fixtures::permute_vertices(m, seed))));
  }
}

TEST_CASE("adjacency is consistent with the face list") {
  const TriMesh m = fixtures::icosphere(2);
  const MeshAdjacency& adj = m.adjacency();
  for (std::size_t e = 0; e < adj.edges.size(); ++e) {
    CHECK(adj.edge_face_count(static_cast<int>(e)) == 2);
    for (int k = adj.edge_face_offsets[e]; k < adj.edge_face_offsets[e + 1]; ++k) {
      const Face& f = m.faces()[adj.edge_faces[k]];
      const auto [a, b] = adj.edges[e];
      CHECK(std::count(f.begin(), f.end(), a) == 1);
      CHECK(std::count(f.begin(), f.end(), b) == 1);
    }
  }
  CHECK(adj.edge_index(adj.edges[5][1], adj.edges[5][0]) == 5);
  // Copies share the cache; a rebuilt mesh derives the identical structure.
  const TriMesh copy(m.vertices(), m.faces());
  CHECK(copy.adjacency().edges == adj.edges);
  CHECK(copy.adjacency().edge_faces == adj.edge_faces);
}

TEST_CASE("largest_component") {
  SUBCASE("single component is kept") {
    const TriMesh m = fixtures::icosphere(1);
    const TriMesh r = largest_component(m);
    CHECK(r.vertex_count() == m.vertex_count());
    CHECK(r.faces() == m.faces());
  }
  SUBCASE("octahedron beats a lone triangle") {
    const TriMesh tri({{9, 9, 9}, {10, 9, 9}, {9, 10, 9}}, {{0, 1, 2}});
    const TriMesh r = largest_component(merge(tri, fixtures::octahedron()));
    CHECK(r.face_count() == 8);
    CHECK(r.vertex_count() == 6);
  }
  SUBCASE("equal face counts: larger area wins") {
    const TriMesh small = fixtures::octahedron(1.0);
    const TriMesh big = fixtures::octahedron(2.0, Vec3(10, 0, 0));
    const TriMesh r = largest_component(merge(small, big));
    // Area of an octahedron with vertex radius s is 4 sqrt(3) s^2.
    CHECK(r.area() == doctest::Approx(4 * std::sqrt(3.0) * 4.0));
    const TriMesh r2 = largest_component(merge(big, small));
    CHECK(r2.area() == doctest::Approx(r.area()));
  }
  SUBCASE("idempotent") {
    const TriMesh m = merge(fixtures::torus(2, 0.5, 10, 6), fixtures::icosphere(1, 1, Vec3(9, 0, 0)));
    const TriMesh once = largest_component(m);
    const TriMesh twice = largest_component(once);
    CHECK(once.faces() == twice.faces());
    CHECK(once.vertices() == twice.vertices());
  }
  SUBCASE("empty mesh") { CHECK_THROWS_AS(largest_component(TriMesh()), PreconditionError); }
}

TEST_CASE("signed volume and area of a box") {
  const TriMesh b = fixtures::box({0, 0, 0}, {1, 2, 3});
  CHECK(b.signed_volume() == doctest::Approx(6.0));
  CHECK(b.area() == doctest::Approx(22.0));
}
