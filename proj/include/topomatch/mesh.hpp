#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace topomatch {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Connectivity derived from a face list. All ranges are CSR-encoded:
/// the items of entry `i` live in `[offsets[i], offsets[i + 1])`.
struct MeshAdjacency {
  /// Unique undirected edges, `a < b`, sorted lexicographically.
  std::vector<std::array<int, 2>> edges;
  std::vector<int> edge_face_offsets;
  std::vector<int> edge_faces;
  std::vector<int> vertex_face_offsets;
  std::vector<int> vertex_faces;
  /// Vertex-to-vertex neighbours, sorted ascending per vertex.
  std::vector<int> neighbor_offsets;
  std::vector<int> neighbors;

  /// Index into `edges` of the edge {a, b}, or -1.
  int edge_index(int a, int b) const;
  int edge_face_count(int e) const { return edge_face_offsets[e + 1] - edge_face_offsets[e]; }
};

/// Indexed triangle mesh. Geometry and faces are immutable after
/// construction; adjacency is built on first use and shared by copies.
class TriMesh {
 public:
  TriMesh();
  /// Throws PreconditionError on out-of-range or repeated face indices.
  TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  int vertex_count() const noexcept { return static_cast<int>(vertices_.size()); }
  int face_count() const noexcept { return static_cast<int>(faces_.size()); }
  bool empty() const noexcept { return faces_.empty(); }

  const MeshAdjacency& adjacency() const;

  double face_area(int f) const;
  double area() const;
  /// Signed enclosed volume (divergence theorem); positive for outward-oriented closed meshes.
  double signed_volume() const;

 private:
  struct Cache {
    std::once_flag once;
    std::unique_ptr<const MeshAdjacency> data;
  };

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  mutable std::shared_ptr<Cache> cache_;
};

struct TopologyReport {
  bool is_closed = false;
  bool is_manifold = false;
  /// Present only for closed, connected, manifold meshes with even χ ≤ 2.
  std::optional<int> genus;
  int component_count = 0;
  int euler_characteristic = 0;
  int vertex_count = 0;  // referenced vertices only
  int edge_count = 0;
  int face_count = 0;
};

/// Manifold means: no edge with more than two faces and, around every
/// vertex, the incident faces form one edge-connected fan.
TopologyReport analyze_topology(const TriMesh& mesh);

/// Components whose faces are linked through shared vertices.
std::vector<int> face_components(const TriMesh& mesh, int* component_count = nullptr);

/// The component with the most faces; ties go to the larger area, then to
/// the smallest minimum vertex index. Unreferenced vertices are dropped.
TriMesh largest_component(const TriMesh& mesh);

/// Keeps the listed faces and compacts vertices in their original order.
TriMesh submesh(const TriMesh& mesh, std::span<const int> face_ids);

enum class MeshFormat { Off, Obj };

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Deduces the format from the extension (".off", ".obj", case-insensitive).
MeshFormat format_from_path(const std::filesystem::path& path);

/// ASCII OFF/OBJ reader; polygons are fan-triangulated.
TriMesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format = std::nullopt);

/// Writes with round-trip precision. Colors, when given, go out as a COFF
/// annex or as OBJ `v x y z r g b` components.
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path,
               std::optional<MeshFormat> format = std::nullopt,
               std::span<const Rgb> vertex_colors = {});

}  // namespace topomatch
