#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "topomatch/errors.hpp"
#include "topomatch/mesh.hpp"

namespace topomatch {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

/// Splits on whitespace, dropping anything after '#'.
std::vector<std::string_view> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view tok, int line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("expected a number, got '" + std::string(tok) + "'", line);
  return value;
}

long parse_long(std::string_view tok, int line) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("expected an integer, got '" + std::string(tok) + "'", line);
  return value;
}

void append_fan(const std::vector<int>& polygon, int vertex_count, int line, std::vector<Face>& faces) {
  if (polygon.size() < 3) throw ParseError("face with fewer than 3 vertices", line);
  for (int v : polygon)
    if (v < 0 || v >= vertex_count)
      throw ParseError("face index " + std::to_string(v) + " out of range (" +
                           std::to_string(vertex_count) + " vertices)",
                       line);
  for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
    const Face f{polygon[0], polygon[i], polygon[i + 1]};
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw ParseError("non-triangulatable face (repeated vertex index)", line);
    faces.push_back(f);
  }
}

TriMesh read_off(std::istream& in) {
  std::string raw;
  int line_no = 0;
  std::vector<std::string_view> toks;

  // Pulls the next non-empty tokenised line.
  auto next_line = [&]() -> bool {
    while (std::getline(in, raw)) {
      ++line_no;
      toks = tokenize(raw);
      if (!toks.empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError("empty OFF file", line_no);
  const std::string header(toks[0]);
  if (header != "OFF" && header != "COFF" && header != "NOFF" && header != "CNOFF")
    throw ParseError("missing OFF header", line_no);
  std::vector<std::string_view> counts(toks.begin() + 1, toks.end());
  if (counts.empty()) {
    if (!next_line()) throw ParseError("missing element counts", line_no);
    counts = toks;
  }
  if (counts.size() < 2) throw ParseError("expected 'nv nf [ne]'", line_no);
  const long nv = parse_long(counts[0], line_no);
  const long nf = parse_long(counts[1], line_no);
  if (nv < 0 || nf < 0) throw ParseError("negative element count", line_no);

  std::vector<Vec3> vertices;
  vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!next_line()) throw ParseError("unexpected end of file in vertex list", line_no);
    if (toks.size() < 3) throw ParseError("vertex needs 3 coordinates", line_no);
    vertices.emplace_back(parse_double(toks[0], line_no), parse_double(toks[1], line_no),
                          parse_double(toks[2], line_no));
  }
  std::vector<Face> faces;
  faces.reserve(nf);
  std::vector<int> polygon;
  for (long i = 0; i < nf; ++i) {
    if (!next_line()) throw ParseError("unexpected end of file in face list", line_no);
    const long k = parse_long(toks[0], line_no);
    if (k < 0 || static_cast<long>(toks.size()) < k + 1)
      throw ParseError("face declares " + std::to_string(k) + " vertices", line_no);
    polygon.clear();
    for (long j = 1; j <= k; ++j) polygon.push_back(static_cast<int>(parse_long(toks[j], line_no)));
    append_fan(polygon, static_cast<int>(nv), line_no, faces);
  }
  if (faces.empty()) throw ParseError("mesh has no faces", 0);
  return TriMesh(std::move(vertices), std::move(faces));
}

TriMesh read_obj(std::istream& in) {
  std::string raw;
  int line_no = 0;
  std::vector<Vec3> vertices;
  struct PendingFace {
    std::vector<long> refs;
    int line;
  };
  std::vector<PendingFace> pending;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto toks = tokenize(raw);
    if (toks.empty()) continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) throw ParseError("vertex needs 3 coordinates", line_no);
      vertices.emplace_back(parse_double(toks[1], line_no), parse_double(toks[2], line_no),
                            parse_double(toks[3], line_no));
    } else if (toks[0] == "f") {
      PendingFace face{{}, line_no};
      for (std::size_t j = 1; j < toks.size(); ++j) {
        std::string_view ref = toks[j];
        ref = ref.substr(0, ref.find('/'));
        const long idx = parse_long(ref, line_no);
        if (idx == 0) throw ParseError("OBJ indices are 1-based", line_no);
        // Negative indices are relative to the vertices read so far.
        face.refs.push_back(idx > 0 ? idx - 1 : static_cast<long>(vertices.size()) + idx);
      }
      pending.push_back(std::move(face));
    }
  }
  std::vector<Face> faces;
  std::vector<int> polygon;
  for (const auto& face : pending) {
    polygon.assign(face.refs.begin(), face.refs.end());
    append_fan(polygon, static_cast<int>(vertices.size()), face.line, faces);
  }
  if (faces.empty()) throw ParseError("mesh has no faces", 0);
  return TriMesh(std::move(vertices), std::move(faces));
}

}  // namespace

MeshFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".off") return MeshFormat::Off;
  if (ext == ".obj") return MeshFormat::Obj;
  throw PreconditionError("cannot infer mesh format from '" + path.string() + "'");
}

TriMesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format) {
  const MeshFormat fmt = format ? *format : format_from_path(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return fmt == MeshFormat::Off ? read_off(in) : read_obj(in);
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), path.string());
  }
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path, std::optional<MeshFormat> format,
               std::span<const Rgb> vertex_colors) {
  const MeshFormat fmt = format ? *format : format_from_path(path);
  const bool colored = !vertex_colors.empty();
  if (colored && static_cast<int>(vertex_colors.size()) != mesh.vertex_count())
    throw PreconditionError("save_mesh: one color per vertex required");

  std::ostringstream out;
  out.precision(17);
  if (fmt == MeshFormat::Off) {
    out << (colored ? "COFF\n" : "OFF\n");
    out << mesh.vertex_count() << ' ' << mesh.face_count() << " 0\n";
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const Vec3& p = mesh.vertices()[v];
      out << p.x() << ' ' << p.y() << ' ' << p.z();
      if (colored) {
        const Rgb& c = vertex_colors[v];
        out << ' ' << int(c.r) << ' ' << int(c.g) << ' ' << int(c.b);
      }
      out << '\n';
    }
    for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  } else {
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const Vec3& p = mesh.vertices()[v];
      out << "v " << p.x() << ' ' << p.y() << ' ' << p.z();
      if (colored) {
        const Rgb& c = vertex_colors[v];
        out << ' ' << c.r / 255.0 << ' ' << c.g / 255.0 << ' ' << c.b / 255.0;
      }
      out << '\n';
    }
    for (const Face& f : mesh.faces())
      out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write '" + path.string() + "'");
  const std::string text = out.str();
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace topomatch
