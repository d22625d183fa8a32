#include "topomatch/tvol.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "topomatch/errors.hpp"

namespace topomatch {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::string header_line(const GridGeometry& g) {
  std::ostringstream out;
  out.precision(17);
  out << "TVOL1 " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << ' ' << g.origin.x() << ' '
      << g.origin.y() << ' ' << g.origin.z() << ' ' << g.spacing << '\n';
  return out.str();
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::uint64_t byteswap64(std::uint64_t x) {
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((x >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

}  // namespace

void write_tvol(const std::filesystem::path& path, const GridGeometry& grid, const std::vector<std::uint8_t>& occupancy) {
  if (occupancy.size() != grid.size()) throw PreconditionError("write_tvol: size mismatch");
  auto out = open_for_write(path);
  out << header_line(grid);
  out.write(reinterpret_cast<const char*>(occupancy.data()), static_cast<std::streamsize>(occupancy.size()));
  finish(out, path);
}

void write_tvol(const std::filesystem::path& path, const GridGeometry& grid, const std::vector<double>& values) {
  if (values.size() != grid.size()) throw PreconditionError("write_tvol: size mismatch");
  auto out = open_for_write(path);
  out << header_line(grid);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) {
      const std::uint64_t le = byteswap64(std::bit_cast<std::uint64_t>(v));
      out.write(reinterpret_cast<const char*>(&le), sizeof le);
    }
  }
  finish(out, path);
}

TvolFile read_tvol(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string header;
  if (!std::getline(in, header)) throw ParseError("missing TVOL1 header", 1, path.string());

  TvolFile file;
  std::istringstream hs(header);
  std::string magic;
  GridGeometry& g = file.grid;
  double ox = 0, oy = 0, oz = 0;
  if (!(hs >> magic >> g.dims[0] >> g.dims[1] >> g.dims[2] >> ox >> oy >> oz >> g.spacing) || magic != "TVOL1")
    throw ParseError("malformed TVOL1 header", 1, path.string());
  g.origin = Vec3(ox, oy, oz);
  if (g.dims[0] <= 0 || g.dims[1] <= 0 || g.dims[2] <= 0 || !(g.spacing > 0.0))
    throw ParseError("invalid TVOL1 grid", 1, path.string());

  std::vector<char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t n = g.size();
  if (payload.size() == n) {
    std::vector<std::uint8_t> occ(n);
    std::memcpy(occ.data(), payload.data(), n);
    for (auto b : occ)
      if (b > 1) throw ParseError("occupancy byte outside {0,1}", 0, path.string());
    file.data = std::move(occ);
  } else if (payload.size() == n * sizeof(double)) {
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t raw = 0;
      std::memcpy(&raw, payload.data() + 8 * i, 8);
      if constexpr (std::endian::native == std::endian::big) raw = byteswap64(raw);
      values[i] = std::bit_cast<double>(raw);
    }
    file.data = std::move(values);
  } else {
    throw ParseError("payload of " + std::to_string(payload.size()) + " bytes does not match " +
                         std::to_string(n) + " voxels",
                     0, path.string());
  }
  return file;
}

void save_volume(const std::filesystem::path& path, const VoxelVolume& volume) {
  write_tvol(path, volume.grid, volume.occupancy);
}

VoxelVolume load_volume(const std::filesystem::path& path) {
  TvolFile file = read_tvol(path);
  if (file.is_field()) throw ParseError("expected an occupancy volume, found a field", 0, path.string());
  VoxelVolume vol{file.grid, std::get<std::vector<std::uint8_t>>(std::move(file.data))};
  validate_volume(vol);
  return vol;
}

}  // namespace topomatch
