#include "smseg/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace smseg {

static_assert(std::endian::native == std::endian::little,
              "flow/grid containers are written as raw little-endian words");

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error(path + ": truncated header");
  return v;
}

void check_magic(std::istream& in, const char* magic, const std::string& path) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0) {
    throw std::runtime_error(path + ": bad magic, expected " + std::string(magic, 4));
  }
}

void check_dims(std::uint32_t w, std::uint32_t h, const std::string& path) {
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20)) {
    throw std::runtime_error(path + ": implausible dimensions " + std::to_string(w) + "x" + std::to_string(h));
  }
}

}  // namespace

bool FlowField::valid(int x, int y) const {
  const std::size_t i = index(x, y);
  return !std::isnan(du[i]) && !std::isnan(dv[i]);
}

FlowField make_invalid_flow(int width, int height) {
  FlowField f;
  f.width = width;
  f.height = height;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  f.du.assign(static_cast<std::size_t>(width) * height, nan);
  f.dv.assign(static_cast<std::size_t>(width) * height, nan);
  return f;
}

void write_flow(const FlowField& flow, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.write("SMFL", 4);
  write_u32(out, static_cast<std::uint32_t>(flow.width));
  write_u32(out, static_cast<std::uint32_t>(flow.height));
  const std::size_t n = static_cast<std::size_t>(flow.width) * flow.height;
  std::vector<float> inter(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    inter[2 * i] = static_cast<float>(flow.du[i]);
    inter[2 * i + 1] = static_cast<float>(flow.dv[i]);
  }
  out.write(reinterpret_cast<const char*>(inter.data()), static_cast<std::streamsize>(inter.size() * sizeof(float)));
  if (!out) throw std::runtime_error(path + ": write failed");
}

FlowField read_flow(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  check_magic(in, "SMFL", path);
  const std::uint32_t w = read_u32(in, path);
  const std::uint32_t h = read_u32(in, path);
  check_dims(w, h, path);
  FlowField f;
  f.width = static_cast<int>(w);
  f.height = static_cast<int>(h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<float> inter(2 * n);
  in.read(reinterpret_cast<char*>(inter.data()), static_cast<std::streamsize>(inter.size() * sizeof(float)));
  if (!in) throw std::runtime_error(path + ": truncated payload");
  f.du.resize(n);
  f.dv.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.du[i] = inter[2 * i];
    f.dv[i] = inter[2 * i + 1];
  }
  return f;
}

void write_grid(const GridF32& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.write("SMLG", 4);
  write_u32(out, static_cast<std::uint32_t>(grid.width));
  write_u32(out, static_cast<std::uint32_t>(grid.height));
  out.write(reinterpret_cast<const char*>(grid.values.data()),
            static_cast<std::streamsize>(grid.values.size() * sizeof(float)));
  if (!out) throw std::runtime_error(path + ": write failed");
}

GridF32 read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  check_magic(in, "SMLG", path);
  const std::uint32_t w = read_u32(in, path);
  const std::uint32_t h = read_u32(in, path);
  check_dims(w, h, path);
  GridF32 g;
  g.width = static_cast<int>(w);
  g.height = static_cast<int>(h);
  g.values.resize(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(g.values.data()),
          static_cast<std::streamsize>(g.values.size() * sizeof(float)));
  if (!in) throw std::runtime_error(path + ": truncated payload");
  return g;
}

void write_pgm(const ImageU8& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

ImageU8 read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error(path + ": not a binary PGM (P5)");
  auto next_int = [&in, &path]() {
    // Skip whitespace and '#' comment lines between header fields.
    for (;;) {
      const int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v = -1;
    in >> v;
    if (!in || v < 0) throw std::runtime_error(path + ": malformed PGM header");
    return v;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (maxval != 255) throw std::runtime_error(path + ": expected maxval 255");
  in.get();  // single whitespace byte after the header
  ImageU8 img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels.resize(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!in) throw std::runtime_error(path + ": truncated pixel data");
  return img;
}

}  // namespace smseg
