#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace smseg {

// Dense optical flow sampled at every pixel of the previous frame. Components
// are row-major (du, dv) pairs; a NaN pair marks a pixel without a
// measurement. Held in double precision; the file format below stores
// float32, which costs ~1e-6 px on large displacements.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> du;
  std::vector<double> dv;

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool valid(int x, int y) const;
};

FlowField make_invalid_flow(int width, int height);

// Binary layout (little endian): magic "SMFL", u32 width, u32 height, then
// height*width float32 (du, dv) pairs in row-major order.
void write_flow(const FlowField& flow, const std::string& path);
FlowField read_flow(const std::string& path);

// Single-channel float grid, NaN for cells without a value. Same container
// is used for per-cell likelihood dumps and for range maps.
// Layout (little endian): magic "SMLG", u32 width, u32 height, then
// height*width float32 values in row-major order.
struct GridF32 {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

void write_grid(const GridF32& grid, const std::string& path);
GridF32 read_grid(const std::string& path);

// 8-bit grayscale raster stored as binary PGM (P5, maxval 255).
struct ImageU8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  std::uint8_t at(int x, int y) const { return pixels[index(x, y)]; }
};

void write_pgm(const ImageU8& image, const std::string& path);
ImageU8 read_pgm(const std::string& path);

}  // namespace smseg
