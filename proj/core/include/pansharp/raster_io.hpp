#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pansharp/raster.hpp"

namespace pansharp {

// MBR1 container layout (all integers little-endian):
//   0   char[4]  magic "MBR1"
//   4   u32      width
//   8   u32      height
//   12  u32      bands
//   16  u8[b]    band role codes (0=R 1=G 2=B 3=NIR 4=PAN 255=UNKNOWN)
//   ..  f64      value_range min
//   ..  f64      value_range max
//   ..  f64[]    bands*height*width planar samples
inline constexpr std::size_t kMbr1FixedHeader = 4 + 12 + 16;

std::vector<std::uint8_t> encode_mbr1(const Raster& raster);
Raster decode_mbr1(std::span<const std::uint8_t> bytes);

void write_raster(const Raster& raster, const std::filesystem::path& path);
Raster read_raster(const std::filesystem::path& path);

enum class PnmDepth { Bits8, Bits16 };

/// Linear quantization of a sample onto [0, maxval] using the raster's
/// value range, clamped at both ends.
std::uint16_t quantize(double value, const ValueRange& range, std::uint16_t maxval);

/// P5 for one band; P6 composite from the R, G, B roles (or the first three
/// bands when roles are missing). 16-bit output is big-endian per PNM.
std::vector<std::uint8_t> encode_pnm(const Raster& raster, PnmDepth depth = PnmDepth::Bits8);
void write_pnm(const Raster& raster, const std::filesystem::path& path,
               PnmDepth depth = PnmDepth::Bits8);

/// Raw P5 gray image with an explicit maxval (used for label maps).
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint16_t maxval = 255;
  std::vector<std::uint16_t> pixels;
};

std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace pansharp
