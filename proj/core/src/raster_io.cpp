#include "pansharp/raster_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "detail/binary.hpp"
#include "pansharp/errors.hpp"

namespace pansharp {

namespace {
constexpr char kMbr1Magic[4] = {'M', 'B', 'R', '1'};
}

std::vector<std::uint8_t> encode_mbr1(const Raster& raster) {
  if (raster.empty()) throw InvalidArgument("encode_mbr1: empty raster");
  constexpr auto u32max = std::numeric_limits<std::uint32_t>::max();
  if (raster.width() > u32max || raster.height() > u32max || raster.bands() > u32max) {
    throw InvalidArgument("encode_mbr1: dimensions exceed u32");
  }
  detail::ByteWriter w;
  w.buffer().reserve(kMbr1FixedHeader + raster.bands() + raster.data().size() * 8);
  w.bytes(kMbr1Magic, 4);
  w.u32(static_cast<std::uint32_t>(raster.width()));
  w.u32(static_cast<std::uint32_t>(raster.height()));
  w.u32(static_cast<std::uint32_t>(raster.bands()));
  for (BandRole role : raster.roles()) w.u8(static_cast<std::uint8_t>(role));
  w.f64(raster.range().min);
  w.f64(raster.range().max);
  for (double v : raster.data()) w.f64(v);
  return w.take();
}

Raster decode_mbr1(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  auto magic = r.bytes(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMbr1Magic)) {
    throw FormatError("not an MBR1 container: magic mismatch", 0);
  }
  const std::size_t dims_offset = r.offset();
  const std::uint64_t width = r.u32("width");
  const std::uint64_t height = r.u32("height");
  const std::uint64_t bands = r.u32("bands");
  if (width == 0 || height == 0 || bands == 0) {
    throw FormatError("MBR1 dimensions must be positive", dims_offset);
  }
  // 3 x u32 cannot overflow u64 when multiplied pairwise, but the full
  // product with the sample size can.
  const std::uint64_t plane = width * height;
  if (plane > std::numeric_limits<std::uint64_t>::max() / bands / 8) {
    throw FormatError("MBR1 dimensions overflow", dims_offset);
  }
  const std::uint64_t samples = plane * bands;

  std::vector<BandRole> roles;
  roles.reserve(bands);
  r.need(bands, "band roles");
  for (std::uint64_t b = 0; b < bands; ++b) {
    const std::size_t at = r.offset();
    const std::uint8_t code = r.u8("band role");
    if (!is_valid_role_code(code)) {
      throw FormatError("invalid band role code " + std::to_string(code), at);
    }
    roles.push_back(static_cast<BandRole>(code));
  }
  const std::size_t range_offset = r.offset();
  ValueRange range;
  range.min = r.f64("value range");
  range.max = r.f64("value range");
  if (!std::isfinite(range.min) || !std::isfinite(range.max) || !(range.max > range.min)) {
    throw FormatError("invalid value range", range_offset);
  }
  if (r.remaining() < samples * 8) {
    throw FormatError("truncated payload: expected " + std::to_string(samples * 8) +
                          " sample bytes, found " + std::to_string(r.remaining()),
                      r.offset());
  }
  if (r.remaining() > samples * 8) {
    throw FormatError("trailing bytes after sample payload", r.offset() + samples * 8);
  }
  std::vector<double> data(samples);
  for (auto& v : data) {
    const std::size_t at = r.offset();
    v = r.f64("sample");
    if (!std::isfinite(v)) throw FormatError("non-finite sample", at);
  }
  try {
    return Raster(width, height, std::move(roles), std::move(data), range);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("inconsistent MBR1 header: ") + e.what(), dims_offset);
  }
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_raster(const Raster& raster, const std::filesystem::path& path) {
  write_file_bytes(path, encode_mbr1(raster));
}

Raster read_raster(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_mbr1(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

// --- PNM ---------------------------------------------------------------

std::uint16_t quantize(double value, const ValueRange& range, std::uint16_t maxval) {
  const double t = (value - range.min) / range.span();
  const double q = std::round(t * maxval);
  if (!(q > 0.0)) return 0;
  if (q >= maxval) return maxval;
  return static_cast<std::uint16_t>(q);
}

namespace {

void put_header(std::vector<std::uint8_t>& out, const char* magic, std::size_t w, std::size_t h,
                unsigned maxval) {
  const std::string header = std::string(magic) + "\n" + std::to_string(w) + " " +
                             std::to_string(h) + "\n" + std::to_string(maxval) + "\n";
  out.insert(out.end(), header.begin(), header.end());
}

void put_sample(std::vector<std::uint8_t>& out, std::uint16_t v, bool wide) {
  if (wide) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  } else {
    out.push_back(static_cast<std::uint8_t>(v));
  }
}

}  // namespace

std::vector<std::uint8_t> encode_pnm(const Raster& raster, PnmDepth depth) {
  if (raster.empty()) throw InvalidArgument("encode_pnm: empty raster");
  const bool wide = depth == PnmDepth::Bits16;
  const std::uint16_t maxval = wide ? 65535 : 255;
  std::vector<std::uint8_t> out;
  if (raster.bands() == 1) {
    put_header(out, "P5", raster.width(), raster.height(), maxval);
    for (double v : raster.data()) put_sample(out, quantize(v, raster.range(), maxval), wide);
    return out;
  }
  if (raster.bands() < 3) {
    throw InvalidArgument("encode_pnm: need 1 band (PGM) or >= 3 bands (PPM), got " +
                          raster.describe());
  }
  std::array<std::size_t, 3> channels{0, 1, 2};
  const auto r = raster.find_band(BandRole::Red);
  const auto g = raster.find_band(BandRole::Green);
  const auto b = raster.find_band(BandRole::Blue);
  if (r && g && b) channels = {*r, *g, *b};
  put_header(out, "P6", raster.width(), raster.height(), maxval);
  for (std::size_t y = 0; y < raster.height(); ++y) {
    for (std::size_t x = 0; x < raster.width(); ++x) {
      for (std::size_t c : channels) {
        put_sample(out, quantize(raster.at(c, y, x), raster.range(), maxval), wide);
      }
    }
  }
  return out;
}

void write_pnm(const Raster& raster, const std::filesystem::path& path, PnmDepth depth) {
  write_file_bytes(path, encode_pnm(raster, depth));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  if (image.pixels.size() != image.width * image.height || image.maxval == 0) {
    throw InvalidArgument("encode_pgm: inconsistent gray image");
  }
  const bool wide = image.maxval > 255;
  std::vector<std::uint8_t> out;
  put_header(out, "P5", image.width, image.height, image.maxval);
  for (auto v : image.pixels) put_sample(out, std::min(v, image.maxval), wide);
  return out;
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) -> std::uint64_t {
    skip_space();
    const std::size_t start = pos;
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError(std::string("PGM ") + what + " overflows", start);
      }
      ++pos;
    }
    if (pos == start) throw FormatError(std::string("PGM: expected ") + what, start);
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("not a binary PGM: magic mismatch", 0);
  }
  pos = 2;
  GrayImage img;
  img.width = read_uint("width");
  img.height = read_uint("height");
  const std::uint64_t maxval = read_uint("maxval");
  if (img.width == 0 || img.height == 0 || maxval == 0 || maxval > 65535) {
    throw FormatError("PGM header out of range", pos);
  }
  img.maxval = static_cast<std::uint16_t>(maxval);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw FormatError("PGM: missing separator before raster data", pos);
  }
  ++pos;
  const bool wide = maxval > 255;
  const std::uint64_t need = img.width * img.height * (wide ? 2 : 1);
  if (bytes.size() - pos < need) throw FormatError("truncated PGM payload", pos);
  img.pixels.resize(img.width * img.height);
  for (auto& p : img.pixels) {
    if (wide) {
      p = static_cast<std::uint16_t>((bytes[pos] << 8) | bytes[pos + 1]);
      pos += 2;
    } else {
      p = bytes[pos++];
    }
  }
  return img;
}

}  // namespace pansharp
