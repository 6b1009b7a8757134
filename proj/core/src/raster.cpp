#include "pansharp/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pansharp/errors.hpp"
#include "pansharp/resample.hpp"

namespace pansharp {

std::string_view to_string(BandRole role) {
  switch (role) {
    case BandRole::Red: return "R";
    case BandRole::Green: return "G";
    case BandRole::Blue: return "B";
    case BandRole::Nir: return "NIR";
    case BandRole::Pan: return "PAN";
    case BandRole::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::optional<BandRole> band_role_from_string(std::string_view name) {
  if (name == "R") return BandRole::Red;
  if (name == "G") return BandRole::Green;
  if (name == "B") return BandRole::Blue;
  if (name == "NIR" || name == "N") return BandRole::Nir;
  if (name == "PAN") return BandRole::Pan;
  if (name == "UNKNOWN") return BandRole::Unknown;
  return std::nullopt;
}

bool is_valid_role_code(std::uint8_t code) { return code <= 4 || code == 255; }

std::vector<BandRole> rgbn_roles() {
  return {BandRole::Red, BandRole::Green, BandRole::Blue, BandRole::Nir};
}

ScaleFactor::ScaleFactor(int value) : value_(value) {
  if (value != 1 && value != 2 && value != 4) {
    throw InvalidArgument("scale factor must be 1, 2 or 4 (got " + std::to_string(value) + ")");
  }
}

// --- Raster ------------------------------------------------------------

Raster::Raster(std::size_t width, std::size_t height, std::vector<BandRole> roles,
               ValueRange range)
    : width_(width), height_(height), roles_(std::move(roles)), range_(range) {
  if (width_ == 0 || height_ == 0 || roles_.empty()) {
    throw InvalidArgument("raster dimensions and band count must be positive");
  }
  if (width_ > std::numeric_limits<std::size_t>::max() / height_ / roles_.size()) {
    throw InvalidArgument("raster dimensions overflow");
  }
  data_.assign(width_ * height_ * roles_.size(), 0.0);
  validate();
}

Raster::Raster(std::size_t width, std::size_t height, std::vector<BandRole> roles,
               std::vector<double> data, ValueRange range)
    : width_(width), height_(height), roles_(std::move(roles)), data_(std::move(data)),
      range_(range) {
  if (width_ == 0 || height_ == 0 || roles_.empty()) {
    throw InvalidArgument("raster dimensions and band count must be positive");
  }
  if (data_.size() != width_ * height_ * roles_.size()) {
    throw InvalidArgument("raster data length " + std::to_string(data_.size()) +
                          " does not equal width*height*bands = " +
                          std::to_string(width_ * height_ * roles_.size()));
  }
  validate();
  check_finite();
}

Raster Raster::single_band(std::size_t width, std::size_t height, BandRole role,
                           ValueRange range) {
  return Raster(width, height, {role}, range);
}

void Raster::validate() const {
  const bool has_pan = std::find(roles_.begin(), roles_.end(), BandRole::Pan) != roles_.end();
  if (has_pan && roles_.size() != 1) {
    throw InvalidArgument("a PAN raster must have exactly one band");
  }
  if (!(range_.max > range_.min)) {
    throw InvalidArgument("value range must satisfy max > min");
  }
}

std::optional<std::size_t> Raster::find_band(BandRole role) const {
  for (std::size_t b = 0; b < roles_.size(); ++b) {
    if (roles_[b] == role) return b;
  }
  return std::nullopt;
}

std::span<const double> Raster::band(std::size_t b) const {
  if (b >= bands()) throw InvalidArgument("band index out of range");
  return std::span<const double>(data_).subspan(b * plane_size(), plane_size());
}

std::span<double> Raster::band(std::size_t b) {
  if (b >= bands()) throw InvalidArgument("band index out of range");
  return std::span<double>(data_).subspan(b * plane_size(), plane_size());
}

std::string Raster::describe() const {
  std::ostringstream os;
  os << width_ << "x" << height_ << "x" << bands();
  return os.str();
}

void Raster::check_finite() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NumericError("raster contains a non-finite sample at index " + std::to_string(i));
    }
  }
}

Raster Raster::extract_band(std::size_t b) const {
  auto plane = band(b);
  return Raster(width_, height_, {roles_[b]}, std::vector<double>(plane.begin(), plane.end()),
                range_);
}

// --- resampling --------------------------------------------------------

Raster bicubic_resample(const Raster& src, std::size_t target_width, std::size_t target_height) {
  if (target_width == 0 || target_height == 0) {
    throw InvalidArgument("bicubic_resample: target dimensions must be >= 1");
  }
  if (src.empty()) throw InvalidArgument("bicubic_resample: empty source raster");
  Raster out(target_width, target_height, src.roles(), src.range());
  for (std::size_t b = 0; b < src.bands(); ++b) {
    resample_plane(src.band(b), src.width(), src.height(), out.band(b), target_width,
                   target_height);
  }
  return out;
}

Raster downsample(const Raster& src, ScaleFactor s) {
  const auto f = static_cast<std::size_t>(s.value());
  if (src.width() % f != 0 || src.height() % f != 0) {
    throw InvalidArgument("downsample: " + src.describe() + " is not divisible by s=" +
                          std::to_string(f));
  }
  return bicubic_resample(src, src.width() / f, src.height() / f);
}

Raster upsample(const Raster& src, ScaleFactor s) {
  const auto f = static_cast<std::size_t>(s.value());
  return bicubic_resample(src, src.width() * f, src.height() * f);
}

Raster lowpass(const Raster& p, ScaleFactor s) {
  return bicubic_resample(downsample(p, s), p.width(), p.height());
}

Raster highpass(const Raster& p, ScaleFactor s) {
  if (p.bands() != 1) {
    throw InvalidArgument("highpass: expected a single-band raster, got " + p.describe());
  }
  Raster out = lowpass(p, s);
  auto src = p.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] - dst[i];
  return out;
}

// --- reduced-resolution dataset construction ---------------------------

DegradedPair wald_degrade(const Raster& hrms, const Raster& pan, ScaleFactor s) {
  if (pan.bands() != 1) {
    throw InvalidArgument("wald_degrade: PAN must have one band, got " + pan.describe());
  }
  if (pan.width() != hrms.width() || pan.height() != hrms.height()) {
    throw InvalidArgument("wald_degrade: PAN " + pan.describe() + " and HRMS " +
                          hrms.describe() + " must share the same grid");
  }
  return DegradedPair{downsample(hrms, s), pan};
}

namespace {

Raster crop(const Raster& src, std::size_t x0, std::size_t y0, std::size_t size) {
  Raster out(size, size, src.roles(), src.range());
  for (std::size_t b = 0; b < src.bands(); ++b) {
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        out.at(b, y, x) = src.at(b, y0 + y, x0 + x);
      }
    }
  }
  return out;
}

}  // namespace

PatchSet crop_patches(const Raster& hrms, const Raster& pan, ScaleFactor s,
                      const CropOptions& options) {
  const auto f = static_cast<std::size_t>(s.value());
  if (options.patch == 0 || options.stride == 0) {
    throw InvalidArgument("crop_patches: patch and stride must be positive");
  }
  if (options.patch % f != 0) {
    throw InvalidArgument("crop_patches: patch size " + std::to_string(options.patch) +
                          " is not divisible by s=" + std::to_string(f));
  }
  if (pan.bands() != 1 || pan.width() != hrms.width() || pan.height() != hrms.height()) {
    throw InvalidArgument("crop_patches: PAN " + pan.describe() +
                          " must be single-band on the HRMS grid " + hrms.describe());
  }
  PatchSet set;
  if (options.patch > hrms.width() || options.patch > hrms.height()) return set;
  for (std::size_t y = 0; y + options.patch <= hrms.height(); y += options.stride) {
    for (std::size_t x = 0; x + options.patch <= hrms.width(); x += options.stride) {
      PatchTriple triple;
      triple.hrms = crop(hrms, x, y, options.patch);
      triple.pan = crop(pan, x, y, options.patch);
      triple.lrms = wald_degrade(triple.hrms, triple.pan, s).lrms;
      triple.origin = PatchOrigin{options.source_id, x, y};
      set.push_back(std::move(triple));
    }
  }
  return set;
}

}  // namespace pansharp
