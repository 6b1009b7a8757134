#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pansharp {

enum class BandRole : std::uint8_t {
  Red = 0,
  Green = 1,
  Blue = 2,
  Nir = 3,
  Pan = 4,
  Unknown = 255,
};

std::string_view to_string(BandRole role);
/// Accepts the role names used in config files ("R", "G", "B", "NIR", "PAN").
std::optional<BandRole> band_role_from_string(std::string_view name);
bool is_valid_role_code(std::uint8_t code);

/// Nominal value range of the product the raster came from. Used for
/// normalization, quantized export and threshold defaults; samples may lie
/// outside it.
struct ValueRange {
  double min = 0.0;
  double max = 2047.0;

  double span() const { return max - min; }
  bool operator==(const ValueRange&) const = default;

  static constexpr ValueRange eleven_bit() { return {0.0, 2047.0}; }
  static constexpr ValueRange eight_bit() { return {0.0, 255.0}; }
};

/// Resolution ratio between PAN and MS grids. 2 and 4 are the working
/// ratios; 1 is accepted so the degradation protocol has an identity case.
class ScaleFactor {
 public:
  explicit ScaleFactor(int value);

  int value() const { return value_; }
  bool operator==(const ScaleFactor&) const = default;

 private:
  int value_;
};

/// Planar (band-major) multi-band image with 64-bit samples.
class Raster {
 public:
  Raster() = default;
  /// Zero-filled raster.
  Raster(std::size_t width, std::size_t height, std::vector<BandRole> roles,
         ValueRange range = {});
  Raster(std::size_t width, std::size_t height, std::vector<BandRole> roles,
         std::vector<double> data, ValueRange range = {});

  static Raster single_band(std::size_t width, std::size_t height, BandRole role,
                            ValueRange range = {});

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t bands() const { return roles_.size(); }
  std::size_t plane_size() const { return width_ * height_; }
  bool empty() const { return data_.empty(); }

  const std::vector<BandRole>& roles() const { return roles_; }
  BandRole role(std::size_t band) const { return roles_.at(band); }
  std::optional<std::size_t> find_band(BandRole role) const;

  const ValueRange& range() const { return range_; }
  void set_range(ValueRange range) { range_ = range; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::span<const double> band(std::size_t b) const;
  std::span<double> band(std::size_t b);

  double at(std::size_t b, std::size_t y, std::size_t x) const {
    return data_[(b * height_ + y) * width_ + x];
  }
  double& at(std::size_t b, std::size_t y, std::size_t x) {
    return data_[(b * height_ + y) * width_ + x];
  }

  bool same_geometry(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_ && bands() == other.bands();
  }
  std::string describe() const;

  /// Throws NumericError if any sample is NaN or infinite.
  void check_finite() const;

  /// Copies band `b` into a new 1-band raster carrying the same role and range.
  Raster extract_band(std::size_t b) const;

  bool operator==(const Raster&) const = default;

 private:
  void validate() const;

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<BandRole> roles_;
  std::vector<double> data_;
  ValueRange range_;
};

/// Canonical role order of the 4-band products handled by the network.
std::vector<BandRole> rgbn_roles();

// --- resampling --------------------------------------------------------

/// Separable bicubic resize (Keys kernel, a = -0.5), pixel-center aligned,
/// clamp-replicated borders. Output values are not clamped.
Raster bicubic_resample(const Raster& src, std::size_t target_width, std::size_t target_height);

/// bicubic_resample to (width / s, height / s). Dimensions must divide.
Raster downsample(const Raster& src, ScaleFactor s);

/// Bicubic upsample by an integer ratio.
Raster upsample(const Raster& src, ScaleFactor s);

/// U(D(p)): downsample by s then bicubic back to the original size.
Raster lowpass(const Raster& p, ScaleFactor s);

/// P - U(D(P)) for a single-band raster.
Raster highpass(const Raster& p, ScaleFactor s);

// --- reduced-resolution dataset construction ---------------------------

struct DegradedPair {
  Raster lrms;
  Raster pan;
};

/// Reduced-resolution protocol: the original MS acts as ground truth, its
/// downsampled version as network input. `pan` must already live on the
/// hrms grid and is passed through.
DegradedPair wald_degrade(const Raster& hrms, const Raster& pan, ScaleFactor s);

struct PatchOrigin {
  std::string source_id;
  std::size_t x = 0;
  std::size_t y = 0;
};

struct PatchTriple {
  Raster hrms;
  Raster pan;
  Raster lrms;
  PatchOrigin origin;
};

using PatchSet = std::vector<PatchTriple>;

struct CropOptions {
  std::size_t patch = 256;
  std::size_t stride = 256;
  std::string source_id = "scene";
};

/// Grid crop in row-major order; partial tiles at the right/bottom edges
/// are dropped. A patch larger than the image yields an empty set.
PatchSet crop_patches(const Raster& hrms, const Raster& pan, ScaleFactor s,
                      const CropOptions& options = {});

}  // namespace pansharp
