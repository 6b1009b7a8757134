#include "pansharp/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "detail/binary.hpp"
#include "pansharp/errors.hpp"
#include "pansharp/raster_io.hpp"

namespace pansharp {

namespace {
constexpr char kHmw1Magic[4] = {'H', 'M', 'W', '1'};
}

Shape shape_from_dims(std::span<const std::uint32_t> dims) {
  if (dims.empty() || dims.size() > 4) {
    throw InvalidArgument("parameter rank must be between 1 and 4");
  }
  std::size_t d[4] = {1, 1, 1, 1};
  for (std::size_t i = 0; i < dims.size(); ++i) d[i] = dims[i];
  return Shape{d[0], d[1], d[2], d[3]};
}

void ParameterSet::add(std::string name, std::vector<std::uint32_t> dims, Tensor tensor) {
  if (name.empty() || name.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw InvalidArgument("parameter name must be 1..65535 bytes");
  }
  if (index_.contains(name)) throw InvalidArgument("duplicate parameter name: " + name);
  if (shape_from_dims(dims) != tensor.shape()) {
    throw ShapeError("parameter " + name + ": dims do not match tensor shape " +
                     tensor.shape().str());
  }
  index_.emplace(name, items_.size());
  items_.push_back(NamedParameter{std::move(name), std::move(dims), std::move(tensor)});
}

const NamedParameter& ParameterSet::entry(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw WeightFileError("missing parameter: " + name);
  return items_[it->second];
}

const Tensor& ParameterSet::at(const std::string& name) const { return entry(name).tensor; }

std::size_t ParameterSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : items_) n += p.tensor.numel();
  return n;
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(items_.size());
  for (const auto& p : items_) out.push_back(p.tensor);
  return out;
}

void ParameterSet::zero_grad() {
  for (auto& p : items_) p.tensor.zero_grad();
}

void ParameterSet::set_requires_grad(bool flag) {
  for (auto& p : items_) p.tensor.set_requires_grad(flag);
}

ParameterSet ParameterSet::clone() const {
  ParameterSet out;
  for (const auto& p : items_) {
    Tensor copy = Tensor::from(p.tensor.shape(),
                               std::vector<double>(p.tensor.values().begin(), p.tensor.values().end()),
                               p.tensor.requires_grad());
    out.add(p.name, p.dims, std::move(copy));
  }
  return out;
}

void ParameterSet::assign_from(const ParameterSet& other) {
  for (auto& p : items_) {
    const NamedParameter& src = other.entry(p.name);
    if (src.dims != p.dims) {
      throw WeightFileError("parameter " + p.name + " has mismatched dimensions");
    }
    auto dst = p.tensor.mutable_values();
    std::copy(src.tensor.values().begin(), src.tensor.values().end(), dst.begin());
  }
}

std::vector<std::uint8_t> encode_hmw1(const ParameterSet& params) {
  detail::ByteWriter w;
  w.bytes(kHmw1Magic, 4);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params.items()) {
    w.u16(static_cast<std::uint16_t>(p.name.size()));
    w.bytes(p.name.data(), p.name.size());
    w.u8(static_cast<std::uint8_t>(p.dims.size()));
    for (auto d : p.dims) w.u32(d);
    for (double v : p.tensor.values()) w.f64(v);
  }
  return w.take();
}

ParameterSet decode_hmw1(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  auto magic = r.bytes(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kHmw1Magic)) {
    throw FormatError("not an HMW1 weight file: magic mismatch", 0);
  }
  const std::uint32_t count = r.u32("parameter count");
  ParameterSet params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t entry_offset = r.offset();
    const std::uint16_t name_len = r.u16("name length");
    if (name_len == 0) throw FormatError("empty parameter name", entry_offset);
    auto name_bytes = r.bytes(name_len, "parameter name");
    std::string name(name_bytes.begin(), name_bytes.end());
    const std::size_t rank_offset = r.offset();
    const std::uint8_t rank = r.u8("rank");
    if (rank == 0 || rank > 4) {
      throw FormatError("parameter " + name + ": unsupported rank " + std::to_string(rank),
                        rank_offset);
    }
    std::vector<std::uint32_t> dims(rank);
    std::uint64_t numel = 1;
    for (auto& d : dims) {
      const std::size_t at = r.offset();
      d = r.u32("dimension");
      if (d == 0) throw FormatError("parameter " + name + ": zero dimension", at);
      if (numel > std::numeric_limits<std::uint64_t>::max() / 8 / d) {
        throw FormatError("parameter " + name + ": dimensions overflow", at);
      }
      numel *= d;
    }
    if (r.remaining() < numel * 8) {
      throw FormatError("truncated payload for parameter " + name, r.offset());
    }
    std::vector<double> values(numel);
    for (auto& v : values) {
      const std::size_t at = r.offset();
      v = r.f64("payload");
      if (!std::isfinite(v)) throw FormatError("non-finite value in " + name, at);
    }
    if (params.contains(name)) throw FormatError("duplicate parameter " + name, entry_offset);
    Shape shape = shape_from_dims(dims);
    params.add(std::move(name), std::move(dims), Tensor::from(shape, std::move(values), true));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after last parameter", r.offset());
  return params;
}

void save_weights(const ParameterSet& params, const std::filesystem::path& path) {
  write_file_bytes(path, encode_hmw1(params));
}

ParameterSet load_weights(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_hmw1(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

}  // namespace pansharp
