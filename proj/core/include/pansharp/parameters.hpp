#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pansharp/tensor.hpp"

namespace pansharp {

struct NamedParameter {
  std::string name;
  /// Logical dimensions as serialized (rank 1..4).
  std::vector<std::uint32_t> dims;
  Tensor tensor;
};

/// Shape for logical dims: left-aligned, padded with trailing ones.
Shape shape_from_dims(std::span<const std::uint32_t> dims);

/// Ordered, name-indexed collection of trainable tensors. Order is insertion
/// order and is the order used for serialization and optimizer slots.
class ParameterSet {
 public:
  void add(std::string name, std::vector<std::uint32_t> dims, Tensor tensor);

  bool contains(const std::string& name) const { return index_.contains(name); }
  /// Throws WeightFileError naming the missing parameter.
  const Tensor& at(const std::string& name) const;
  const NamedParameter& entry(const std::string& name) const;

  std::size_t size() const { return items_.size(); }
  std::size_t total_elements() const;
  const std::vector<NamedParameter>& items() const { return items_; }

  /// Tensors in order, for the optimizer.
  std::vector<Tensor> tensors() const;
  void zero_grad();
  void set_requires_grad(bool flag);

  /// Deep copy (values only, no gradients).
  ParameterSet clone() const;
  /// Overwrites values from `other`, which must hold the same names and dims.
  void assign_from(const ParameterSet& other);

 private:
  std::vector<NamedParameter> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// HMW1 weight file (little-endian):
//   char[4] "HMW1"; u32 count;
//   per parameter: u16 name length, UTF-8 name, u8 rank, u32 dims[rank],
//                  f64 payload[prod(dims)]
std::vector<std::uint8_t> encode_hmw1(const ParameterSet& params);
ParameterSet decode_hmw1(std::span<const std::uint8_t> bytes);

void save_weights(const ParameterSet& params, const std::filesystem::path& path);
ParameterSet load_weights(const std::filesystem::path& path);

}  // namespace pansharp
