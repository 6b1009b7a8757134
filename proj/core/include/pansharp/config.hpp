#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "pansharp/hmcnn.hpp"
#include "pansharp/losses.hpp"

namespace pansharp {

/// Flat `section.key = value` text configuration. Blank lines and lines
/// starting with '#' are ignored; keys must contain exactly one dot.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text);
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  /// Serialized back to the text format, keys sorted.
  std::string str() const;

 private:
  std::map<std::string, std::string> values_;
};

struct TrainConfig {
  std::size_t batch_size = 12;
  double lr0 = 1e-4;
  double lr_decay_factor = 10.0;
  std::size_t lr_decay_every = 1000;  // epochs
  std::size_t max_epochs = 2000;
  /// Optional cap on optimizer steps (0 = no cap).
  std::size_t max_steps = 0;
  /// Epoch interval between checkpoints (0 = final weights only).
  std::size_t checkpoint_every = 0;
  std::uint64_t seed = 1;
  double val_fraction = 0.1;

  losses::LossWeights loss;
  std::uint64_t phi_seed = losses::kDefaultPhiSeed;
  std::filesystem::path phi_weights_path;

  hmcnn::HmcnnConfig model;

  std::filesystem::path data_index;
  std::filesystem::path output_dir = "run";

  void validate() const;

  static TrainConfig from(const ConfigFile& file);
  ConfigFile to_file() const;
};

/// lr0 / factor^floor(epoch / every).
double learning_rate(const TrainConfig& config, std::size_t epoch);

}  // namespace pansharp
