#include "pansharp/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "pansharp/errors.hpp"
#include "pansharp/raster_io.hpp"

namespace pansharp {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  // Shortest text that round-trips.
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

const char* const kKnownKeys[] = {
    "data.index",         "output.dir",          "train.batch_size",
    "train.lr0",          "train.lr_decay_factor", "train.lr_decay_every",
    "train.max_epochs",   "train.max_steps",     "train.checkpoint_every",
    "train.seed",         "train.val_fraction",  "loss.alpha",
    "loss.stage2_only_perceptual", "loss.phi_seed", "loss.phi_weights_path",
    "model.n_res_blocks", "model.feat_channels", "model.share_hmb",
    "model.progressive",  "model.attention_hidden", "model.s",
};

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
  ConfigFile cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    const auto dot = key.find('.');
    if (key.empty() || dot == std::string::npos || dot == 0 || dot + 1 == key.size() ||
        key.find('.', dot + 1) != std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": key '" + key +
                        "' must have the form section.key");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void ConfigFile::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0.0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": '" + s + "' is not a finite number");
  }
  return v;
}

std::uint64_t ConfigFile::get_uint(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  int base = 10;
  const char* first = s.data();
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    first += 2;
  }
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size() || first == s.data() + s.size()) {
    throw ConfigError(key + ": '" + s + "' is not a non-negative integer");
  }
  return v;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& s = it->second;
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": '" + s + "' is not a boolean");
}

std::string ConfigFile::str() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(lr0 > 0.0)) throw ConfigError("train.lr0 must be > 0");
  if (!(lr_decay_factor > 0.0)) throw ConfigError("train.lr_decay_factor must be > 0");
  if (lr_decay_every < 1) throw ConfigError("train.lr_decay_every must be >= 1");
  if (max_epochs < 1) throw ConfigError("train.max_epochs must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError("train.val_fraction must lie in [0, 1)");
  }
  if (!(loss.alpha >= 0.0)) throw ConfigError("loss.alpha must be >= 0");
  model.validate();
}

TrainConfig TrainConfig::from(const ConfigFile& f) {
  for (const auto& [key, value] : f.entries()) {
    bool known = false;
    for (const char* k : kKnownKeys) known = known || key == k;
    if (!known) throw ConfigError("unknown config key '" + key + "'");
  }
  TrainConfig c;
  c.data_index = f.get_string("data.index", "");
  c.output_dir = f.get_string("output.dir", c.output_dir.string());
  c.batch_size = f.get_uint("train.batch_size", c.batch_size);
  c.lr0 = f.get_double("train.lr0", c.lr0);
  c.lr_decay_factor = f.get_double("train.lr_decay_factor", c.lr_decay_factor);
  c.lr_decay_every = f.get_uint("train.lr_decay_every", c.lr_decay_every);
  c.max_epochs = f.get_uint("train.max_epochs", c.max_epochs);
  c.max_steps = f.get_uint("train.max_steps", c.max_steps);
  c.checkpoint_every = f.get_uint("train.checkpoint_every", c.checkpoint_every);
  c.seed = f.get_uint("train.seed", c.seed);
  c.val_fraction = f.get_double("train.val_fraction", c.val_fraction);
  c.loss.alpha = f.get_double("loss.alpha", c.loss.alpha);
  c.loss.stage2_only_perceptual =
      f.get_bool("loss.stage2_only_perceptual", c.loss.stage2_only_perceptual);
  c.phi_seed = f.get_uint("loss.phi_seed", c.phi_seed);
  c.phi_weights_path = f.get_string("loss.phi_weights_path", "");
  c.model.n_res_blocks = f.get_uint("model.n_res_blocks", c.model.n_res_blocks);
  c.model.feat_channels = f.get_uint("model.feat_channels", c.model.feat_channels);
  c.model.share_hmb_across_bands = f.get_bool("model.share_hmb", c.model.share_hmb_across_bands);
  c.model.progressive_chain = f.get_bool("model.progressive", c.model.progressive_chain);
  c.model.attention_hidden = f.get_uint("model.attention_hidden", c.model.attention_hidden);
  c.model.s = static_cast<int>(f.get_uint("model.s", static_cast<std::uint64_t>(c.model.s)));
  c.validate();
  return c;
}

ConfigFile TrainConfig::to_file() const {
  ConfigFile f;
  f.set("data.index", data_index.string());
  f.set("output.dir", output_dir.string());
  f.set("train.batch_size", std::to_string(batch_size));
  f.set("train.lr0", format_double(lr0));
  f.set("train.lr_decay_factor", format_double(lr_decay_factor));
  f.set("train.lr_decay_every", std::to_string(lr_decay_every));
  f.set("train.max_epochs", std::to_string(max_epochs));
  f.set("train.max_steps", std::to_string(max_steps));
  f.set("train.checkpoint_every", std::to_string(checkpoint_every));
  f.set("train.seed", std::to_string(seed));
  f.set("train.val_fraction", format_double(val_fraction));
  f.set("loss.alpha", format_double(loss.alpha));
  f.set("loss.stage2_only_perceptual", loss.stage2_only_perceptual ? "true" : "false");
  f.set("loss.phi_seed", std::to_string(phi_seed));
  f.set("loss.phi_weights_path", phi_weights_path.string());
  f.set("model.n_res_blocks", std::to_string(model.n_res_blocks));
  f.set("model.feat_channels", std::to_string(model.feat_channels));
  f.set("model.share_hmb", model.share_hmb_across_bands ? "true" : "false");
  f.set("model.progressive", model.progressive_chain ? "true" : "false");
  f.set("model.attention_hidden", std::to_string(model.attention_hidden));
  f.set("model.s", std::to_string(model.s));
  return f;
}

double learning_rate(const TrainConfig& config, std::size_t epoch) {
  const auto k = epoch / config.lr_decay_every;
  return config.lr0 / std::pow(config.lr_decay_factor, static_cast<double>(k));
}

}  // namespace pansharp
