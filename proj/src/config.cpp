#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "fairmit/errors.hpp"
#include "fairmit/harness.hpp"

namespace fairmit {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  for (char c : value) {
    if (c == ',') {
      items.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  items.push_back(trim(current));
  return items;
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "yes" || v == "true" || v == "1" || v == "on") return true;
  if (v == "no" || v == "false" || v == "0" || v == "off") return false;
  throw config_error("key '" + key + "': expected a boolean, got '" + value +
                     "'");
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw config_error("key '" + key + "': expected a number, got '" + value +
                       "'");
  }
  if (consumed != value.size()) {
    throw config_error("key '" + key + "': expected a number, got '" + value +
                       "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(value, &consumed);
  } catch (const std::exception&) {
    throw config_error("key '" + key +
                       "': expected a non-negative integer, got '" + value +
                       "'");
  }
  if (consumed != value.size()) {
    throw config_error("key '" + key +
                       "': expected a non-negative integer, got '" + value +
                       "'");
  }
  return out;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

std::optional<ThresholdStrategy> parse_threshold(const std::string& key,
                                                 const std::string& value) {
  if (value == "none") return std::nullopt;
  const auto strategy = strategy_from_name(value);
  if (!strategy) {
    throw config_error("key '" + key + "': unknown threshold strategy '" +
                       value + "'");
  }
  return strategy;
}

FillMode parse_fill(const std::string& key, const std::string& value) {
  if (value == "reflect") return FillMode::Reflect;
  if (value == "constant") return FillMode::Constant;
  throw config_error("key '" + key + "': expected reflect or constant, got '" +
                     value + "'");
}

// Applies one key to the spec; returns false when the key is not a
// synthetic-data key. `prefix` is "" or "synth.".
bool apply_synth_key(SyntheticSpec& spec, const std::string& prefix,
                     const std::string& key, const std::string& value) {
  if (key.rfind(prefix, 0) != 0) return false;
  const std::string name = key.substr(prefix.size());
  if (name == "image_height") {
    spec.image_height = parse_size(key, value);
  } else if (name == "image_width") {
    spec.image_width = parse_size(key, value);
  } else if (name == "image_channels") {
    spec.image_channels = parse_size(key, value);
  } else if (name == "source_count") {
    spec.source_count = parse_size(key, value);
  } else if (name == "target_count") {
    spec.target_count = parse_size(key, value);
  } else if (name == "target_female_fraction") {
    spec.target_female_fraction = parse_double(key, value);
  } else if (name == "class_signal_strength") {
    spec.class_signal_strength = parse_double(key, value);
  } else if (name == "group_nuisance_strength") {
    spec.group_nuisance_strength = parse_double(key, value);
  } else if (name == "seed") {
    spec.seed = parse_u64(key, value);
  } else {
    return false;
  }
  return true;
}

bool apply_train_key(TrainConfig& train, const std::string& key,
                     const std::string& value) {
  if (key == "train.max_epochs") {
    train.max_epochs = parse_size(key, value);
  } else if (key == "train.patience") {
    train.patience = parse_size(key, value);
  } else if (key == "train.lr0") {
    train.lr0 = parse_double(key, value);
  } else if (key == "train.decay_rate") {
    train.decay_rate = parse_double(key, value);
  } else if (key == "train.batch_size") {
    train.batch_size = parse_size(key, value);
  } else {
    return false;
  }
  return true;
}

bool apply_augment_key(AugmentConfig& augment, const std::string& key,
                       const std::string& value) {
  if (key == "augment.flip") {
    augment.flip = parse_bool(key, value);
  } else if (key == "augment.rotation_factor") {
    augment.rotation_factor = parse_double(key, value);
  } else if (key == "augment.translation_factor") {
    augment.translation_factor = parse_double(key, value);
  } else if (key == "augment.contrast_factor") {
    augment.contrast_factor = parse_double(key, value);
  } else if (key == "augment.fill_mode") {
    augment.fill_mode = parse_fill(key, value);
  } else if (key == "augment.seed") {
    augment.seed = parse_u64(key, value);
  } else {
    return false;
  }
  return true;
}

}  // namespace

std::map<std::string, std::string> parse_flat_config(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw config_error("cannot open config file: " + path.string());
  }
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw config_error("line " + std::to_string(line_no) +
                         ": expected 'key = value'");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) {
      throw config_error("line " + std::to_string(line_no) + ": empty key");
    }
    if (!entries.emplace(key, value).second) {
      throw config_error("line " + std::to_string(line_no) +
                         ": duplicate key '" + key + "'");
    }
  }
  return entries;
}

SyntheticSpec load_synth_spec(const std::filesystem::path& path) {
  SyntheticSpec spec;
  for (const auto& [key, value] : parse_flat_config(path)) {
    if (!apply_synth_key(spec, "", key, value)) {
      throw config_error("unknown config key: " + key);
    }
  }
  return spec;
}

std::vector<ExperimentConfig> load_experiment_configs(
    const std::filesystem::path& path) {
  const auto entries = parse_flat_config(path);

  ExperimentConfig base;
  std::vector<std::string> matrix_transfer, matrix_threshold, matrix_reweight,
      matrix_augment;

  for (const auto& [key, value] : entries) {
    if (key == "model_tag") {
      base.model_tag = value;
    } else if (key == "transfer") {
      base.use_transfer = parse_bool(key, value);
    } else if (key == "threshold") {
      base.threshold_strategy = parse_threshold(key, value);
    } else if (key == "reweight") {
      base.use_reweighting = parse_bool(key, value);
    } else if (key == "augment") {
      base.use_augmentation = parse_bool(key, value);
    } else if (key == "split_seed") {
      base.split_seed = parse_u64(key, value);
    } else if (key == "train_seed") {
      base.train_seed = parse_u64(key, value);
    } else if (key == "source_dir") {
      base.source_dir = value;
    } else if (key == "target_dir") {
      base.target_dir = value;
    } else if (key == "hidden_sizes") {
      base.hidden_sizes.clear();
      for (const auto& item : split_list(value)) {
        base.hidden_sizes.push_back(parse_size(key, item));
      }
    } else if (key == "transfer.trainable_layers") {
      base.transfer_trainable_layers = parse_size(key, value);
    } else if (key == "folds") {
      base.folds = parse_size(key, value);
    } else if (key == "matrix.transfer") {
      matrix_transfer = split_list(value);
    } else if (key == "matrix.threshold") {
      matrix_threshold = split_list(value);
    } else if (key == "matrix.reweight") {
      matrix_reweight = split_list(value);
    } else if (key == "matrix.augment") {
      matrix_augment = split_list(value);
    } else if (apply_synth_key(base.synth, "synth.", key, value) ||
               apply_train_key(base.train, key, value) ||
               apply_augment_key(base.augment, key, value)) {
      // handled
    } else {
      throw config_error("unknown config key: " + key);
    }
  }

  // Absent matrix axes hold the base value fixed.
  const auto bools = [&](const std::vector<std::string>& raw, bool base_value,
                         const char* key) {
    std::vector<bool> out;
    if (raw.empty()) {
      out.push_back(base_value);
    } else {
      for (const auto& item : raw) {
        out.push_back(parse_bool(key, item));
      }
    }
    return out;
  };
  const std::vector<bool> transfers =
      bools(matrix_transfer, base.use_transfer, "matrix.transfer");
  const std::vector<bool> reweights =
      bools(matrix_reweight, base.use_reweighting, "matrix.reweight");
  const std::vector<bool> augments =
      bools(matrix_augment, base.use_augmentation, "matrix.augment");
  std::vector<std::optional<ThresholdStrategy>> thresholds;
  if (matrix_threshold.empty()) {
    thresholds.push_back(base.threshold_strategy);
  } else {
    for (const auto& item : matrix_threshold) {
      thresholds.push_back(parse_threshold("matrix.threshold", item));
    }
  }

  std::vector<ExperimentConfig> configs;
  for (bool transfer : transfers) {
    for (const auto& threshold : thresholds) {
      for (bool reweight : reweights) {
        for (bool augment : augments) {
          ExperimentConfig cfg = base;
          cfg.use_transfer = transfer;
          cfg.threshold_strategy = threshold;
          cfg.use_reweighting = reweight;
          cfg.use_augmentation = augment;
          configs.push_back(std::move(cfg));
        }
      }
    }
  }
  return configs;
}

}  // namespace fairmit
