#include "drowsy/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "drowsy/error.hpp"

namespace drowsy {

void ExperimentConfig::validate() const {
  namespace fs = std::filesystem;
  if (featurizer == FeaturizerKind::Precomputed) {
    if (manifest.empty()) throw Error(ErrorKind::ConfigError, "dataset.manifest is required");
    if (!fs::exists(manifest)) {
      throw Error(ErrorKind::ConfigError, "manifest " + manifest.string() + " does not exist");
    }
  } else {
    if (frames_manifest.empty()) {
      throw Error(ErrorKind::ConfigError, "dataset.frames_manifest is required for patch_stats");
    }
    if (!fs::exists(frames_manifest)) {
      throw Error(ErrorKind::ConfigError,
                  "frames manifest " + frames_manifest.string() + " does not exist");
    }
    if (patch_grid < 1) throw Error(ErrorKind::ConfigError, "featurizer.grid must be >= 1");
  }
  if (clahe && (!(clahe->clip_limit > 0.0) || clahe->grid < 1)) {
    throw Error(ErrorKind::ConfigError, "clahe needs limit > 0 and grid >= 1");
  }
  if (output_dir.empty()) throw Error(ErrorKind::ConfigError, "output_dir is required");
  if (normal_rates.empty() || anomaly_rates.empty()) {
    throw Error(ErrorKind::ConfigError, "rate grid must be non-empty");
  }
  window.validate();
  train.validate();
  if (histogram_bins < 1) throw Error(ErrorKind::ConfigError, "histogram_bins must be >= 1");
}

namespace {

template <class T>
T scalar(const YAML::Node& node, const char* key, T fallback) {
  const YAML::Node child = node[key];
  if (!child) return fallback;
  try {
    return child.as<T>();
  } catch (const YAML::Exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("bad value for '") + key + "': " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return {};
  std::filesystem::path p(value);
  return p.is_relative() ? base / p : p;
}

std::vector<Rate> rate_list(const YAML::Node& node, const char* key, std::vector<Rate> fallback) {
  const YAML::Node child = node[key];
  if (!child) return fallback;
  if (!child.IsSequence()) throw Error(ErrorKind::ConfigError, std::string(key) + " must be a list");
  std::vector<Rate> out;
  for (const auto& item : child) out.push_back(Rate::parse(item.as<std::string>()));
  return out;
}

void reject_unknown(const YAML::Node& node, const std::string& where,
                    const std::set<std::string>& known) {
  if (!node || !node.IsMap()) return;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) {
      throw Error(ErrorKind::ConfigError, "unknown key '" + key + "' in " + where);
    }
  }
}

ExperimentConfig parse_config_impl(const std::string& yaml_text,
                                   const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("invalid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw Error(ErrorKind::ConfigError, "config must be a YAML mapping");
  reject_unknown(root, "config", {"seed", "output_dir", "dataset", "featurizer", "clahe", "window",
                                  "rates", "train", "evaluate"});

  ExperimentConfig cfg;
  cfg.seed = scalar<std::uint64_t>(root, "seed", 0);
  cfg.output_dir = resolve(base_dir, scalar<std::string>(root, "output_dir", "out"));

  const YAML::Node dataset = root["dataset"];
  reject_unknown(dataset, "dataset", {"manifest", "frames_manifest", "split"});
  if (dataset) {
    cfg.manifest = resolve(base_dir, scalar<std::string>(dataset, "manifest", ""));
    cfg.frames_manifest = resolve(base_dir, scalar<std::string>(dataset, "frames_manifest", ""));
    if (const YAML::Node split = dataset["split"]) {
      if (!split.IsSequence() || split.size() != 3) {
        throw Error(ErrorKind::ConfigError, "dataset.split must be [train, val, test]");
      }
      cfg.split = {split[0].as<double>(), split[1].as<double>(), split[2].as<double>()};
    }
  }

  const YAML::Node feat = root["featurizer"];
  reject_unknown(feat, "featurizer", {"kind", "grid"});
  if (feat) {
    const auto kind = scalar<std::string>(feat, "kind", "precomputed");
    if (kind == "precomputed") {
      cfg.featurizer = FeaturizerKind::Precomputed;
    } else if (kind == "patch_stats") {
      cfg.featurizer = FeaturizerKind::PatchStats;
    } else {
      throw Error(ErrorKind::ConfigError, "featurizer.kind must be precomputed or patch_stats");
    }
    cfg.patch_grid = scalar<int>(feat, "grid", cfg.patch_grid);
  }

  const YAML::Node clahe = root["clahe"];
  reject_unknown(clahe, "clahe", {"enabled", "limit", "grid"});
  if (clahe && scalar<bool>(clahe, "enabled", true)) {
    ClaheConfig c;
    c.clip_limit = scalar<double>(clahe, "limit", c.clip_limit);
    c.grid = scalar<int>(clahe, "grid", c.grid);
    cfg.clahe = c;
  }

  const YAML::Node window = root["window"];
  reject_unknown(window, "window", {"clip_len", "sample_rate", "stride"});
  if (window) {
    cfg.window.clip_len = scalar<int>(window, "clip_len", cfg.window.clip_len);
    cfg.window.sample_rate = scalar<int>(window, "sample_rate", cfg.window.sample_rate);
    cfg.window.stride = scalar<int>(window, "stride", cfg.window.stride);
  }

  const YAML::Node rates = root["rates"];
  reject_unknown(rates, "rates", {"normal", "anomaly"});
  if (rates) {
    cfg.normal_rates = rate_list(rates, "normal", cfg.normal_rates);
    cfg.anomaly_rates = rate_list(rates, "anomaly", cfg.anomaly_rates);
  }

  const YAML::Node train = root["train"];
  reject_unknown(train, "train",
                 {"hidden", "lr", "batch_size", "epochs", "grad_clip", "patience"});
  if (train) {
    cfg.train.hidden_size = scalar<Eigen::Index>(train, "hidden", cfg.train.hidden_size);
    cfg.train.learning_rate = scalar<double>(train, "lr", cfg.train.learning_rate);
    cfg.train.batch_size = scalar<std::size_t>(train, "batch_size", cfg.train.batch_size);
    cfg.train.epochs = scalar<std::size_t>(train, "epochs", cfg.train.epochs);
    cfg.train.grad_clip = scalar<double>(train, "grad_clip", cfg.train.grad_clip);
    cfg.train.patience = scalar<std::size_t>(train, "patience", cfg.train.patience);
  }

  const YAML::Node eval = root["evaluate"];
  reject_unknown(eval, "evaluate", {"threshold_on", "histogram_bins"});
  if (eval) {
    const auto on = scalar<std::string>(eval, "threshold_on", "validation");
    if (on == "validation") {
      cfg.threshold_mode = ThresholdMode::Validation;
    } else if (on == "test") {
      cfg.threshold_mode = ThresholdMode::Test;
    } else {
      throw Error(ErrorKind::ConfigError, "evaluate.threshold_on must be validation or test");
    }
    cfg.histogram_bins = scalar<std::size_t>(eval, "histogram_bins", cfg.histogram_bins);
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  try {
    return parse_config_impl(yaml_text, base_dir);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("bad config value: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace drowsy
