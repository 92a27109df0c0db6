#pragma once

// Batch configuration (YAML) and the equivalent JSON detector settings used by
// the service. Unknown keys are rejected with their full dotted path.
//
//   scale:
//     pixels_per_mm: 10.0
//   preprocessing:
//     background_removal: true
//     resize_max_width: 10000
//   detector:
//     rays: 360
//     nodes: 360
//     smoothing_sigma: 2.0
//     min_ring_gap: 4
//     edge_polarity: both          # dark_to_light | light_to_dark | both
//   pith:                          # optional manual pith for every image
//     x: 512
//     y: 512
//   outputs: [json, csv, report]   # also: pos
//   measurement:
//     ray_angles: [0, 90, 180, 270]
//   concurrency: 4                 # default: available hardware threads
//   output_dir: results            # default: <folder>/ringkit_out

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "../detect.hpp"
#include "../error.hpp"
#include "../primitives.hpp"

namespace ringkit::io {

struct BatchConfig {
  std::optional<double> pixels_per_mm;
  bool background_removal = true;
  DetectorConfig detector;
  std::optional<Point2> pith;
  std::vector<std::string> outputs{"json", "csv", "report"};
  std::vector<double> ray_angles;
  std::optional<int> concurrency;
  std::optional<std::string> output_dir;

  bool wants(const std::string& fmt) const {
    for (const auto& o : outputs) {
      if (o == fmt) return true;
    }
    return false;
  }
};

inline EdgePolarity parse_polarity(const std::string& s) {
  if (s == "dark_to_light") return EdgePolarity::DarkToLight;
  if (s == "light_to_dark") return EdgePolarity::LightToDark;
  if (s == "both") return EdgePolarity::Both;
  throw Error(ErrorCode::ConfigError, "edge_polarity: unknown value '" + s + "'");
}

inline std::string to_string(EdgePolarity p) {
  switch (p) {
    case EdgePolarity::DarkToLight: return "dark_to_light";
    case EdgePolarity::LightToDark: return "light_to_dark";
    case EdgePolarity::Both: return "both";
  }
  return "both";
}

namespace detail {

inline void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw Error(ErrorCode::ConfigError, (path.empty() ? "<root>" : path) + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw Error(ErrorCode::ConfigError, "unknown key '" + (path.empty() ? key : path + "." + key) + "'");
    }
  }
}

template <typename T>
T yaml_value(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::ConfigError, path + ": invalid value");
  }
}

}  // namespace detail

inline BatchConfig parse_batch_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed YAML: ") + e.what());
  }
  BatchConfig cfg;
  if (!root || root.IsNull()) return cfg;
  using detail::check_keys;
  using detail::yaml_value;
  check_keys(root, "", {"scale", "preprocessing", "detector", "pith", "outputs", "measurement", "concurrency",
                        "output_dir"});
  if (auto n = root["scale"]) {
    check_keys(n, "scale", {"pixels_per_mm"});
    if (n["pixels_per_mm"]) {
      const double v = yaml_value<double>(n["pixels_per_mm"], "scale.pixels_per_mm");
      if (!(v > 0.0)) throw Error(ErrorCode::ConfigError, "scale.pixels_per_mm must be positive");
      cfg.pixels_per_mm = v;
    }
  }
  if (auto n = root["preprocessing"]) {
    check_keys(n, "preprocessing", {"background_removal", "resize_max_width"});
    if (n["background_removal"]) cfg.background_removal = yaml_value<bool>(n["background_removal"], "preprocessing.background_removal");
    if (n["resize_max_width"]) cfg.detector.resize_max_width = yaml_value<int>(n["resize_max_width"], "preprocessing.resize_max_width");
  }
  if (auto n = root["detector"]) {
    check_keys(n, "detector", {"rays", "nodes", "smoothing_sigma", "min_ring_gap", "edge_polarity"});
    if (n["rays"]) cfg.detector.num_rays = yaml_value<int>(n["rays"], "detector.rays");
    if (n["nodes"]) cfg.detector.node_budget = static_cast<std::size_t>(yaml_value<int>(n["nodes"], "detector.nodes"));
    if (n["smoothing_sigma"]) cfg.detector.smoothing_sigma = yaml_value<double>(n["smoothing_sigma"], "detector.smoothing_sigma");
    if (n["min_ring_gap"]) cfg.detector.min_ring_gap = yaml_value<double>(n["min_ring_gap"], "detector.min_ring_gap");
    if (n["edge_polarity"]) cfg.detector.edge_polarity = parse_polarity(yaml_value<std::string>(n["edge_polarity"], "detector.edge_polarity"));
  }
  if (auto n = root["pith"]) {
    check_keys(n, "pith", {"x", "y"});
    if (!n["x"] || !n["y"]) throw Error(ErrorCode::ConfigError, "pith: both x and y are required");
    cfg.pith = Point2{yaml_value<double>(n["x"], "pith.x"), yaml_value<double>(n["y"], "pith.y")};
  }
  if (auto n = root["outputs"]) {
    if (!n.IsSequence()) throw Error(ErrorCode::ConfigError, "outputs: expected a list");
    cfg.outputs.clear();
    for (const auto& o : n) {
      const auto s = yaml_value<std::string>(o, "outputs");
      if (s != "json" && s != "csv" && s != "report" && s != "pos") {
        throw Error(ErrorCode::ConfigError, "outputs: unknown format '" + s + "'");
      }
      cfg.outputs.push_back(s);
    }
  }
  if (auto n = root["measurement"]) {
    check_keys(n, "measurement", {"ray_angles"});
    if (auto a = n["ray_angles"]) {
      if (!a.IsSequence()) throw Error(ErrorCode::ConfigError, "measurement.ray_angles: expected a list");
      for (const auto& v : a) {
        const double deg = yaml_value<double>(v, "measurement.ray_angles");
        if (!(deg >= 0.0 && deg < 360.0)) throw Error(ErrorCode::ConfigError, "measurement.ray_angles: angles must be in [0, 360)");
        cfg.ray_angles.push_back(deg);
      }
    }
  }
  if (auto n = root["concurrency"]) {
    const int c = yaml_value<int>(n, "concurrency");
    if (c < 1) throw Error(ErrorCode::ConfigError, "concurrency must be at least 1");
    cfg.concurrency = c;
  }
  if (auto n = root["output_dir"]) cfg.output_dir = yaml_value<std::string>(n, "output_dir");

  try {
    cfg.detector.check();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, "detector: " + e.detail());
  }
  if ((cfg.wants("csv") || cfg.wants("report") || cfg.wants("pos")) && !cfg.pixels_per_mm) {
    throw Error(ErrorCode::ConfigError, "scale.pixels_per_mm is required for csv, report and pos outputs");
  }
  return cfg;
}

/// Detector settings from a JSON object using the YAML detector/preprocessing
/// key names; absent keys keep the values in `base`.
inline DetectorConfig detector_config_from_json(const nlohmann::json& j, DetectorConfig base = {}) {
  if (j.is_null()) return base;
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    const auto& v = it.value();
    try {
      if (k == "rays") {
        base.num_rays = v.get<int>();
      } else if (k == "nodes") {
        base.node_budget = v.get<std::size_t>();
      } else if (k == "smoothing_sigma") {
        base.smoothing_sigma = v.get<double>();
      } else if (k == "min_ring_gap") {
        base.min_ring_gap = v.get<double>();
      } else if (k == "edge_polarity") {
        base.edge_polarity = parse_polarity(v.get<std::string>());
      } else if (k == "resize_max_width") {
        base.resize_max_width = v.get<int>();
      } else {
        throw Error(ErrorCode::ConfigError, "unknown key 'config." + k + "'");
      }
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::ConfigError, "config." + k + ": invalid value");
    }
  }
  try {
    base.check();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, "config: " + e.detail());
  }
  return base;
}

}  // namespace ringkit::io
