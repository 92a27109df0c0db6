#pragma once

// JSON bodies of the service endpoints that are not annotation documents.

#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "../core.hpp"
#include "../error.hpp"
#include "../geometry.hpp"
#include "../measurement.hpp"
#include "annotation_json.hpp"

namespace ringkit::io {

inline ordered_json to_json(const RingMetricsRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(quantize6(*v)) : ordered_json(nullptr); };
  ordered_json j;
  j["ring"] = r.ring_index;
  j["yearLabel"] = r.year_label ? ordered_json(*r.year_label) : ordered_json(nullptr);
  j["area"] = quantize6(r.annulus_area);
  j["cumulativeArea"] = quantize6(r.cumulative_area);
  j["perimeter"] = quantize6(r.perimeter);
  j["equivalentRingWidth"] = quantize6(r.equivalent_ring_width);
  j["similarityFactor"] = quantize6(r.similarity_factor);
  j["eccentricityModule"] = quantize6(r.eccentricity_module);
  j["eccentricityPhase"] = quantize6(r.eccentricity_phase);
  j["ewArea"] = opt(r.ew_area);
  j["lwArea"] = opt(r.lw_area);
  j["cumulativeEwArea"] = opt(r.cumulative_ew_area);
  j["excludedArea"] = quantize6(r.excluded_area);
  return j;
}

inline ordered_json to_json(const std::vector<RingMetricsRow>& rows) {
  ordered_json a = ordered_json::array();
  for (const auto& r : rows) a.push_back(to_json(r));
  return a;
}

inline ordered_json point_json(Point2 p) { return ordered_json::array({quantize6(p.x), quantize6(p.y)}); }

inline ordered_json to_json(const RaySpec& ray) {
  ordered_json j;
  j["angle"] = ray.angle;
  j["origin"] = ray.origin ? point_json(*ray.origin) : ordered_json(nullptr);
  j["maxLength"] = ray.max_length ? ordered_json(*ray.max_length) : ordered_json(nullptr);
  return j;
}

inline ordered_json to_json(const RaySeries& s) {
  ordered_json j;
  j["ray"] = to_json(s.ray);
  j["origin"] = point_json(s.origin);
  j["hits"] = ordered_json::array();
  for (const auto& h : s.hits) {
    j["hits"].push_back({{"ring", h.ring_index}, {"distance", quantize6(h.distance)}, {"point", point_json(h.point)}});
  }
  j["widths"] = ordered_json::array();
  for (const auto& w : s.widths) j["widths"].push_back({{"ring", w.ring_index}, {"width", quantize6(w.width)}});
  j["skipped"] = s.skipped;
  return j;
}

/// {"angle": deg, "origin": [x, y] | null, "maxLength": px | null}
inline RaySpec ray_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "ray: expected an object");
  RaySpec r;
  if (!j.contains("angle") || !j["angle"].is_number()) throw Error(ErrorCode::SchemaError, "ray.angle: missing");
  r.angle = j["angle"].get<double>();
  if (j.contains("origin") && !j["origin"].is_null()) {
    const auto& o = j["origin"];
    if (!o.is_array() || o.size() != 2 || !o[0].is_number() || !o[1].is_number()) {
      throw Error(ErrorCode::SchemaError, "ray.origin: expected [x, y]");
    }
    r.origin = Point2{o[0].get<double>(), o[1].get<double>()};
  }
  if (j.contains("maxLength") && !j["maxLength"].is_null()) {
    if (!j["maxLength"].is_number()) throw Error(ErrorCode::SchemaError, "ray.maxLength: expected a number");
    r.max_length = j["maxLength"].get<double>();
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "angle" && it.key() != "origin" && it.key() != "maxLength") {
      throw Error(ErrorCode::SchemaError, "ray." + it.key() + ": unknown key");
    }
  }
  return r;
}

}  // namespace ringkit::io
