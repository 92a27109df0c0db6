#pragma once

// Point-list export of one ray measurement.
//
//   #ringkit pos 1
//   #Sample: <id>
//   #Date: <yyyy-mm-dd>
//   #Scale: <mm per px> mm/px
//   #Origin: <x>,<y> px
//   #Angle: <degrees> deg
//   #Frame: ray-local; x = distance along ray (mm), y = lateral offset (mm)
//   #Rings: <ring index of each point line>
//   #Skipped: <ring indices without a crossing>
//   x,y            one line per crossing, innermost first
//
// Coordinates are in the ray's own frame: the image transform is recoverable
// from the Origin, Angle and Scale header lines.

#include <cstddef>
#include <string>
#include <string_view>

#include "../error.hpp"
#include "../measurement.hpp"
#include "format.hpp"

namespace ringkit::io {

struct PosMeta {
  std::string sample_id;
  std::string date;
  double pixels_per_mm = 1.0;
};

inline std::string write_pos(const RaySeries& series, const PosMeta& meta) {
  if (series.hits.empty()) throw Error(ErrorCode::EmptySeries, "ray crossed no ring boundary");
  auto join = [](const auto& items, auto get) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(get(items[i]));
    }
    return s;
  };
  std::string out;
  out += "#ringkit pos 1\n";
  out += "#Sample: " + meta.sample_id + "\n";
  out += "#Date: " + meta.date + "\n";
  out += "#Scale: " + shortest(1.0 / meta.pixels_per_mm) + " mm/px\n";
  out += "#Origin: " + shortest(series.origin.x) + "," + shortest(series.origin.y) + " px\n";
  out += "#Angle: " + shortest(series.ray.angle) + " deg\n";
  out += "#Frame: ray-local; x = distance along ray (mm), y = lateral offset (mm)\n";
  out += "#Rings: " + join(series.hits, [](const RayHit& h) { return h.ring_index; }) + "\n";
  out += "#Skipped: " + join(series.skipped, [](std::size_t i) { return i; }) + "\n";
  for (const auto& h : series.hits) out += fixed(h.distance, 4) + "," + fixed(0.0, 4) + "\n";
  return out;
}

struct PosFile {
  PosMeta meta;
  RaySeries series;
};

inline PosFile parse_pos(std::string_view text) {
  PosFile f;
  std::vector<std::size_t> rings;
  bool have_rings = false;
  std::vector<double> xs;
  auto bad = [](const std::string& why) { return Error(ErrorCode::ParseError, "pos: " + why); };
  auto indices = [&](const std::string& v) {
    std::vector<std::size_t> out;
    if (v.empty()) return out;
    for (const auto& tok : split(v, ',')) {
      double d = 0.0;
      if (!parse_double(tok, d) || d < 0.0) throw bad("bad ring index '" + tok + "'");
      out.push_back(static_cast<std::size_t>(d));
    }
    return out;
  };
  for (const auto& line : lines(text)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      auto strip_unit = [&](std::string_view unit) {
        if (value.size() >= unit.size() && value.compare(value.size() - unit.size(), unit.size(), unit) == 0) {
          value.erase(value.size() - unit.size());
        }
      };
      if (key == "Sample") {
        f.meta.sample_id = value;
      } else if (key == "Date") {
        f.meta.date = value;
      } else if (key == "Scale") {
        strip_unit(" mm/px");
        double mm_per_px = 0.0;
        if (!parse_double(value, mm_per_px) || !(mm_per_px > 0.0)) throw bad("bad scale");
        f.meta.pixels_per_mm = 1.0 / mm_per_px;
      } else if (key == "Origin") {
        strip_unit(" px");
        const auto parts = split(value, ',');
        Point2 o;
        if (parts.size() != 2 || !parse_double(parts[0], o.x) || !parse_double(parts[1], o.y)) throw bad("bad origin");
        f.series.origin = o;
        f.series.ray.origin = o;
      } else if (key == "Angle") {
        strip_unit(" deg");
        if (!parse_double(value, f.series.ray.angle)) throw bad("bad angle");
      } else if (key == "Rings") {
        rings = indices(value);
        have_rings = true;
      } else if (key == "Skipped") {
        f.series.skipped = indices(value);
      }
      continue;
    }
    const auto parts = split(line, ',');
    double x = 0.0;
    double y = 0.0;
    if (parts.size() != 2 || !parse_double(parts[0], x) || !parse_double(parts[1], y)) {
      throw bad("bad coordinate line '" + line + "'");
    }
    xs.push_back(x);
  }
  if (xs.empty()) throw Error(ErrorCode::EmptySeries, "pos file has no coordinates");
  if (!have_rings) {
    for (std::size_t i = 0; i < xs.size(); ++i) rings.push_back(i);
  }
  if (rings.size() != xs.size()) throw bad("ring index count does not match coordinate count");
  const Point2 dir = direction_from_degrees(f.series.ray.angle);
  double prev = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0 && !(xs[i] > prev)) throw bad("coordinates are not strictly increasing along the ray");
    f.series.hits.push_back({rings[i], xs[i], f.series.origin + dir * (xs[i] * f.meta.pixels_per_mm)});
    f.series.widths.push_back({rings[i], xs[i] - prev});
    prev = xs[i];
  }
  return f;
}

}  // namespace ringkit::io
