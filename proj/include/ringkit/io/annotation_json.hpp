#pragma once

// Annotation file (version 1): LabelMe-style shape list extended with scale,
// pith, harvest year and provenance. Output is deterministic: known keys in a
// fixed order, unknown keys preserved verbatim in sorted order, coordinates
// rounded to 6 fractional digits.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "../core.hpp"
#include "../error.hpp"

namespace ringkit::io {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kAnnotationVersion = 1;

/// Rounds to the nearest value with at most 6 fractional digits, so that the
/// shortest round-trip representation never needs more.
inline double quantize6(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  double out = v;
  std::from_chars(buf, res.ptr, out);
  return out == 0.0 ? 0.0 : out;  // drop negative zero
}

inline std::string_view to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::Annual: return "annual";
    case BoundaryKind::EarlywoodLatewood: return "earlywood_latewood";
    case BoundaryKind::Defect: return "defect";
    case BoundaryKind::RegionOfInterest: return "region_of_interest";
  }
  return "annual";
}

inline std::string_view to_string(ScaleSource s) {
  return s == ScaleSource::ManualTwoPoints ? "manual_two_points" : "metadata";
}

inline std::string_view to_string(PithMethod m) {
  return m == PithMethod::Manual ? "manual" : "foreground_centroid";
}

namespace detail {

[[noreturn]] inline void schema(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, path + (what.empty() ? "" : ": " + what));
}

inline const ordered_json& require(const ordered_json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline double number(const ordered_json& v, const std::string& path) {
  if (!v.is_number()) schema(path, "expected a number");
  return v.get<double>();
}

inline int integer(const ordered_json& v, const std::string& path) {
  if (!v.is_number_integer()) schema(path, "expected an integer");
  return v.get<int>();
}

inline std::string text(const ordered_json& v, const std::string& path) {
  if (!v.is_string()) schema(path, "expected a string");
  return v.get<std::string>();
}

inline BoundaryKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "annual") return BoundaryKind::Annual;
  if (s == "earlywood_latewood") return BoundaryKind::EarlywoodLatewood;
  if (s == "defect") return BoundaryKind::Defect;
  if (s == "region_of_interest") return BoundaryKind::RegionOfInterest;
  schema(path, "unknown kind '" + s + "'");
}

inline void keep_unknown(const ordered_json& obj, std::initializer_list<std::string_view> known,
                         std::map<std::string, std::string>& extras) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (auto k : known) is_known = is_known || it.key() == k;
    if (!is_known) extras[it.key()] = it.value().dump();
  }
}

inline void put_extras(ordered_json& obj, const std::map<std::string, std::string>& extras) {
  for (const auto& [k, raw] : extras) {
    if (!obj.contains(k)) obj[k] = ordered_json::parse(raw);
  }
}

/// Line and column (1-based) of a byte offset in text.
inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline ordered_json to_json(const AnnotationDocument& doc) {
  ordered_json j;
  j["version"] = kAnnotationVersion;
  j["imagePath"] = doc.image_path;
  j["imageWidth"] = doc.image_size.width;
  j["imageHeight"] = doc.image_size.height;
  if (doc.scale) {
    j["scale"] = {{"pixelsPerMm", quantize6(doc.scale->pixels_per_mm)}, {"source", to_string(doc.scale->source)}};
  } else {
    j["scale"] = nullptr;
  }
  if (doc.pith) {
    j["pith"] = {{"x", quantize6(doc.pith->center.x)},
                 {"y", quantize6(doc.pith->center.y)},
                 {"method", to_string(doc.pith->method)}};
  } else {
    j["pith"] = nullptr;
  }
  j["harvestYear"] = doc.harvest_year ? ordered_json(*doc.harvest_year) : ordered_json(nullptr);
  j["provenance"] = ordered_json::object();
  for (const auto& [k, v] : doc.provenance) j["provenance"][k] = v;

  ordered_json shapes = ordered_json::array();
  for (const auto& s : doc.shapes) {
    ordered_json js;
    js["id"] = s.id;
    js["label"] = s.label;
    js["kind"] = to_string(s.kind);
    js["shapeType"] = s.closed ? "polygon" : "linestrip";
    ordered_json pts = ordered_json::array();
    for (const auto& p : s.points) pts.push_back({quantize6(p.x), quantize6(p.y)});
    js["points"] = std::move(pts);
    js["yearLabel"] = s.year_label ? ordered_json(*s.year_label) : ordered_json(nullptr);
    js["nodeBudget"] = s.node_budget;
    detail::put_extras(js, s.extras);
    shapes.push_back(std::move(js));
  }
  j["shapes"] = std::move(shapes);
  detail::put_extras(j, doc.extras);
  return j;
}

inline std::string serialize_annotation(const AnnotationDocument& doc) { return to_json(doc).dump(2) + "\n"; }

inline AnnotationDocument from_json(const ordered_json& j) {
  using detail::require;
  if (!j.is_object()) detail::schema("<root>", "expected an object");
  const auto& version = require(j, "version", "");
  if (!version.is_number_integer()) detail::schema("version", "expected an integer");
  if (version.get<int>() != kAnnotationVersion) {
    throw Error(ErrorCode::VersionError, "unsupported annotation version " + version.dump());
  }
  AnnotationDocument doc;
  doc.image_path = detail::text(require(j, "imagePath", ""), "imagePath");
  doc.image_size.width = detail::integer(require(j, "imageWidth", ""), "imageWidth");
  doc.image_size.height = detail::integer(require(j, "imageHeight", ""), "imageHeight");

  if (auto it = j.find("scale"); it != j.end() && !it->is_null()) {
    ScaleCalibration sc;
    sc.pixels_per_mm = detail::number(require(*it, "pixelsPerMm", "scale"), "scale.pixelsPerMm");
    if (!(sc.pixels_per_mm > 0.0)) detail::schema("scale.pixelsPerMm", "must be positive");
    if (auto src = it->find("source"); src != it->end()) {
      const auto s = detail::text(*src, "scale.source");
      if (s == "manual_two_points") {
        sc.source = ScaleSource::ManualTwoPoints;
      } else if (s == "metadata") {
        sc.source = ScaleSource::Metadata;
      } else {
        detail::schema("scale.source", "unknown source '" + s + "'");
      }
    }
    doc.scale = sc;
  }
  if (auto it = j.find("pith"); it != j.end() && !it->is_null()) {
    Pith p;
    p.center.x = detail::number(require(*it, "x", "pith"), "pith.x");
    p.center.y = detail::number(require(*it, "y", "pith"), "pith.y");
    if (auto m = it->find("method"); m != it->end()) {
      const auto s = detail::text(*m, "pith.method");
      if (s == "manual") {
        p.method = PithMethod::Manual;
      } else if (s == "foreground_centroid") {
        p.method = PithMethod::ForegroundCentroid;
      } else {
        detail::schema("pith.method", "unknown method '" + s + "'");
      }
    }
    doc.pith = p;
  }
  if (auto it = j.find("harvestYear"); it != j.end() && !it->is_null()) {
    doc.harvest_year = detail::integer(*it, "harvestYear");
  }
  if (auto it = j.find("provenance"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) detail::schema("provenance", "expected an object");
    for (auto p = it->begin(); p != it->end(); ++p) {
      doc.provenance[p.key()] = p.value().is_string() ? p.value().get<std::string>() : p.value().dump();
    }
  }

  const auto& shapes = require(j, "shapes", "");
  if (!shapes.is_array()) detail::schema("shapes", "expected an array");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const std::string path = "shapes[" + std::to_string(i) + "]";
    const auto& js = shapes[i];
    if (!js.is_object()) detail::schema(path, "expected an object");
    RingBoundary s;
    s.id = detail::text(require(js, "id", path), path + ".id");
    if (auto it = js.find("label"); it != js.end()) s.label = detail::text(*it, path + ".label");
    s.kind = detail::parse_kind(detail::text(require(js, "kind", path), path + ".kind"), path + ".kind");
    const auto type = detail::text(require(js, "shapeType", path), path + ".shapeType");
    if (type == "polygon") {
      s.closed = true;
    } else if (type == "linestrip") {
      s.closed = false;
    } else {
      detail::schema(path + ".shapeType", "expected 'polygon' or 'linestrip'");
    }
    const auto& pts = require(js, "points", path);
    if (!pts.is_array()) detail::schema(path + ".points", "expected an array");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const std::string pp = path + ".points[" + std::to_string(k) + "]";
      if (!pts[k].is_array() || pts[k].size() != 2) detail::schema(pp, "expected [x, y]");
      s.points.push_back({detail::number(pts[k][0], pp), detail::number(pts[k][1], pp)});
    }
    if (auto it = js.find("yearLabel"); it != js.end() && !it->is_null()) {
      s.year_label = detail::integer(*it, path + ".yearLabel");
    }
    if (auto it = js.find("nodeBudget"); it != js.end()) {
      const int nb = detail::integer(*it, path + ".nodeBudget");
      if (nb < 1) detail::schema(path + ".nodeBudget", "must be positive");
      s.node_budget = static_cast<std::size_t>(nb);
    } else {
      s.node_budget = std::max<std::size_t>(1, s.points.size());
    }
    detail::keep_unknown(js, {"id", "label", "kind", "shapeType", "points", "yearLabel", "nodeBudget"}, s.extras);
    doc.shapes.push_back(std::move(s));
  }
  detail::keep_unknown(j,
                       {"version", "imagePath", "imageWidth", "imageHeight", "scale", "pith", "harvestYear",
                        "provenance", "shapes"},
                       doc.extras);
  return doc;
}

inline AnnotationDocument parse_annotation(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte);
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                                           e.what());
  }
  return from_json(j);
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

/// Reads and parses an annotation file. Invariant checks are left to
/// validate(), so partially edited documents can still be loaded.
inline AnnotationDocument read_annotation(const std::filesystem::path& path) {
  return parse_annotation(read_text_file(path));
}

inline void write_annotation(const std::filesystem::path& path, const AnnotationDocument& doc) {
  write_text_file(path, serialize_annotation(doc));
}

}  // namespace ringkit::io
