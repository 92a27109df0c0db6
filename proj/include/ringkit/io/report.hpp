#pragma once

// SVG overlay (image, ring polylines, measurement ray, pith) and an HTML
// summary with the metrics table and growth plots.

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "../core.hpp"
#include "../error.hpp"
#include "../geometry.hpp"
#include "../measurement.hpp"
#include "format.hpp"
#include "metrics_csv.hpp"

namespace ringkit::io {

struct Report {
  std::string svg;
  std::string html;
};

namespace detail {

// Okabe-Ito palette.
inline constexpr std::array<std::string_view, 7> kRingColors{"#E69F00", "#56B4E9", "#009E73", "#F0E442",
                                                             "#0072B2", "#D55E00", "#CC79A7"};

inline std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string points_attr(const std::vector<Point2>& pts, bool close) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += fixed(pts[i].x, 2) + "," + fixed(pts[i].y, 2);
  }
  if (close && !pts.empty()) s += " " + fixed(pts[0].x, 2) + "," + fixed(pts[0].y, 2);
  return s;
}

inline std::string path_d(const std::vector<Point2>& pts, bool close) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s += (i ? " L" : "M") + fixed(pts[i].x, 2) + "," + fixed(pts[i].y, 2);
  }
  if (close) s += " Z";
  return s;
}

struct PlotPoint {
  std::size_t ring;
  double value;
};

/// Small inline line/bar chart; each data point is tagged with its ring index
/// and the value printed at the metrics table precision.
inline std::string plot_svg(std::string_view id, std::string_view title, const std::vector<PlotPoint>& pts,
                            bool bars) {
  const double w = 480.0;
  const double h = 220.0;
  const double pad = 36.0;
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& p : pts) {
    lo = std::min(lo, p.value);
    hi = std::max(hi, p.value);
  }
  if (hi == lo) hi = lo + 1.0;
  const double n = static_cast<double>(std::max<std::size_t>(pts.size(), 1));
  const double step = (w - 2 * pad) / n;
  auto ypos = [&](double v) { return h - pad - (v - lo) / (hi - lo) * (h - 2 * pad); };
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" class=\"plot\" id=\"" + std::string(id) +
                  "\" width=\"" + fixed(w, 0) + "\" height=\"" + fixed(h, 0) + "\">\n";
  s += "<text x=\"" + fixed(pad, 0) + "\" y=\"18\" font-size=\"13\">" + escape_xml(title) + "</text>\n";
  s += "<line x1=\"" + fixed(pad, 0) + "\" y1=\"" + fixed(ypos(0.0), 2) + "\" x2=\"" + fixed(w - pad, 0) +
       "\" y2=\"" + fixed(ypos(0.0), 2) + "\" stroke=\"#888\"/>\n";
  std::string line;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double x = pad + step * (static_cast<double>(i) + 0.5);
    const double y = ypos(pts[i].value);
    const std::string data =
        " data-ring=\"" + std::to_string(pts[i].ring) + "\" data-value=\"" + fixed(pts[i].value, 2) + "\"";
    if (bars) {
      const double y0 = ypos(0.0);
      s += "<rect class=\"point\"" + data + " x=\"" + fixed(x - step * 0.35, 2) + "\" y=\"" +
           fixed(std::min(y, y0), 2) + "\" width=\"" + fixed(step * 0.7, 2) + "\" height=\"" +
           fixed(std::abs(y0 - y), 2) + "\" fill=\"#0072B2\"/>\n";
    } else {
      s += "<circle class=\"point\"" + data + " cx=\"" + fixed(x, 2) + "\" cy=\"" + fixed(y, 2) +
           "\" r=\"3\" fill=\"#D55E00\"/>\n";
      line += (line.empty() ? "" : " ") + fixed(x, 2) + "," + fixed(y, 2);
    }
  }
  if (!bars && !line.empty()) {
    s += "<path class=\"trend\" d=\"M" + line + "\" fill=\"none\" stroke=\"#D55E00\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace detail

/// Overlay of the annotation on its image. Annual rings are <polyline>
/// elements (one per ring); other shapes are <path>; the ray is a single
/// <line class="ray"> and the pith a <circle class="pith">.
inline std::string render_overlay_svg(const AnnotationDocument& doc, const std::optional<RaySeries>& series) {
  if (doc.image_path.empty()) throw Error(ErrorCode::MissingImage, "document has no image path");
  const int w = std::max(doc.image_size.width, 1);
  const int h = std::max(doc.image_size.height, 1);
  const double stroke = std::max(1.0, std::max(w, h) / 800.0);
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" class=\"overlay\" "
       "viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) + "\" width=\"" + std::to_string(w) +
       "\" height=\"" + std::to_string(h) + "\">\n";
  s += "<image href=\"" + detail::escape_xml(doc.image_path) + "\" x=\"0\" y=\"0\" width=\"" + std::to_string(w) +
       "\" height=\"" + std::to_string(h) + "\"/>\n";
  s += "<g class=\"rings\" fill=\"none\" stroke-width=\"" + fixed(stroke, 2) + "\">\n";
  std::size_t ring = 0;
  for (const auto& sh : doc.shapes) {
    if (!sh.is_annual_ring()) continue;
    s += "<polyline class=\"ring\" data-ring=\"" + std::to_string(ring) + "\" data-id=\"" +
         detail::escape_xml(sh.id) + "\" stroke=\"" +
         std::string(detail::kRingColors[ring % detail::kRingColors.size()]) + "\" points=\"" +
         detail::points_attr(sh.points, true) + "\"/>\n";
    ++ring;
  }
  s += "</g>\n";
  s += "<g class=\"other-shapes\" fill=\"none\" stroke-width=\"" + fixed(stroke, 2) + "\">\n";
  for (const auto& sh : doc.shapes) {
    if (sh.is_annual_ring()) continue;
    const char* color = sh.kind == BoundaryKind::EarlywoodLatewood ? "#009E73" : "#CC0000";
    s += "<path class=\"" + std::string(to_string(sh.kind)) + "\" data-id=\"" + detail::escape_xml(sh.id) +
         "\" stroke=\"" + color + "\" stroke-dasharray=\"4 3\" d=\"" + detail::path_d(sh.points, sh.closed) +
         "\"/>\n";
  }
  s += "</g>\n";
  if (series && !series->hits.empty()) {
    const Point2 o = series->origin;
    const Point2 e = series->hits.back().point;
    s += "<line class=\"ray\" x1=\"" + fixed(o.x, 2) + "\" y1=\"" + fixed(o.y, 2) + "\" x2=\"" + fixed(e.x, 2) +
         "\" y2=\"" + fixed(e.y, 2) + "\" stroke=\"#FF0000\" stroke-width=\"" + fixed(stroke, 2) + "\"/>\n";
  }
  if (doc.pith) {
    s += "<circle class=\"pith\" cx=\"" + fixed(doc.pith->center.x, 2) + "\" cy=\"" + fixed(doc.pith->center.y, 2) +
         "\" r=\"" + fixed(stroke * 4.0, 2) + "\" fill=\"#FF0000\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

inline Report render_report(const AnnotationDocument& doc, const std::vector<RingMetricsRow>& rows,
                            const std::optional<RaySeries>& series) {
  Report rep;
  rep.svg = render_overlay_svg(doc, series);

  std::vector<detail::PlotPoint> annual;
  std::vector<detail::PlotPoint> cumulative;
  std::vector<detail::PlotPoint> change;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    annual.push_back({rows[i].ring_index, rows[i].annulus_area});
    cumulative.push_back({rows[i].ring_index, rows[i].cumulative_area});
    if (i > 0) change.push_back({rows[i].ring_index, rows[i].annulus_area - rows[i - 1].annulus_area});
  }

  std::string h;
  h += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  h += "<title>Ring report: " + detail::escape_xml(doc.image_path) + "</title>\n";
  h += "<style>body{font-family:sans-serif;margin:1.5em}table{border-collapse:collapse}"
       "td,th{border:1px solid #bbb;padding:2px 6px;text-align:right}.overlay{max-width:100%;height:auto}</style>\n";
  h += "</head>\n<body>\n";
  h += "<h1>Ring report</h1>\n<table class=\"meta\">\n";
  h += "<tr><th>Image</th><td>" + detail::escape_xml(doc.image_path) + "</td></tr>\n";
  h += "<tr><th>Size (px)</th><td>" + std::to_string(doc.image_size.width) + " x " +
       std::to_string(doc.image_size.height) + "</td></tr>\n";
  if (doc.scale) h += "<tr><th>Scale (px/mm)</th><td>" + shortest(doc.scale->pixels_per_mm) + "</td></tr>\n";
  if (doc.harvest_year) h += "<tr><th>Harvest year</th><td>" + std::to_string(*doc.harvest_year) + "</td></tr>\n";
  for (const auto& [k, v] : doc.provenance) {
    h += "<tr><th>" + detail::escape_xml(k) + "</th><td>" + detail::escape_xml(v) + "</td></tr>\n";
  }
  h += "<tr><th>Rings</th><td>" + std::to_string(rows.size()) + "</td></tr>\n</table>\n";

  h += "<h2>Overlay</h2>\n" + rep.svg;

  h += "<h2>Ring metrics</h2>\n<table class=\"metrics\">\n<tr>";
  for (const auto& col : split(kMetricsCsvHeader, ',')) h += "<th>" + detail::escape_xml(col) + "</th>";
  h += "</tr>\n";
  for (const auto& r : rows) {
    h += "<tr>";
    for (const auto& c : metrics_cells(r)) h += "<td>" + c + "</td>";
    h += "</tr>\n";
  }
  h += "</table>\n";

  h += "<h2>Growth</h2>\n";
  h += detail::plot_svg("annual-area", "Annual ring area (mm2)", annual, true);
  h += detail::plot_svg("cumulative-area", "Cumulative ring area (mm2)", cumulative, false);
  h += detail::plot_svg("growth-change", "Year-to-year change in ring area (mm2)", change, true);

  if (series) {
    h += "<h2>Ray measurement</h2>\n<p>Angle " + shortest(series->ray.angle) + " deg from (" +
         fixed(series->origin.x, 2) + ", " + fixed(series->origin.y, 2) + ")</p>\n";
    h += "<table class=\"ray-widths\">\n<tr><th>Ring</th><th>Distance (mm)</th><th>Width (mm)</th></tr>\n";
    for (std::size_t i = 0; i < series->hits.size(); ++i) {
      h += "<tr><td>" + std::to_string(series->hits[i].ring_index) + "</td><td>" +
           fixed(series->hits[i].distance, 3) + "</td><td>" + fixed(series->widths[i].width, 3) + "</td></tr>\n";
    }
    h += "</table>\n";
    if (!series->skipped.empty()) {
      h += "<p>Rings without a crossing:";
      for (std::size_t k : series->skipped) h += " " + std::to_string(k);
      h += "</p>\n";
    }
  }
  h += "</body>\n</html>\n";
  rep.html = std::move(h);
  return rep;
}

}  // namespace ringkit::io
