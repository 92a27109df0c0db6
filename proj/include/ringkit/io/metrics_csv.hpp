#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "../error.hpp"
#include "../geometry.hpp"
#include "format.hpp"

namespace ringkit::io {

inline constexpr std::string_view kMetricsCsvHeader =
    "Ring,Area (mm2),Cumulative area (mm2),Perimeter (mm),Equivalent ring width (mm),Similarity factor,"
    "Eccentricity module (mm),Eccentricity phase (deg),EW area (mm2),LW area (mm2),Excluded area (mm2)";

inline constexpr std::size_t kMetricsCsvColumns = 11;

/// Printed cells of one row, in header order. Shared by the CSV writer and
/// the HTML report so both show identical numbers.
inline std::vector<std::string> metrics_cells(const RingMetricsRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? fixed(*v, 2) : std::string(); };
  return {std::to_string(r.ring_index),
          fixed(r.annulus_area, 2),
          fixed(r.cumulative_area, 2),
          fixed(r.perimeter, 2),
          fixed(r.equivalent_ring_width, 2),
          fixed(r.similarity_factor, 4),
          fixed(r.eccentricity_module, 2),
          fixed(r.eccentricity_phase, 2),
          opt(r.ew_area),
          opt(r.lw_area),
          fixed(r.excluded_area, 2)};
}

inline std::string write_metrics_csv(const std::vector<RingMetricsRow>& rows) {
  std::string out(kMetricsCsvHeader);
  out += "\r\n";
  for (const auto& r : rows) {
    const auto cells = metrics_cells(r);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += "\r\n";
  }
  return out;
}

/// Parses a metrics table written by write_metrics_csv (values at printed precision).
inline std::vector<RingMetricsRow> parse_metrics_csv(std::string_view text) {
  const auto ls = lines(text);
  if (ls.empty() || ls[0] != kMetricsCsvHeader) throw Error(ErrorCode::ParseError, "metrics csv: unexpected header");
  std::vector<RingMetricsRow> rows;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto cells = split(ls[i], ',');
    if (cells.size() != kMetricsCsvColumns) {
      throw Error(ErrorCode::ParseError, "metrics csv: line " + std::to_string(i + 1) + " has " +
                                             std::to_string(cells.size()) + " columns");
    }
    auto num = [&](std::size_t c) {
      double v = 0.0;
      if (!parse_double(cells[c], v)) {
        throw Error(ErrorCode::ParseError, "metrics csv: line " + std::to_string(i + 1) + " column " +
                                               std::to_string(c + 1) + " is not a number");
      }
      return v;
    };
    auto opt = [&](std::size_t c) -> std::optional<double> {
      if (cells[c].empty()) return std::nullopt;
      return num(c);
    };
    RingMetricsRow r;
    r.ring_index = static_cast<std::size_t>(num(0));
    r.annulus_area = num(1);
    r.cumulative_area = num(2);
    r.perimeter = num(3);
    r.equivalent_ring_width = num(4);
    r.similarity_factor = num(5);
    r.eccentricity_module = num(6);
    r.eccentricity_phase = num(7);
    r.ew_area = opt(8);
    r.lw_area = opt(9);
    r.excluded_area = num(10);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ringkit::io
