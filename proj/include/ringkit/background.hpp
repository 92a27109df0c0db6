#pragma once

// Classical foreground segmentation for wood discs on a plain background and
// a centroid pith estimate.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "core.hpp"
#include "error.hpp"
#include "image.hpp"

namespace ringkit {

struct ForegroundMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  ForegroundMask() = default;
  ForegroundMask(int w, int h, bool fill = false)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  bool contains(Point2 p) const {
    const int x = static_cast<int>(std::lround(p.x));
    const int y = static_cast<int>(std::lround(p.y));
    return x >= 0 && y >= 0 && x < width && y < height && at(x, y);
  }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  }
};

/// Otsu threshold over a 256-bin histogram of [0, 1] samples.
inline double otsu_threshold(const GrayImage& img) {
  std::array<double, 256> hist{};
  for (float v : img.samples) {
    hist[static_cast<std::size_t>(std::clamp(static_cast<int>(v * 255.0f + 0.5f), 0, 255))] += 1.0;
  }
  const double total = static_cast<double>(img.samples.size());
  double sum_all = 0.0;
  for (std::size_t i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * hist[i];
  double w0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  std::size_t best_bin = 0;
  for (std::size_t t = 0; t < 256; ++t) {
    w0 += hist[t];
    sum0 += static_cast<double>(t) * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  return (static_cast<double>(best_bin) + 0.5) / 255.0;
}

namespace detail {

/// 4-connected flood fill from every seed pixel over pixels where pass() holds.
template <typename Pass>
std::vector<std::uint8_t> flood(int w, int h, const std::vector<std::size_t>& seeds, Pass pass) {
  std::vector<std::uint8_t> reached(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::size_t> stack;
  for (std::size_t s : seeds) {
    if (!reached[s] && pass(s)) {
      reached[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    const std::array<std::pair<int, int>, 4> nbrs{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
    for (auto [nx, ny] : nbrs) {
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
      if (!reached[j] && pass(j)) {
        reached[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return reached;
}

inline std::vector<std::size_t> border_pixels(int w, int h) {
  std::vector<std::size_t> out;
  for (int x = 0; x < w; ++x) {
    out.push_back(static_cast<std::size_t>(x));
    out.push_back(static_cast<std::size_t>(h - 1) * w + x);
  }
  for (int y = 1; y + 1 < h; ++y) {
    out.push_back(static_cast<std::size_t>(y) * w);
    out.push_back(static_cast<std::size_t>(y) * w + (w - 1));
  }
  return out;
}

}  // namespace detail

/// Otsu split, background flooded from the image border, largest remaining
/// component kept with its holes filled. The background class is whichever
/// side of the threshold most border pixels fall on.
inline ForegroundMask remove_background(const GrayImage& img) {
  const int w = img.width;
  const int h = img.height;
  if (w < 1 || h < 1) throw Error(ErrorCode::EmptyForeground, "empty image");
  const double t = otsu_threshold(img);
  const auto border = detail::border_pixels(w, h);
  std::size_t dark_border = 0;
  for (std::size_t i : border) dark_border += img.samples[i] < t ? 1 : 0;
  const bool background_dark = dark_border * 2 >= border.size();
  auto is_background_class = [&](std::size_t i) {
    return background_dark ? img.samples[i] < t : img.samples[i] >= t;
  };

  const auto background = detail::flood(w, h, border, is_background_class);

  // Largest 4-connected component of what is left.
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  int best_label = -1;
  std::size_t best_size = 0;
  int next_label = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < label.size(); ++s) {
    if (background[s] || label[s] >= 0) continue;
    std::size_t size = 0;
    label[s] = next_label;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++size;
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      const std::array<std::pair<int, int>, 4> nbrs{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
      for (auto [nx, ny] : nbrs) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (!background[j] && label[j] < 0) {
          label[j] = next_label;
          stack.push_back(j);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_label = next_label;
    }
    ++next_label;
  }

  const std::size_t min_size = std::max<std::size_t>(1, label.size() / 100);
  if (best_label < 0 || best_size < min_size) {
    throw Error(ErrorCode::EmptyForeground, "no foreground component covers 1% of the image");
  }

  // Fill holes: anything not reachable from the border without entering the
  // kept component belongs to it.
  const auto outside = detail::flood(w, h, border, [&](std::size_t i) { return label[i] != best_label; });
  ForegroundMask mask(w, h);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) mask.bits[i] = outside[i] ? 0 : 1;
  return mask;
}

/// Foreground centroid. A heuristic: for strongly eccentric discs it differs
/// from the biological pith, which can always be set manually instead.
inline Pith estimate_pith(const ForegroundMask& mask) {
  double sx = 0.0;
  double sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) {
        sx += x;
        sy += y;
        ++n;
      }
    }
  }
  if (n == 0) throw Error(ErrorCode::EmptyForeground, "mask is empty");
  return {{sx / static_cast<double>(n), sy / static_cast<double>(n)}, PithMethod::ForegroundCentroid};
}

}  // namespace ringkit
