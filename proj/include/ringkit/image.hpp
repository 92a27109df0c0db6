#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "error.hpp"

namespace ringkit {

/// Row-major interleaved raster with samples in [0, 1].
template <std::size_t Channels>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<float> samples;

  Raster() = default;
  Raster(int w, int h, float fill = 0.0f)
      : width(w), height(h), samples(static_cast<std::size_t>(w) * h * Channels, fill) {}

  static constexpr std::size_t channels() { return Channels; }

  float& at(int x, int y, std::size_t c = 0) {
    return samples[(static_cast<std::size_t>(y) * width + x) * Channels + c];
  }
  float at(int x, int y, std::size_t c = 0) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * Channels + c];
  }

  /// Bilinear sample at continuous pixel-center coordinates, clamped at the edges.
  float bilinear(double x, double y, std::size_t c = 0) const {
    x = std::clamp(x, 0.0, static_cast<double>(width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height - 1));
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, width - 1);
    const int y1 = std::min(y0 + 1, height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = at(x0, y0, c) * (1.0 - fx) + at(x1, y0, c) * fx;
    const double bottom = at(x0, y1, c) * (1.0 - fx) + at(x1, y1, c) * fx;
    return static_cast<float>(top * (1.0 - fy) + bottom * fy);
  }
};

using GrayImage = Raster<1>;
using RgbImage = Raster<3>;

inline GrayImage to_luma(const RgbImage& rgb) {
  GrayImage g(rgb.width, rgb.height);
  for (std::size_t i = 0, n = g.samples.size(); i < n; ++i) {
    g.samples[i] = static_cast<float>(0.299 * rgb.samples[3 * i] + 0.587 * rgb.samples[3 * i + 1] +
                                      0.114 * rgb.samples[3 * i + 2]);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Lanczos resampling

inline constexpr double kLanczosLobes = 3.0;

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

/// sinc(x)·sinc(x/3) on |x| < 3, zero elsewhere.
inline double lanczos3(double x) {
  if (std::abs(x) >= kLanczosLobes) return 0.0;
  return sinc(x) * sinc(x / kLanczosLobes);
}

namespace detail {

struct Taps {
  int first = 0;
  std::vector<double> weights;
};

/// Normalized filter taps for every destination index along one axis.
/// Pixel centers are aligned (dst + 0.5) / scale - 0.5; when shrinking the
/// kernel is stretched by 1/scale so it still band-limits the source.
inline std::vector<Taps> lanczos_taps(int src_len, int dst_len) {
  const double scale = static_cast<double>(dst_len) / src_len;
  const double stretch = scale < 1.0 ? 1.0 / scale : 1.0;
  const double support = kLanczosLobes * stretch;
  std::vector<Taps> out(static_cast<std::size_t>(dst_len));
  for (int d = 0; d < dst_len; ++d) {
    const double center = (d + 0.5) / scale - 0.5;
    const int lo = static_cast<int>(std::floor(center - support)) + 1;
    const int hi = static_cast<int>(std::ceil(center + support)) - 1;
    Taps& t = out[static_cast<std::size_t>(d)];
    // Taps that fall outside the source are folded onto the nearest edge sample.
    t.first = std::max(0, lo);
    const int last = std::min(src_len - 1, hi);
    t.weights.assign(static_cast<std::size_t>(std::max(0, last - t.first + 1)), 0.0);
    double sum = 0.0;
    for (int s = lo; s <= hi; ++s) {
      const double w = lanczos3((s - center) / stretch);
      const int clamped = std::clamp(s, t.first, last);
      t.weights[static_cast<std::size_t>(clamped - t.first)] += w;
      sum += w;
    }
    if (sum != 0.0) {
      for (auto& w : t.weights) w /= sum;
    }
  }
  return out;
}

}  // namespace detail

/// Separable Lanczos-3 resize with per-pixel weight normalization; results are
/// clamped to [0, 1].
template <std::size_t C>
Raster<C> resize_lanczos(const Raster<C>& img, int new_width, int new_height) {
  if (new_width < 1 || new_height < 1 || img.width < 1 || img.height < 1) {
    throw Error(ErrorCode::ZeroDimension, "resize dimensions must be at least 1x1");
  }
  const auto xt = detail::lanczos_taps(img.width, new_width);
  const auto yt = detail::lanczos_taps(img.height, new_height);

  // Horizontal pass into a double buffer, then vertical.
  std::vector<double> tmp(static_cast<std::size_t>(new_width) * img.height * C, 0.0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < new_width; ++x) {
      const auto& t = xt[static_cast<std::size_t>(x)];
      std::array<double, C> acc{};
      for (std::size_t k = 0; k < t.weights.size(); ++k) {
        for (std::size_t c = 0; c < C; ++c) acc[c] += t.weights[k] * img.at(t.first + static_cast<int>(k), y, c);
      }
      for (std::size_t c = 0; c < C; ++c) {
        tmp[(static_cast<std::size_t>(y) * new_width + x) * C + c] = acc[c];
      }
    }
  }
  Raster<C> out(new_width, new_height);
  for (int y = 0; y < new_height; ++y) {
    const auto& t = yt[static_cast<std::size_t>(y)];
    for (int x = 0; x < new_width; ++x) {
      std::array<double, C> acc{};
      for (std::size_t k = 0; k < t.weights.size(); ++k) {
        const std::size_t row = static_cast<std::size_t>(t.first) + k;
        for (std::size_t c = 0; c < C; ++c) acc[c] += t.weights[k] * tmp[(row * new_width + x) * C + c];
      }
      for (std::size_t c = 0; c < C; ++c) out.at(x, y, c) = static_cast<float>(std::clamp(acc[c], 0.0, 1.0));
    }
  }
  return out;
}

/// Target size when the width exceeds max_width, preserving aspect ratio.
/// Returns the input size when no resize is needed.
inline std::pair<int, int> fit_width(int width, int height, int max_width) {
  if (max_width <= 0 || width <= max_width) return {width, height};
  const double f = static_cast<double>(max_width) / width;
  return {max_width, std::max(1, static_cast<int>(std::lround(height * f)))};
}

}  // namespace ringkit
