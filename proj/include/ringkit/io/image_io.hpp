#pragma once

// PNG/JPEG decoding via OpenCV's codecs. 8- and 16-bit, gray or colour; colour
// is reduced to luma 0.299R + 0.587G + 0.114B.

#include <cstdint>
#include <filesystem>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "../error.hpp"
#include "../image.hpp"

namespace ringkit::io {

inline GrayImage load_gray(const std::filesystem::path& path) {
  cv::Mat m;
  try {
    m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception&) {
    m.release();
  }
  if (m.empty()) throw Error(ErrorCode::IoError, "cannot read image '" + path.string() + "'");
  double full = 0.0;
  switch (m.depth()) {
    case CV_8U: full = 255.0; break;
    case CV_16U: full = 65535.0; break;
    default: throw Error(ErrorCode::IoError, "unsupported sample depth in '" + path.string() + "'");
  }
  const int ch = m.channels();
  GrayImage g(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      auto sample = [&](int c) -> double {
        if (m.depth() == CV_8U) return m.ptr<std::uint8_t>(y)[x * ch + c] / full;
        return m.ptr<std::uint16_t>(y)[x * ch + c] / full;
      };
      double v = 0.0;
      if (ch == 1 || ch == 2) {
        v = sample(0);
      } else {
        // OpenCV stores BGR(A).
        v = 0.299 * sample(2) + 0.587 * sample(1) + 0.114 * sample(0);
      }
      g.at(x, y) = static_cast<float>(v);
    }
  }
  return g;
}

/// Writes an 8-bit grayscale PNG (or any format OpenCV infers from the extension).
inline void save_gray(const std::filesystem::path& path, const GrayImage& img) {
  cv::Mat m(img.height, img.width, CV_8UC1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      m.at<std::uint8_t>(y, x) =
          static_cast<std::uint8_t>(std::clamp(static_cast<int>(img.at(x, y) * 255.0f + 0.5f), 0, 255));
    }
  }
  if (!cv::imwrite(path.string(), m)) throw Error(ErrorCode::IoError, "cannot write image '" + path.string() + "'");
}

}  // namespace ringkit::io
