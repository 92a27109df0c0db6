// Detects rings in an image (or a generated test disc), prints the metrics
// table and the four cardinal ring-width series.
//
//   ringkit_demo [image.png] [pixels_per_mm]

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>

#include "ringkit/io/format.hpp"
#include "ringkit/io/image_io.hpp"
#include "ringkit/io/metrics_csv.hpp"
#include "ringkit/measurement.hpp"
#include "ringkit/pipeline.hpp"

using namespace ringkit;

namespace {

// Six light/dark annuli, 25 px apart, on a black background.
GrayImage generated_disc() {
  GrayImage img(400, 400);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double r = std::hypot(x - 199.5, y - 199.5);
      if (r < 175.0) img.at(x, y) = (static_cast<int>(r / 25.0) % 2 == 0) ? 0.3f : 0.8f;
    }
  }
  return img;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const std::string path = argc > 1 ? argv[1] : "generated-disc";
    const GrayImage img = argc > 1 ? io::load_gray(path) : generated_disc();
    DetectOptions opts;
    opts.pixels_per_mm = argc > 2 ? std::atof(argv[2]) : 10.0;
    const auto doc = run_detection(img, path, opts);
    std::cout << doc.annual_rings().size() << " rings around (" << io::fixed(doc.pith->center.x, 1) << ", "
              << io::fixed(doc.pith->center.y, 1) << ")\n\n";
    std::cout << io::write_metrics_csv(compute_ring_metrics(doc)) << "\n";
    for (Direction d : {Direction::North, Direction::East, Direction::South, Direction::West}) {
      const auto s = measure_ray(doc, {std::nullopt, direction_angle(d), std::nullopt});
      std::cout << io::shortest(direction_angle(d)) << " deg:";
      for (double w : s.width_values()) std::cout << " " << io::fixed(w, 2);
      std::cout << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
