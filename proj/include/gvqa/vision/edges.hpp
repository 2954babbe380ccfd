#pragma once

#include <cmath>
#include <vector>

#include "gvqa/vision/image.hpp"

namespace gvqa::vision {

// Sobel gradient magnitude on the intensity channel. Border pixels use
// clamped sampling.
inline std::vector<double> sobel_magnitude(const Image& img) {
  int w = img.width, h = img.height;
  std::vector<double> mag(static_cast<size_t>(w) * h, 0.0);
  auto I = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return img.intensity(x, y);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double gx = -I(x - 1, y - 1) - 2 * I(x - 1, y) - I(x - 1, y + 1) +
                  I(x + 1, y - 1) + 2 * I(x + 1, y) + I(x + 1, y + 1);
      double gy = -I(x - 1, y - 1) - 2 * I(x, y - 1) - I(x + 1, y - 1) +
                  I(x - 1, y + 1) + 2 * I(x, y + 1) + I(x + 1, y + 1);
      mag[static_cast<size_t>(y) * w + x] = std::hypot(gx, gy);
    }
  }
  return mag;
}

inline std::vector<uint8_t> threshold_edges(const std::vector<double>& magnitude, double threshold) {
  std::vector<uint8_t> out(magnitude.size(), 0);
  for (size_t i = 0; i < magnitude.size(); ++i) out[i] = magnitude[i] >= threshold ? 1 : 0;
  return out;
}

inline std::vector<uint8_t> edge_map(const Image& img, double threshold) {
  return threshold_edges(sobel_magnitude(img), threshold);
}

}  // namespace gvqa::vision
