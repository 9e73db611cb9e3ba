#include "apd/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace apd {

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) throw InvalidInput("image dimensions must be positive");
  if (pixels_.size() != 3 * static_cast<std::size_t>(width) * height)
    throw InvalidInput("RGB buffer length must be 3*width*height");
}

RgbImage::RgbImage(int width, int height)
    : RgbImage(width, height,
               std::vector<std::uint8_t>(3 * static_cast<std::size_t>(std::max(width, 0)) *
                                         std::max(height, 0))) {}

SliceMask::SliceMask(Grid<std::uint8_t> inside) : inside_(std::move(inside)) {
  int x_min = std::numeric_limits<int>::max();
  int y_min = std::numeric_limits<int>::max();
  int x_max = -1;
  int y_max = -1;
  for (int y = 0; y < inside_.height(); ++y) {
    for (int x = 0; x < inside_.width(); ++x) {
      if (inside_(x, y) == 0) continue;
      inside_(x, y) = 1;
      ++count_;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (count_ == 0) throw InvalidInput("slice mask has no foreground pixel");
  bbox_ = {x_min, y_min, x_max, y_max};
}

SliceMask SliceMask::full(int width, int height) {
  return SliceMask(Grid<std::uint8_t>(width, height, 1));
}

bool SliceMask::contains(Point2 p) const {
  const int x = static_cast<int>(std::lround(p.x));
  const int y = static_cast<int>(std::lround(p.y));
  if (x < 0 || y < 0 || x >= width() || y >= height()) return false;
  return (*this)(x, y);
}

}  // namespace apd
