#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "apd/error.hpp"
#include "apd/geometry.hpp"

namespace apd {

/// Dense row-major 2D grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw InvalidInput("grid dimensions must be positive");
    values_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator()(int x, int y) { return values_[index(x, y)]; }
  const T& operator()(int x, int y) const { return values_[index(x, y)]; }

  /// Access with coordinates clamped to the grid (replicate border).
  const T& clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return values_[index(x, y)];
  }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

/// Floating-point plane. Also the working grayscale representation, values in [0,1].
using Plane = Grid<double>;
using IntensityField = Plane;

/// 8-bit RGB image, row-major, interleaved channels.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, std::vector<std::uint8_t> pixels);
  RgbImage(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  std::uint8_t* at(int x, int y) { return &pixels_[3 * (static_cast<std::size_t>(y) * width_ + x)]; }
  const std::uint8_t* at(int x, int y) const {
    return &pixels_[3 * (static_cast<std::size_t>(y) * width_ + x)];
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Foreground mask of a single slice with its tight bounding box.
/// Always holds at least one foreground pixel.
class SliceMask {
 public:
  explicit SliceMask(Grid<std::uint8_t> inside);

  static SliceMask full(int width, int height);

  int width() const { return inside_.width(); }
  int height() const { return inside_.height(); }
  bool operator()(int x, int y) const { return inside_(x, y) != 0; }
  const Grid<std::uint8_t>& grid() const { return inside_; }
  const BBox& bbox() const { return bbox_; }
  std::size_t foreground_count() const { return count_; }

  /// Membership test for a real-valued point (nearest pixel).
  bool contains(Point2 p) const;

 private:
  Grid<std::uint8_t> inside_;
  BBox bbox_;
  std::size_t count_ = 0;
};

}  // namespace apd
