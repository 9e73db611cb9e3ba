#include "apd/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace apd {

namespace {

struct Tap {
  int index;
  double weight;
};

// Filter taps for every output sample along one axis.
std::vector<std::vector<Tap>> resample_taps(int out_len, int in_len, double scale) {
  std::vector<std::vector<Tap>> taps(out_len);
  const double support = std::max(scale, 1.0);
  for (int o = 0; o < out_len; ++o) {
    const double center = o * scale;
    const int lo = static_cast<int>(std::ceil(center - support));
    const int hi = static_cast<int>(std::floor(center + support));
    double total = 0.0;
    for (int t = lo; t <= hi; ++t) {
      const double w = 1.0 - std::abs(t - center) / support;
      if (w <= 0.0) continue;
      taps[o].push_back({std::clamp(t, 0, in_len - 1), w});
      total += w;
    }
    for (auto& tap : taps[o]) tap.weight /= total;
  }
  return taps;
}

}  // namespace

IntensityField to_grayscale(const RgbImage& img) {
  IntensityField out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const std::uint8_t* p = img.at(x, y);
      out(x, y) = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
    }
  }
  return out;
}

int resized_height(int width, int height, int target_width) {
  if (width <= 0 || height <= 0) throw InvalidInput("cannot resize an empty image");
  if (target_width < 2) throw InvalidInput("target width must be at least 2");
  const long h = std::lround(static_cast<double>(height) * target_width / width);
  return static_cast<int>(std::max(1L, h));
}

ResizedField resize_to_width(const IntensityField& field, int target_width) {
  if (field.empty()) throw InvalidInput("cannot resize an empty image");
  const int out_h = resized_height(field.width(), field.height(), target_width);
  const double scale = static_cast<double>(field.width()) / target_width;
  ResizeInfo info{scale, field.width(), field.height()};

  if (target_width == field.width() && out_h == field.height()) return {field, info};

  const auto col_taps = resample_taps(target_width, field.width(), scale);
  const auto row_taps = resample_taps(out_h, field.height(), scale);

  Plane horizontal(target_width, field.height());
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < target_width; ++x) {
      double acc = 0.0;
      for (const Tap& t : col_taps[x]) acc += t.weight * field(t.index, y);
      horizontal(x, y) = acc;
    }
  }
  IntensityField out(target_width, out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < target_width; ++x) {
      double acc = 0.0;
      for (const Tap& t : row_taps[y]) acc += t.weight * horizontal(x, t.index);
      out(x, y) = acc;
    }
  }
  return {std::move(out), info};
}

SliceMask resize_mask(const SliceMask& mask, int target_width, int target_height) {
  if (target_width == mask.width() && target_height == mask.height()) return mask;
  const double scale = static_cast<double>(mask.width()) / target_width;
  Grid<std::uint8_t> out(target_width, target_height);
  for (int y = 0; y < target_height; ++y) {
    const int sy = std::clamp(static_cast<int>(std::lround(y * scale)), 0, mask.height() - 1);
    for (int x = 0; x < target_width; ++x) {
      const int sx = std::clamp(static_cast<int>(std::lround(x * scale)), 0, mask.width() - 1);
      out(x, y) = mask(sx, sy) ? 1 : 0;
    }
  }
  return SliceMask(std::move(out));
}

IntensityField apply_mask(const IntensityField& field, const SliceMask& mask) {
  if (!field.same_shape(mask.grid())) throw InvalidInput("mask shape differs from image shape");
  IntensityField out = field;
  for (int y = 0; y < field.height(); ++y)
    for (int x = 0; x < field.width(); ++x)
      if (!mask(x, y)) out(x, y) = 0.0;
  return out;
}

Gradients derivatives(const IntensityField& field) {
  if (field.width() < 3 || field.height() < 3)
    throw InvalidInput("derivatives need an image of at least 3x3");
  Gradients g{Plane(field.width(), field.height()), Plane(field.width(), field.height())};
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      g.ix(x, y) = 0.5 * (field.clamped(x + 1, y) - field.clamped(x - 1, y));
      g.iy(x, y) = 0.5 * (field.clamped(x, y + 1) - field.clamped(x, y - 1));
    }
  }
  return g;
}

Preprocessed preprocess(const RgbImage& img, const SliceMask& mask, int target_width) {
  if (img.width() != mask.width() || img.height() != mask.height())
    throw InvalidInput("mask shape differs from image shape");
  ResizedField resized = resize_to_width(to_grayscale(img), target_width);
  SliceMask working_mask =
      resize_mask(mask, resized.field.width(), resized.field.height());
  IntensityField field = apply_mask(resized.field, working_mask);
  return {std::move(field), std::move(working_mask), resized.info};
}

}  // namespace apd
