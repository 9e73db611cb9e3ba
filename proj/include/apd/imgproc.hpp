#pragma once

#include "apd/image.hpp"

namespace apd {

inline constexpr int kWorkingWidth = 640;

/// Maps working-frame coordinates back to the original image frame.
struct ResizeInfo {
  double scale = 1.0;  // original_width / working_width
  int original_width = 0;
  int original_height = 0;

  Point2 to_original(Point2 p) const { return p * scale; }
  Point2 to_working(Point2 p) const { return p * (1.0 / scale); }
};

struct ResizedField {
  IntensityField field;
  ResizeInfo info;
};

/// Luma (0.299, 0.587, 0.114) scaled to [0,1].
IntensityField to_grayscale(const RgbImage& img);

/// Output height for an aspect-preserving resize to target_width.
int resized_height(int width, int height, int target_width);

/// Aspect-preserving resize. Working pixel x samples original position x*scale;
/// bilinear when enlarging, triangle (bilinear) filter widened by the scale
/// factor when shrinking.
ResizedField resize_to_width(const IntensityField& field, int target_width = kWorkingWidth);

/// Nearest-neighbour resize of a mask using the same coordinate mapping.
SliceMask resize_mask(const SliceMask& mask, int target_width, int target_height);

/// Zeroes background pixels.
IntensityField apply_mask(const IntensityField& field, const SliceMask& mask);

struct Gradients {
  Plane ix;
  Plane iy;
};

/// Central differences with replicate borders. Requires at least 3x3.
Gradients derivatives(const IntensityField& field);

/// Image standardized for detection: grayscale, working width, background removed.
struct Preprocessed {
  IntensityField field;
  SliceMask mask;
  ResizeInfo info;
};

Preprocessed preprocess(const RgbImage& img, const SliceMask& mask,
                        int target_width = kWorkingWidth);

}  // namespace apd
