#pragma once

#include <filesystem>
#include <vector>

#include "apd/geometry.hpp"
#include "apd/image.hpp"

namespace apd {

/// Reads a PNG or JPEG as 8-bit RGB. Throws InvalidInput when unreadable.
RgbImage read_rgb(const std::filesystem::path& path);

/// Reads a single-channel mask; any nonzero pixel is foreground.
SliceMask read_mask(const std::filesystem::path& path);

void write_png(const RgbImage& img, const std::filesystem::path& path);
void write_mask_png(const SliceMask& mask, const std::filesystem::path& path);

/// Copy of `img` with crosses drawn at the given points, one color each.
struct Marker {
  Point2 at;
  std::uint8_t r, g, b;
};
RgbImage draw_markers(const RgbImage& img, const std::vector<Marker>& markers, int half_size = 8);

}  // namespace apd
