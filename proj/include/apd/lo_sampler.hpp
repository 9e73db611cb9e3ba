#pragma once

#include <filesystem>
#include <vector>

#include "apd/geometry.hpp"
#include "apd/image.hpp"

namespace apd {

struct LoSamplerParams {
  int window = 3;              // odd patch side, pixels
  double percent_lo = 0.7;     // fraction of foreground pixels kept by the coherence gate

  void validate() const;
};

/// Local-orientation segment of half-length 1 centered on a sampled pixel.
struct LoSegment {
  Point2 p1;
  Point2 p2;
  Point2 mid;
  double alpha = 0.0;  // radians, [0, pi)
  double coherence = 0.0;

  Point2 direction() const { return p2 - p1; }
};

/// The N x 4 matrix of sampled segments, one row per coherent patch.
using LoSet = std::vector<LoSegment>;

/// Builds the segment p_mid -/+ (cos alpha, sin alpha), alpha wrapped into [0, pi).
LoSegment make_segment(Point2 mid, double alpha, double coherence = 1.0);

/// Lower (1 - percent_lo)-quantile of the coherence over foreground pixels.
double coherence_threshold(const Plane& coherence, const SliceMask& mask, double percent_lo);

/// One segment per non-overlapping window x window patch (partial edge patches
/// included): the most coherent foreground pixel, kept when its coherence is
/// positive and reaches the threshold. Output is in patch row-major order.
LoSet sample_lo(const Plane& angle, const Plane& coherence, const SliceMask& mask,
                const LoSamplerParams& params);

/// CSV rows `x1,y1,x2,y2,coherence` with a header line.
void write_lo_csv(const LoSet& lo, const std::filesystem::path& path);

}  // namespace apd
