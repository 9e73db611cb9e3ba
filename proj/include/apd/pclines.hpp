#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "apd/lo_sampler.hpp"

namespace apd {

struct PclinesParams {
  double d = 1.0;             // inter-axis distance, normalized units
  double outlier_th = 0.03;   // RANSAC residual threshold, normalized dual units
  int iterations = 1000;
  int min_inliers = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class DualSpace { kStraight, kTwisted };

/// A line of the image plane seen as a point of one PClines sub-space.
/// Straight points have u in [0, d], twisted points u in [-d, 0].
struct DualPoint {
  DualSpace space = DualSpace::kStraight;
  double u = 0.0;
  double v = 0.0;
  std::size_t source_index = 0;
};

/// Line a*x + b*y + c = 0 in normalized image coordinates.
struct HomogeneousLine {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// Maps the line through p1 and p2 to PClines. Coordinates are first divided
/// by max(width, height). Slopes m <= 0 (including vertical) land in the
/// straight space at (d/(1-m), b/(1-m)); m > 0 in the twisted space at
/// (-d/(1+m), -b/(1+m)). Computed in homogeneous form so vertical lines are exact.
DualPoint line_to_dual(const LoSegment& seg, int width, int height, double d,
                       std::size_t source_index = 0);

/// Primal line (normalized coordinates) represented by a dual point.
HomogeneousLine dual_to_line(const DualPoint& p, double d);

/// Classic two-point RANSAC line fit over (u, v). Returns positions into
/// `points` of the best model's inliers, sorted; empty when fewer than
/// min_inliers agree. When every pair fits in the iteration budget, all
/// pairs are tried instead of sampling.
std::vector<std::size_t> ransac_line_cluster(std::span<const DualPoint> points,
                                             const PclinesParams& params);

/// Indices of segments whose lines converge: RANSAC inliers of the straight
/// space united with those of the twisted space, minus any selected in both.
std::vector<std::size_t> select_converging(const LoSet& lo, int width, int height,
                                           const PclinesParams& params);

/// Every orientation turned by pi/2 around the unchanged midpoint.
LoSet rotate_lo_90(const LoSet& lo);

/// Converging segments plus converging rotated segments, filtered once more.
/// Throws FilteringFailed when nothing survives.
LoSet pclines_filter(const LoSet& lo, int width, int height, const PclinesParams& params);

/// Debug CSV: `source,space,u,v,inlier` for one converging selection.
void write_dual_csv(const LoSet& lo, int width, int height, const PclinesParams& params,
                    const std::filesystem::path& path);

}  // namespace apd
