#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apd/geometry.hpp"
#include "apd/image.hpp"
#include "apd/imgproc.hpp"
#include "apd/lo_sampler.hpp"

namespace apd {

struct SolverParams {
  double region_factor = 7.0;  // r_f: refinement square side is max(w, h) / r_f
  double eps = 1e-5;           // pixels
  int max_iter = 5;

  void validate() const;
};

/// Midpoints closer than this to the query point count as perfectly collinear.
inline constexpr double kCoincidentDistance = 1e-9;

/// Mean squared cosine between each segment and the ray from c through its
/// midpoint. In [0, 1]; 1 when every segment points at c.
double cost(Point2 c, const LoSet& lo);

struct CostGradient {
  Point2 grad;
  bool singular = false;  // c coincides with a midpoint; those terms are left out
};

CostGradient cost_gradient(Point2 c, const LoSet& lo);

struct InitResult {
  Point2 c;
  bool fallback = false;  // rank-deficient normal equations, bbox center returned
};

/// Point minimizing the summed squared distance to the segments' supporting
/// lines, clamped to the region.
InitResult least_squares_init(const LoSet& lo, const BBox& region);

struct OptimizeResult {
  Point2 c;
  double value = 0.0;       // cost at c
  int iterations = 0;
  bool converged = false;   // step or gradient tolerance reached
  bool stalled = false;     // line search could not improve further
  bool underdetermined = false;
};

/// Box-constrained BFGS ascent of the cost from c_init. Deterministic; `seed`
/// drives the sub-pixel jitter used to step off singular points.
OptimizeResult optimize_center(const LoSet& lo, const BBox& region, Point2 c_init,
                               std::uint64_t seed = 0);

/// Segments whose midpoint lies in the square of side max(w, h) / r_f around c.
LoSet filter_lo_around(const LoSet& lo, Point2 c, double region_factor, int width, int height);

struct PithEstimate {
  Point2 working;   // working (resized) frame
  Point2 original;  // original image frame
  int iterations = 0;
  std::vector<Point2> trace;  // working-frame center after each iteration
  bool converged = false;
  double value = 0.0;         // cost at the final center over the last segment subset

  std::size_t segments_sampled = 0;
  std::size_t segments_used = 0;  // after PClines filtering, when enabled
  bool init_fallback = false;
  bool region_emptied = false;    // refinement square held no segment
  bool filter_fallback = false;   // PClines failed, unfiltered segments used
  bool outside_mask = false;      // final center is in the bbox but off the exact mask
};

/// Refinement loop: optimize over all segments, then repeatedly over the
/// segments around the current center until it moves less than eps or
/// max_iter is reached. Coordinates are in the frame of `mask`.
PithEstimate locate_pith(const LoSet& lo, const SliceMask& mask, const SolverParams& params,
                         std::uint64_t seed = 0);

/// JSON object `{image, pith_x, pith_y, frame: "original", iterations, converged}`.
std::string to_json(const PithEstimate& estimate, const std::string& image_name);

}  // namespace apd
