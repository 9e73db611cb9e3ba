#pragma once

#include <cstdint>
#include <vector>

#include "apd/geometry.hpp"
#include "apd/image.hpp"
#include "apd/lo_sampler.hpp"

namespace apd {

/// Synthetic cross-section: concentric sinusoidal rings around a pith, optional
/// dark radial rays (cracks), optional structured noise replacing the rings
/// near the pith, and additive pixel noise.
struct WebSpec {
  int width = 640;
  int height = 640;
  Point2 center{320.0, 300.0};
  int n_rings = 15;
  double ring_spacing = 18.0;  // pixels between ring crests
  int n_rays = 0;
  double ray_width = 1.2;  // Gaussian profile sigma of a ray, pixels
  // Ring of radius R is centered at center + (e * R^2 / R_outer, 0): rings
  // stay nested for e < 0.5 and crowd together on the -x side.
  double eccentricity = 0.0;
  double noise_sigma = 0.0;       // intensity units, image in [0, 1]
  double degraded_radius = 0.0;   // pixels; 0 disables the central degradation
  double degraded_sigma = 0.25;   // contrast of the structured noise
  std::uint64_t seed = 0;

  double outer_radius() const { return n_rings * ring_spacing; }
  void validate() const;
};

struct SyntheticWeb {
  RgbImage image;
  SliceMask mask;  // disc of radius n_rings * ring_spacing
  Point2 center;
};

SyntheticWeb generate_web(const WebSpec& spec);

struct LoSpec {
  Point2 center{320.0, 320.0};
  int n_segments = 400;
  double r_inner = 20.0;
  double r_outer = 250.0;
  double radial_noise_sigma = 0.0;  // radians
  double outlier_fraction = 0.0;    // in [0, 1)
  bool tangential = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticLo {
  LoSet lo;
  Point2 center;
  std::vector<bool> outlier;  // per segment
};

/// Midpoints uniform over the annulus; directions radial (tangential in crack
/// mode) with Gaussian angular noise; a fixed share gets uniform directions.
SyntheticLo generate_lo(const LoSpec& spec);

}  // namespace apd
