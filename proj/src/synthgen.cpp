#include "apd/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "apd/error.hpp"

namespace apd {

namespace {

constexpr double kPi = std::numbers::pi;

// Radius of the ring passing through offset q from the pith. Ring centers
// shift along +x by s(R) = e R^2 / R_outer inside the slice and continue
// linearly beyond it, so s' < 1 everywhere and the root is unique.
double ring_radius(Point2 q, double e, double r_outer) {
  const double r_q = norm(q);
  if (e == 0.0 || r_q == 0.0) return r_q;
  auto shift = [&](double r) {
    return r <= r_outer ? e * r * r / r_outer : e * (2.0 * r - r_outer);
  };
  auto g = [&](double r) { return std::hypot(q.x - shift(r), q.y) - r; };
  double lo = 0.0;
  double hi = r_q / (1.0 - 2.0 * e) + 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Plane blurred_noise(int width, int height, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Plane noise(width, height);
  for (double& v : noise.values()) v = n01(rng);
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  for (int i = -r; i <= r; ++i) k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  const double ksum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= ksum;
  Plane tmp(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * noise.clamped(x + i, y);
      tmp(x, y) = acc;
    }
  double sq = 0.0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.clamped(x, y + i);
      noise(x, y) = acc;
      sq += acc * acc;
    }
  const double scale = 1.0 / std::sqrt(sq / static_cast<double>(noise.size()));
  for (double& v : noise.values()) v *= scale;
  return noise;
}

}  // namespace

void WebSpec::validate() const {
  if (width < 3 || height < 3) throw InvalidInput("web image must be at least 3x3");
  if (!(center.x >= 0 && center.y >= 0 && center.x <= width - 1 && center.y <= height - 1))
    throw InvalidInput("web center must lie inside the image");
  if (n_rings < 1) throw InvalidInput("n_rings must be at least 1");
  if (!(ring_spacing >= 2.0)) throw InvalidInput("ring_spacing must be at least 2 pixels");
  if (n_rays < 0) throw InvalidInput("n_rays must be non-negative");
  if (!(eccentricity >= 0.0 && eccentricity < 0.5))
    throw InvalidInput("eccentricity must be in [0, 0.5)");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("noise_sigma must be non-negative");
  if (!(degraded_radius >= 0.0) || !(degraded_sigma >= 0.0))
    throw InvalidInput("degradation parameters must be non-negative");
}

SyntheticWeb generate_web(const WebSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const double r_outer = spec.outer_radius();

  std::vector<double> ray_angles;
  if (spec.n_rays > 0) {
    std::uniform_real_distribution<double> start(0.0, 2.0 * kPi / spec.n_rays);
    const double a0 = start(rng);
    for (int i = 0; i < spec.n_rays; ++i) ray_angles.push_back(a0 + 2.0 * kPi * i / spec.n_rays);
  }

  Plane intensity(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const Point2 q = Point2{double(x), double(y)} - spec.center;
      const double r = ring_radius(q, spec.eccentricity, r_outer);
      intensity(x, y) = 0.5 + 0.35 * std::cos(2.0 * kPi * r / spec.ring_spacing);
    }
  }

  if (spec.degraded_radius > 0.0) {
    const Plane blobs = blurred_noise(spec.width, spec.height, 1.5, rng);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        const Point2 q = Point2{double(x), double(y)} - spec.center;
        if (norm(q) <= spec.degraded_radius)
          intensity(x, y) = 0.5 + spec.degraded_sigma * blobs(x, y);
      }
  }

  if (!ray_angles.empty()) {
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        const Point2 q = Point2{double(x), double(y)} - spec.center;
        double dist = std::numeric_limits<double>::infinity();
        for (double a : ray_angles) {
          const Point2 u{std::cos(a), std::sin(a)};
          if (dot(q, u) < 0.0) continue;
          dist = std::min(dist, std::abs(cross(u, q)));
        }
        const double w = spec.ray_width;
        if (dist < 4.0 * w) intensity(x, y) *= 1.0 - 0.8 * std::exp(-0.5 * dist * dist / (w * w));
      }
  }

  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
  RgbImage image(spec.width, spec.height);
  Grid<std::uint8_t> inside(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double v = intensity(x, y);
      if (spec.noise_sigma > 0.0) v += noise(rng);
      const auto level = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      std::uint8_t* px = image.at(x, y);
      px[0] = px[1] = px[2] = level;
      const Point2 q = Point2{double(x), double(y)} - spec.center;
      inside(x, y) = dot(q, q) <= r_outer * r_outer ? 1 : 0;
    }
  }
  return {std::move(image), SliceMask(std::move(inside)), spec.center};
}

void LoSpec::validate() const {
  if (n_segments < 0) throw InvalidInput("n_segments must be non-negative");
  if (!(r_inner >= 0.0 && r_outer > r_inner)) throw InvalidInput("annulus radii must satisfy 0 <= r_inner < r_outer");
  if (!(radial_noise_sigma >= 0.0)) throw InvalidInput("radial_noise_sigma must be non-negative");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0))
    throw InvalidInput("outlier_fraction must be in [0, 1)");
}

SyntheticLo generate_lo(const LoSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);

  const auto n = static_cast<std::size_t>(spec.n_segments);
  const auto n_out = static_cast<std::size_t>(std::lround(spec.outlier_fraction * spec.n_segments));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> outlier(n, false);
  for (std::size_t i = 0; i < n_out; ++i) outlier[order[i]] = true;

  SyntheticLo out;
  out.center = spec.center;
  out.outlier = outlier;
  out.lo.reserve(n);
  const double r2_lo = spec.r_inner * spec.r_inner;
  const double r2_hi = spec.r_outer * spec.r_outer;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::sqrt(r2_lo + unit(rng) * (r2_hi - r2_lo));
    const double phi = 2.0 * kPi * unit(rng);
    const Point2 mid = spec.center + Point2{r * std::cos(phi), r * std::sin(phi)};
    double alpha = phi + (spec.tangential ? kPi / 2 : 0.0) + spec.radial_noise_sigma * n01(rng);
    const double random_alpha = kPi * unit(rng);
    if (outlier[i]) alpha = random_alpha;
    out.lo.push_back(make_segment(mid, alpha));
  }
  return out;
}

}  // namespace apd
