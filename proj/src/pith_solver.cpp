#include "apd/pith_solver.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "apd/error.hpp"

namespace apd {

namespace {

constexpr int kMaxOptimizerIterations = 500;
constexpr double kStepTolerance = 1e-8;
constexpr double kGradientTolerance = 1e-10;
constexpr double kArmijo = 1e-4;
constexpr double kJitter = 1e-6;

// Inverse-Hessian approximation, symmetric 2x2.
struct Sym2 {
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;

  Point2 apply(Point2 v) const { return {a * v.x + b * v.y, b * v.x + c * v.y}; }
};

Sym2 bfgs_update(const Sym2& h, Point2 s, Point2 y) {
  const double rho = 1.0 / dot(s, y);
  const Point2 hy = h.apply(y);
  const double yhy = dot(y, hy);
  // H+ = H - rho (s hy' + hy s') + (rho^2 y'Hy + rho) s s'
  const double k = rho * rho * yhy + rho;
  return {h.a - rho * 2.0 * s.x * hy.x + k * s.x * s.x,
          h.b - rho * (s.x * hy.y + hy.x * s.y) + k * s.x * s.y,
          h.c - rho * 2.0 * s.y * hy.y + k * s.y * s.y};
}

bool at_lower(double v, int bound) { return v <= bound; }
bool at_upper(double v, int bound) { return v >= bound; }

// Zeroes components that would leave the box from an active bound.
Point2 project_direction(Point2 p, Point2 x, const BBox& box) {
  if ((at_lower(x.x, box.x_min) && p.x < 0) || (at_upper(x.x, box.x_max) && p.x > 0)) p.x = 0;
  if ((at_lower(x.y, box.y_min) && p.y < 0) || (at_upper(x.y, box.y_max) && p.y > 0)) p.y = 0;
  return p;
}

}  // namespace

void SolverParams::validate() const {
  if (!(region_factor > 1.0)) throw InvalidInput("r_f must be greater than 1");
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  if (max_iter < 1) throw InvalidInput("max_iter must be at least 1");
}

double cost(Point2 c, const LoSet& lo) {
  if (lo.empty()) throw InvalidInput("cost of an empty segment set");
  double sum = 0.0;
  for (const auto& s : lo) {
    const Point2 v = s.mid - c;
    const Point2 d = s.direction();
    const double vv = dot(v, v);
    if (vv < kCoincidentDistance * kCoincidentDistance) {
      sum += 1.0;
      continue;
    }
    const double vd = dot(v, d);
    sum += (vd * vd) / (vv * dot(d, d));
  }
  return sum / static_cast<double>(lo.size());
}

CostGradient cost_gradient(Point2 c, const LoSet& lo) {
  if (lo.empty()) throw InvalidInput("gradient of an empty segment set");
  CostGradient out;
  Point2 g;
  for (const auto& s : lo) {
    const Point2 v = s.mid - c;
    const double vv = dot(v, v);
    if (vv < kCoincidentDistance * kCoincidentDistance) {
      out.singular = true;
      continue;
    }
    const Point2 d = s.direction();
    const Point2 u = d * (1.0 / norm(d));
    const double vu = dot(v, u);
    // d/dv of (v.u)^2 / |v|^2; c enters through v = mid - c.
    const Point2 dv = u * (2.0 * vu / vv) - v * (2.0 * vu * vu / (vv * vv));
    g = g - dv;
  }
  out.grad = g * (1.0 / static_cast<double>(lo.size()));
  return out;
}

InitResult least_squares_init(const LoSet& lo, const BBox& region) {
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (const auto& s : lo) {
    const Point2 d = s.direction();
    const double len = norm(d);
    if (len == 0.0) continue;
    const Point2 n{-d.y / len, d.x / len};
    const double np = dot(n, s.mid);
    a11 += n.x * n.x;
    a12 += n.x * n.y;
    a22 += n.y * n.y;
    b1 += n.x * np;
    b2 += n.y * np;
  }
  const double det = a11 * a22 - a12 * a12;
  const double trace = a11 + a22;
  if (lo.size() < 2 || !(det > 1e-10 * trace * trace)) return {region.center(), true};
  const Point2 c{(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
  return {region.clamp(c), false};
}

OptimizeResult optimize_center(const LoSet& lo, const BBox& region, Point2 c_init,
                               std::uint64_t seed) {
  if (lo.empty()) throw InvalidInput("cannot optimize over an empty segment set");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> turn(0.0, 2.0 * std::numbers::pi);

  OptimizeResult result;
  result.underdetermined = lo.size() == 1;

  // Work on f = -cost so that the loop is a minimization.
  struct Sample {
    Point2 x;
    double f;
    Point2 g;
  };
  auto evaluate = [&](Point2 x) {
    for (int attempt = 0;; ++attempt) {
      const CostGradient cg = cost_gradient(x, lo);
      if (!cg.singular || attempt == 8) return Sample{x, -cost(x, lo), cg.grad * -1.0};
      const double t = turn(rng);
      x = region.clamp(x + Point2{std::cos(t), std::sin(t)} * kJitter);
    }
  };

  Sample cur = evaluate(region.clamp(c_init));
  Sym2 h;
  bool fresh = true;      // h is the identity
  bool scaled = false;    // initial Shanno scaling applied

  for (int it = 0; it < kMaxOptimizerIterations; ++it) {
    result.iterations = it + 1;
    const Point2 pg = project_direction(cur.g * -1.0, cur.x, region);
    if (norm(pg) < kGradientTolerance) {
      result.converged = true;
      break;
    }
    Point2 p = project_direction(h.apply(cur.g) * -1.0, cur.x, region);
    if (dot(p, cur.g) >= 0.0 || norm(p) == 0.0) {
      h = Sym2{};
      fresh = true;
      p = pg;
    }
    // Without curvature information take a first step of one pixel.
    if (!scaled) p = p * (1.0 / norm(p));

    double alpha = 1.0;
    Sample next{};
    bool accepted = false;
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      const Point2 xn = region.clamp(cur.x + p * alpha);
      const Point2 s = xn - cur.x;
      if (norm(s) == 0.0) break;
      next = evaluate(xn);
      if (next.f <= cur.f + kArmijo * dot(cur.g, next.x - cur.x)) {
        accepted = true;
        break;
      }
    }
    if (accepted && alpha == 1.0) {
      for (int k = 0; k < 10; ++k) {
        alpha *= 2.0;
        const Point2 xn = region.clamp(cur.x + p * alpha);
        if (xn == next.x) break;
        Sample wider = evaluate(xn);
        if (!(wider.f < next.f)) break;
        next = wider;
      }
    }
    if (!accepted) {
      if (!fresh) {
        h = Sym2{};
        fresh = true;
        scaled = false;
        continue;
      }
      result.stalled = true;
      break;
    }

    const Point2 s = next.x - cur.x;
    const Point2 y = next.g - cur.g;
    cur = next;
    if (norm(s) < kStepTolerance) {
      result.converged = true;
      break;
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * norm(s) * norm(y)) {
      if (!scaled) {
        const double gamma = sy / dot(y, y);
        h = Sym2{gamma, 0.0, gamma};
        scaled = true;
      }
      h = bfgs_update(h, s, y);
      fresh = false;
    }
  }
  result.c = cur.x;
  result.value = -cur.f;
  return result;
}

LoSet filter_lo_around(const LoSet& lo, Point2 c, double region_factor, int width, int height) {
  if (!(region_factor > 1.0)) throw InvalidInput("r_f must be greater than 1");
  const double half = 0.5 * std::max(width, height) / region_factor;
  LoSet out;
  for (const auto& s : lo) {
    if (std::abs(s.mid.x - c.x) <= half && std::abs(s.mid.y - c.y) <= half) out.push_back(s);
  }
  return out;
}

PithEstimate locate_pith(const LoSet& lo, const SliceMask& mask, const SolverParams& params,
                         std::uint64_t seed) {
  params.validate();
  if (lo.empty()) throw DetectionFailed("no local orientation to accumulate");
  const BBox& region = mask.bbox();

  PithEstimate est;
  est.segments_sampled = lo.size();
  est.segments_used = lo.size();
  LoSet subset = lo;
  Point2 center;
  for (int i = 1; i <= params.max_iter; ++i) {
    if (i > 1) {
      LoSet around = filter_lo_around(lo, center, params.region_factor, mask.width(), mask.height());
      if (around.empty()) {
        est.region_emptied = true;
        break;
      }
      subset = std::move(around);
    }
    const InitResult init = least_squares_init(subset, region);
    est.init_fallback = est.init_fallback || init.fallback;
    const OptimizeResult opt = optimize_center(subset, region, init.c, seed + i);
    est.trace.push_back(opt.c);
    est.iterations = i;
    est.value = opt.value;
    // The first pass has no previous center to compare against.
    const bool settled = i > 1 && distance(opt.c, center) < params.eps;
    center = opt.c;
    if (settled) {
      est.converged = true;
      break;
    }
  }
  est.working = center;
  est.original = center;
  est.outside_mask = !mask.contains(center);
  return est;
}

std::string to_json(const PithEstimate& estimate, const std::string& image_name) {
  nlohmann::ordered_json j;
  j["image"] = image_name;
  j["pith_x"] = estimate.original.x;
  j["pith_y"] = estimate.original.y;
  j["frame"] = "original";
  j["iterations"] = estimate.iterations;
  j["converged"] = estimate.converged;
  return j.dump();
}

}  // namespace apd
