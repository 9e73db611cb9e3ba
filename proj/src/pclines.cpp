#include "apd/pclines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "apd/error.hpp"

namespace apd {

namespace {

struct LineModel {
  double nu = 0.0;  // unit normal
  double nv = 0.0;
  double offset = 0.0;

  double residual(const DualPoint& p) const { return std::abs(nu * p.u + nv * p.v - offset); }
};

bool fit_pair(const DualPoint& a, const DualPoint& b, LineModel& model) {
  const double du = b.u - a.u;
  const double dv = b.v - a.v;
  const double len = std::hypot(du, dv);
  if (len == 0.0) return false;
  model.nu = -dv / len;
  model.nv = du / len;
  model.offset = model.nu * a.u + model.nv * a.v;
  return true;
}

// Mixes the run seed with a stream tag so each RANSAC call draws independently.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> select_with_streams(const LoSet& lo, int width, int height,
                                             const PclinesParams& params, std::uint64_t pass) {
  std::vector<DualPoint> straight;
  std::vector<DualPoint> twisted;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const DualPoint p = line_to_dual(lo[i], width, height, params.d, i);
    (p.space == DualSpace::kStraight ? straight : twisted).push_back(p);
  }
  PclinesParams sp = params;
  sp.seed = stream_seed(params.seed, 2 * pass);
  PclinesParams tp = params;
  tp.seed = stream_seed(params.seed, 2 * pass + 1);

  std::vector<std::size_t> a;
  for (std::size_t k : ransac_line_cluster(straight, sp)) a.push_back(straight[k].source_index);
  std::vector<std::size_t> b;
  for (std::size_t k : ransac_line_cluster(twisted, tp)) b.push_back(twisted[k].source_index);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

void PclinesParams::validate() const {
  if (!(d > 0.0)) throw InvalidInput("d must be positive");
  if (!(outlier_th > 0.0)) throw InvalidInput("ransac_outlier_th must be positive");
  if (iterations < 1) throw InvalidInput("ransac_iters must be at least 1");
  if (min_inliers < 2) throw InvalidInput("ransac_min_inliers must be at least 2");
}

DualPoint line_to_dual(const LoSegment& seg, int width, int height, double d,
                       std::size_t source_index) {
  const double norm_len = std::max(width, height);
  const double x1 = seg.p1.x / norm_len, y1 = seg.p1.y / norm_len;
  const double x2 = seg.p2.x / norm_len, y2 = seg.p2.y / norm_len;
  const double a = y1 - y2;
  const double b = x2 - x1;
  const double c = x1 * y2 - x2 * y1;
  if (a == 0.0 && b == 0.0) throw InvalidInput("zero-length segment has no supporting line");

  DualPoint p;
  p.source_index = source_index;
  // Slope m = -a/b; m <= 0 exactly when a and b do not have opposite signs.
  if (a * b >= 0.0) {
    p.space = DualSpace::kStraight;
    p.u = d * b / (a + b);
    p.v = -c / (a + b);
  } else {
    p.space = DualSpace::kTwisted;
    p.u = -d * b / (b - a);
    p.v = c / (b - a);
  }
  return p;
}

HomogeneousLine dual_to_line(const DualPoint& p, double d) {
  if (p.space == DualSpace::kStraight) return {p.u - d, -p.u, p.v * d};
  return {p.u + d, p.u, -p.v * d};
}

std::vector<std::size_t> ransac_line_cluster(std::span<const DualPoint> points,
                                             const PclinesParams& params) {
  params.validate();
  const std::size_t n = points.size();
  if (n < 2) return {};

  std::size_t best_count = 0;
  double best_sum = 0.0;
  LineModel best{};
  auto score = [&](const LineModel& m) {
    std::size_t count = 0;
    double sum = 0.0;
    for (const auto& p : points) {
      const double r = m.residual(p);
      if (r <= params.outlier_th) {
        ++count;
        sum += r;
      }
    }
    if (count > best_count || (count == best_count && count > 0 && sum < best_sum)) {
      best_count = count;
      best_sum = sum;
      best = m;
    }
  };

  const std::size_t pairs = n * (n - 1) / 2;
  LineModel model;
  if (pairs <= static_cast<std::size_t>(params.iterations)) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (fit_pair(points[i], points[j], model)) score(model);
  } else {
    std::mt19937_64 rng(params.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int it = 0; it < params.iterations; ++it) {
      const std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      while (j == i) j = pick(rng);
      if (fit_pair(points[i], points[j], model)) score(model);
    }
  }

  if (best_count < static_cast<std::size_t>(params.min_inliers)) return {};
  std::vector<std::size_t> inliers;
  for (std::size_t k = 0; k < n; ++k)
    if (best.residual(points[k]) <= params.outlier_th) inliers.push_back(k);
  return inliers;
}

std::vector<std::size_t> select_converging(const LoSet& lo, int width, int height,
                                           const PclinesParams& params) {
  params.validate();
  return select_with_streams(lo, width, height, params, 0);
}

LoSet rotate_lo_90(const LoSet& lo) {
  LoSet out;
  out.reserve(lo.size());
  for (const auto& s : lo) out.push_back(make_segment(s.mid, s.alpha + std::numbers::pi / 2, s.coherence));
  return out;
}

LoSet pclines_filter(const LoSet& lo, int width, int height, const PclinesParams& params) {
  params.validate();
  if (lo.empty()) throw FilteringFailed("no segment to filter");
  const LoSet rotated = rotate_lo_90(lo);

  LoSet combined;
  for (std::size_t i : select_with_streams(lo, width, height, params, 0)) combined.push_back(lo[i]);
  for (std::size_t i : select_with_streams(rotated, width, height, params, 1))
    combined.push_back(rotated[i]);
  if (combined.empty()) throw FilteringFailed("no converging segment found");

  LoSet out;
  for (std::size_t i : select_with_streams(combined, width, height, params, 2))
    out.push_back(combined[i]);
  if (out.empty()) throw FilteringFailed("no converging segment after the final pass");
  return out;
}

void write_dual_csv(const LoSet& lo, int width, int height, const PclinesParams& params,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  const auto selected = select_converging(lo, width, height, params);
  out.precision(17);
  out << "source,space,u,v,inlier\n";
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const DualPoint p = line_to_dual(lo[i], width, height, params.d, i);
    const bool inlier = std::binary_search(selected.begin(), selected.end(), i);
    out << i << ',' << (p.space == DualSpace::kStraight ? "straight" : "twisted") << ','
        << p.u << ',' << p.v << ',' << (inlier ? 1 : 0) << '\n';
  }
}

}  // namespace apd
