// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "apd/detector.hpp"
#include "apd/evalbench.hpp"
#include "apd/image_io.hpp"
#include "apd/pclines.hpp"
#include "apd/pith_solver.hpp"
#include "apd/structure_tensor.hpp"
#include "apd/synthgen.hpp"

namespace fs = std::filesystem;
using namespace apd;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  enum Status { kPass, kFail, kSkip } status;
  std::string detail;
};

Outcome check(bool ok, std::string detail) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double angle_diff_mod_pi(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kPi);
  return std::min(d, kPi - d);
}

double err_percent(Point2 p, const SyntheticWeb& web) {
  return normalized_error(p, web.center, web.mask);
}

// 1a ------------------------------------------------------------------------
Outcome cost_bounds() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> pos(0, 640), ang(0, kPi);
  std::uniform_int_distribution<int> count(1, 60);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 1000; ++i) {
    LoSet set;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) set.push_back(make_segment({pos(rng), pos(rng)}, ang(rng)));
    const double h = cost({pos(rng), pos(rng)}, set);
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    LoSpec spec;
    spec.center = {pos(rng), pos(rng)};
    spec.seed = seed;
    worst = std::max(worst, std::abs(1.0 - cost(spec.center, generate_lo(spec).lo)));
  }
  return check(lo >= 0.0 && hi <= 1.0 && worst <= 1e-12,
               fmt("h range [%.4f, %.4f] over 1000 configs; max |1 - h(center)| = %.1e over 50 radial sets",
                   lo, hi, worst));
}

// 1b ------------------------------------------------------------------------
Outcome gradient_check() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> pos(0, 640), ang(0, kPi);
  int checked = 0;
  double worst = 0.0;
  while (checked < 100) {
    LoSet set;
    for (int k = 0; k < 25; ++k) set.push_back(make_segment({pos(rng), pos(rng)}, ang(rng)));
    const Point2 c{pos(rng), pos(rng)};
    bool clear = true;
    for (const auto& s : set) clear = clear && distance(c, s.mid) > 5.0;
    if (!clear) continue;
    const double h = 1e-4;
    const Point2 fd{(cost({c.x + h, c.y}, set) - cost({c.x - h, c.y}, set)) / (2 * h),
                    (cost({c.x, c.y + h}, set) - cost({c.x, c.y - h}, set)) / (2 * h)};
    const CostGradient g = cost_gradient(c, set);
    if (g.singular || norm(fd) < 1e-8) continue;
    worst = std::max(worst, norm(g.grad - fd) / norm(fd));
    ++checked;
  }
  return check(worst < 1e-4, fmt("max relative error %.2e over %d configs", worst, checked));
}

// 1c ------------------------------------------------------------------------
DualPoint dual_of(Point2 a, Point2 b, double d) {
  LoSegment s;
  s.p1 = a;
  s.p2 = b;
  s.mid = 0.5 * (a + b);
  return line_to_dual(s, 1, 1, d);
}

Outcome duality() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> unit(0.0, 1.0), ang(0.0, kPi);
  double worst_collinear = 0.0;
  for (int bundle = 0; bundle < 50; ++bundle) {
    const Point2 c{unit(rng), unit(rng)};
    const double d = 0.5 + unit(rng);
    for (int k = 0; k < 12; ++k) {
      const double t = ang(rng);
      const Point2 dir{std::cos(t), std::sin(t)};
      const DualPoint p = dual_of(c - dir, c + 0.5 * dir, d);
      // Lines through c lie on v = cx + u (cy -/+ cx) / d in the straight/twisted space.
      const double expected = p.space == DualSpace::kStraight ? c.x + p.u * (c.y - c.x) / d
                                                              : c.x + p.u * (c.y + c.x) / d;
      worst_collinear = std::max(worst_collinear, std::abs(p.v - expected));
    }
  }
  double worst_round_trip = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double m = std::tan(ang(rng) * 0.98 - 0.49 * kPi);  // slopes within about [-30, 30]
    const double b0 = unit(rng) - 0.5;
    const HomogeneousLine l = dual_to_line(dual_of({0.2, b0 + 0.2 * m}, {0.7, b0 + 0.7 * m}, 1.0), 1.0);
    worst_round_trip = std::max({worst_round_trip, std::abs(-l.a / l.b - m), std::abs(-l.c / l.b - b0)});
  }
  return check(worst_collinear < 1e-9 && worst_round_trip < 1e-9,
               fmt("collinearity residual %.1e over 50 bundles; slope-intercept round trip %.1e",
                   worst_collinear, worst_round_trip));
}

// 1d ------------------------------------------------------------------------
Outcome ransac_recovery() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const PclinesParams params;
  double worst_recall = 1.0;
  std::size_t admitted = 0;
  for (int trial = 0; trial < 20; ++trial) {
    // Bundle of 70 lines through c with slopes m <= 0, all in the straight space.
    const Point2 c{0.3 + 0.4 * unit(rng), 0.3 + 0.4 * unit(rng)};
    std::vector<DualPoint> pts;
    for (int k = 0; k < 70; ++k) {
      const double t = kPi / 2 + (kPi / 2) * (0.02 + 0.96 * unit(rng));
      const Point2 dir{std::cos(t), std::sin(t)};
      pts.push_back(dual_of(c - dir, c + dir, params.d));
    }
    // 30 outlier lines whose dual points sit at least 10x the threshold off the bundle line.
    const double slope = c.y - c.x;  // v = cx + u (cy - cx)
    const double norm_factor = std::hypot(1.0, slope);
    while (pts.size() < 100) {
      const DualPoint q{DualSpace::kStraight, unit(rng), -1.0 + 3.0 * unit(rng), 0};
      if (std::abs(q.v - c.x - slope * q.u) / norm_factor < 10 * params.outlier_th) continue;
      const HomogeneousLine l = dual_to_line(q, params.d);
      // Two points of the primal line, mapped back through the real transform.
      const Point2 n{l.a, l.b};
      const Point2 p0 = (-l.c / dot(n, n)) * n;
      const Point2 dir{-l.b, l.a};
      pts.push_back(dual_of(p0, p0 + dir, params.d));
    }
    PclinesParams p = params;
    p.seed = static_cast<std::uint64_t>(trial);
    std::size_t recovered = 0;
    for (std::size_t k : ransac_line_cluster(pts, p)) (k < 70 ? recovered : admitted)++;
    worst_recall = std::min(worst_recall, recovered / 70.0);
  }
  return check(worst_recall >= 0.95 && admitted == 0,
               fmt("worst bundle recall %.3f over 20 trials; outliers admitted %zu", worst_recall, admitted));
}

// 1e ------------------------------------------------------------------------
Outcome calibration() {
  const SyntheticWeb web = generate_web(WebSpec{});
  const Preprocessed pre = preprocess(web.image, SliceMask::full(web.image.width(), web.image.height()));
  const OrientationField of = local_orientation(pre.field, StParams{});
  const LoSet lo = sample_lo(of.angle, of.coherence, pre.mask, LoSamplerParams{});
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : lo) {
    if (s.coherence <= 0.9) continue;
    const Point2 q = s.mid - web.center;
    sum += angle_diff_mod_pi(s.alpha, std::atan2(q.y, q.x));
    ++n;
  }
  const double mean = n ? sum / n : kPi;
  return check(n > 0 && mean < 0.05, fmt("mean deviation %.4f rad over %zu segments", mean, n));
}

// 2 -------------------------------------------------------------------------
WebSpec degraded_spec(std::uint64_t seed) {
  WebSpec spec;
  spec.noise_sigma = 0.05;
  spec.n_rays = 4;
  spec.ray_width = 2.0;
  spec.degraded_radius = 70;
  spec.seed = seed;
  return spec;
}

Outcome synthetic_end_to_end() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> shift(-40.0, 40.0);
  double worst_clean = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    WebSpec spec;
    spec.center = {320 + shift(rng), 320 + shift(rng)};
    spec.seed = seed;
    const SyntheticWeb web = generate_web(spec);
    worst_clean = std::max(worst_clean, err_percent(detect_pith_apd(web.image, web.mask).original, web));
  }
  WebSpec ecc;
  ecc.eccentricity = 0.3;
  const SyntheticWeb ecc_web = generate_web(ecc);
  const double ecc_err = err_percent(detect_pith_apd(ecc_web.image, ecc_web.mask).original, ecc_web);

  double apd = 0.0, pcl = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticWeb web = generate_web(degraded_spec(seed));
    apd += err_percent(detect_pith_apd(web.image, web.mask).original, web) / 10;
    pcl += err_percent(detect_pith_apd_pcl(web.image, web.mask).original, web) / 10;
  }
  return check(worst_clean < 1.0 && ecc_err < 2.0 && pcl < apd,
               fmt("clean worst %.3f%% (20 webs); eccentric %.3f%%; degraded mean APD %.2f%% vs APD-PCL %.2f%%",
                   worst_clean, ecc_err, apd, pcl));
}

// 3 -------------------------------------------------------------------------
Outcome dataset_reproduction() {
  const char* env = std::getenv("APD_DATASETS");
  if (!env || !fs::exists(env))
    return {Outcome::kSkip, "set APD_DATASETS to a `name = manifest.csv` collections file to run"};
  const auto manifests = load_collections(env);
  const EvalResult r = evaluate(manifests, Method::kApd, DetectorParams::apd());
  const std::vector<std::pair<std::string, double>> targets{{"Kennel", 0.25}, {"Forest", 0.40}, {"Logyard", 0.60}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, target] : targets) {
    const auto row = std::find_if(r.metrics.rows.begin(), r.metrics.rows.end(),
                                  [&](const CollectionMetrics& m) { return m.collection == name; });
    if (row == r.metrics.rows.end()) {
      detail += name + ": absent; ";
      continue;
    }
    const bool pass = row->mean <= target;
    ok = ok && pass;
    detail += fmt("%s mean %.3f (target <= %.2f); ", name.c_str(), row->mean, target);
    if (!pass)
      for (const auto& rec : r.records)
        if (rec.collection == name)
          std::printf("    %s/%s err %.3f pred (%.1f, %.1f) gt (%.1f, %.1f)%s\n", name.c_str(),
                      rec.image_id.c_str(), rec.err, rec.prediction.x, rec.prediction.y, rec.gt.x,
                      rec.gt.y, rec.failed ? " failed" : "");
  }
  return check(ok, detail);
}

// 4 -------------------------------------------------------------------------
Outcome runtime() {
  double apd_ms = 0.0, pcl_ms = 0.0;
  const int n = 10;
  for (int i = 0; i < n; ++i) {
    WebSpec spec;
    spec.noise_sigma = 0.05;
    spec.n_rays = 4;
    spec.seed = static_cast<std::uint64_t>(i);
    const SyntheticWeb web = generate_web(spec);
    auto time_ms = [&](auto&& fn) {
      const auto t0 = std::chrono::steady_clock::now();
      fn();
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    };
    apd_ms += time_ms([&] { detect_pith_apd(web.image, web.mask); }) / n;
    pcl_ms += time_ms([&] { detect_pith_apd_pcl(web.image, web.mask); }) / n;
  }
  return check(apd_ms <= 2000.0 && pcl_ms <= 3.0 * apd_ms,
               fmt("APD mean %.1f ms; APD-PCL mean %.1f ms (%.2fx) on 640x640", apd_ms, pcl_ms, pcl_ms / apd_ms));
}

// 5 -------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "apd_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "manifest.csv");
    csv.precision(17);
    csv << "image,mask,gt_x,gt_y\n";
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const SyntheticWeb web = generate_web(degraded_spec(seed));
      const std::string stem = "web" + std::to_string(seed);
      write_png(web.image, dir / (stem + ".png"));
      write_mask_png(web.mask, dir / (stem + "_mask.png"));
      csv << stem << ".png," << stem << "_mask.png," << web.center.x << ',' << web.center.y << '\n';
    }
  }
  const auto manifest = load_manifest(dir / "manifest.csv", "Synthetic");
  bool same = true;
  for (Method method : {Method::kApd, Method::kApdPcl}) {
    for (int run = 0; run < 2; ++run) {
      const EvalResult r = evaluate({manifest}, method, DetectorParams::defaults(method), run + 1);
      const fs::path out = dir / ("run" + std::to_string(run));
      fs::create_directories(out);
      write_metrics_csv(r.metrics, out / "metrics.csv");
      write_metrics_json(r.metrics, out / "metrics.json");
      write_records_csv(r.records, out / "records.csv");
    }
    for (const char* f : {"metrics.csv", "metrics.json", "records.csv"})
      same = same && slurp(dir / "run0" / f) == slurp(dir / "run1" / f) && !slurp(dir / "run0" / f).empty();
  }
  fs::remove_all(dir);
  return check(same, "metrics.csv, metrics.json, records.csv identical across runs for both methods");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1a cost bounds and optimality", cost_bounds},
      {"1b gradient check", gradient_check},
      {"1c PClines duality", duality},
      {"1d RANSAC recovery", ransac_recovery},
      {"1e structure-tensor calibration", calibration},
      {"2  synthetic end-to-end", synthetic_end_to_end},
      {"3  dataset reproduction", dataset_reproduction},
      {"4  runtime", runtime},
      {"5  determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kFail ? "FAIL" : "SKIP";
    if (o.status == Outcome::kFail) ++failures;
    std::printf("%s  %-34s %s [%.1f s]\n", tag, name.c_str(), o.detail.c_str(), s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
