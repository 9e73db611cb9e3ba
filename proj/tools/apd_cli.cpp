#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "apd/detector.hpp"
#include "apd/error.hpp"
#include "apd/evalbench.hpp"
#include "apd/image_io.hpp"
#include "apd/pclines.hpp"
#include "apd/synthgen.hpp"

namespace fs = std::filesystem;
using namespace apd;

namespace {

constexpr int kExitDetectionFailed = 1;
constexpr int kExitInvalidInput = 2;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

// Flat `key = value` file; blank lines and `#` comments ignored.
std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidInput(path.string() + ":" + std::to_string(number) + ": expected key = value");
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  if (!(in >> value) || !(in >> std::ws).eof())
    throw InvalidInput("invalid value '" + text + "' for " + key);
  return value;
}

// Parameter overrides in precedence order: method defaults, config file, flags.
struct ParamOverrides {
  std::string method = "apd";
  std::string config;
  std::optional<double> st_sigma;
  std::optional<int> st_w;
  std::optional<double> percent_lo;
  std::optional<int> lo_w;
  std::optional<double> r_f;
  std::optional<double> eps;
  std::optional<int> max_iter;
  std::optional<double> d;
  std::optional<double> ransac_outlier_th;
  std::optional<int> ransac_iters;
  std::optional<int> ransac_min_inliers;
  std::optional<std::uint64_t> seed;
  std::optional<int> working_width;

  void add_to(CLI::App& app) {
    const DetectorParams apd = DetectorParams::apd();
    const DetectorParams pcl = DetectorParams::apd_pcl();
    auto num = [](double v) {
      std::ostringstream s;
      s << v;
      return s.str();
    };
    app.add_option("--method", method, "Detector: apd or apd-pcl")
        ->check(CLI::IsMember({"apd", "apd-pcl"}))
        ->capture_default_str();
    app.add_option("--config", config, "Flat key = value file with parameter overrides");
    app.add_option("--st-sigma", st_sigma, "Structure tensor Gaussian sigma [default " + num(apd.st.sigma) + "]");
    app.add_option("--st-w", st_w,
                   "Structure tensor window, odd [default " + num(apd.st.window) + " for apd, " +
                       num(pcl.st.window) + " for apd-pcl]");
    app.add_option("--percent-lo", percent_lo,
                   "Fraction of foreground pixels passing the coherence gate [default " +
                       num(apd.lo.percent_lo) + "]");
    app.add_option("--lo-w", lo_w,
                   "Sampling patch side, odd [default " + num(apd.lo.window) + " for apd, " +
                       num(pcl.lo.window) + " for apd-pcl]");
    app.add_option("--r-f", r_f, "Refinement region factor [default " + num(apd.solver.region_factor) + "]");
    app.add_option("--eps", eps, "Convergence tolerance, pixels [default " + num(apd.solver.eps) + "]");
    app.add_option("--max-iter", max_iter, "Refinement iterations [default " + num(apd.solver.max_iter) + "]");
    app.add_option("--d", d, "PClines inter-axis distance [default " + num(apd.pcl.d) + "]");
    app.add_option("--ransac-outlier-th", ransac_outlier_th,
                   "RANSAC residual threshold, dual units [default " + num(apd.pcl.outlier_th) + "]");
    app.add_option("--ransac-iters", ransac_iters, "RANSAC iterations [default " + num(apd.pcl.iterations) + "]");
    app.add_option("--ransac-min-inliers", ransac_min_inliers,
                   "Minimum inliers for a cluster [default " + num(apd.pcl.min_inliers) + "]");
    app.add_option("--seed", seed, "Seed for RANSAC and solver jitter [default 0]");
    app.add_option("--working-width", working_width,
                   "Working image width, pixels [default " + num(apd.working_width) + "]");
  }

  Method selected_method() const { return parse_method(method); }

  DetectorParams resolve() const {
    DetectorParams p = DetectorParams::defaults(selected_method());
    if (!config.empty()) {
      for (const auto& [key, value] : read_key_values(config)) {
        if (key == "method") continue;
        apply(p, key, value);
      }
    }
    if (st_sigma) p.st.sigma = *st_sigma;
    if (st_w) p.st.window = *st_w;
    if (percent_lo) p.lo.percent_lo = *percent_lo;
    if (lo_w) p.lo.window = *lo_w;
    if (r_f) p.solver.region_factor = *r_f;
    if (eps) p.solver.eps = *eps;
    if (max_iter) p.solver.max_iter = *max_iter;
    if (d) p.pcl.d = *d;
    if (ransac_outlier_th) p.pcl.outlier_th = *ransac_outlier_th;
    if (ransac_iters) p.pcl.iterations = *ransac_iters;
    if (ransac_min_inliers) p.pcl.min_inliers = *ransac_min_inliers;
    if (seed) p.seed = *seed;
    if (working_width) p.working_width = *working_width;
    p.validate();
    return p;
  }

  static void apply(DetectorParams& p, const std::string& key, const std::string& v) {
    if (key == "st_sigma") p.st.sigma = parse_value<double>(key, v);
    else if (key == "st_w") p.st.window = parse_value<int>(key, v);
    else if (key == "percent_lo") p.lo.percent_lo = parse_value<double>(key, v);
    else if (key == "lo_w") p.lo.window = parse_value<int>(key, v);
    else if (key == "r_f") p.solver.region_factor = parse_value<double>(key, v);
    else if (key == "eps") p.solver.eps = parse_value<double>(key, v);
    else if (key == "max_iter") p.solver.max_iter = parse_value<int>(key, v);
    else if (key == "d") p.pcl.d = parse_value<double>(key, v);
    else if (key == "ransac_outlier_th") p.pcl.outlier_th = parse_value<double>(key, v);
    else if (key == "ransac_iters") p.pcl.iterations = parse_value<int>(key, v);
    else if (key == "ransac_min_inliers") p.pcl.min_inliers = parse_value<int>(key, v);
    else if (key == "seed") p.seed = parse_value<std::uint64_t>(key, v);
    else if (key == "working_width") p.working_width = parse_value<int>(key, v);
    else throw InvalidInput("unknown parameter '" + key + "'");
  }
};

struct DetectArgs {
  ParamOverrides params;
  std::string image;
  std::string mask;
  bool all_foreground = false;
  std::string overlay;
  std::string diagnostics;
  std::string output;
};

int run_detect(const DetectArgs& a) {
  const DetectorParams params = a.params.resolve();
  const Method method = a.params.selected_method();
  if (a.mask.empty() && !a.all_foreground)
    throw InvalidInput("no --mask given; pass --all-foreground if the slice fills the image");
  const RgbImage img = read_rgb(a.image);
  const SliceMask mask = a.mask.empty() ? SliceMask::full(img.width(), img.height()) : read_mask(a.mask);

  PithEstimate est;
  try {
    est = detect_pith(method, img, mask, params);
  } catch (const DetectionFailed& e) {
    std::cerr << "detection failed: " << e.what() << '\n';
    return kExitDetectionFailed;
  }

  const std::string json = to_json(est, fs::path(a.image).filename().string());
  std::cout << json << '\n';
  if (!a.output.empty()) std::ofstream(a.output) << json << '\n';
  if (!a.overlay.empty()) write_png(draw_markers(img, {{est.original, 255, 0, 0}}), a.overlay);

  if (!a.diagnostics.empty()) {
    const fs::path dir = a.diagnostics;
    fs::create_directories(dir);
    const Preprocessed pre = preprocess(img, mask, params.working_width);
    const LoSet lo = extract_lo(pre, params);
    write_lo_csv(lo, dir / "lo.csv");
    if (method == Method::kApdPcl && !lo.empty()) {
      PclinesParams pcl = params.pcl;
      pcl.seed = params.seed;
      write_dual_csv(lo, pre.field.width(), pre.field.height(), pcl, dir / "dual.csv");
    }
    nlohmann::ordered_json d;
    d["method"] = method_name(method);
    d["working_x"] = est.working.x;
    d["working_y"] = est.working.y;
    d["scale"] = pre.info.scale;
    d["segments_sampled"] = est.segments_sampled;
    d["segments_used"] = est.segments_used;
    d["value"] = est.value;
    d["init_fallback"] = est.init_fallback;
    d["region_emptied"] = est.region_emptied;
    d["filter_fallback"] = est.filter_fallback;
    d["outside_mask"] = est.outside_mask;
    auto& trace = d["trace"] = nlohmann::ordered_json::array();
    for (const Point2 p : est.trace) trace.push_back({p.x, p.y});
    std::ofstream(dir / "diagnostics.json") << d.dump(2) << '\n';
  }
  return 0;
}

struct EvalArgs {
  ParamOverrides params;
  std::vector<std::string> manifests;
  std::string collections;
  std::string out = ".";
  int workers = 1;
};

std::vector<DatasetManifest> load_inputs(const std::vector<std::string>& manifests,
                                         const std::string& collections) {
  std::vector<DatasetManifest> out;
  if (!collections.empty()) out = load_collections(collections);
  for (const auto& m : manifests) {
    if (!fs::exists(m)) throw InvalidInput("manifest not found: " + m);
    out.push_back(load_manifest(m, fs::path(m).stem().string()));
  }
  if (out.empty()) throw InvalidInput("no manifest given");
  return out;
}

void report_skipped(const std::vector<std::string>& skipped) {
  for (const auto& s : skipped) std::cerr << "skipped: " << s << '\n';
}

int run_eval(const EvalArgs& a) {
  const DetectorParams params = a.params.resolve();
  const auto manifests = load_inputs(a.manifests, a.collections);
  const EvalResult r = evaluate(manifests, a.params.selected_method(), params, a.workers);
  report_skipped(r.skipped);
  const fs::path out = a.out;
  fs::create_directories(out);
  write_metrics_csv(r.metrics, out / "metrics.csv");
  write_metrics_json(r.metrics, out / "metrics.json");
  write_records_csv(r.records, out / "records.csv");
  write_timing_csv(r, out / "timing.csv");
  std::printf("%-12s %6s %8s %8s %8s %8s %4s\n", "collection", "images", "mean", "std", "median",
              "max", "FN");
  for (const auto& m : r.metrics.rows)
    std::printf("%-12s %6zu %8.2f %8.2f %8.2f %8.2f %4zu\n", m.collection.c_str(), m.images,
                m.mean, m.std, m.median, m.max, m.false_negatives);
  return 0;
}

struct SynthArgs {
  std::string spec;
  std::string out = ".";
  std::string name = "web";
  std::string manifest;
  std::optional<std::uint64_t> seed;
};

WebSpec read_web_spec(const std::string& path) {
  WebSpec s;
  if (path.empty()) return s;
  for (const auto& [k, v] : read_key_values(path)) {
    if (k == "width") s.width = parse_value<int>(k, v);
    else if (k == "height") s.height = parse_value<int>(k, v);
    else if (k == "center_x") s.center.x = parse_value<double>(k, v);
    else if (k == "center_y") s.center.y = parse_value<double>(k, v);
    else if (k == "n_rings") s.n_rings = parse_value<int>(k, v);
    else if (k == "ring_spacing") s.ring_spacing = parse_value<double>(k, v);
    else if (k == "n_rays") s.n_rays = parse_value<int>(k, v);
    else if (k == "ray_width") s.ray_width = parse_value<double>(k, v);
    else if (k == "eccentricity") s.eccentricity = parse_value<double>(k, v);
    else if (k == "noise_sigma") s.noise_sigma = parse_value<double>(k, v);
    else if (k == "degraded_radius") s.degraded_radius = parse_value<double>(k, v);
    else if (k == "degraded_sigma") s.degraded_sigma = parse_value<double>(k, v);
    else if (k == "seed") s.seed = parse_value<std::uint64_t>(k, v);
    else throw InvalidInput("unknown synth key '" + k + "'");
  }
  return s;
}

int run_synth(const SynthArgs& a) {
  WebSpec spec = read_web_spec(a.spec);
  if (a.seed) spec.seed = *a.seed;
  const SyntheticWeb web = generate_web(spec);
  const fs::path out = a.out;
  fs::create_directories(out);
  const fs::path image = out / (a.name + ".png");
  const fs::path mask = out / (a.name + "_mask.png");
  write_png(web.image, image);
  write_mask_png(web.mask, mask);
  nlohmann::ordered_json gt;
  gt["image"] = image.filename().string();
  gt["mask"] = mask.filename().string();
  gt["pith_x"] = web.center.x;
  gt["pith_y"] = web.center.y;
  std::ofstream(out / (a.name + "_gt.json")) << gt.dump(2) << '\n';

  if (!a.manifest.empty()) {
    const bool fresh = !fs::exists(a.manifest);
    std::ofstream m(a.manifest, std::ios::app);
    if (!m) throw InvalidInput("cannot open " + a.manifest);
    const fs::path base = fs::absolute(fs::path(a.manifest)).parent_path();
    m.precision(17);
    if (fresh) m << "image,mask,gt_x,gt_y\n";
    m << fs::relative(fs::absolute(image), base).string() << ','
      << fs::relative(fs::absolute(mask), base).string() << ',' << web.center.x << ','
      << web.center.y << '\n';
  }
  std::cout << gt.dump() << '\n';
  return 0;
}

struct GridArgs {
  ParamOverrides params;
  std::vector<std::string> manifests;
  std::string collections;
  std::string grid;
  std::string out = ".";
  int workers = 1;
};

int run_gridsearch(const GridArgs& a) {
  const DetectorParams base = a.params.resolve();
  const auto manifests = load_inputs(a.manifests, a.collections);
  const ParamGrid grid = a.grid.empty() ? ParamGrid::standard() : load_grid(a.grid);
  const GridSearchResult r = grid_search(manifests, a.params.selected_method(), base, grid, a.workers);
  const fs::path out = a.out;
  fs::create_directories(out);
  write_grid_csv(r, out / "grid.csv");
  write_best_params(r, out / "best_params.txt");
  std::printf("best: percent_lo=%g st_w=%d lo_w=%d mean_distance=%.3f px\n", r.best.percent_lo,
              r.best.st_w, r.best.lo_w, r.best.mean_distance);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pith detection on wood cross-section images"};
  app.require_subcommand(1);

  DetectArgs detect;
  auto* det = app.add_subcommand("detect", "Locate the pith in one image and print JSON");
  det->add_option("image", detect.image, "Input image (PNG or JPEG)")->required()->check(CLI::ExistingFile);
  det->add_option("--mask", detect.mask, "Slice mask, nonzero = wood")->check(CLI::ExistingFile);
  det->add_flag("--all-foreground", detect.all_foreground, "Treat the whole image as the slice");
  det->add_option("--overlay", detect.overlay, "Write a PNG with the estimate marked");
  det->add_option("--diagnostics", detect.diagnostics,
                  "Directory for segment, dual-space and refinement diagnostics");
  det->add_option("--output", detect.output, "Also write the JSON result to this file");
  detect.params.add_to(*det);

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Evaluate a detector over dataset manifests");
  ev->add_option("manifests", eval.manifests, "Manifest CSV files (image,mask,gt_x,gt_y)");
  ev->add_option("--collections", eval.collections, "File of `name = manifest.csv` lines");
  ev->add_option("--out", eval.out, "Output directory")->capture_default_str();
  ev->add_option("--workers", eval.workers, "Parallel workers")->check(CLI::PositiveNumber)->capture_default_str();
  eval.params.add_to(*ev);

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic cross-section with its mask and pith");
  sy->add_option("spec", synth.spec, "Flat key = value web description (defaults when omitted)")
      ->check(CLI::ExistingFile);
  sy->add_option("--out", synth.out, "Output directory")->capture_default_str();
  sy->add_option("--name", synth.name, "File name stem")->capture_default_str();
  sy->add_option("--manifest", synth.manifest, "Append an entry to this manifest CSV");
  sy->add_option("--seed", synth.seed, "Override the spec seed");

  GridArgs grid;
  auto* gs = app.add_subcommand("gridsearch", "Exhaustive parameter search over manifests");
  gs->add_option("manifests", grid.manifests, "Manifest CSV files");
  gs->add_option("--collections", grid.collections, "File of `name = manifest.csv` lines");
  gs->add_option("--grid", grid.grid, "Grid file (percent_lo, st_w, lo_w lists)")->check(CLI::ExistingFile);
  gs->add_option("--out", grid.out, "Output directory")->capture_default_str();
  gs->add_option("--workers", grid.workers, "Parallel workers")->check(CLI::PositiveNumber)->capture_default_str();
  grid.params.add_to(*gs);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*det) return run_detect(detect);
    if (*ev) return run_eval(eval);
    if (*sy) return run_synth(synth);
    if (*gs) return run_gridsearch(grid);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }
  return 0;
}
