#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "apd/error.hpp"
#include "apd/evalbench.hpp"
#include "apd/image_io.hpp"
#include "apd/synthgen.hpp"

namespace apd {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Writes `count` noisy webs plus masks and a manifest; returns the manifest path.
fs::path write_web_set(const fs::path& dir, int count, int size = 640, double spacing = 18.0) {
  std::ofstream csv(dir / "manifest.csv");
  csv << "image,mask,gt_x,gt_y\n";
  for (int i = 0; i < count; ++i) {
    WebSpec spec;
    spec.width = spec.height = size;
    spec.ring_spacing = spacing;
    spec.center = {0.5 * size - 20 + 9 * i, 0.5 * size + 15 - 6 * i};
    spec.noise_sigma = 0.05;
    spec.seed = static_cast<std::uint64_t>(i);
    const SyntheticWeb web = generate_web(spec);
    const std::string stem = "web" + std::to_string(i);
    write_png(web.image, dir / (stem + ".png"));
    write_mask_png(web.mask, dir / (stem + "_mask.png"));
    csv << stem << ".png," << stem << "_mask.png," << web.center.x << ',' << web.center.y << '\n';
  }
  return dir / "manifest.csv";
}

SliceMask disc_mask(int w, int h, double cx, double cy, double r) {
  Grid<std::uint8_t> g(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      g(x, y) = std::hypot(x + 0.5 - cx, y + 0.5 - cy) <= r;
  return SliceMask(g);
}

TEST(EquivalentRadius, Examples) {
  EXPECT_DOUBLE_EQ(equivalent_radius(SliceMask::full(640, 480)), 320.0);
  EXPECT_DOUBLE_EQ(equivalent_radius(disc_mask(400, 400, 200, 200, 100)), 100.0);
  Grid<std::uint8_t> g(600, 600);
  for (int y = 50; y < 550; ++y)
    for (int x = 100; x < 400; ++x) g(x, y) = 1;
  EXPECT_DOUBLE_EQ(equivalent_radius(SliceMask(g)), 250.0);
}

TEST(NormalizedError, Examples) {
  const SliceMask m = SliceMask::full(640, 480);
  EXPECT_DOUBLE_EQ(normalized_error({10, 10}, {10, 10}, m), 0.0);
  EXPECT_DOUBLE_EQ(normalized_error({16, 10}, {10, 18}, m), 3.125);
  EXPECT_DOUBLE_EQ(normalized_error({330, 10}, {10, 10}, m), 100.0);
}

TEST(Aggregate, MatchesDirectComputation) {
  std::vector<EvalRecord> rs;
  const double errs[] = {1.0, 4.0, 2.5, 0.5, 7.0};
  for (int i = 0; i < 5; ++i) {
    EvalRecord r;
    r.collection = i < 3 ? "A" : "B";
    r.image_id = std::to_string(i);
    r.err = errs[i];
    r.failed = i == 4;
    rs.push_back(r);
  }
  const MetricsTable t = aggregate(rs);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].collection, "A");
  EXPECT_EQ(t.rows[1].collection, "B");
  EXPECT_EQ(t.rows[2].collection, "All");
  EXPECT_NEAR(t.rows[0].mean, 2.5, 1e-12);
  EXPECT_NEAR(t.rows[0].median, 2.5, 1e-12);
  EXPECT_NEAR(t.rows[0].std, std::sqrt(1.5), 1e-12);
  EXPECT_NEAR(t.rows[1].median, 3.75, 1e-12);
  EXPECT_EQ(t.rows[1].false_negatives, 1u);
  EXPECT_NEAR(t.rows[2].mean, 3.0, 1e-12);
  EXPECT_NEAR(t.rows[2].max, 7.0, 1e-12);
  EXPECT_NEAR(t.rows[2].median, 2.5, 1e-12);
  // The "All" mean is the image-weighted mean of the collection means.
  EXPECT_NEAR(t.rows[2].mean, (3 * t.rows[0].mean + 2 * t.rows[1].mean) / 5, 1e-12);
  EXPECT_TRUE(aggregate({}).rows.empty());
}

TEST(LoadManifest, ParsesAndReportsProblems) {
  const fs::path dir = fresh_dir("apd_manifest");
  std::ofstream(dir / "a.png") << "x";
  std::ofstream(dir / "m.csv") << "image,mask,gt_x,gt_y\n"
                               << "a.png,,10.5,20\n"
                               << "missing.png,,1,2\n"
                               << "a.png,,oops,2\n";
  const DatasetManifest m = load_manifest(dir / "m.csv", "Set");
  EXPECT_EQ(m.collection, "Set");
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].id, "a");
  EXPECT_EQ(m.entries[0].image, dir / "a.png");
  EXPECT_FALSE(m.entries[0].mask.has_value());
  EXPECT_EQ(m.entries[0].gt, (Point2{10.5, 20}));
  EXPECT_EQ(m.problems.size(), 2u);
}

TEST(LoadCollections, NamesAndComments) {
  const fs::path dir = fresh_dir("apd_collections");
  std::ofstream(dir / "one.csv") << "";
  std::ofstream(dir / "sets.txt") << "# comment\nFirst = one.csv\n\n";
  const auto ms = load_collections(dir / "sets.txt");
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].collection, "First");
  EXPECT_TRUE(ms[0].entries.empty());
}

TEST(Evaluate, EmptyManifest) {
  const EvalResult r = evaluate({DatasetManifest{"Empty", {}, {}}}, Method::kApd, DetectorParams::apd());
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.metrics.rows.empty());
}

TEST(Evaluate, SyntheticWebsAreAccurate) {
  const fs::path dir = fresh_dir("apd_eval");
  const auto manifest = load_manifest(write_web_set(dir, 5), "Synth");
  ASSERT_TRUE(manifest.problems.empty());
  const EvalResult r = evaluate({manifest}, Method::kApd, DetectorParams::apd(), 2);
  ASSERT_EQ(r.records.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(r.records[i].image_id, "web" + std::to_string(i));
  ASSERT_EQ(r.metrics.rows.size(), 2u);
  EXPECT_LT(r.metrics.rows[1].mean, 1.0);
  EXPECT_EQ(r.metrics.rows[1].false_negatives, 0u);
  EXPECT_TRUE(r.skipped.empty());

  const fs::path a = dir / "metrics_a.json", b = dir / "metrics_b.json";
  write_metrics_json(r.metrics, a);
  write_metrics_json(evaluate({manifest}, Method::kApd, DetectorParams::apd(), 1).metrics, b);
  std::ifstream fa(a), fb(b);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(fa), {}),
            std::string(std::istreambuf_iterator<char>(fb), {}));
}

TEST(Evaluate, ErrorIsScaleInvariant) {
  const fs::path small = fresh_dir("apd_eval_small"), large = fresh_dir("apd_eval_large");
  const auto ms = load_manifest(write_web_set(small, 1, 640, 18.0), "S");
  const auto ml = load_manifest(write_web_set(large, 1, 1280, 36.0), "L");
  const EvalResult rs = evaluate({ms}, Method::kApd, DetectorParams::apd());
  const EvalResult rl = evaluate({ml}, Method::kApd, DetectorParams::apd());
  ASSERT_EQ(rs.records.size(), 1u);
  ASSERT_EQ(rl.records.size(), 1u);
  EXPECT_LT(rs.records[0].err, 1.0);
  EXPECT_LT(rl.records[0].err, 1.0);
  EXPECT_NEAR(rl.records[0].err, rs.records[0].err, 0.5);
}

TEST(Evaluate, GroundTruthOutsideImageIsSkipped) {
  const fs::path dir = fresh_dir("apd_eval_gt");
  DatasetManifest m = load_manifest(write_web_set(dir, 1), "X");
  m.entries[0].gt = {-5, 10};
  const EvalResult r = evaluate({m}, Method::kApd, DetectorParams::apd());
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.skipped.size(), 1u);
}

TEST(LoadGrid, DefaultsAndOverrides) {
  const fs::path dir = fresh_dir("apd_grid");
  std::ofstream(dir / "g.txt") << "st_w = 3, 7\n# note\n";
  const ParamGrid g = load_grid(dir / "g.txt");
  EXPECT_EQ(g.st_w, (std::vector<int>{3, 7}));
  EXPECT_EQ(g.percent_lo, ParamGrid::standard().percent_lo);
  EXPECT_EQ(ParamGrid::standard().size(), 64u);
  std::ofstream(dir / "bad.txt") << "window = 3\n";
  EXPECT_THROW(load_grid(dir / "bad.txt"), InvalidInput);
}

TEST(GridSearch, SingleCellMatchesEvaluate) {
  const fs::path dir = fresh_dir("apd_grid_one");
  const auto m = load_manifest(write_web_set(dir, 2), "G");
  const GridSearchResult g =
      grid_search({m}, Method::kApd, DetectorParams::apd(), ParamGrid{{0.7}, {3}, {3}});
  ASSERT_EQ(g.scores.size(), 1u);
  const EvalResult r = evaluate({m}, Method::kApd, DetectorParams::apd());
  const double mean = (r.records[0].pixel_error + r.records[1].pixel_error) / 2;
  EXPECT_DOUBLE_EQ(g.best.mean_distance, mean);
  EXPECT_EQ(g.best.images, 2u);
}

TEST(GridSearch, FullGridIsExhaustiveAndDeterministic) {
  const fs::path dir = fresh_dir("apd_grid_full");
  const auto m = load_manifest(write_web_set(dir, 1), "G");
  DetectorParams base = DetectorParams::apd();
  base.working_width = 320;
  const GridSearchResult a = grid_search({m}, Method::kApd, base, ParamGrid::standard());
  ASSERT_EQ(a.scores.size(), 64u);
  double best = a.scores[0].mean_distance;
  for (const auto& s : a.scores) best = std::min(best, s.mean_distance);
  EXPECT_EQ(a.best.mean_distance, best);
  EXPECT_EQ(a.scores[0].percent_lo, 0.3);
  EXPECT_EQ(a.scores[63].lo_w, 11);

  const GridSearchResult b = grid_search({m}, Method::kApd, base, ParamGrid{{0.9, 0.3}, {3}, {3}});
  EXPECT_EQ(b.scores[0].percent_lo, 0.3);
  EXPECT_EQ(b.scores[0].mean_distance, a.scores[0].mean_distance);
  EXPECT_THROW(grid_search({}, Method::kApd, base, ParamGrid::standard()), InvalidInput);
}

}  // namespace
}  // namespace apd
