#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "apd/geometry.hpp"
#include "apd/image.hpp"
#include "apd/params.hpp"

namespace apd {

struct ManifestEntry {
  std::string id;  // image file stem
  std::filesystem::path image;
  std::optional<std::filesystem::path> mask;  // absent: the whole image is the slice
  Point2 gt;       // original frame, pixels
};

struct DatasetManifest {
  std::string collection;
  std::vector<ManifestEntry> entries;
  std::vector<std::string> problems;  // malformed or missing rows, skipped at load
};

/// Reads a `image,mask,gt_x,gt_y` CSV (header optional, mask may be empty).
/// Relative paths resolve against the CSV's directory.
DatasetManifest load_manifest(const std::filesystem::path& csv, std::string collection);

/// Reads a flat `name = manifest.csv` file, one collection per line, `#` comments.
std::vector<DatasetManifest> load_collections(const std::filesystem::path& config);

/// Half the larger side of the slice bounding box.
double equivalent_radius(const SliceMask& mask);

/// 100 * |pred - gt| / equivalent_radius(mask).
double normalized_error(Point2 pred, Point2 gt, const SliceMask& mask);

struct EvalRecord {
  std::string collection;
  std::string image_id;
  Point2 prediction;
  Point2 gt;
  double err = 0.0;           // percent of the equivalent radius
  double pixel_error = 0.0;   // original frame
  double elapsed_ms = 0.0;
  bool failed = false;        // no estimate; prediction is the image center
};

struct CollectionMetrics {
  std::string collection;
  std::size_t images = 0;
  double mean = 0.0;
  double std = 0.0;     // population standard deviation
  double median = 0.0;
  double max = 0.0;
  std::size_t false_negatives = 0;
  double mean_elapsed_ms = 0.0;
};

struct MetricsTable {
  std::vector<CollectionMetrics> rows;  // collections in first-seen order, then "All"
};

MetricsTable aggregate(const std::vector<EvalRecord>& records);

struct EvalResult {
  std::vector<EvalRecord> records;
  MetricsTable metrics;
  std::vector<std::string> skipped;  // unreadable or invalid entries, with reasons
};

/// Runs the detector on every entry. Images may be processed by several
/// workers; each detection is timed on its own and records keep manifest order.
EvalResult evaluate(const std::vector<DatasetManifest>& manifests, Method method,
                    const DetectorParams& params, int workers = 1);

// Metric and record files carry no timing so reruns compare byte for byte;
// timings go to their own file.
void write_metrics_csv(const MetricsTable& table, const std::filesystem::path& path);
void write_metrics_json(const MetricsTable& table, const std::filesystem::path& path);
void write_records_csv(const std::vector<EvalRecord>& records, const std::filesystem::path& path);
void write_timing_csv(const EvalResult& result, const std::filesystem::path& path);

struct ParamGrid {
  std::vector<double> percent_lo;
  std::vector<int> st_w;
  std::vector<int> lo_w;

  /// percent_lo {0.3, 0.5, 0.7, 0.9} x st_w {3, 7, 9, 11} x lo_w {3, 7, 9, 11}.
  static ParamGrid standard();
  std::size_t size() const { return percent_lo.size() * st_w.size() * lo_w.size(); }
};

/// Flat key-value file with comma-separated lists for percent_lo, st_w, lo_w.
/// Missing keys keep the standard values.
ParamGrid load_grid(const std::filesystem::path& path);

struct GridScore {
  double percent_lo = 0.0;
  int st_w = 0;
  int lo_w = 0;
  double mean_distance = 0.0;  // pixels, original frame, over every image
  std::size_t images = 0;
  std::size_t false_negatives = 0;
};

struct GridSearchResult {
  std::vector<GridScore> scores;  // lexicographic (percent_lo, st_w, lo_w) order
  GridScore best;                 // smallest mean distance, earliest on ties
};

GridSearchResult grid_search(const std::vector<DatasetManifest>& manifests, Method method,
                             const DetectorParams& base, const ParamGrid& grid, int workers = 1);

void write_grid_csv(const GridSearchResult& result, const std::filesystem::path& path);
/// Best cell as a flat key-value config accepted by the CLI.
void write_best_params(const GridSearchResult& result, const std::filesystem::path& path);

}  // namespace apd
