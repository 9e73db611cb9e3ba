#include "apd/evalbench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "apd/detector.hpp"
#include "apd/error.hpp"
#include "apd/image_io.hpp"

namespace apd {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

struct Outcome {
  EvalRecord record;
  std::optional<std::string> skipped;
};

Outcome evaluate_entry(const std::string& collection, const ManifestEntry& entry, Method method,
                       const DetectorParams& params) {
  Outcome out;
  out.record.collection = collection;
  out.record.image_id = entry.id;
  out.record.gt = entry.gt;
  try {
    const RgbImage img = read_rgb(entry.image);
    const SliceMask mask =
        entry.mask ? read_mask(*entry.mask) : SliceMask::full(img.width(), img.height());
    if (entry.gt.x < 0 || entry.gt.y < 0 || entry.gt.x > img.width() - 1 ||
        entry.gt.y > img.height() - 1)
      throw InvalidInput("ground truth outside the image");
    const auto start = std::chrono::steady_clock::now();
    try {
      out.record.prediction = detect_pith(method, img, mask, params).original;
    } catch (const DetectionFailed&) {
      out.record.failed = true;
      out.record.prediction = {0.5 * (img.width() - 1), 0.5 * (img.height() - 1)};
    }
    const auto stop = std::chrono::steady_clock::now();
    out.record.elapsed_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    out.record.pixel_error = distance(out.record.prediction, entry.gt);
    out.record.err = normalized_error(out.record.prediction, entry.gt, mask);
  } catch (const std::exception& e) {
    out.skipped = collection + "/" + entry.id + ": " + e.what();
  }
  return out;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

CollectionMetrics summarize(const std::string& name, const std::vector<const EvalRecord*>& rs) {
  CollectionMetrics m;
  m.collection = name;
  m.images = rs.size();
  if (rs.empty()) return m;
  std::vector<double> errs;
  double elapsed = 0.0;
  for (const EvalRecord* r : rs) {
    errs.push_back(r->err);
    elapsed += r->elapsed_ms;
    if (r->failed) ++m.false_negatives;
  }
  const double n = static_cast<double>(errs.size());
  double sum = 0.0;
  for (double e : errs) sum += e;
  m.mean = sum / n;
  double sq = 0.0;
  for (double e : errs) sq += (e - m.mean) * (e - m.mean);
  m.std = std::sqrt(sq / n);
  m.max = *std::max_element(errs.begin(), errs.end());
  m.median = median_of(errs);
  m.mean_elapsed_ms = elapsed / n;
  return m;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out.precision(12);
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& value) {
  std::vector<T> out;
  for (const std::string& item : split(value, ',')) {
    if (item.empty()) continue;
    double v = 0.0;
    if (!parse_double(item, v)) throw InvalidInput("bad grid value '" + item + "'");
    out.push_back(static_cast<T>(v));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

DatasetManifest load_manifest(const fs::path& csv, std::string collection) {
  std::ifstream in(csv);
  if (!in) throw InvalidInput("cannot read manifest " + csv.string());
  DatasetManifest m;
  m.collection = std::move(collection);
  const fs::path base = csv.parent_path();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto cols = split(line, ',');
    double gx = 0.0, gy = 0.0;
    const bool numeric = cols.size() == 4 && parse_double(cols[2], gx) && parse_double(cols[3], gy);
    if (!numeric) {
      if (line_no == 1 || (cols.size() == 4 && cols[0] == "image")) continue;  // header
      m.problems.push_back(csv.string() + ":" + std::to_string(line_no) + ": malformed row");
      continue;
    }
    ManifestEntry e;
    e.image = resolve(base, cols[0]);
    e.id = e.image.stem().string();
    if (!cols[1].empty()) e.mask = resolve(base, cols[1]);
    e.gt = {gx, gy};
    if (!fs::exists(e.image) || (e.mask && !fs::exists(*e.mask))) {
      m.problems.push_back(csv.string() + ":" + std::to_string(line_no) + ": missing file");
      continue;
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

std::vector<DatasetManifest> load_collections(const fs::path& config) {
  std::ifstream in(config);
  if (!in) throw InvalidInput("cannot read collection file " + config.string());
  std::vector<DatasetManifest> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidInput("expected 'name = manifest.csv': " + t);
    out.push_back(load_manifest(resolve(config.parent_path(), trim(t.substr(eq + 1))),
                                trim(t.substr(0, eq))));
  }
  return out;
}

double equivalent_radius(const SliceMask& mask) {
  return 0.5 * std::max(mask.bbox().width(), mask.bbox().height());
}

double normalized_error(Point2 pred, Point2 gt, const SliceMask& mask) {
  return 100.0 * distance(pred, gt) / equivalent_radius(mask);
}

MetricsTable aggregate(const std::vector<EvalRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const EvalRecord*>> groups;
  std::vector<const EvalRecord*> all;
  for (const auto& r : records) {
    if (!groups.contains(r.collection)) order.push_back(r.collection);
    groups[r.collection].push_back(&r);
    all.push_back(&r);
  }
  MetricsTable t;
  for (const auto& name : order) t.rows.push_back(summarize(name, groups[name]));
  if (!records.empty()) t.rows.push_back(summarize("All", all));
  return t;
}

EvalResult evaluate(const std::vector<DatasetManifest>& manifests, Method method,
                    const DetectorParams& params, int workers) {
  params.validate();
  struct Job {
    const std::string* collection;
    const ManifestEntry* entry;
  };
  std::vector<Job> jobs;
  EvalResult result;
  for (const auto& m : manifests) {
    for (const auto& p : m.problems) result.skipped.push_back(m.collection + ": " + p);
    for (const auto& e : m.entries) jobs.push_back({&m.collection, &e});
  }

  std::vector<Outcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      outcomes[i] = evaluate_entry(*jobs[i].collection, *jobs[i].entry, method, params);
  };
  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  }

  for (auto& o : outcomes) {
    if (o.skipped) result.skipped.push_back(*o.skipped);
    else result.records.push_back(std::move(o.record));
  }
  result.metrics = aggregate(result.records);
  return result;
}

void write_metrics_csv(const MetricsTable& table, const fs::path& path) {
  auto out = open_out(path);
  out << "collection,images,mean,std,median,max,false_negatives\n";
  for (const auto& r : table.rows)
    out << r.collection << ',' << r.images << ',' << r.mean << ',' << r.std << ',' << r.median
        << ',' << r.max << ',' << r.false_negatives << '\n';
}

void write_metrics_json(const MetricsTable& table, const fs::path& path) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    j.push_back({{"collection", r.collection},
                 {"images", r.images},
                 {"mean", r.mean},
                 {"std", r.std},
                 {"median", r.median},
                 {"max", r.max},
                 {"false_negatives", r.false_negatives}});
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_records_csv(const std::vector<EvalRecord>& records, const fs::path& path) {
  auto out = open_out(path);
  out << "collection,image,pred_x,pred_y,gt_x,gt_y,err,pixel_error,failed\n";
  for (const auto& r : records)
    out << r.collection << ',' << r.image_id << ',' << r.prediction.x << ',' << r.prediction.y
        << ',' << r.gt.x << ',' << r.gt.y << ',' << r.err << ',' << r.pixel_error << ','
        << (r.failed ? 1 : 0) << '\n';
}

void write_timing_csv(const EvalResult& result, const fs::path& path) {
  auto out = open_out(path);
  out << "collection,image,elapsed_ms\n";
  for (const auto& r : result.records)
    out << r.collection << ',' << r.image_id << ',' << r.elapsed_ms << '\n';
  for (const auto& m : result.metrics.rows)
    out << m.collection << ",<mean>," << m.mean_elapsed_ms << '\n';
}

ParamGrid ParamGrid::standard() { return {{0.3, 0.5, 0.7, 0.9}, {3, 7, 9, 11}, {3, 7, 9, 11}}; }

ParamGrid load_grid(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read grid file " + path.string());
  ParamGrid grid = ParamGrid::standard();
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidInput("expected 'key = v1,v2,...': " + t);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "percent_lo") grid.percent_lo = parse_list<double>(value);
    else if (key == "st_w") grid.st_w = parse_list<int>(value);
    else if (key == "lo_w") grid.lo_w = parse_list<int>(value);
    else throw InvalidInput("unknown grid key '" + key + "'");
  }
  if (grid.size() == 0) throw InvalidInput("grid has an empty axis");
  return grid;
}

GridSearchResult grid_search(const std::vector<DatasetManifest>& manifests, Method method,
                             const DetectorParams& base, const ParamGrid& grid, int workers) {
  if (manifests.empty()) throw InvalidInput("grid search needs at least one manifest");
  auto sorted = [](auto v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  GridSearchResult result;
  bool have_best = false;
  for (double p : sorted(grid.percent_lo)) {
    for (int st_w : sorted(grid.st_w)) {
      for (int lo_w : sorted(grid.lo_w)) {
        DetectorParams params = base;
        params.lo.percent_lo = p;
        params.st.window = st_w;
        params.lo.window = lo_w;
        const EvalResult eval = evaluate(manifests, method, params, workers);
        GridScore s{p, st_w, lo_w, 0.0, eval.records.size(), 0};
        for (const auto& r : eval.records) {
          s.mean_distance += r.pixel_error;
          if (r.failed) ++s.false_negatives;
        }
        if (s.images > 0) s.mean_distance /= static_cast<double>(s.images);
        result.scores.push_back(s);
        if (!have_best || s.mean_distance < result.best.mean_distance) {
          result.best = s;
          have_best = true;
        }
      }
    }
  }
  return result;
}

void write_grid_csv(const GridSearchResult& result, const fs::path& path) {
  auto out = open_out(path);
  out << "percent_lo,st_w,lo_w,mean_distance,images,false_negatives\n";
  for (const auto& s : result.scores)
    out << s.percent_lo << ',' << s.st_w << ',' << s.lo_w << ',' << s.mean_distance << ','
        << s.images << ',' << s.false_negatives << '\n';
}

void write_best_params(const GridSearchResult& result, const fs::path& path) {
  auto out = open_out(path);
  out << "percent_lo=" << result.best.percent_lo << '\n'
      << "st_w=" << result.best.st_w << '\n'
      << "lo_w=" << result.best.lo_w << '\n';
}

}  // namespace apd
