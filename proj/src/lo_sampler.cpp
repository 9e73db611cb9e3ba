#include "apd/lo_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "apd/error.hpp"

namespace apd {

void LoSamplerParams::validate() const {
  if (window < 3 || window % 2 == 0) throw InvalidInput("lo_w must be odd and >= 3");
  if (!(percent_lo > 0.0 && percent_lo <= 1.0)) throw InvalidInput("percent_lo must be in (0, 1]");
}

LoSegment make_segment(Point2 mid, double alpha, double coherence) {
  alpha = std::fmod(alpha, std::numbers::pi);
  if (alpha < 0.0) alpha += std::numbers::pi;
  const Point2 u{std::cos(alpha), std::sin(alpha)};
  return {mid - u, mid + u, mid, alpha, coherence};
}

double coherence_threshold(const Plane& coherence, const SliceMask& mask, double percent_lo) {
  if (!coherence.same_shape(mask.grid())) throw InvalidInput("coherence and mask differ in shape");
  if (!(percent_lo > 0.0 && percent_lo <= 1.0)) throw InvalidInput("percent_lo must be in (0, 1]");
  std::vector<double> values;
  values.reserve(mask.foreground_count());
  for (int y = 0; y < coherence.height(); ++y)
    for (int x = 0; x < coherence.width(); ++x)
      if (mask(x, y)) values.push_back(coherence(x, y));
  if (values.empty()) throw InvalidInput("mask has no foreground pixel");

  // Lower interpolation: position q*(n-1) rounded down. The small slack keeps
  // exact positions such as 0.3*10 from flooring one element too low.
  const double q = 1.0 - percent_lo;
  const double pos = q * static_cast<double>(values.size() - 1);
  auto k = static_cast<std::size_t>(std::floor(pos + 1e-9));
  k = std::min(k, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

LoSet sample_lo(const Plane& angle, const Plane& coherence, const SliceMask& mask,
                const LoSamplerParams& params) {
  params.validate();
  if (!angle.same_shape(coherence) || !coherence.same_shape(mask.grid()))
    throw InvalidInput("orientation, coherence and mask differ in shape");
  const double threshold = coherence_threshold(coherence, mask, params.percent_lo);
  const int w = params.window;

  LoSet lo;
  for (int py = 0; py < coherence.height(); py += w) {
    for (int px = 0; px < coherence.width(); px += w) {
      int best_x = -1;
      int best_y = -1;
      double best = -1.0;
      const int y_end = std::min(py + w, coherence.height());
      const int x_end = std::min(px + w, coherence.width());
      for (int y = py; y < y_end; ++y) {
        for (int x = px; x < x_end; ++x) {
          if (!mask(x, y)) continue;
          if (coherence(x, y) > best) {
            best = coherence(x, y);
            best_x = x;
            best_y = y;
          }
        }
      }
      if (best_x < 0 || best <= 0.0 || best < threshold) continue;
      lo.push_back(make_segment({double(best_x), double(best_y)}, angle(best_x, best_y), best));
    }
  }
  return lo;
}

void write_lo_csv(const LoSet& lo, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "x1,y1,x2,y2,coherence\n";
  for (const auto& s : lo)
    out << s.p1.x << ',' << s.p1.y << ',' << s.p2.x << ',' << s.p2.y << ',' << s.coherence << '\n';
}

}  // namespace apd
