#include "apd/structure_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>

namespace apd {

namespace {

// Below this trace the tensor carries no orientation information.
constexpr double kTraceGuard = 1e-14;

Plane convolve_separable(const Plane& in, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  Plane tmp(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * in.clamped(x + i, y);
      tmp(x, y) = acc;
    }
  }
  Plane out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.clamped(x, y + i);
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

void StParams::validate() const {
  if (!(sigma > 0.0)) throw InvalidInput("st_sigma must be positive");
  if (window < 3 || window % 2 == 0) throw InvalidInput("st_w must be odd and >= 3");
}

std::vector<double> gaussian_kernel(int window, double sigma) {
  StParams{sigma, window}.validate();
  const int r = window / 2;
  std::vector<double> k(window);
  double total = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[i + r];
  }
  for (double& v : k) v /= total;
  return k;
}

TensorField compute_tensor(const Plane& ix, const Plane& iy, const StParams& params) {
  params.validate();
  if (!ix.same_shape(iy)) throw InvalidInput("gradient planes differ in shape");
  Plane xx(ix.width(), ix.height());
  Plane xy(ix.width(), ix.height());
  Plane yy(ix.width(), ix.height());
  for (int y = 0; y < ix.height(); ++y) {
    for (int x = 0; x < ix.width(); ++x) {
      const double gx = ix(x, y);
      const double gy = iy(x, y);
      xx(x, y) = gx * gx;
      xy(x, y) = gx * gy;
      yy(x, y) = gy * gy;
    }
  }
  const auto k = gaussian_kernel(params.window, params.sigma);
  return {convolve_separable(xx, k), convolve_separable(xy, k), convolve_separable(yy, k)};
}

std::pair<double, double> tensor_eigenvalues(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  return {mean + radius, mean - radius};
}

// The dominant eigenvector of the tensor is the local gradient direction.
// On tree rings the gradient crosses the rings, so this angle points along
// the radius towards the pith, which is what the collinearity cost expects.
// The transposed atan2 form (2*j12, j22 - j11) mirrors the angle about pi/4
// in a y-down frame and yields neither radial nor tangential segments.
double tensor_orientation(double j11, double j12, double j22) {
  if (j11 + j22 <= kTraceGuard) return 0.0;
  double a = 0.5 * std::atan2(2.0 * j12, j11 - j22);
  if (a < 0.0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a -= std::numbers::pi;
  return a;
}

double tensor_coherence(double j11, double j12, double j22) {
  const double trace = j11 + j22;
  if (trace <= kTraceGuard) return 0.0;
  const double diff = j11 - j22;
  const double c = (diff * diff + 4.0 * j12 * j12) / (trace * trace);
  return std::clamp(c, 0.0, 1.0);
}

Plane orientation(const TensorField& t) {
  Plane out(t.j11.width(), t.j11.height());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      out(x, y) = tensor_orientation(t.j11(x, y), t.j12(x, y), t.j22(x, y));
  return out;
}

Plane coherence(const TensorField& t) {
  Plane out(t.j11.width(), t.j11.height());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      out(x, y) = tensor_coherence(t.j11(x, y), t.j12(x, y), t.j22(x, y));
  return out;
}

OrientationField local_orientation(const IntensityField& field, const StParams& params) {
  const Gradients g = derivatives(field);
  const TensorField t = compute_tensor(g.ix, g.iy, params);
  return {orientation(t), coherence(t)};
}

void write_plane_dump(const Plane& plane, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  const std::int32_t header[2] = {plane.width(), plane.height()};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  for (double v : plane.values()) {
    const float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), sizeof(f));
  }
}

Plane read_plane_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::int32_t header[2] = {0, 0};
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header)))
    throw InvalidInput("cannot read plane dump " + path.string());
  Plane plane(header[0], header[1]);
  for (double& v : plane.values()) {
    float f = 0.0f;
    if (!in.read(reinterpret_cast<char*>(&f), sizeof(f)))
      throw InvalidInput("truncated plane dump " + path.string());
    v = f;
  }
  return plane;
}

}  // namespace apd
