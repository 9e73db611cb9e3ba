#pragma once

#include <filesystem>
#include <vector>

#include "apd/image.hpp"
#include "apd/imgproc.hpp"

namespace apd {

struct StParams {
  double sigma = 1.2;  // Gaussian standard deviation, pixels
  int window = 3;      // odd window side, pixels

  void validate() const;
};

/// Symmetric 2x2 structure tensor per pixel: [[j11, j12], [j12, j22]].
struct TensorField {
  Plane j11;
  Plane j12;
  Plane j22;
};

/// Per-pixel local orientation in [0, pi) and coherence in [0, 1].
struct OrientationField {
  Plane angle;
  Plane coherence;
};

/// Normalized 1D Gaussian taps of length `window`; the 2D window is their
/// outer product, which is the truncated 2D Gaussian renormalized to sum 1.
std::vector<double> gaussian_kernel(int window, double sigma);

TensorField compute_tensor(const Plane& ix, const Plane& iy, const StParams& params);

/// Closed-form eigenvalues (largest first) of [[a, b], [b, c]].
std::pair<double, double> tensor_eigenvalues(double a, double b, double c);

/// Angle of the dominant eigenvector (the mean gradient direction).
double tensor_orientation(double j11, double j12, double j22);
double tensor_coherence(double j11, double j12, double j22);

Plane orientation(const TensorField& t);
Plane coherence(const TensorField& t);

/// Derivatives, tensor, orientation and coherence in one pass.
OrientationField local_orientation(const IntensityField& field, const StParams& params);

/// Debug dump: int32 width, int32 height, then row-major float32 values.
void write_plane_dump(const Plane& plane, const std::filesystem::path& path);
Plane read_plane_dump(const std::filesystem::path& path);

}  // namespace apd
