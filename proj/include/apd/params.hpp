#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "apd/imgproc.hpp"
#include "apd/lo_sampler.hpp"
#include "apd/pclines.hpp"
#include "apd/pith_solver.hpp"
#include "apd/structure_tensor.hpp"

namespace apd {

enum class Method { kApd, kApdPcl };

Method parse_method(std::string_view name);
std::string_view method_name(Method method);

/// Every tunable of both detectors. Defaults are the standard APD values;
/// APD-PCL widens the tensor window and the sampling patch to 7.
struct DetectorParams {
  StParams st;
  LoSamplerParams lo;
  SolverParams solver;
  PclinesParams pcl;
  int working_width = kWorkingWidth;
  std::uint64_t seed = 0;  // drives RANSAC and solver jitter; replaces pcl.seed

  static DetectorParams apd();
  static DetectorParams apd_pcl();
  static DetectorParams defaults(Method method);

  void validate() const;
};

}  // namespace apd
