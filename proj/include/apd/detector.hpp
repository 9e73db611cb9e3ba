#pragma once

#include "apd/image.hpp"
#include "apd/imgproc.hpp"
#include "apd/params.hpp"
#include "apd/pith_solver.hpp"

namespace apd {

/// Orientation estimation and sampling on an already standardized image.
LoSet extract_lo(const Preprocessed& input, const DetectorParams& params);

/// APD: preprocess, sample local orientations, refine the collinearity optimum.
/// Throws DetectionFailed when no segment is sampled.
PithEstimate detect_pith_apd(const RgbImage& img, const SliceMask& mask,
                             const DetectorParams& params = DetectorParams::apd());

/// APD with the PClines filter between sampling and optimization. Falls back
/// to the unfiltered segments (flagged) when filtering selects nothing.
PithEstimate detect_pith_apd_pcl(const RgbImage& img, const SliceMask& mask,
                                 const DetectorParams& params = DetectorParams::apd_pcl());

PithEstimate detect_pith(Method method, const RgbImage& img, const SliceMask& mask,
                         const DetectorParams& params);

}  // namespace apd
