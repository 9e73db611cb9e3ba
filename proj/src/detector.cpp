#include "apd/detector.hpp"

#include "apd/error.hpp"
#include "apd/pclines.hpp"

namespace apd {

namespace {

PithEstimate finish(PithEstimate est, const Preprocessed& input) {
  est.original = input.info.to_original(est.working);
  return est;
}

}  // namespace

LoSet extract_lo(const Preprocessed& input, const DetectorParams& params) {
  const OrientationField of = local_orientation(input.field, params.st);
  return sample_lo(of.angle, of.coherence, input.mask, params.lo);
}

PithEstimate detect_pith_apd(const RgbImage& img, const SliceMask& mask,
                             const DetectorParams& params) {
  params.validate();
  const Preprocessed input = preprocess(img, mask, params.working_width);
  const LoSet lo = extract_lo(input, params);
  if (lo.empty()) throw DetectionFailed("no coherent local orientation in the slice");
  return finish(locate_pith(lo, input.mask, params.solver, params.seed), input);
}

PithEstimate detect_pith_apd_pcl(const RgbImage& img, const SliceMask& mask,
                                 const DetectorParams& params) {
  params.validate();
  const Preprocessed input = preprocess(img, mask, params.working_width);
  const LoSet lo = extract_lo(input, params);
  if (lo.empty()) throw DetectionFailed("no coherent local orientation in the slice");

  PclinesParams pcl = params.pcl;
  pcl.seed = params.seed;
  LoSet filtered;
  bool fallback = false;
  try {
    filtered = pclines_filter(lo, input.field.width(), input.field.height(), pcl);
  } catch (const FilteringFailed&) {
    filtered = lo;
    fallback = true;
  }
  PithEstimate est = locate_pith(filtered, input.mask, params.solver, params.seed);
  est.segments_sampled = lo.size();
  est.segments_used = filtered.size();
  est.filter_fallback = fallback;
  return finish(std::move(est), input);
}

PithEstimate detect_pith(Method method, const RgbImage& img, const SliceMask& mask,
                         const DetectorParams& params) {
  return method == Method::kApd ? detect_pith_apd(img, mask, params)
                                : detect_pith_apd_pcl(img, mask, params);
}

}  // namespace apd
