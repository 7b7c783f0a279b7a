// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#ifndef MRCT_METRICS_HPP
#define MRCT_METRICS_HPP

#include <vector>

#include "mrct/image.hpp"
#include "mrct/registration.hpp"
#include "mrct/similarity.hpp"

namespace mrct {

struct MetricReport {
    double dsc = 0.0;
    double jaccard = 0.0;
    double hd_px = 0.0;
    double ssim = 0.0;
    double sim_score = 0.0;
    double jd_std = 0.0;
    double jd_nonpos_frac = 0.0;
};

/// Jaccard index |A∩B|/|A∪B|; 1 when both masks are empty.
double jaccard(const LabelMask& a, const LabelMask& b);

/// Symmetric Hausdorff distance (pixels) between the mask boundaries.
/// Boundary = foreground pixels with at least one background 4-neighbor
/// (out-of-image counts as background). Throws on an empty mask.
double hausdorff(const LabelMask& a, const LabelMask& b);

/// Boundary pixel set used by the Hausdorff distance; exposed for tests.
std::vector<Pixel> boundary_pixels(const LabelMask& mask);

/// Mean local SSIM with the canonical 11x11 Gaussian window (sigma 1.5,
/// K1=0.01, K2=0.03, dynamic range 1). Requires min side >= 11.
double ssim(const Slice& a, const Slice& b);

struct JacobianStats {
    double jd_std = 0.0;
    double jd_nonpos_frac = 0.0;
};

/// Per-pixel det(I + grad u) with forward differences (one-sided at the
/// far borders): population std and the fraction of pixels with det <= 0.
JacobianStats jacobian_stats(const DisplacementField& field);

/// Warp the moving bundle with the field and fill a full report against
/// the fixed bundle.
MetricReport evaluate_pair(const RegBundle& fixed, const RegBundle& moving,
                           const DisplacementField& field, const SimConfig& sim_cfg = {});

}  // namespace mrct

#endif
