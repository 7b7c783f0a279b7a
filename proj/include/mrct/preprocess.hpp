// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#ifndef MRCT_PREPROCESS_HPP
#define MRCT_PREPROCESS_HPP

#include <optional>
#include <utility>

#include "mrct/image.hpp"
#include "mrct/similarity.hpp"

namespace mrct {

struct PreprocConfig {
    int out_h = 256;
    int out_w = 256;
    /// Threshold for ROI extraction; unset selects Otsu's method.
    std::optional<double> fixed_threshold;
    bool fill_holes = true;
    /// Aspect gate used by label denoising.
    double gamma = 2.0;
};

/// Body-contour ROI mask: threshold, keep the largest connected
/// foreground component, optionally fill interior holes.
/// Throws an empty-ROI error when nothing survives the threshold.
LabelMask roi_mask(const Slice& slice, const PreprocConfig& cfg = {});

struct OffsetCorrected {
    Slice slice;
    LabelMask roi;
    std::optional<LabelMask> label;
    /// Integer translation that was applied (row, col).
    int shift_row = 0;
    int shift_col = 0;
};

/// Translate slice, ROI and label by the integer vector moving the ROI
/// centroid to the center of an out_h x out_w canvas (zero padding).
OffsetCorrected offset_correct(const Slice& slice, const LabelMask& roi,
                               const std::optional<LabelMask>& label,
                               const PreprocConfig& cfg = {});

/// Remove the connected domains that fail the rank pairing / aspect gate
/// of the shape similarity measure. Outputs are pixel subsets of inputs.
std::pair<LabelMask, LabelMask> denoise_pair(const LabelMask& label_mr, const LabelMask& label_ct,
                                             double gamma,
                                             Connectivity connectivity = Connectivity::eight);

/// Otsu threshold over [0,1] intensities (256-bin histogram). Exposed for
/// tests; returns the lower bound of the first foreground bin.
double otsu_threshold(const Slice& slice);

}  // namespace mrct

#endif
