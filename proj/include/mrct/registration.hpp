// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#ifndef MRCT_REGISTRATION_HPP
#define MRCT_REGISTRATION_HPP

#include <array>
#include <vector>

#include "mrct/image.hpp"

namespace mrct {

/// Dense displacement field in pixel units. Warping samples the moving
/// image at p + u(p); ux is the column (x) component, uy the row (y)
/// component, both row-major planes.
struct DisplacementField {
    int width = 0;
    int height = 0;
    std::vector<double> ux;
    std::vector<double> uy;

    DisplacementField() = default;
    DisplacementField(int w, int h)
        : width(w), height(h), ux(static_cast<size_t>(w) * h, 0.0),
          uy(static_cast<size_t>(w) * h, 0.0) {}

    size_t pixel_count() const { return ux.size(); }
};

enum class Border { zero, clamp };

/// Bilinear warp: output(p) = input(p + u(p)).
Slice warp(const Slice& image, const DisplacementField& field, Border border = Border::zero);

/// Mask warp: bilinear on the 0/1 values, then thresholded at 0.5.
LabelMask warp(const LabelMask& mask, const DisplacementField& field, Border border = Border::zero);

/// Multi-channel feature grid for the correlation operator; data is laid
/// out as channel planes of row-major values.
struct FeatureGrid {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    FeatureGrid() = default;
    FeatureGrid(int w, int h, int c)
        : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, 0.0) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }

    static FeatureGrid from_slice(const Slice& s);
};

/// Patch-correlation cost volume: for each position on the s1 grid, the
/// D*D (D = 2d+1) correlation values against displaced patches on the s2
/// grid, zero-padded at borders.
struct CostVolume {
    int out_w = 0;
    int out_h = 0;
    int d = 0;
    std::vector<double> data;  // [offset][y][x]

    int channel_count() const { return (2 * d + 1) * (2 * d + 1); }
    double at(int offset, int y, int x) const {
        return data[(static_cast<size_t>(offset) * out_h + y) * out_w + x];
    }
};

CostVolume correlation(const FeatureGrid& a, const FeatureGrid& b, int k, int d, int s1, int s2);

/// Smoothed soft-Dice loss 1 - (2|A∩B| + sigma)/(|A| + |B| + sigma) on
/// [0,1]-valued mask grids (pixelwise-product intersection).
double dsc_loss(const Slice& fixed_mask, const Slice& moved_mask, double sigma);

/// Diffusion regularizer: sum of squared forward differences of both
/// displacement components (differences at the far borders are zero).
double diffusion_reg(const DisplacementField& field);

struct RegConfig {
    /// Weights of the four loss terms: bone-label Dice, ROI Dice, field
    /// smoothness, bone-masked field smoothness.
    std::array<double, 4> lambda{1.0, 4.0, 3.0, 4.0};
    double sigma = 1e-5;
    int levels = 3;
    int iters_per_level = 250;
    double step_size = 1.0;
    /// Correlation operator defaults (patch half-size, max displacement,
    /// position / displacement strides).
    int k = 1;
    int d = 2;
    int s1 = 1;
    int s2 = 1;
    /// Line-search floor; a level stops once no improving step remains.
    double min_step = 1e-10;
    /// Heavy-ball factor; reset on any rejected step.
    double momentum = 0.9;
};

/// Preprocessed inputs for one slice pair. Bone and ROI are [0,1]-valued
/// grids (hard masks at full resolution, soft after pyramid averaging).
struct RegBundle {
    Slice image;
    Slice bone;
    Slice roi;
};

RegBundle make_bundle(const Slice& image, const LabelMask& bone, const LabelMask& roi);

/// Objective value and its four terms; total is the lambda-weighted sum.
/// The smoothness terms are per-pixel means of the diffusion regularizer
/// so the weights balance the [0,1] Dice terms at any resolution.
struct LossTerms {
    double total = 0.0;
    double label_dice = 0.0;
    double roi_dice = 0.0;
    double smooth = 0.0;
    double smooth_masked = 0.0;
};
LossTerms total_loss(const RegBundle& fixed, const RegBundle& moving,
                     const DisplacementField& field, const RegConfig& cfg);

/// Same, also accumulating d(total)/d(field) into `grad` (resized/zeroed
/// internally).
LossTerms total_loss_grad(const RegBundle& fixed, const RegBundle& moving,
                          const DisplacementField& field, const RegConfig& cfg,
                          DisplacementField* grad);

struct TraceSample {
    int level = 0;
    int iter = 0;
    double loss = 0.0;
};

struct RegResult {
    DisplacementField field;
    std::vector<TraceSample> trace;
    double initial_loss = 0.0;  // full-resolution zero-field objective
    double final_loss = 0.0;    // full-resolution objective of the result
};

/// Coarse-to-fine minimization of the objective by gradient descent with
/// a step-halving line search. Deterministic; final_loss <= initial_loss.
RegResult register_pair(const RegBundle& fixed, const RegBundle& moving,
                        const RegConfig& cfg = {});

}  // namespace mrct

#endif
