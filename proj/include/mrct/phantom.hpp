// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#ifndef MRCT_PHANTOM_HPP
#define MRCT_PHANTOM_HPP

#include <cstdint>

#include "mrct/align.hpp"
#include "mrct/image.hpp"
#include "mrct/registration.hpp"

namespace mrct {

/// Synthetic multimodal stack pair with analytic ground truth. A shared
/// 3D scene of two-lobe ellipsoidal "bones" inside a body ellipse is
/// sampled at each modality's layer gap; the MR (moving) stack may be
/// translated and smoothly warped in-plane.
struct PhantomSpec {
    uint64_t seed = 1;
    int canvas_h = 128;
    int canvas_w = 128;
    int n_bones = 3;
    int depth_mr = 8;
    int depth_ct = 16;
    double gap_mr_mm = 5.0;
    double gap_ct_mm = 2.5;
    /// mr_like: multimodal pair (bright-tissue MR vs bright-bone CT);
    /// ct_like: both stacks rendered with the CT palette.
    enum class Contrast { mr_like, ct_like };
    Contrast contrast = Contrast::mr_like;
    double noise_sigma = 0.0;
    double warp_amplitude_px = 0.0;
    /// The moving stack samples the scene at p + translation (content
    /// appears shifted by -translation; the aligning field is its
    /// inverse).
    double translate_x = 0.0;
    double translate_y = 0.0;
    /// Stack direction relationship encoded in the ground truth.
    Orientation orientation = Orientation::opposed;
};

struct PhantomTruth {
    /// Fractional CT index at the physical z of each MR slice.
    std::vector<double> ct_index_for_mr;
    /// Dense in-plane field aligning the moving (MR) stack onto the CT
    /// frame; constant across slices. Zero when the spec applies no
    /// translation or warp.
    DisplacementField true_field;
};

struct Phantom {
    ImageStack mr;
    ImageStack ct;
    PhantomTruth truth;
};

/// Deterministic in the seed. Throws on degenerate specs (bones cannot be
/// placed inside the canvas).
Phantom generate(const PhantomSpec& spec);

}  // namespace mrct

#endif
