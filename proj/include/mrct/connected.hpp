// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#ifndef MRCT_CONNECTED_HPP
#define MRCT_CONNECTED_HPP

#include <vector>

#include "mrct/image.hpp"

namespace mrct {

enum class Connectivity { four = 4, eight = 8 };

struct Pixel {
    int row = 0;
    int col = 0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// One maximal connected foreground region of a binary mask with its
/// tight bounding box. `rank` is the 0-based position after sorting all
/// regions of the mask by descending bbox area (ties by raster order of
/// the bbox top-left corner).
struct ConnectedDomain {
    std::vector<Pixel> pixels;  // raster order
    int top = 0;
    int left = 0;
    int h = 0;
    int w = 0;
    int area_px = 0;
    int rank = 0;

    long long bbox_area() const { return static_cast<long long>(h) * w; }
    double aspect_ratio() const { return static_cast<double>(h) / w; }
};

/// All maximal connected foreground regions, sorted largest bbox first.
/// The pixel sets partition the mask foreground. Empty mask -> empty list.
std::vector<ConnectedDomain> connected_domains(const LabelMask& mask,
                                               Connectivity connectivity = Connectivity::eight);

/// Crop the domain's tight bounding box to a binary patch and resize it
/// to target_h x target_w with nearest-neighbor sampling.
LabelMask bbox_crop_resize(const ConnectedDomain& domain, int target_h, int target_w);

/// The h x w binary patch of the domain inside its own bounding box.
LabelMask bbox_patch(const ConnectedDomain& domain);

}  // namespace mrct

#endif
