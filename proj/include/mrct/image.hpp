// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#ifndef MRCT_IMAGE_HPP
#define MRCT_IMAGE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "mrct/error.hpp"

namespace mrct {

enum class Modality { MR, CT };

const char* modality_name(Modality m);
Modality modality_from_name(const std::string& name);

/// Single grayscale slice. Intensities are row-major doubles normalized
/// to [0,1] at ingestion regardless of source bit depth.
struct Slice {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    Slice() = default;
    Slice(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    double& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
    bool in_bounds(int y, int x) const { return y >= 0 && y < height && x >= 0 && x < width; }
    size_t pixel_count() const { return values.size(); }
};

/// Binary mask annotating a slice of identical dimensions. Elements are
/// strictly 0 or 1.
struct LabelMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> values;

    LabelMask() = default;
    LabelMask(int w, int h, uint8_t fill = 0)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    uint8_t& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
    bool in_bounds(int y, int x) const { return y >= 0 && y < height && x >= 0 && x < width; }

    size_t foreground_count() const;
    bool empty_foreground() const { return foreground_count() == 0; }

    /// View of the mask as a [0,1]-valued slice (used by soft losses).
    Slice to_slice() const;
};

/// Ordered slice stack of one modality with its physical layer gap.
/// Labels run parallel to slices; entries may be absent.
struct ImageStack {
    Modality modality = Modality::MR;
    double layer_gap_mm = 1.0;
    std::vector<Slice> slices;
    std::vector<std::optional<LabelMask>> labels;

    int depth() const { return static_cast<int>(slices.size()); }
    int width() const { return slices.empty() ? 0 : slices.front().width; }
    int height() const { return slices.empty() ? 0 : slices.front().height; }
    bool has_label(int index) const {
        return index >= 0 && index < depth() && labels[index].has_value();
    }
};

/// Invariant checks; throw Error on violation.
void validate(const Slice& s);
void validate(const LabelMask& m);
void validate(const ImageStack& stack);

void require_same_dims(const Slice& a, const Slice& b, const char* what);
void require_same_dims(const LabelMask& a, const LabelMask& b, const char* what);

}  // namespace mrct

#endif
