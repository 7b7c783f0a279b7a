// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#ifndef MRCT_ALIGN_HPP
#define MRCT_ALIGN_HPP

#include <array>
#include <optional>
#include <vector>

#include "mrct/image.hpp"
#include "mrct/similarity.hpp"

namespace mrct {

/// Scan direction relationship between the two stacks. `opposed` means the
/// CT index decreases as the MR index increases (the default convention);
/// `same` flips the sign.
enum class Orientation { opposed, same };

/// Weighting convention for fractional slice blending. `standard` weights
/// the floor slice by (1-frac); `swapped` applies the weights the other
/// way around (ceil slice gets 1-frac).
enum class BlendMode { standard, swapped };

Orientation orientation_from_name(const std::string& name);
BlendMode blend_mode_from_name(const std::string& name);

/// Best-scoring CT match for one MR slice.
struct BestPair {
    int mr_index = 0;
    int ct_index = 0;
    double score = 0.0;
};

struct CorrespondencePair {
    int mr_index = 0;
    double ct_index_frac = 0.0;
    double score = 0.0;
};

/// Final filtered MR -> CT correspondence set: the anchor pair plus one
/// fractional CT index per retained MR slice, strictly increasing in
/// mr_index.
struct CorrespondenceSet {
    BestPair anchor;
    std::vector<CorrespondencePair> pairs;
    double gap_mr_mm = 1.0;
    double gap_ct_mm = 1.0;
};

struct AlignConfig {
    SimConfig sim;
    Orientation orientation = Orientation::opposed;
    BlendMode blend = BlendMode::standard;
    /// Worker threads for the MR x CT similarity sweep; 0 reads the
    /// MRCTREG_THREADS environment variable (absent -> 1).
    int threads = 0;
};

/// For each labeled MR slice, the argmax-similarity CT slice (ties to the
/// smaller CT index). Slices whose best score is 0 are omitted.
std::vector<BestPair> best_pairs(const ImageStack& mr, const ImageStack& ct,
                                 const SimConfig& cfg = {}, int threads = 0);

struct GapRange {
    int ct_compute = 0;
    std::array<int, 3> range{};  // clamped to valid CT indices
};

/// Layer-gap extrapolation from the anchor: the expected CT index for MR
/// slice mr_k, plus the +/-1 acceptance window.
GapRange layer_gap_range(const BestPair& anchor, int mr_k, double gap_mr, double gap_ct,
                         int ct_count, Orientation orientation = Orientation::opposed);

/// Pairs whose CT index falls inside the layer-gap window of the anchor.
/// The anchor itself is always retained.
std::vector<BestPair> filter_set(const std::vector<BestPair>& best, const BestPair& anchor,
                                 double gap_mr, double gap_ct, int ct_count,
                                 Orientation orientation = Orientation::opposed);

/// Full spatial position alignment: best pairs, per-anchor gap filtering,
/// longest-set selection, and fractional index refinement.
CorrespondenceSet align(const ImageStack& mr, const ImageStack& ct, const AlignConfig& cfg = {});

/// CT slice at a fractional index, blending the two neighboring layers.
Slice blend_ct_slice(const ImageStack& ct, double ct_index_frac,
                     BlendMode blend = BlendMode::standard);

/// Blended CT label at a fractional index (soft blend, 0.5 threshold).
/// Absent when either contributing layer has no label.
std::optional<LabelMask> blend_ct_label(const ImageStack& ct, double ct_index_frac,
                                        BlendMode blend = BlendMode::standard);

}  // namespace mrct

#endif
