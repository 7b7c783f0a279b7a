// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#ifndef MRCT_SIMILARITY_HPP
#define MRCT_SIMILARITY_HPP

#include <vector>

#include "mrct/connected.hpp"
#include "mrct/image.hpp"

namespace mrct {

struct SimConfig {
    /// Aspect-ratio gate threshold. 0 rejects every domain pair.
    double gamma = 2.0;
    Connectivity connectivity = Connectivity::eight;
    /// When true, masks with differing domain counts score 0 outright
    /// instead of being paired up to the smaller count.
    bool strict_count = false;
};

struct SimMatch {
    int rank_mr = 0;
    int rank_ct = 0;
    double score = 0.0;  // per-domain overlap in [0, 0.5]
};

struct SimResult {
    /// Mean per-domain score over matched pairs; 0 when nothing matched.
    /// Perfect overlap scores 0.5 (the measure carries no factor 2).
    double score = 0.0;
    std::vector<SimMatch> matched;
    int n_matched = 0;

    /// Dice-scaled view (x2) for reporting; ranking is unchanged.
    double normalized() const { return 2.0 * score; }
};

/// Aspect-ratio gate between a CT and an MR domain: passes iff
/// |round(h_ct/w_ct - h_mr/w_mr)| < gamma, rounding half away from zero.
bool aspect_gate(const ConnectedDomain& dom_ct, const ConnectedDomain& dom_mr, double gamma);

/// Connected-domain shape similarity between two label masks. Domains are
/// paired by equal area rank, gated on aspect ratio, and the MR patch is
/// resized to the CT domain's bbox before the overlap is measured.
SimResult sim(const LabelMask& label_mr, const LabelMask& label_ct, const SimConfig& cfg = {});

/// Dice coefficient 2|A∩B|/(|A|+|B|); 1 when both masks are empty.
double dsc(const LabelMask& a, const LabelMask& b);

/// Mutual information (nats) of the joint intensity histogram with
/// equal-width bins on [0,1].
double mutual_information(const Slice& a, const Slice& b, int bins = 32);

/// Global Pearson correlation of the flattened intensities.
double ncc(const Slice& a, const Slice& b);

}  // namespace mrct

#endif
