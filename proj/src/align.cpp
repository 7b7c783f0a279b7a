// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "mrct/align.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>

namespace mrct {

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MRCTREG_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

int clamp_index(int i, int count) { return std::clamp(i, 0, count - 1); }

double signed_offset(double magnitude, int mr_k, int anchor_mr, Orientation orientation) {
    // k > j subtracts, k < j adds; `same` orientation flips the sign.
    double off = mr_k > anchor_mr ? -magnitude : magnitude;
    if (orientation == Orientation::same) off = -off;
    return off;
}

}  // namespace

Orientation orientation_from_name(const std::string& name) {
    if (name == "opposed") return Orientation::opposed;
    if (name == "same") return Orientation::same;
    throw Error(ErrorCode::invalid_argument,
                "unknown orientation '" + name + "' (expected opposed or same)");
}

BlendMode blend_mode_from_name(const std::string& name) {
    if (name == "standard") return BlendMode::standard;
    if (name == "swapped") return BlendMode::swapped;
    throw Error(ErrorCode::invalid_argument,
                "unknown blend mode '" + name + "' (expected standard or swapped)");
}

std::vector<BestPair> best_pairs(const ImageStack& mr, const ImageStack& ct, const SimConfig& cfg,
                                 int threads) {
    std::vector<int> labeled_mr;
    for (int j = 0; j < mr.depth(); ++j)
        if (mr.has_label(j)) labeled_mr.push_back(j);
    if (labeled_mr.empty())
        throw Error(ErrorCode::invalid_argument, "best_pairs: no labeled MR slices");
    bool any_ct = false;
    for (int i = 0; i < ct.depth(); ++i) any_ct |= ct.has_label(i);
    if (!any_ct) throw Error(ErrorCode::invalid_argument, "best_pairs: no labeled CT slices");

    const int n_threads = std::min<int>(resolve_threads(threads), (int)labeled_mr.size());
    std::vector<std::optional<BestPair>> slots(labeled_mr.size());

    auto worker = [&](size_t begin, size_t end) {
        for (size_t s = begin; s < end; ++s) {
            const int j = labeled_mr[s];
            BestPair best{j, -1, 0.0};
            for (int i = 0; i < ct.depth(); ++i) {
                if (!ct.has_label(i)) continue;
                const double score = sim(*mr.labels[j], *ct.labels[i], cfg).score;
                if (score > best.score) {
                    best.score = score;
                    best.ct_index = i;
                }
            }
            if (best.ct_index >= 0 && best.score > 0.0) slots[s] = best;
        }
    };

    if (n_threads <= 1) {
        worker(0, slots.size());
    } else {
        std::vector<std::thread> pool;
        const size_t chunk = (slots.size() + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const size_t begin = t * chunk;
            const size_t end = std::min(slots.size(), begin + chunk);
            if (begin < end) pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    std::vector<BestPair> out;
    for (const auto& slot : slots)
        if (slot) out.push_back(*slot);
    return out;
}

GapRange layer_gap_range(const BestPair& anchor, int mr_k, double gap_mr, double gap_ct,
                         int ct_count, Orientation orientation) {
    if (!(gap_mr > 0.0) || !(gap_ct > 0.0))
        throw Error(ErrorCode::invalid_argument, "layer_gap_range: gaps must be positive");
    if (mr_k == anchor.mr_index)
        throw Error(ErrorCode::invalid_argument, "layer_gap_range: mr_k equals the anchor index");

    const double magnitude = std::abs(mr_k - anchor.mr_index) * gap_mr / gap_ct;
    const double offset = signed_offset(magnitude, mr_k, anchor.mr_index, orientation);

    GapRange gr;
    gr.ct_compute = anchor.ct_index + static_cast<int>(std::round(offset));
    gr.range = {clamp_index(gr.ct_compute - 1, ct_count), clamp_index(gr.ct_compute, ct_count),
                clamp_index(gr.ct_compute + 1, ct_count)};
    return gr;
}

std::vector<BestPair> filter_set(const std::vector<BestPair>& best, const BestPair& anchor,
                                 double gap_mr, double gap_ct, int ct_count,
                                 Orientation orientation) {
    std::vector<BestPair> kept;
    for (const BestPair& p : best) {
        if (p.mr_index == anchor.mr_index) {
            kept.push_back(p);
            continue;
        }
        const GapRange gr = layer_gap_range(anchor, p.mr_index, gap_mr, gap_ct, ct_count, orientation);
        if (p.ct_index == gr.range[0] || p.ct_index == gr.range[1] || p.ct_index == gr.range[2])
            kept.push_back(p);
    }
    return kept;
}

CorrespondenceSet align(const ImageStack& mr, const ImageStack& ct, const AlignConfig& cfg) {
    validate(mr);
    validate(ct);
    std::vector<BestPair> best = best_pairs(mr, ct, cfg.sim, cfg.threads);
    if (best.empty())
        throw Error(ErrorCode::invalid_argument, "align: every labeled MR slice scored 0");
    std::sort(best.begin(), best.end(),
              [](const BestPair& a, const BestPair& b) { return a.mr_index < b.mr_index; });

    // Anchor candidates by descending score, ties by MR index.
    std::vector<BestPair> anchors = best;
    std::sort(anchors.begin(), anchors.end(), [](const BestPair& a, const BestPair& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.mr_index < b.mr_index;
    });

    std::vector<BestPair> winner_set;
    BestPair winner_anchor = anchors.front();
    for (const BestPair& anchor : anchors) {
        auto filtered = filter_set(best, anchor, mr.layer_gap_mm, ct.layer_gap_mm, ct.depth(),
                                   cfg.orientation);
        // Longest set wins; length ties keep the higher-scoring anchor,
        // which is the one seen first in this iteration order.
        if (filtered.size() > winner_set.size()) {
            winner_set = std::move(filtered);
            winner_anchor = anchor;
        }
    }

    CorrespondenceSet out;
    out.anchor = winner_anchor;
    out.gap_mr_mm = mr.layer_gap_mm;
    out.gap_ct_mm = ct.layer_gap_mm;
    const double hi = static_cast<double>(ct.depth() - 1);
    for (const BestPair& p : winner_set) {
        CorrespondencePair cp;
        cp.mr_index = p.mr_index;
        cp.score = p.score;
        if (p.mr_index == winner_anchor.mr_index) {
            cp.ct_index_frac = winner_anchor.ct_index;
        } else {
            // Unrounded refinement of the gap formula.
            const double magnitude =
                std::abs(p.mr_index - winner_anchor.mr_index) * mr.layer_gap_mm / ct.layer_gap_mm;
            const double frac = winner_anchor.ct_index +
                                signed_offset(magnitude, p.mr_index, winner_anchor.mr_index,
                                              cfg.orientation);
            cp.ct_index_frac = std::clamp(frac, 0.0, hi);
        }
        out.pairs.push_back(cp);
    }
    return out;
}

namespace {

// Shared floor/ceil/weight logic for fractional blending.
struct BlendWeights {
    int lo = 0, hi = 0;
    double w_lo = 1.0, w_hi = 0.0;
};

BlendWeights blend_weights(double ct_index_frac, int ct_count, BlendMode blend) {
    if (!(ct_index_frac >= 0.0) || ct_index_frac > ct_count - 1)
        throw Error(ErrorCode::invalid_argument, "blend: fractional CT index out of range");
    BlendWeights bw;
    bw.lo = static_cast<int>(std::floor(ct_index_frac));
    bw.hi = static_cast<int>(std::ceil(ct_index_frac));
    const double f = ct_index_frac - bw.lo;
    if (bw.lo == bw.hi) return bw;
    if (blend == BlendMode::standard) {
        bw.w_lo = 1.0 - f;
        bw.w_hi = f;
    } else {
        bw.w_lo = f;
        bw.w_hi = 1.0 - f;
    }
    return bw;
}

}  // namespace

Slice blend_ct_slice(const ImageStack& ct, double ct_index_frac, BlendMode blend) {
    const BlendWeights bw = blend_weights(ct_index_frac, ct.depth(), blend);
    if (bw.lo == bw.hi) return ct.slices[bw.lo];

    const Slice& a = ct.slices[bw.lo];
    const Slice& b = ct.slices[bw.hi];
    Slice out(a.width, a.height);
    for (size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = bw.w_lo * a.values[i] + bw.w_hi * b.values[i];
    return out;
}

std::optional<LabelMask> blend_ct_label(const ImageStack& ct, double ct_index_frac,
                                        BlendMode blend) {
    const BlendWeights bw = blend_weights(ct_index_frac, ct.depth(), blend);
    if (bw.lo == bw.hi) return ct.labels[bw.lo];
    if (!ct.has_label(bw.lo) || !ct.has_label(bw.hi)) return std::nullopt;

    const LabelMask& a = *ct.labels[bw.lo];
    const LabelMask& b = *ct.labels[bw.hi];
    LabelMask out(a.width, a.height);
    for (size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = bw.w_lo * a.values[i] + bw.w_hi * b.values[i] >= 0.5 ? 1 : 0;
    return out;
}

}  // namespace mrct
