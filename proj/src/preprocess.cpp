// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "mrct/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mrct/connected.hpp"

namespace mrct {

namespace {

// Flood-fill background from the image border (4-connected); any zero
// pixel not reached is an interior hole.
void fill_interior_holes(LabelMask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<uint8_t> outside(static_cast<size_t>(w) * h, 0);
    std::vector<int> stack;
    auto push = [&](int y, int x) {
        const int idx = y * w + x;
        if (!mask.values[idx] && !outside[idx]) {
            outside[idx] = 1;
            stack.push_back(idx);
        }
    };
    for (int x = 0; x < w; ++x) {
        push(0, x);
        push(h - 1, x);
    }
    for (int y = 0; y < h; ++y) {
        push(y, 0);
        push(y, w - 1);
    }
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        const int cy = cur / w, cx = cur % w;
        if (cy > 0) push(cy - 1, cx);
        if (cy + 1 < h) push(cy + 1, cx);
        if (cx > 0) push(cy, cx - 1);
        if (cx + 1 < w) push(cy, cx + 1);
    }
    for (size_t i = 0; i < mask.values.size(); ++i)
        if (!mask.values[i] && !outside[i]) mask.values[i] = 1;
}

}  // namespace

double otsu_threshold(const Slice& slice) {
    constexpr int kBins = 256;
    std::vector<double> hist(kBins, 0.0);
    for (double v : slice.values) {
        int b = static_cast<int>(v * kBins);
        hist[std::min(b, kBins - 1)] += 1.0;
    }
    const double total = static_cast<double>(slice.values.size());

    double sum_all = 0.0;
    for (int i = 0; i < kBins; ++i) sum_all += i * hist[i];

    double best_between = -1.0;
    int best_t = 0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t < kBins - 1; ++t) {
        w0 += hist[t];
        sum0 += t * hist[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best_between) {
            best_between = between;
            best_t = t;
        }
    }
    // Foreground = bins strictly above best_t.
    return (best_t + 1) / static_cast<double>(kBins);
}

LabelMask roi_mask(const Slice& slice, const PreprocConfig& cfg) {
    validate(slice);
    if (cfg.fixed_threshold && !(*cfg.fixed_threshold > 0.0 && *cfg.fixed_threshold < 1.0))
        throw Error(ErrorCode::invalid_argument, "roi_mask: fixed threshold must be in (0,1)");

    const double thresh = cfg.fixed_threshold ? *cfg.fixed_threshold : otsu_threshold(slice);
    LabelMask fg(slice.width, slice.height);
    for (size_t i = 0; i < slice.values.size(); ++i)
        fg.values[i] = slice.values[i] >= thresh ? 1 : 0;

    auto domains = connected_domains(fg, Connectivity::eight);
    if (domains.empty())
        throw Error(ErrorCode::empty_roi, "roi_mask: no foreground above threshold");

    // Largest by pixel count, not bbox area.
    const ConnectedDomain& body = *std::max_element(
        domains.begin(), domains.end(),
        [](const ConnectedDomain& a, const ConnectedDomain& b) { return a.area_px < b.area_px; });

    LabelMask roi(slice.width, slice.height);
    for (const Pixel& p : body.pixels) roi.at(p.row, p.col) = 1;
    if (cfg.fill_holes) fill_interior_holes(roi);
    return roi;
}

OffsetCorrected offset_correct(const Slice& slice, const LabelMask& roi,
                               const std::optional<LabelMask>& label, const PreprocConfig& cfg) {
    if (roi.width != slice.width || roi.height != slice.height)
        throw Error(ErrorCode::dimension_mismatch, "offset_correct: ROI dims must match the slice");
    if (label) require_same_dims(*label, roi, "offset_correct");
    if (roi.empty_foreground())
        throw Error(ErrorCode::empty_roi, "offset_correct: ROI mask is empty");
    if (cfg.out_h < 16 || cfg.out_w < 16)
        throw Error(ErrorCode::invalid_argument, "offset_correct: canvas must be at least 16x16");

    double cy = 0.0, cx = 0.0;
    size_t n = 0;
    for (int y = 0; y < roi.height; ++y)
        for (int x = 0; x < roi.width; ++x)
            if (roi.at(y, x)) {
                cy += y;
                cx += x;
                ++n;
            }
    cy /= static_cast<double>(n);
    cx /= static_cast<double>(n);

    const double target_y = (cfg.out_h - 1) / 2.0;
    const double target_x = (cfg.out_w - 1) / 2.0;
    const int sr = static_cast<int>(std::round(target_y - cy));
    const int sc = static_cast<int>(std::round(target_x - cx));

    OffsetCorrected out;
    out.shift_row = sr;
    out.shift_col = sc;
    out.slice = Slice(cfg.out_w, cfg.out_h);
    out.roi = LabelMask(cfg.out_w, cfg.out_h);
    if (label) out.label = LabelMask(cfg.out_w, cfg.out_h);

    for (int y = 0; y < cfg.out_h; ++y) {
        const int src_y = y - sr;
        if (src_y < 0 || src_y >= slice.height) continue;
        for (int x = 0; x < cfg.out_w; ++x) {
            const int src_x = x - sc;
            if (src_x < 0 || src_x >= slice.width) continue;
            out.slice.at(y, x) = slice.at(src_y, src_x);
            out.roi.at(y, x) = roi.at(src_y, src_x);
            if (label) out.label->at(y, x) = label->at(src_y, src_x);
        }
    }
    return out;
}

std::pair<LabelMask, LabelMask> denoise_pair(const LabelMask& label_mr, const LabelMask& label_ct,
                                             double gamma, Connectivity connectivity) {
    SimConfig cfg;
    cfg.gamma = gamma;
    cfg.connectivity = connectivity;
    const SimResult res = sim(label_mr, label_ct, cfg);

    const auto doms_mr = connected_domains(label_mr, connectivity);
    const auto doms_ct = connected_domains(label_ct, connectivity);

    LabelMask out_mr(label_mr.width, label_mr.height);
    LabelMask out_ct(label_ct.width, label_ct.height);
    for (const SimMatch& m : res.matched) {
        for (const Pixel& p : doms_mr[m.rank_mr].pixels) out_mr.at(p.row, p.col) = 1;
        for (const Pixel& p : doms_ct[m.rank_ct].pixels) out_ct.at(p.row, p.col) = 1;
    }
    return {std::move(out_mr), std::move(out_ct)};
}

}  // namespace mrct
