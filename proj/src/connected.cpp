// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "mrct/connected.hpp"

#include <algorithm>

namespace mrct {

namespace {

// Neighbor offsets; the first four are the 4-connected ones.
constexpr int kDr[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
constexpr int kDc[8] = {0, 0, -1, 1, -1, 1, -1, 1};

}  // namespace

std::vector<ConnectedDomain> connected_domains(const LabelMask& mask, Connectivity connectivity) {
    validate(mask);
    const int w = mask.width;
    const int h = mask.height;
    const int n_neighbors = connectivity == Connectivity::eight ? 8 : 4;

    std::vector<uint8_t> seen(static_cast<size_t>(w) * h, 0);
    std::vector<ConnectedDomain> domains;
    std::vector<int> stack;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int idx = y * w + x;
            if (!mask.values[idx] || seen[idx]) continue;

            ConnectedDomain dom;
            dom.top = y;
            dom.left = x;
            int bottom = y, right = x;

            stack.clear();
            stack.push_back(idx);
            seen[idx] = 1;
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cy = cur / w;
                const int cx = cur % w;
                dom.pixels.push_back({cy, cx});
                dom.top = std::min(dom.top, cy);
                dom.left = std::min(dom.left, cx);
                bottom = std::max(bottom, cy);
                right = std::max(right, cx);
                for (int k = 0; k < n_neighbors; ++k) {
                    const int ny = cy + kDr[k];
                    const int nx = cx + kDc[k];
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    const int nidx = ny * w + nx;
                    if (mask.values[nidx] && !seen[nidx]) {
                        seen[nidx] = 1;
                        stack.push_back(nidx);
                    }
                }
            }

            dom.h = bottom - dom.top + 1;
            dom.w = right - dom.left + 1;
            dom.area_px = static_cast<int>(dom.pixels.size());
            std::sort(dom.pixels.begin(), dom.pixels.end(), [](const Pixel& a, const Pixel& b) {
                return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
            domains.push_back(std::move(dom));
        }
    }

    std::sort(domains.begin(), domains.end(), [w](const ConnectedDomain& a, const ConnectedDomain& b) {
        if (a.bbox_area() != b.bbox_area()) return a.bbox_area() > b.bbox_area();
        return a.top * w + a.left < b.top * w + b.left;
    });
    for (size_t i = 0; i < domains.size(); ++i) domains[i].rank = static_cast<int>(i);
    return domains;
}

LabelMask bbox_patch(const ConnectedDomain& domain) {
    LabelMask patch(domain.w, domain.h);
    for (const Pixel& p : domain.pixels)
        patch.at(p.row - domain.top, p.col - domain.left) = 1;
    return patch;
}

LabelMask bbox_crop_resize(const ConnectedDomain& domain, int target_h, int target_w) {
    if (target_h < 1 || target_w < 1)
        throw Error(ErrorCode::invalid_argument, "bbox_crop_resize: target dims must be >= 1");

    const LabelMask patch = bbox_patch(domain);
    if (target_h == domain.h && target_w == domain.w) return patch;

    LabelMask out(target_w, target_h);
    // Pixel-center nearest neighbor: target pixel i samples source
    // floor((i + 0.5) * src / dst).
    for (int y = 0; y < target_h; ++y) {
        int sy = static_cast<int>((y + 0.5) * domain.h / target_h);
        sy = std::min(sy, domain.h - 1);
        for (int x = 0; x < target_w; ++x) {
            int sx = static_cast<int>((x + 0.5) * domain.w / target_w);
            sx = std::min(sx, domain.w - 1);
            out.at(y, x) = patch.at(sy, sx);
        }
    }
    return out;
}

}  // namespace mrct
