// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "mrct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrct {

double jaccard(const LabelMask& a, const LabelMask& b) {
    require_same_dims(a, b, "jaccard");
    long long inter = 0, uni = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        inter += a.values[i] & b.values[i];
        uni += a.values[i] | b.values[i];
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<Pixel> boundary_pixels(const LabelMask& mask) {
    std::vector<Pixel> out;
    auto bg = [&](int y, int x) { return !mask.in_bounds(y, x) || mask.at(y, x) == 0; };
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(y, x)) continue;
            if (bg(y - 1, x) || bg(y + 1, x) || bg(y, x - 1) || bg(y, x + 1))
                out.push_back({y, x});
        }
    return out;
}

namespace {

double directed_hausdorff(const std::vector<Pixel>& from, const std::vector<Pixel>& to) {
    double worst = 0.0;
    for (const Pixel& p : from) {
        double best = std::numeric_limits<double>::max();
        for (const Pixel& q : to) {
            const double dy = p.row - q.row;
            const double dx = p.col - q.col;
            best = std::min(best, dy * dy + dx * dx);
            if (best == 0.0) break;
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

}  // namespace

double hausdorff(const LabelMask& a, const LabelMask& b) {
    require_same_dims(a, b, "hausdorff");
    const auto ba = boundary_pixels(a);
    const auto bb = boundary_pixels(b);
    if (ba.empty() || bb.empty())
        throw Error(ErrorCode::invalid_argument, "hausdorff: empty mask");
    return std::max(directed_hausdorff(ba, bb), directed_hausdorff(bb, ba));
}

double ssim(const Slice& a, const Slice& b) {
    require_same_dims(a, b, "ssim");
    constexpr int kWin = 11;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2 with L = 1
    constexpr double kC2 = 0.03 * 0.03;
    if (a.width < kWin || a.height < kWin)
        throw Error(ErrorCode::invalid_argument, "ssim: image smaller than the 11x11 window");

    double window[kWin][kWin];
    double wsum = 0.0;
    for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
            const double dy = i - (kWin - 1) / 2.0;
            const double dx = j - (kWin - 1) / 2.0;
            window[i][j] = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
            wsum += window[i][j];
        }
    for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) window[i][j] /= wsum;

    // Valid-mode sliding windows.
    double total = 0.0;
    long long count = 0;
    for (int y = 0; y + kWin <= a.height; ++y)
        for (int x = 0; x + kWin <= a.width; ++x) {
            double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
            for (int i = 0; i < kWin; ++i)
                for (int j = 0; j < kWin; ++j) {
                    const double wa = a.at(y + i, x + j);
                    const double wb = b.at(y + i, x + j);
                    const double wt = window[i][j];
                    mu_a += wt * wa;
                    mu_b += wt * wb;
                    aa += wt * wa * wa;
                    bb += wt * wb * wb;
                    ab += wt * wa * wb;
                }
            const double var_a = aa - mu_a * mu_a;
            const double var_b = bb - mu_b * mu_b;
            const double cov = ab - mu_a * mu_b;
            const double s = ((2 * mu_a * mu_b + kC1) * (2 * cov + kC2)) /
                             ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
            total += s;
            ++count;
        }
    return total / static_cast<double>(count);
}

JacobianStats jacobian_stats(const DisplacementField& field) {
    const int w = field.width, h = field.height;
    if (w < 2 || h < 2)
        throw Error(ErrorCode::invalid_argument, "jacobian_stats: field must be at least 2x2");

    // Forward differences; the far border replicates the last interior
    // derivative so uniform fields stay uniform.
    auto ddx = [&](const std::vector<double>& u, int y, int x) {
        const int xx = x + 1 < w ? x : x - 1;
        return u[static_cast<size_t>(y) * w + xx + 1] - u[static_cast<size_t>(y) * w + xx];
    };
    auto ddy = [&](const std::vector<double>& u, int y, int x) {
        const int yy = y + 1 < h ? y : y - 1;
        return u[static_cast<size_t>(yy + 1) * w + x] - u[static_cast<size_t>(yy) * w + x];
    };

    const size_t n = field.pixel_count();
    std::vector<double> det(n);
    size_t nonpos = 0;
    double mean = 0.0;
    size_t i = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x, ++i) {
            const double d = (1.0 + ddx(field.ux, y, x)) * (1.0 + ddy(field.uy, y, x)) -
                             ddy(field.ux, y, x) * ddx(field.uy, y, x);
            det[i] = d;
            mean += d;
            if (d <= 0.0) ++nonpos;
        }
    mean /= static_cast<double>(n);

    double var = 0.0;
    for (double d : det) var += (d - mean) * (d - mean);
    var /= static_cast<double>(n);

    return {std::sqrt(var), static_cast<double>(nonpos) / static_cast<double>(n)};
}

namespace {

LabelMask binarize(const Slice& soft) {
    LabelMask m(soft.width, soft.height);
    for (size_t i = 0; i < soft.values.size(); ++i) m.values[i] = soft.values[i] >= 0.5 ? 1 : 0;
    return m;
}

}  // namespace

MetricReport evaluate_pair(const RegBundle& fixed, const RegBundle& moving,
                           const DisplacementField& field, const SimConfig& sim_cfg) {
    const LabelMask fixed_bone = binarize(fixed.bone);
    const LabelMask moved_bone = warp(binarize(moving.bone), field);

    MetricReport r;
    r.dsc = dsc(fixed_bone, moved_bone);
    r.jaccard = jaccard(fixed_bone, moved_bone);
    r.hd_px = hausdorff(fixed_bone, moved_bone);
    r.ssim = ssim(fixed.image, warp(moving.image, field));
    r.sim_score = sim(moved_bone, fixed_bone, sim_cfg).score;
    const JacobianStats js = jacobian_stats(field);
    r.jd_std = js.jd_std;
    r.jd_nonpos_frac = js.jd_nonpos_frac;
    return r;
}

}  // namespace mrct
