// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace oracle {

using namespace mrct;

std::vector<int> flood_fill_labels(const LabelMask& mask, Connectivity conn, int* n_components) {
    const int w = mask.width, h = mask.height;
    std::vector<int> labels(static_cast<size_t>(w) * h, -1);
    int next = 0;
    // BFS with a deque, visiting neighbors in a different order than the
    // library's DFS.
    for (int y0 = 0; y0 < h; ++y0)
        for (int x0 = 0; x0 < w; ++x0) {
            if (!mask.at(y0, x0) || labels[y0 * w + x0] != -1) continue;
            std::deque<std::pair<int, int>> queue{{y0, x0}};
            labels[y0 * w + x0] = next;
            while (!queue.empty()) {
                auto [y, x] = queue.front();
                queue.pop_front();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dy == 0 && dx == 0) continue;
                        if (conn == Connectivity::four && dy != 0 && dx != 0) continue;
                        const int ny = y + dy, nx = x + dx;
                        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                        if (mask.at(ny, nx) && labels[ny * w + nx] == -1) {
                            labels[ny * w + nx] = next;
                            queue.emplace_back(ny, nx);
                        }
                    }
            }
            ++next;
        }
    if (n_components) *n_components = next;
    return labels;
}

LabelMask nn_resize(const LabelMask& patch, int target_h, int target_w) {
    LabelMask out(target_w, target_h);
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x) {
            const int sy = std::min(static_cast<int>(std::floor((y + 0.5) * patch.height /
                                                                static_cast<double>(target_h))),
                                    patch.height - 1);
            const int sx = std::min(static_cast<int>(std::floor((x + 0.5) * patch.width /
                                                                static_cast<double>(target_w))),
                                    patch.width - 1);
            out.at(y, x) = patch.at(sy, sx);
        }
    return out;
}

CostVolume brute_correlation(const FeatureGrid& a, const FeatureGrid& b, int k, int d, int s1,
                             int s2) {
    CostVolume cv;
    cv.d = d;
    cv.out_w = (a.width + s1 - 1) / s1;
    cv.out_h = (a.height + s1 - 1) / s1;
    const int D = 2 * d + 1;
    cv.data.assign(static_cast<size_t>(D) * D * cv.out_w * cv.out_h, 0.0);

    // Loop over every pair of absolute positions; keep those whose
    // displacement sits on the s2 grid within the neighborhood.
    for (int y1 = 0; y1 < a.height; ++y1)
        for (int x1 = 0; x1 < a.width; ++x1) {
            if (y1 % s1 || x1 % s1) continue;
            for (int y2 = y1 - d * s2; y2 <= y1 + d * s2; ++y2)
                for (int x2 = x1 - d * s2; x2 <= x1 + d * s2; ++x2) {
                    if ((y2 - y1) % s2 || (x2 - x1) % s2) continue;
                    double acc = 0.0;
                    for (int py = -k; py <= k; ++py)
                        for (int px = -k; px <= k; ++px)
                            for (int c = 0; c < a.channels; ++c) {
                                const int ay = y1 + py, ax = x1 + px;
                                const int by = y2 + py, bx = x2 + px;
                                const double va =
                                    (ay >= 0 && ay < a.height && ax >= 0 && ax < a.width)
                                        ? a.at(c, ay, ax)
                                        : 0.0;
                                const double vb =
                                    (by >= 0 && by < b.height && bx >= 0 && bx < b.width)
                                        ? b.at(c, by, bx)
                                        : 0.0;
                                acc += va * vb;
                            }
                    const int off = ((y2 - y1) / s2 + d) * D + ((x2 - x1) / s2 + d);
                    const size_t at =
                        (static_cast<size_t>(off) * cv.out_h + y1 / s1) * cv.out_w + x1 / s1;
                    cv.data[at] = acc;
                }
        }
    return cv;
}

double brute_mutual_information(const Slice& a, const Slice& b, int bins) {
    std::vector<std::vector<double>> joint(bins, std::vector<double>(bins, 0.0));
    const double n = static_cast<double>(a.values.size());
    for (size_t i = 0; i < a.values.size(); ++i) {
        const int bi = std::min(static_cast<int>(a.values[i] * bins), bins - 1);
        const int bj = std::min(static_cast<int>(b.values[i] * bins), bins - 1);
        joint[bi][bj] += 1.0 / n;
    }
    double mi = 0.0;
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j) {
            if (joint[i][j] <= 0.0) continue;
            double pi = 0.0, pj = 0.0;
            for (int t = 0; t < bins; ++t) {
                pi += joint[i][t];
                pj += joint[t][j];
            }
            mi += joint[i][j] * std::log(joint[i][j] / (pi * pj));
        }
    return mi;
}

namespace {

double bilinear_zero(const Slice& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    auto tap = [&](int yy, int xx) {
        return (yy >= 0 && yy < img.height && xx >= 0 && xx < img.width) ? img.at(yy, xx) : 0.0;
    };
    return (1 - fy) * ((1 - fx) * tap(y0, x0) + fx * tap(y0, x0 + 1)) +
           fy * ((1 - fx) * tap(y0 + 1, x0) + fx * tap(y0 + 1, x0 + 1));
}

double soft_dice_loss(const Slice& f, const Slice& w, double sigma) {
    double inter = 0, sf = 0, sw = 0;
    for (size_t i = 0; i < f.values.size(); ++i) {
        inter += f.values[i] * w.values[i];
        sf += f.values[i];
        sw += w.values[i];
    }
    return 1.0 - (2.0 * inter + sigma) / (sf + sw + sigma);
}

double forward_diff_energy(const std::vector<double>& ux, const std::vector<double>& uy, int w,
                           int h) {
    double sum = 0.0;
    for (const std::vector<double>* plane : {&ux, &uy})
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double v = (*plane)[y * w + x];
                if (x + 1 < w) {
                    const double g = (*plane)[y * w + x + 1] - v;
                    sum += g * g;
                }
                if (y + 1 < h) {
                    const double g = (*plane)[(y + 1) * w + x] - v;
                    sum += g * g;
                }
            }
    return sum;
}

}  // namespace

double brute_total_loss(const RegBundle& fixed, const RegBundle& moving,
                        const DisplacementField& field, const RegConfig& cfg) {
    const int w = field.width, h = field.height;
    Slice warped_bone(w, h), warped_roi(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            warped_bone.at(y, x) = bilinear_zero(moving.bone, x + field.ux[i], y + field.uy[i]);
            warped_roi.at(y, x) = bilinear_zero(moving.roi, x + field.ux[i], y + field.uy[i]);
        }
    std::vector<double> mx(field.ux), my(field.uy);
    for (size_t i = 0; i < mx.size(); ++i) {
        mx[i] *= moving.bone.values[i];
        my[i] *= moving.bone.values[i];
    }
    const double n = static_cast<double>(field.pixel_count());
    return cfg.lambda[0] * soft_dice_loss(fixed.bone, warped_bone, cfg.sigma) +
           cfg.lambda[1] * soft_dice_loss(fixed.roi, warped_roi, cfg.sigma) +
           cfg.lambda[2] * forward_diff_energy(field.ux, field.uy, w, h) / n +
           cfg.lambda[3] * forward_diff_energy(mx, my, w, h) / n;
}

namespace {

std::vector<std::pair<int, int>> boundary(const LabelMask& m) {
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(y, x)) continue;
            bool edge = y == 0 || y == m.height - 1 || x == 0 || x == m.width - 1;
            if (!edge)
                edge = !m.at(y - 1, x) || !m.at(y + 1, x) || !m.at(y, x - 1) || !m.at(y, x + 1);
            if (edge) out.emplace_back(y, x);
        }
    return out;
}

}  // namespace

double brute_hausdorff(const LabelMask& a, const LabelMask& b) {
    const auto ba = boundary(a);
    const auto bb = boundary(b);
    auto directed = [](const std::vector<std::pair<int, int>>& from,
                       const std::vector<std::pair<int, int>>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::max();
            for (const auto& q : to)
                best = std::min(best, std::hypot(p.first - q.first, p.second - q.second));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(ba, bb), directed(bb, ba));
}

double brute_ssim(const Slice& a, const Slice& b) {
    constexpr int W = 11;
    constexpr double sigma = 1.5, C1 = 1e-4, C2 = 9e-4;
    double win[W][W], wsum = 0;
    for (int i = 0; i < W; ++i)
        for (int j = 0; j < W; ++j) {
            win[i][j] = std::exp(-((i - 5.0) * (i - 5.0) + (j - 5.0) * (j - 5.0)) /
                                 (2 * sigma * sigma));
            wsum += win[i][j];
        }
    double total = 0;
    int count = 0;
    for (int y = 0; y + W <= a.height; ++y)
        for (int x = 0; x + W <= a.width; ++x) {
            double ma = 0, mb = 0;
            for (int i = 0; i < W; ++i)
                for (int j = 0; j < W; ++j) {
                    ma += win[i][j] / wsum * a.at(y + i, x + j);
                    mb += win[i][j] / wsum * b.at(y + i, x + j);
                }
            double va = 0, vb = 0, cab = 0;
            for (int i = 0; i < W; ++i)
                for (int j = 0; j < W; ++j) {
                    const double da = a.at(y + i, x + j) - ma;
                    const double db = b.at(y + i, x + j) - mb;
                    va += win[i][j] / wsum * da * da;
                    vb += win[i][j] / wsum * db * db;
                    cab += win[i][j] / wsum * da * db;
                }
            total += ((2 * ma * mb + C1) * (2 * cab + C2)) /
                     ((ma * ma + mb * mb + C1) * (va + vb + C2));
            ++count;
        }
    return total / count;
}

LabelMask random_mask(std::mt19937_64& eng, int max_w, int max_h) {
    std::uniform_int_distribution<int> dim(1, max_w);
    const int w = dim(eng);
    const int h = std::uniform_int_distribution<int>(1, max_h)(eng);
    LabelMask m(w, h);
    const int n_shapes = std::uniform_int_distribution<int>(0, 5)(eng);
    for (int s = 0; s < n_shapes; ++s) {
        const int x0 = std::uniform_int_distribution<int>(0, w - 1)(eng);
        const int y0 = std::uniform_int_distribution<int>(0, h - 1)(eng);
        const int bw = std::uniform_int_distribution<int>(1, std::max(1, w / 2))(eng);
        const int bh = std::uniform_int_distribution<int>(1, std::max(1, h / 2))(eng);
        for (int y = y0; y < std::min(h, y0 + bh); ++y)
            for (int x = x0; x < std::min(w, x0 + bw); ++x) m.at(y, x) = 1;
    }
    // pepper
    const int n_px = std::uniform_int_distribution<int>(0, 8)(eng);
    for (int s = 0; s < n_px; ++s)
        m.at(std::uniform_int_distribution<int>(0, h - 1)(eng),
             std::uniform_int_distribution<int>(0, w - 1)(eng)) = 1;
    return m;
}

Slice random_slice(std::mt19937_64& eng, int w, int h) {
    Slice s(w, h);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    for (auto& v : s.values) v = std::min(val(eng), 1.0 - 1e-12);
    return s;
}

}  // namespace oracle
