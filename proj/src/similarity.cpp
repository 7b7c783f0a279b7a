// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "mrct/similarity.hpp"

#include <algorithm>
#include <cmath>

namespace mrct {

bool aspect_gate(const ConnectedDomain& dom_ct, const ConnectedDomain& dom_mr, double gamma) {
    const double diff = dom_ct.aspect_ratio() - dom_mr.aspect_ratio();
    return std::abs(std::round(diff)) < gamma;
}

SimResult sim(const LabelMask& label_mr, const LabelMask& label_ct, const SimConfig& cfg) {
    const auto doms_mr = connected_domains(label_mr, cfg.connectivity);
    const auto doms_ct = connected_domains(label_ct, cfg.connectivity);

    SimResult result;
    if (doms_mr.empty() || doms_ct.empty()) return result;
    if (cfg.strict_count && doms_mr.size() != doms_ct.size()) return result;

    const size_t n = std::min(doms_mr.size(), doms_ct.size());
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const ConnectedDomain& dm = doms_mr[i];
        const ConnectedDomain& dc = doms_ct[i];
        if (!aspect_gate(dc, dm, cfg.gamma)) continue;

        // Overlap is measured in the CT bbox frame: the MR patch is
        // resized to the CT domain's bounding box dimensions.
        const LabelMask mr_patch = bbox_crop_resize(dm, dc.h, dc.w);
        const LabelMask ct_patch = bbox_patch(dc);

        long long inter = 0, count_mr = 0, count_ct = 0;
        for (size_t k = 0; k < ct_patch.values.size(); ++k) {
            inter += ct_patch.values[k] & mr_patch.values[k];
            count_ct += ct_patch.values[k];
            count_mr += mr_patch.values[k];
        }
        const double per_domain =
            static_cast<double>(inter) / static_cast<double>(count_mr + count_ct);
        result.matched.push_back({dm.rank, dc.rank, per_domain});
        sum += per_domain;
    }

    result.n_matched = static_cast<int>(result.matched.size());
    if (result.n_matched > 0) result.score = sum / result.n_matched;
    return result;
}

double dsc(const LabelMask& a, const LabelMask& b) {
    require_same_dims(a, b, "dsc");
    long long inter = 0, total = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        inter += a.values[i] & b.values[i];
        total += a.values[i] + b.values[i];
    }
    if (total == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

double mutual_information(const Slice& a, const Slice& b, int bins) {
    require_same_dims(a, b, "mutual_information");
    if (bins < 2) throw Error(ErrorCode::invalid_argument, "mutual_information: bins must be >= 2");

    const auto bin_of = [bins](double v) {
        int k = static_cast<int>(v * bins);
        return std::min(k, bins - 1);
    };

    std::vector<double> joint(static_cast<size_t>(bins) * bins, 0.0);
    const double n = static_cast<double>(a.values.size());
    for (size_t i = 0; i < a.values.size(); ++i)
        joint[static_cast<size_t>(bin_of(a.values[i])) * bins + bin_of(b.values[i])] += 1.0;

    std::vector<double> pa(bins, 0.0), pb(bins, 0.0);
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j) {
            joint[static_cast<size_t>(i) * bins + j] /= n;
            pa[i] += joint[static_cast<size_t>(i) * bins + j];
            pb[j] += joint[static_cast<size_t>(i) * bins + j];
        }

    double mi = 0.0;
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j) {
            const double p = joint[static_cast<size_t>(i) * bins + j];
            if (p > 0.0) mi += p * std::log(p / (pa[i] * pb[j]));
        }
    return std::max(mi, 0.0);
}

double ncc(const Slice& a, const Slice& b) {
    require_same_dims(a, b, "ncc");
    const size_t n = a.values.size();
    double mean_a = 0.0, mean_b = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_a += a.values[i];
        mean_b += b.values[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double da = a.values[i] - mean_a;
        const double db = b.values[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0)
        throw Error(ErrorCode::invalid_argument, "ncc: input has zero intensity variance");
    return cov / std::sqrt(var_a * var_b);
}

}  // namespace mrct
