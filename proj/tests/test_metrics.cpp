// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "mrct/metrics.hpp"
#include "mrct/similarity.hpp"
#include "oracles.hpp"

using namespace mrct;

namespace {

LabelMask square(int n, int top, int left, int side) {
    LabelMask m(n, n);
    for (int y = top; y < top + side; ++y)
        for (int x = left; x < left + side; ++x) m.at(y, x) = 1;
    return m;
}

}  // namespace

TEST_CASE("jaccard basics and the D/(2-D) identity") {
    const LabelMask a = square(16, 2, 2, 4);
    CHECK(jaccard(a, a) == doctest::Approx(1.0));
    CHECK(jaccard(a, square(16, 10, 10, 4)) == doctest::Approx(0.0));
    CHECK(jaccard(LabelMask(8, 8), LabelMask(8, 8)) == doctest::Approx(1.0));

    // the DSC 0.5 case: J = D/(2-D) = 1/3
    const LabelMask b = square(16, 2, 4, 4);
    CHECK(dsc(a, b) == doctest::Approx(0.5));
    CHECK(jaccard(a, b) == doctest::Approx(0.5 / 1.5));

    std::mt19937_64 eng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const LabelMask x = oracle::random_mask(eng, 16, 16);
        LabelMask y(x.width, x.height);
        for (auto& v : y.values) v = (eng() >> 13) & 1;
        const double d = dsc(x, y);
        const double j = jaccard(x, y);
        CHECK(std::abs(j - d / (2.0 - d)) < 1e-12);
        CHECK(j <= d + 1e-15);
    }
}

TEST_CASE("hausdorff basics") {
    const LabelMask a = square(16, 2, 2, 4);
    CHECK(hausdorff(a, a) == doctest::Approx(0.0));

    LabelMask p(16, 16), q(16, 16);
    p.at(4, 4) = 1;
    q.at(4, 9) = 1;
    CHECK(hausdorff(p, q) == doctest::Approx(5.0));

    // square vs the same square shifted by (3, 4): HD = 5
    const LabelMask s1 = square(24, 4, 4, 6);
    const LabelMask s2 = square(24, 7, 8, 6);
    CHECK(hausdorff(s1, s2) == doctest::Approx(5.0));
    CHECK(hausdorff(s1, s2) == doctest::Approx(oracle::brute_hausdorff(s1, s2)));

    CHECK_THROWS_AS(hausdorff(a, LabelMask(16, 16)), Error);
}

TEST_CASE("hausdorff matches the brute-force oracle and is a metric") {
    std::mt19937_64 eng(5);
    std::vector<LabelMask> masks;
    while (masks.size() < 12) {
        LabelMask m = oracle::random_mask(eng, 14, 14);
        LabelMask fixed_dims(14, 14);
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.at(y, x)) fixed_dims.at(y, x) = 1;
        if (!fixed_dims.empty_foreground()) masks.push_back(fixed_dims);
    }
    for (const auto& a : masks)
        for (const auto& b : masks) {
            const double got = hausdorff(a, b);
            CHECK(got == doctest::Approx(oracle::brute_hausdorff(a, b)));
            CHECK(got == doctest::Approx(hausdorff(b, a)));
            if (boundary_pixels(a) == boundary_pixels(b)) CHECK(got == 0.0);
        }
    // triangle inequality on random triples
    for (int t = 0; t < 100; ++t) {
        const auto& a = masks[eng() % masks.size()];
        const auto& b = masks[eng() % masks.size()];
        const auto& c = masks[eng() % masks.size()];
        CHECK(hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-12);
    }
}

TEST_CASE("ssim identity and constants") {
    std::mt19937_64 eng(7);
    const Slice a = oracle::random_slice(eng, 16, 16);
    CHECK(ssim(a, a) == doctest::Approx(1.0));
    CHECK(ssim(Slice(16, 16, 0.5), Slice(16, 16, 0.5)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(ssim(Slice(8, 8, 0.5), Slice(8, 8, 0.5)), Error);
}

TEST_CASE("ssim matches the direct sliding-window oracle") {
    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Slice a = oracle::random_slice(eng, 32, 32);
        const Slice b = oracle::random_slice(eng, 32, 32);
        CHECK(ssim(a, b) == doctest::Approx(oracle::brute_ssim(a, b)).epsilon(1e-9));
    }
}

TEST_CASE("jacobian stats hand cases") {
    const DisplacementField zero(8, 8);
    const JacobianStats z = jacobian_stats(zero);
    CHECK(z.jd_std == doctest::Approx(0.0));
    CHECK(z.jd_nonpos_frac == doctest::Approx(0.0));

    // u_x = -2x: det = (1 - 2) = -1 everywhere
    DisplacementField shrink(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) shrink.ux[y * 8 + x] = -2.0 * x;
    const JacobianStats s = jacobian_stats(shrink);
    CHECK(s.jd_std == doctest::Approx(0.0));
    CHECK(s.jd_nonpos_frac == doctest::Approx(1.0));

    // global translation: det = 1 everywhere
    DisplacementField trans(9, 5);
    std::fill(trans.ux.begin(), trans.ux.end(), 4.2);
    std::fill(trans.uy.begin(), trans.uy.end(), -1.7);
    const JacobianStats t = jacobian_stats(trans);
    CHECK(t.jd_std == doctest::Approx(0.0));
    CHECK(t.jd_nonpos_frac == doctest::Approx(0.0));
}

TEST_CASE("jacobian std matches a direct per-pixel recomputation") {
    std::mt19937_64 eng(13);
    const int w = 10, h = 8;
    DisplacementField f(w, h);
    std::uniform_real_distribution<double> d(-0.3, 0.3);
    for (size_t i = 0; i < f.pixel_count(); ++i) {
        f.ux[i] = d(eng);
        f.uy[i] = d(eng);
    }
    // direct recomputation with explicit forward/backward differences
    std::vector<double> det;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int xx = x + 1 < w ? x : x - 1;
            const int yy = y + 1 < h ? y : y - 1;
            const double dux_dx = f.ux[y * w + xx + 1] - f.ux[y * w + xx];
            const double duy_dx = f.uy[y * w + xx + 1] - f.uy[y * w + xx];
            const double dux_dy = f.ux[(yy + 1) * w + x] - f.ux[yy * w + x];
            const double duy_dy = f.uy[(yy + 1) * w + x] - f.uy[yy * w + x];
            det.push_back((1 + dux_dx) * (1 + duy_dy) - dux_dy * duy_dx);
        }
    double mean = 0;
    for (double v : det) mean += v;
    mean /= det.size();
    double var = 0;
    for (double v : det) var += (v - mean) * (v - mean);
    var /= det.size();

    const JacobianStats js = jacobian_stats(f);
    CHECK(js.jd_std == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
}

TEST_CASE("evaluate_pair identity tuple") {
    Slice img(32, 32, 0.0);
    LabelMask bone = square(32, 10, 10, 8);
    LabelMask roi = square(32, 4, 4, 24);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            if (roi.at(y, x)) img.at(y, x) = bone.at(y, x) ? 0.9 : 0.4;
    const RegBundle b = make_bundle(img, bone, roi);
    const MetricReport r = evaluate_pair(b, b, DisplacementField(32, 32));
    CHECK(r.dsc == doctest::Approx(1.0));
    CHECK(r.jaccard == doctest::Approx(1.0));
    CHECK(r.hd_px == doctest::Approx(0.0));
    CHECK(r.ssim == doctest::Approx(1.0));
    CHECK(r.sim_score == doctest::Approx(0.5));
    CHECK(r.jd_std == doctest::Approx(0.0));
    CHECK(r.jd_nonpos_frac == doctest::Approx(0.0));
}

TEST_CASE("evaluate_pair on disjoint labels") {
    Slice img(32, 32, 0.5);
    img.at(0, 0) = 0.0;  // avoid zero-variance for ssim stability
    const RegBundle fixed = make_bundle(img, square(32, 2, 2, 5), square(32, 0, 0, 32));
    const RegBundle moving = make_bundle(img, square(32, 20, 20, 5), square(32, 0, 0, 32));
    const MetricReport r = evaluate_pair(fixed, moving, DisplacementField(32, 32));
    CHECK(r.dsc == doctest::Approx(0.0));
    CHECK(r.jaccard == doctest::Approx(0.0));
}
