// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "mrct/metrics.hpp"
#include "mrct/registration.hpp"
#include "oracles.hpp"

using namespace mrct;

namespace {

DisplacementField constant_field(int w, int h, double ux, double uy) {
    DisplacementField f(w, h);
    std::fill(f.ux.begin(), f.ux.end(), ux);
    std::fill(f.uy.begin(), f.uy.end(), uy);
    return f;
}

DisplacementField random_field(std::mt19937_64& eng, int w, int h, double amp) {
    DisplacementField f(w, h);
    std::uniform_real_distribution<double> d(-amp, amp);
    for (size_t i = 0; i < f.pixel_count(); ++i) {
        f.ux[i] = d(eng);
        f.uy[i] = d(eng);
    }
    return f;
}

RegBundle random_bundle(std::mt19937_64& eng, int w, int h) {
    RegBundle b;
    b.image = oracle::random_slice(eng, w, h);
    b.bone = oracle::random_slice(eng, w, h);
    b.roi = oracle::random_slice(eng, w, h);
    return b;
}

// Disk bone in an elliptical body; content offset by (dx, dy). With
// moving = bundle(d) and fixed = bundle(0), the aligning field is -d.
RegBundle disk_bundle(int n, double r, double dx, double dy) {
    Slice img(n, n);
    LabelMask bone(n, n), roi(n, n);
    const double c = (n - 1) / 2.0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double sx = x + dx, sy = y + dy;
            const double bx = (sx - c) / (0.40 * n), by = (sy - c) / (0.36 * n);
            const double body_r2 = bx * bx + by * by;
            if (body_r2 > 1.0) continue;
            roi.at(y, x) = 1;
            const bool in_disk = std::hypot(sx - c, sy - c) <= r;
            img.at(y, x) = in_disk ? 0.92 : 0.35 + 0.1 * (1.0 - body_r2);
            bone.at(y, x) = in_disk ? 1 : 0;
        }
    return make_bundle(img, bone, roi);
}

}  // namespace

TEST_CASE("warp with a zero field is the identity") {
    std::mt19937_64 eng(1);
    const Slice s = oracle::random_slice(eng, 9, 7);
    const DisplacementField zero(9, 7);
    CHECK(warp(s, zero).values == s.values);

    const LabelMask m = oracle::random_mask(eng, 9, 9);
    const DisplacementField zero_m(m.width, m.height);
    CHECK(warp(m, zero_m).values == m.values);
}

TEST_CASE("constant field shifts content with zero fill") {
    Slice s(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) s.at(y, x) = (x + 1) / 10.0;
    const Slice out = warp(s, constant_field(8, 8, -3.0, 0.0), Border::zero);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 3; ++x) CHECK(out.at(y, x) == doctest::Approx(0.0));
        for (int x = 3; x < 8; ++x) CHECK(out.at(y, x) == doctest::Approx(s.at(y, x - 3)));
    }
    // clamp border repeats the edge sample instead
    const Slice clamped = warp(s, constant_field(8, 8, -3.0, 0.0), Border::clamp);
    CHECK(clamped.at(4, 0) == doctest::Approx(s.at(4, 0)));
}

TEST_CASE("bilinear midpoint between 0 and 1 is 0.5") {
    Slice s(2, 1);
    s.at(0, 0) = 0.0;
    s.at(0, 1) = 1.0;
    DisplacementField f(2, 1);
    f.ux[0] = 0.5;
    const Slice out = warp(s, f);
    CHECK(out.at(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("correlation collapses to a channel dot product at k=d=0") {
    std::mt19937_64 eng(2);
    FeatureGrid a(4, 3, 2), b(4, 3, 2);
    std::uniform_real_distribution<double> d(-1, 1);
    for (auto& v : a.data) v = d(eng);
    for (auto& v : b.data) v = d(eng);
    const CostVolume cv = correlation(a, b, 0, 0, 1, 1);
    CHECK(cv.channel_count() == 1);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) {
            const double want = a.at(0, y, x) * b.at(0, y, x) + a.at(1, y, x) * b.at(1, y, x);
            CHECK(cv.at(0, y, x) == doctest::Approx(want));
        }
}

TEST_CASE("correlation of 1x1 grids is the scalar product") {
    FeatureGrid a(1, 1, 1), b(1, 1, 1);
    a.data[0] = 0.3;
    b.data[0] = -0.7;
    const CostVolume cv = correlation(a, b, 0, 0, 1, 1);
    CHECK(cv.at(0, 0, 0) == doctest::Approx(-0.21));
}

TEST_CASE("correlation equals the quadruple-loop oracle bit for bit") {
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> val(-1, 1);
    for (int trial = 0; trial < 60; ++trial) {
        const int w = 1 + static_cast<int>(eng() % 8);
        const int h = 1 + static_cast<int>(eng() % 8);
        const int c = 1 + static_cast<int>(eng() % 3);
        FeatureGrid a(w, h, c), b(w, h, c);
        for (auto& v : a.data) v = val(eng);
        for (auto& v : b.data) v = val(eng);
        const int k = static_cast<int>(eng() % 2);
        const int d = static_cast<int>(eng() % 3);
        const int s1 = 1 + static_cast<int>(eng() % 2);
        const int s2 = 1 + static_cast<int>(eng() % 2);
        const CostVolume got = correlation(a, b, k, d, s1, s2);
        const CostVolume want = oracle::brute_correlation(a, b, k, d, s1, s2);
        REQUIRE(got.data.size() == want.data.size());
        for (size_t i = 0; i < got.data.size(); ++i) CHECK(got.data[i] == want.data[i]);
    }
}

TEST_CASE("dsc_loss hand cases") {
    Slice full(4, 4, 1.0);
    CHECK(dsc_loss(full, full, 1e-5) == doctest::Approx(0.0));
    Slice empty(4, 4, 0.0);
    CHECK(dsc_loss(empty, empty, 1e-5) == doctest::Approx(0.0));

    // disjoint unit pixels
    Slice a(4, 4, 0.0), b(4, 4, 0.0);
    a.at(0, 0) = 1.0;
    b.at(3, 3) = 1.0;
    const double sigma = 1e-5;
    CHECK(dsc_loss(a, b, sigma) == doctest::Approx(1.0 - sigma / (2.0 + sigma)));
    CHECK(dsc_loss(a, b, sigma) > 0.99999);
}

TEST_CASE("diffusion_reg hand cases") {
    CHECK(diffusion_reg(constant_field(8, 8, 3.7, -2.2)) == doctest::Approx(0.0));
    CHECK(diffusion_reg(DisplacementField(8, 8)) == doctest::Approx(0.0));

    DisplacementField ramp(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) ramp.ux[y * 8 + x] = x;
    // interior forward differences all 1: 7 per row, 8 rows
    CHECK(diffusion_reg(ramp) == doctest::Approx(56.0));
}

TEST_CASE("diffusion_reg is translation invariant") {
    std::mt19937_64 eng(5);
    const DisplacementField f = random_field(eng, 10, 9, 2.0);
    DisplacementField g = f;
    for (auto& v : g.ux) v += 13.5;
    for (auto& v : g.uy) v -= 4.25;
    CHECK(diffusion_reg(g) == doctest::Approx(diffusion_reg(f)).epsilon(1e-12));
}

TEST_CASE("total_loss identity configuration is zero") {
    std::mt19937_64 eng(7);
    RegBundle b = random_bundle(eng, 12, 12);
    const DisplacementField zero(12, 12);
    const LossTerms lt = total_loss(b, b, zero, {});
    CHECK(lt.total == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(lt.label_dice == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(lt.roi_dice == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(lt.smooth == 0.0);
    CHECK(lt.smooth_masked == 0.0);
}

TEST_CASE("total_loss with zero field has no regularizer contribution") {
    RegBundle fixed, moving;
    fixed.image = Slice(8, 8, 0.5);
    moving.image = Slice(8, 8, 0.5);
    LabelMask fb(8, 8), mb(8, 8);
    fb.at(1, 1) = 1;
    mb.at(6, 6) = 1;
    fixed.bone = fb.to_slice();
    moving.bone = mb.to_slice();
    LabelMask roi(8, 8, 1);
    fixed.roi = roi.to_slice();
    moving.roi = roi.to_slice();

    RegConfig cfg;
    const LossTerms lt = total_loss(fixed, moving, DisplacementField(8, 8), cfg);
    CHECK(lt.smooth == 0.0);
    CHECK(lt.smooth_masked == 0.0);
    CHECK(lt.total ==
          doctest::Approx(cfg.lambda[0] * lt.label_dice + cfg.lambda[1] * lt.roi_dice));
    CHECK(lt.label_dice > 0.99);
    CHECK(lt.roi_dice == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("total_loss equals the straight-line oracle on random bundles") {
    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const RegBundle fixed = random_bundle(eng, 10, 10);
        const RegBundle moving = random_bundle(eng, 10, 10);
        const DisplacementField f = random_field(eng, 10, 10, 2.0);
        RegConfig cfg;
        cfg.sigma = 1e-4;
        const double want = oracle::brute_total_loss(fixed, moving, f, cfg);
        CHECK(total_loss(fixed, moving, f, cfg).total == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 eng(13);
    const RegBundle fixed = random_bundle(eng, 16, 16);
    const RegBundle moving = random_bundle(eng, 16, 16);
    DisplacementField field = random_field(eng, 16, 16, 1.5);
    RegConfig cfg;  // lambda (1,4,3,4)

    DisplacementField grad;
    total_loss_grad(fixed, moving, field, cfg, &grad);

    const double h = 1e-6;
    std::uniform_int_distribution<size_t> pick(0, field.pixel_count() - 1);
    for (int trial = 0; trial < 100; ++trial) {
        const size_t i = pick(eng);
        const bool xc = eng() & 1;
        auto& plane = xc ? field.ux : field.uy;
        const double saved = plane[i];
        plane[i] = saved + h;
        const double lp = total_loss(fixed, moving, field, cfg).total;
        plane[i] = saved - h;
        const double lm = total_loss(fixed, moving, field, cfg).total;
        plane[i] = saved;
        const double fd = (lp - lm) / (2 * h);
        const double an = xc ? grad.ux[i] : grad.uy[i];
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-12});
        CHECK(rel < 1e-4);
    }
}

TEST_CASE("masked regularizer equals the full one under an all-ones mask") {
    std::mt19937_64 eng(17);
    RegBundle fixed = random_bundle(eng, 12, 12);
    RegBundle moving = random_bundle(eng, 12, 12);
    moving.bone = Slice(12, 12, 1.0);  // full-ones mask
    const DisplacementField f = random_field(eng, 12, 12, 1.0);
    const LossTerms lt = total_loss(fixed, moving, f, {});
    CHECK(lt.smooth_masked == doctest::Approx(lt.smooth).epsilon(1e-12));
}

TEST_CASE("register with zero iterations returns the zero field") {
    RegBundle fixed = disk_bundle(64, 6, 0, 0);
    RegBundle moving = disk_bundle(64, 6, 2, 1);
    RegConfig cfg;
    cfg.lambda = {1, 4, 0, 0};
    cfg.levels = 1;
    cfg.iters_per_level = 0;
    const RegResult r = register_pair(fixed, moving, cfg);
    for (double v : r.field.ux) CHECK(v == 0.0);
    for (double v : r.field.uy) CHECK(v == 0.0);
    CHECK(r.final_loss == doctest::Approx(r.initial_loss));
}

TEST_CASE("register on an identical pair stays near the zero field") {
    RegBundle b = disk_bundle(64, 7, 0, 0);
    RegConfig cfg;
    cfg.iters_per_level = 60;
    const RegResult r = register_pair(b, b, cfg);
    double mean_mag = 0;
    for (size_t i = 0; i < r.field.pixel_count(); ++i)
        mean_mag += std::hypot(r.field.ux[i], r.field.uy[i]);
    mean_mag /= static_cast<double>(r.field.pixel_count());
    CHECK(mean_mag < 0.1);
}

TEST_CASE("register recovers a pure translation of the disk phantom") {
    // moving = fixed translated by (5, 0): moving(p) = fixed(p + (5,0)),
    // so the aligning field is (-5, 0).
    RegBundle fixed = disk_bundle(128, 7.5, 0, 0);
    RegBundle moving = disk_bundle(128, 7.5, 5, 0);

    RegConfig cfg;
    cfg.lambda = {1, 4, 3, 0.5};
    cfg.levels = 4;
    cfg.iters_per_level = 400;
    const RegResult r = register_pair(fixed, moving, cfg);
    CHECK(r.final_loss <= r.initial_loss);

    double mx = 0, my = 0;
    size_t cnt = 0;
    for (size_t i = 0; i < r.field.pixel_count(); ++i)
        if (moving.bone.values[i] > 0.5) {
            mx += r.field.ux[i];
            my += r.field.uy[i];
            ++cnt;
        }
    REQUIRE(cnt > 0);
    CHECK(std::abs(mx / cnt - (-5.0)) < 0.5);
    CHECK(std::abs(my / cnt - 0.0) < 0.5);
}

TEST_CASE("register trace is monotone within levels and never worse overall") {
    RegBundle fixed = disk_bundle(64, 6, 0, 0);
    RegBundle moving = disk_bundle(64, 6, 3, 2);
    RegConfig cfg;
    cfg.iters_per_level = 50;
    const RegResult r = register_pair(fixed, moving, cfg);
    CHECK(r.final_loss <= r.initial_loss);
    for (size_t i = 1; i < r.trace.size(); ++i)
        if (r.trace[i].level == r.trace[i - 1].level)
            CHECK(r.trace[i].loss <= r.trace[i - 1].loss);
}

TEST_CASE("register is deterministic") {
    RegBundle fixed = disk_bundle(64, 6, 0, 0);
    RegBundle moving = disk_bundle(64, 6, 3, -2);
    RegConfig cfg;
    cfg.iters_per_level = 40;
    const RegResult a = register_pair(fixed, moving, cfg);
    const RegResult b = register_pair(fixed, moving, cfg);
    CHECK(a.field.ux == b.field.ux);
    CHECK(a.field.uy == b.field.uy);
    CHECK(a.final_loss == b.final_loss);
}

TEST_CASE("register rejects dimension mismatches") {
    RegBundle fixed = disk_bundle(64, 6, 0, 0);
    RegBundle moving = disk_bundle(32, 6, 0, 0);
    CHECK_THROWS_AS(register_pair(fixed, moving, {}), Error);
}
