// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "mrct/phantom.hpp"
#include "mrct/registration.hpp"
#include "mrct/similarity.hpp"

using namespace mrct;

TEST_CASE("same seed gives bit-identical stacks") {
    PhantomSpec spec;
    spec.seed = 99;
    spec.canvas_h = spec.canvas_w = 64;
    spec.depth_mr = 3;
    spec.depth_ct = 6;
    spec.noise_sigma = 0.02;
    const Phantom a = generate(spec);
    const Phantom b = generate(spec);
    REQUIRE(a.mr.depth() == b.mr.depth());
    for (int k = 0; k < a.mr.depth(); ++k) {
        CHECK(a.mr.slices[k].values == b.mr.slices[k].values);
        CHECK(a.mr.labels[k]->values == b.mr.labels[k]->values);
    }
    for (int i = 0; i < a.ct.depth(); ++i) CHECK(a.ct.slices[i].values == b.ct.slices[i].values);

    PhantomSpec other = spec;
    other.seed = 100;
    const Phantom c = generate(other);
    CHECK(c.mr.slices[0].values != a.mr.slices[0].values);
}

TEST_CASE("identical gaps and no offsets give a self-correspondent truth map") {
    PhantomSpec spec;
    spec.seed = 5;
    spec.canvas_h = spec.canvas_w = 64;
    spec.depth_mr = 5;
    spec.depth_ct = 5;
    spec.gap_mr_mm = spec.gap_ct_mm = 4.0;
    const Phantom ph = generate(spec);
    // opposed orientation: slice k corresponds to depth-1-k
    for (int k = 0; k < 5; ++k)
        CHECK(ph.truth.ct_index_for_mr[k] == doctest::Approx(4.0 - k));

    // labels at matching physical z are identical across modalities
    for (int k = 0; k < 5; ++k) {
        const int i = static_cast<int>(std::lround(ph.truth.ct_index_for_mr[k]));
        CHECK(dsc(*ph.mr.labels[k], *ph.ct.labels[i]) == doctest::Approx(1.0));
    }
}

TEST_CASE("gap ratio 2 truth maps MR slice k to CT depth-1-2k") {
    PhantomSpec spec;
    spec.seed = 6;
    spec.canvas_h = spec.canvas_w = 64;
    spec.depth_mr = 4;
    spec.depth_ct = 8;
    spec.gap_mr_mm = 5.0;
    spec.gap_ct_mm = 2.5;
    const Phantom ph = generate(spec);
    for (int k = 0; k < 4; ++k)
        CHECK(ph.truth.ct_index_for_mr[k] == doctest::Approx(7.0 - 2.0 * k));

    PhantomSpec same = spec;
    same.orientation = Orientation::same;
    const Phantom ps = generate(same);
    for (int k = 0; k < 4; ++k)
        CHECK(ps.truth.ct_index_for_mr[k] == doctest::Approx(2.0 * k));
}

TEST_CASE("modalities differ in intensity but share label geometry") {
    PhantomSpec spec;
    spec.seed = 7;
    spec.canvas_h = spec.canvas_w = 64;
    spec.depth_mr = 3;
    spec.depth_ct = 3;
    spec.gap_mr_mm = spec.gap_ct_mm = 3.0;
    const Phantom ph = generate(spec);
    // same z, different palettes
    double diff = 0;
    for (size_t i = 0; i < ph.mr.slices[0].values.size(); ++i)
        diff += std::abs(ph.mr.slices[0].values[i] - ph.ct.slices[2].values[i]);
    CHECK(diff / ph.mr.slices[0].values.size() > 0.05);
    CHECK(dsc(*ph.mr.labels[0], *ph.ct.labels[2]) == doctest::Approx(1.0));
}

TEST_CASE("labels are exact: bone pixels match the rendered bone palette") {
    PhantomSpec spec;
    spec.seed = 8;
    spec.canvas_h = spec.canvas_w = 64;
    spec.depth_mr = 2;
    spec.depth_ct = 2;
    spec.gap_mr_mm = spec.gap_ct_mm = 5.0;
    const Phantom ph = generate(spec);
    // CT palette renders bone at 0.92; no noise so the label must match
    // exactly the set of bone-valued pixels.
    for (int i = 0; i < 2; ++i) {
        const Slice& s = ph.ct.slices[i];
        const LabelMask& l = *ph.ct.labels[i];
        for (size_t p = 0; p < s.values.size(); ++p)
            CHECK((std::abs(s.values[p] - 0.92) < 1e-3) == (l.values[p] == 1));
    }
}

TEST_CASE("translation encodes the inverse field") {
    PhantomSpec spec;
    spec.seed = 9;
    spec.canvas_h = spec.canvas_w = 64;
    spec.depth_mr = 1;
    spec.depth_ct = 1;
    spec.translate_x = 4;
    spec.translate_y = -3;
    const Phantom ph = generate(spec);
    for (size_t i = 0; i < ph.truth.true_field.pixel_count(); ++i) {
        CHECK(ph.truth.true_field.ux[i] == doctest::Approx(-4.0));
        CHECK(ph.truth.true_field.uy[i] == doctest::Approx(3.0));
    }
    // warping the moving label with the truth field reproduces the fixed
    // label (palettes differ, so compare label geometry)
    const LabelMask moved_label = warp(*ph.mr.labels[0], ph.truth.true_field);
    CHECK(dsc(moved_label, *ph.ct.labels[0]) > 0.98);
}

TEST_CASE("warped phantom truth field aligns labels") {
    PhantomSpec spec;
    spec.seed = 10;
    spec.canvas_h = spec.canvas_w = 96;
    spec.depth_mr = 1;
    spec.depth_ct = 1;
    spec.translate_x = 3;
    spec.translate_y = 2;
    spec.warp_amplitude_px = 2.0;
    const Phantom ph = generate(spec);
    const LabelMask moved = warp(*ph.mr.labels[0], ph.truth.true_field);
    CHECK(dsc(moved, *ph.ct.labels[0]) > 0.95);
}

TEST_CASE("degenerate specs are rejected") {
    PhantomSpec spec;
    spec.canvas_h = spec.canvas_w = 33;
    spec.n_bones = 40;  // cannot fit
    CHECK_THROWS_AS(generate(spec), Error);

    PhantomSpec bad;
    bad.depth_mr = 0;
    CHECK_THROWS_AS(generate(bad), Error);
}
