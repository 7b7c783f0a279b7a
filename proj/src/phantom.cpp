// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "mrct/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mrct {

namespace {

constexpr double kPi = 3.14159265358979323846;

// mt19937_64 with fixed output mappings so stacks are bit-identical for a
// seed independent of the standard library's distribution internals.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double pick_sign() { return uniform() < 0.5 ? -1.0 : 1.0; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct Lobe {
    double cx, cy, cz;
    double rx, ry, rz;
};

// One "bone": the union of two overlapping ellipsoid lobes whose z offset
// makes the in-plane cross-section shape vary along the stack.
struct Bone {
    Lobe a, b;

    double center_x() const { return 0.5 * (a.cx + b.cx); }
    double center_y() const { return 0.5 * (a.cy + b.cy); }

    // In-plane radius of the bone around its center.
    double extent() const {
        double e = 0.0;
        for (const Lobe* l : {&a, &b}) {
            const double dc = std::hypot(l->cx - center_x(), l->cy - center_y());
            e = std::max(e, dc + std::max(l->rx, l->ry));
        }
        return e;
    }
};

bool inside_lobe(const Lobe& l, double x, double y, double z) {
    const double dx = (x - l.cx) / l.rx;
    const double dy = (y - l.cy) / l.ry;
    const double dz = (z - l.cz) / l.rz;
    return dx * dx + dy * dy + dz * dz <= 1.0;
}

bool inside_bone(const Bone& b, double x, double y, double z) {
    return inside_lobe(b.a, x, y, z) || inside_lobe(b.b, x, y, z);
}

struct Scene {
    double body_cx, body_cy, body_rx, body_ry;
    std::vector<Bone> bones;
    double z_extent;

    // Squared elliptical radius; <= 1 inside the body.
    double body_r2(double x, double y) const {
        const double dx = (x - body_cx) / body_rx;
        const double dy = (y - body_cy) / body_ry;
        return dx * dx + dy * dy;
    }
};

struct Palette {
    // intensity = tissue_base + tissue_gain * (1 - r^2) inside the body.
    double tissue_base, tissue_gain, bone_value;
};

constexpr Palette kMrPalette{0.55, 0.25, 0.12};
constexpr Palette kCtPalette{0.33, 0.10, 0.92};

double quantize16(double v) { return std::round(v * 65535.0) / 65535.0; }

Scene build_scene(const PhantomSpec& spec, Rng& rng) {
    Scene scene;
    scene.body_cx = (spec.canvas_w - 1) / 2.0;
    scene.body_cy = (spec.canvas_h - 1) / 2.0;
    scene.body_rx = 0.38 * spec.canvas_w;
    scene.body_ry = 0.36 * spec.canvas_h;
    scene.z_extent = std::max(1.0, (spec.depth_mr - 1) * spec.gap_mr_mm);

    const double min_dim = std::min(spec.canvas_w, spec.canvas_h);
    const double z = scene.z_extent;

    for (int i = 0; i < spec.n_bones; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
            Bone bone;
            const double cx = scene.body_cx + rng.uniform(-0.62, 0.62) * scene.body_rx;
            const double cy = scene.body_cy + rng.uniform(-0.62, 0.62) * scene.body_ry;
            const double cz = rng.uniform(0.2, 0.8) * z;

            bone.a.rx = rng.uniform(0.045, 0.085) * min_dim;
            bone.a.ry = rng.uniform(0.045, 0.085) * min_dim;
            bone.a.rz = rng.uniform(0.30, 0.55) * z;
            bone.b.rx = rng.uniform(0.035, 0.075) * min_dim;
            bone.b.ry = rng.uniform(0.035, 0.075) * min_dim;
            bone.b.rz = rng.uniform(0.30, 0.55) * z;

            const double off_scale = 0.5 * (bone.a.rx + bone.b.rx);
            const double ox = rng.pick_sign() * rng.uniform(0.5, 0.9) * off_scale;
            const double oy = rng.pick_sign() * rng.uniform(0.5, 0.9) * off_scale;
            const double oz = rng.pick_sign() * rng.uniform(0.15, 0.35) * z;
            bone.a.cx = cx - ox / 2;
            bone.a.cy = cy - oy / 2;
            bone.a.cz = cz - oz / 2;
            bone.b.cx = cx + ox / 2;
            bone.b.cy = cy + oy / 2;
            bone.b.cz = cz + oz / 2;

            // Keep the bone inside the body with margin and away from the
            // other bones so connected domains stay separate.
            bool ok = true;
            for (const Lobe* l : {&bone.a, &bone.b}) {
                const double margin_x = (std::abs(l->cx - scene.body_cx) + l->rx) / scene.body_rx;
                const double margin_y = (std::abs(l->cy - scene.body_cy) + l->ry) / scene.body_ry;
                if (margin_x > 0.9 || margin_y > 0.9) ok = false;
            }
            for (const Bone& other : scene.bones) {
                const double dx = bone.center_x() - other.center_x();
                const double dy = bone.center_y() - other.center_y();
                if (std::hypot(dx, dy) < bone.extent() + other.extent() + 3.0) ok = false;
            }
            if (ok) {
                scene.bones.push_back(bone);
                placed = true;
            }
        }
        if (!placed)
            throw Error(ErrorCode::invalid_argument,
                        "phantom: could not place bones inside the canvas (degenerate spec)");
    }
    return scene;
}

// In-plane displacement applied to the moving stack's sampling positions.
struct WarpField {
    double amplitude = 0.0;
    int w = 1, h = 1;

    void eval(double x, double y, double* wx, double* wy) const {
        if (amplitude == 0.0) {
            *wx = *wy = 0.0;
            return;
        }
        *wx = amplitude * std::sin(2.0 * kPi * y / h) * std::cos(kPi * x / w);
        *wy = amplitude * std::cos(kPi * y / h) * std::sin(2.0 * kPi * x / w);
    }
};

double render_pixel(const Scene& scene, const Palette& pal, double x, double y, double z) {
    const double r2 = scene.body_r2(x, y);
    if (r2 > 1.0) return 0.0;
    for (const Bone& b : scene.bones)
        if (inside_bone(b, x, y, z)) return pal.bone_value;
    return pal.tissue_base + pal.tissue_gain * (1.0 - r2);
}

bool label_pixel(const Scene& scene, double x, double y, double z) {
    for (const Bone& b : scene.bones)
        if (inside_bone(b, x, y, z)) return true;
    return false;
}

}  // namespace

Phantom generate(const PhantomSpec& spec) {
    if (spec.depth_mr < 1 || spec.depth_ct < 1)
        throw Error(ErrorCode::invalid_argument, "phantom: depths must be >= 1");
    if (!(spec.gap_mr_mm > 0.0) || !(spec.gap_ct_mm > 0.0))
        throw Error(ErrorCode::invalid_argument, "phantom: layer gaps must be positive");
    if (spec.noise_sigma < 0.0)
        throw Error(ErrorCode::invalid_argument, "phantom: noise_sigma must be >= 0");
    if (spec.canvas_h < 32 || spec.canvas_w < 32)
        throw Error(ErrorCode::invalid_argument, "phantom: canvas must be at least 32x32");

    Rng rng(spec.seed);
    const Scene scene = build_scene(spec, rng);

    WarpField warp_field;
    warp_field.amplitude = spec.warp_amplitude_px;
    warp_field.w = spec.canvas_w;
    warp_field.h = spec.canvas_h;

    const Palette mr_pal =
        spec.contrast == PhantomSpec::Contrast::mr_like ? kMrPalette : kCtPalette;
    const Palette ct_pal = kCtPalette;

    const auto z_of_ct = [&](int i) {
        return spec.orientation == Orientation::opposed
                   ? (spec.depth_ct - 1 - i) * spec.gap_ct_mm
                   : i * spec.gap_ct_mm;
    };
    const auto ct_index_of_z = [&](double z) {
        return spec.orientation == Orientation::opposed
                   ? (spec.depth_ct - 1) - z / spec.gap_ct_mm
                   : z / spec.gap_ct_mm;
    };

    Phantom out;
    out.mr.modality = Modality::MR;
    out.mr.layer_gap_mm = spec.gap_mr_mm;
    out.ct.modality = Modality::CT;
    out.ct.layer_gap_mm = spec.gap_ct_mm;

    // Fixed (CT) stack samples the scene directly.
    for (int i = 0; i < spec.depth_ct; ++i) {
        const double z = z_of_ct(i);
        Slice s(spec.canvas_w, spec.canvas_h);
        LabelMask l(spec.canvas_w, spec.canvas_h);
        for (int y = 0; y < spec.canvas_h; ++y)
            for (int x = 0; x < spec.canvas_w; ++x) {
                double v = render_pixel(scene, ct_pal, x, y, z);
                if (spec.noise_sigma > 0.0)
                    v += spec.noise_sigma * rng.normal();
                s.at(y, x) = quantize16(std::clamp(v, 0.0, 1.0));
                l.at(y, x) = label_pixel(scene, x, y, z) ? 1 : 0;
            }
        out.ct.slices.push_back(std::move(s));
        out.ct.labels.emplace_back(std::move(l));
    }

    // Moving (MR) stack samples at p + translation + warp(p).
    for (int k = 0; k < spec.depth_mr; ++k) {
        const double z = k * spec.gap_mr_mm;
        Slice s(spec.canvas_w, spec.canvas_h);
        LabelMask l(spec.canvas_w, spec.canvas_h);
        for (int y = 0; y < spec.canvas_h; ++y)
            for (int x = 0; x < spec.canvas_w; ++x) {
                double wx, wy;
                warp_field.eval(x, y, &wx, &wy);
                const double sx = x + spec.translate_x + wx;
                const double sy = y + spec.translate_y + wy;
                double v = render_pixel(scene, mr_pal, sx, sy, z);
                if (spec.noise_sigma > 0.0)
                    v += spec.noise_sigma * rng.normal();
                s.at(y, x) = quantize16(std::clamp(v, 0.0, 1.0));
                l.at(y, x) = label_pixel(scene, sx, sy, z) ? 1 : 0;
            }
        out.mr.slices.push_back(std::move(s));
        out.mr.labels.emplace_back(std::move(l));
        out.truth.ct_index_for_mr.push_back(ct_index_of_z(z));
    }

    // True aligning field: the inverse of p -> p + t + warp(p), solved by
    // fixed-point iteration (warp gradients are well below 1).
    out.truth.true_field = DisplacementField(spec.canvas_w, spec.canvas_h);
    if (spec.translate_x != 0.0 || spec.translate_y != 0.0 || spec.warp_amplitude_px != 0.0) {
        size_t i = 0;
        for (int y = 0; y < spec.canvas_h; ++y)
            for (int x = 0; x < spec.canvas_w; ++x, ++i) {
                double ux = -spec.translate_x, uy = -spec.translate_y;
                for (int it = 0; it < 20; ++it) {
                    double wx, wy;
                    warp_field.eval(x + ux, y + uy, &wx, &wy);
                    ux = -spec.translate_x - wx;
                    uy = -spec.translate_y - wy;
                }
                out.truth.true_field.ux[i] = ux;
                out.truth.true_field.uy[i] = uy;
            }
    }
    return out;
}

}  // namespace mrct
