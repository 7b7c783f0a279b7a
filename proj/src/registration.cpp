// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "mrct/registration.hpp"

#include <algorithm>
#include <cmath>

namespace mrct {

namespace {

struct Taps {
    double v00, v01, v10, v11;  // [y][x]
    double fx, fy;
};

inline Taps gather(const Slice& img, double x, double y, Border border) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    Taps t;
    t.fx = x - x0;
    t.fy = y - y0;
    auto tap = [&](int yy, int xx) -> double {
        if (border == Border::clamp) {
            yy = std::clamp(yy, 0, img.height - 1);
            xx = std::clamp(xx, 0, img.width - 1);
            return img.at(yy, xx);
        }
        return img.in_bounds(yy, xx) ? img.at(yy, xx) : 0.0;
    };
    t.v00 = tap(y0, x0);
    t.v01 = tap(y0, x0 + 1);
    t.v10 = tap(y0 + 1, x0);
    t.v11 = tap(y0 + 1, x0 + 1);
    return t;
}

inline double bilerp(const Taps& t) {
    return (1.0 - t.fy) * ((1.0 - t.fx) * t.v00 + t.fx * t.v01) +
           t.fy * ((1.0 - t.fx) * t.v10 + t.fx * t.v11);
}

// Spatial derivative of the bilinear sample w.r.t. the sample position.
inline void bilerp_grad(const Taps& t, double* gx, double* gy) {
    *gx = (1.0 - t.fy) * (t.v01 - t.v00) + t.fy * (t.v11 - t.v10);
    *gy = (1.0 - t.fx) * (t.v10 - t.v00) + t.fx * (t.v11 - t.v01);
}

void require_field_match(const Slice& img, const DisplacementField& field, const char* what) {
    if (img.width != field.width || img.height != field.height)
        throw Error(ErrorCode::dimension_mismatch, std::string(what) + ": field/image dimension mismatch");
}

Slice warp_soft(const Slice& image, const DisplacementField& field, Border border) {
    require_field_match(image, field, "warp");
    Slice out(image.width, image.height);
    size_t i = 0;
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x, ++i) {
            const Taps t = gather(image, x + field.ux[i], y + field.uy[i], border);
            out.values[i] = bilerp(t);
        }
    return out;
}

}  // namespace

Slice warp(const Slice& image, const DisplacementField& field, Border border) {
    return warp_soft(image, field, border);
}

LabelMask warp(const LabelMask& mask, const DisplacementField& field, Border border) {
    const Slice soft = warp_soft(mask.to_slice(), field, border);
    LabelMask out(mask.width, mask.height);
    for (size_t i = 0; i < soft.values.size(); ++i)
        out.values[i] = soft.values[i] >= 0.5 ? 1 : 0;
    return out;
}

FeatureGrid FeatureGrid::from_slice(const Slice& s) {
    FeatureGrid g(s.width, s.height, 1);
    std::copy(s.values.begin(), s.values.end(), g.data.begin());
    return g;
}

CostVolume correlation(const FeatureGrid& a, const FeatureGrid& b, int k, int d, int s1, int s2) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw Error(ErrorCode::dimension_mismatch, "correlation: feature grids must match");
    if (k < 0 || d < 0 || s1 < 1 || s2 < 1)
        throw Error(ErrorCode::invalid_argument, "correlation: require k,d >= 0 and s1,s2 >= 1");

    const int D = 2 * d + 1;
    CostVolume cv;
    cv.d = d;
    cv.out_w = (a.width + s1 - 1) / s1;
    cv.out_h = (a.height + s1 - 1) / s1;
    cv.data.assign(static_cast<size_t>(D) * D * cv.out_w * cv.out_h, 0.0);

    auto tap = [](const FeatureGrid& g, int c, int y, int x) -> double {
        return (y >= 0 && y < g.height && x >= 0 && x < g.width) ? g.at(c, y, x) : 0.0;
    };

    for (int oy = 0; oy < cv.out_h; ++oy) {
        const int y1 = oy * s1;
        for (int ox = 0; ox < cv.out_w; ++ox) {
            const int x1 = ox * s1;
            for (int dy = -d; dy <= d; ++dy) {
                for (int dx = -d; dx <= d; ++dx) {
                    const int y2 = y1 + dy * s2;
                    const int x2 = x1 + dx * s2;
                    double acc = 0.0;
                    for (int py = -k; py <= k; ++py)
                        for (int px = -k; px <= k; ++px)
                            for (int c = 0; c < a.channels; ++c)
                                acc += tap(a, c, y1 + py, x1 + px) * tap(b, c, y2 + py, x2 + px);
                    const int off = (dy + d) * D + (dx + d);
                    cv.data[(static_cast<size_t>(off) * cv.out_h + oy) * cv.out_w + ox] = acc;
                }
            }
        }
    }
    return cv;
}

double dsc_loss(const Slice& fixed_mask, const Slice& moved_mask, double sigma) {
    require_same_dims(fixed_mask, moved_mask, "dsc_loss");
    if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "dsc_loss: sigma must be positive");
    double inter = 0.0, sum_f = 0.0, sum_m = 0.0;
    for (size_t i = 0; i < fixed_mask.values.size(); ++i) {
        inter += fixed_mask.values[i] * moved_mask.values[i];
        sum_f += fixed_mask.values[i];
        sum_m += moved_mask.values[i];
    }
    return 1.0 - (2.0 * inter + sigma) / (sum_f + sum_m + sigma);
}

double diffusion_reg(const DisplacementField& field) {
    double sum = 0.0;
    const int w = field.width, h = field.height;
    for (const auto* plane : {&field.ux, &field.uy}) {
        const std::vector<double>& u = *plane;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const size_t i = static_cast<size_t>(y) * w + x;
                if (x + 1 < w) {
                    const double g = u[i + 1] - u[i];
                    sum += g * g;
                }
                if (y + 1 < h) {
                    const double g = u[i + w] - u[i];
                    sum += g * g;
                }
            }
    }
    return sum;
}

RegBundle make_bundle(const Slice& image, const LabelMask& bone, const LabelMask& roi) {
    validate(image);
    require_same_dims(bone, roi, "make_bundle");
    if (bone.width != image.width || bone.height != image.height)
        throw Error(ErrorCode::dimension_mismatch, "make_bundle: mask dims must match the image");
    return RegBundle{image, bone.to_slice(), roi.to_slice()};
}

namespace {

void require_bundles_match(const RegBundle& fixed, const RegBundle& moving) {
    require_same_dims(fixed.image, moving.image, "register");
    require_same_dims(fixed.image, fixed.bone, "register");
    require_same_dims(fixed.image, fixed.roi, "register");
    require_same_dims(moving.image, moving.bone, "register");
    require_same_dims(moving.image, moving.roi, "register");
}

void validate_config(const RegConfig& cfg) {
    if (cfg.levels < 1) throw Error(ErrorCode::invalid_argument, "RegConfig: levels must be >= 1");
    if (!(cfg.step_size > 0.0))
        throw Error(ErrorCode::invalid_argument, "RegConfig: step_size must be positive");
    if (!(cfg.sigma > 0.0))
        throw Error(ErrorCode::invalid_argument, "RegConfig: sigma must be positive");
    if (cfg.iters_per_level < 0)
        throw Error(ErrorCode::invalid_argument, "RegConfig: iters_per_level must be >= 0");
    for (double l : cfg.lambda)
        if (l < 0.0)
            throw Error(ErrorCode::invalid_argument, "RegConfig: lambda weights must be >= 0");
}

// Soft-Dice term and its gradient w.r.t. the warped moving grid, chained
// through the bilinear sampler onto the field.
double dice_term_grad(const Slice& fixed_mask, const Slice& moving_mask,
                      const DisplacementField& field, double sigma, double weight,
                      DisplacementField* grad) {
    double inter = 0.0, sum_f = 0.0, sum_m = 0.0;
    Slice moved(fixed_mask.width, fixed_mask.height);
    size_t i = 0;
    for (int y = 0; y < fixed_mask.height; ++y)
        for (int x = 0; x < fixed_mask.width; ++x, ++i) {
            const Taps t = gather(moving_mask, x + field.ux[i], y + field.uy[i], Border::zero);
            const double v = bilerp(t);
            moved.values[i] = v;
            inter += fixed_mask.values[i] * v;
            sum_f += fixed_mask.values[i];
            sum_m += v;
        }

    const double num = 2.0 * inter + sigma;
    const double den = sum_f + sum_m + sigma;
    const double loss = 1.0 - num / den;

    if (grad && weight != 0.0) {
        i = 0;
        for (int y = 0; y < fixed_mask.height; ++y)
            for (int x = 0; x < fixed_mask.width; ++x, ++i) {
                const double dl_dm = -(2.0 * fixed_mask.values[i] * den - num) / (den * den);
                const Taps t = gather(moving_mask, x + field.ux[i], y + field.uy[i], Border::zero);
                double gx, gy;
                bilerp_grad(t, &gx, &gy);
                grad->ux[i] += weight * dl_dm * gx;
                grad->uy[i] += weight * dl_dm * gy;
            }
    }
    return loss;
}

// d(diffusion_reg)/d(plane value) for one plane held in `u`; accumulates
// weight * derivative into gout.
void diffusion_grad_plane(const std::vector<double>& u, int w, int h, double weight,
                          std::vector<double>& gout) {
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            double g = 0.0;
            if (x + 1 < w) g -= 2.0 * (u[i + 1] - u[i]);
            if (x > 0) g += 2.0 * (u[i] - u[i - 1]);
            if (y + 1 < h) g -= 2.0 * (u[i + w] - u[i]);
            if (y > 0) g += 2.0 * (u[i] - u[i - w]);
            gout[i] += weight * g;
        }
}

LossTerms loss_impl(const RegBundle& fixed, const RegBundle& moving,
                    const DisplacementField& field, const RegConfig& cfg,
                    DisplacementField* grad) {
    if (grad) {
        *grad = DisplacementField(field.width, field.height);
    }
    LossTerms lt;
    lt.label_dice = dice_term_grad(fixed.bone, moving.bone, field, cfg.sigma, cfg.lambda[0], grad);
    lt.roi_dice = dice_term_grad(fixed.roi, moving.roi, field, cfg.sigma, cfg.lambda[1], grad);

    // Fourth term: regularizer of the field masked by the moving bone
    // label (pixelwise product).
    const size_t n = field.pixel_count();
    DisplacementField masked(field.width, field.height);
    for (size_t i = 0; i < n; ++i) {
        masked.ux[i] = field.ux[i] * moving.bone.values[i];
        masked.uy[i] = field.uy[i] * moving.bone.values[i];
    }
    // The smoothness terms are per-pixel means so the published weights
    // balance the [0,1] Dice terms at any resolution.
    const double inv_n = 1.0 / static_cast<double>(n);
    lt.smooth = diffusion_reg(field) * inv_n;
    lt.smooth_masked = diffusion_reg(masked) * inv_n;
    lt.total = cfg.lambda[0] * lt.label_dice + cfg.lambda[1] * lt.roi_dice +
               cfg.lambda[2] * lt.smooth + cfg.lambda[3] * lt.smooth_masked;

    if (grad) {
        if (cfg.lambda[2] != 0.0) {
            const double w2 = cfg.lambda[2] * inv_n;
            diffusion_grad_plane(field.ux, field.width, field.height, w2, grad->ux);
            diffusion_grad_plane(field.uy, field.width, field.height, w2, grad->uy);
        }
        if (cfg.lambda[3] != 0.0) {
            const double w3 = cfg.lambda[3] * inv_n;
            DisplacementField gm(field.width, field.height);
            diffusion_grad_plane(masked.ux, field.width, field.height, 1.0, gm.ux);
            diffusion_grad_plane(masked.uy, field.width, field.height, 1.0, gm.uy);
            for (size_t i = 0; i < n; ++i) {
                grad->ux[i] += w3 * gm.ux[i] * moving.bone.values[i];
                grad->uy[i] += w3 * gm.uy[i] * moving.bone.values[i];
            }
        }
    }
    return lt;
}

Slice downsample2(const Slice& s) {
    const int w2 = (s.width + 1) / 2;
    const int h2 = (s.height + 1) / 2;
    Slice out(w2, h2);
    for (int y = 0; y < h2; ++y)
        for (int x = 0; x < w2; ++x) {
            double acc = 0.0;
            int cnt = 0;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const int sy = 2 * y + dy, sx = 2 * x + dx;
                    if (sy < s.height && sx < s.width) {
                        acc += s.at(sy, sx);
                        ++cnt;
                    }
                }
            out.at(y, x) = acc / cnt;
        }
    return out;
}

RegBundle downsample2(const RegBundle& b) {
    return RegBundle{downsample2(b.image), downsample2(b.bone), downsample2(b.roi)};
}

// Bilinear field upsampling; displacement values scale with resolution.
DisplacementField upsample_field(const DisplacementField& f, int w, int h) {
    DisplacementField out(w, h);
    const double sx = static_cast<double>(f.width) / w;
    const double sy = static_cast<double>(f.height) / h;
    const double scale_x = static_cast<double>(w) / f.width;
    const double scale_y = static_cast<double>(h) / f.height;
    auto sample_plane = [&](const std::vector<double>& u, double x, double y) {
        const double px = std::clamp((x + 0.5) * sx - 0.5, 0.0, f.width - 1.0);
        const double py = std::clamp((y + 0.5) * sy - 0.5, 0.0, f.height - 1.0);
        const int x0 = std::min(static_cast<int>(px), f.width - 1);
        const int y0 = std::min(static_cast<int>(py), f.height - 1);
        const int x1 = std::min(x0 + 1, f.width - 1);
        const int y1 = std::min(y0 + 1, f.height - 1);
        const double fx = px - x0, fy = py - y0;
        const auto v = [&](int yy, int xx) { return u[static_cast<size_t>(yy) * f.width + xx]; };
        return (1 - fy) * ((1 - fx) * v(y0, x0) + fx * v(y0, x1)) +
               fy * ((1 - fx) * v(y1, x0) + fx * v(y1, x1));
    };
    size_t i = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x, ++i) {
            out.ux[i] = sample_plane(f.ux, x, y) * scale_x;
            out.uy[i] = sample_plane(f.uy, x, y) * scale_y;
        }
    return out;
}

}  // namespace

LossTerms total_loss(const RegBundle& fixed, const RegBundle& moving,
                     const DisplacementField& field, const RegConfig& cfg) {
    require_bundles_match(fixed, moving);
    require_field_match(fixed.image, field, "total_loss");
    validate_config(cfg);
    return loss_impl(fixed, moving, field, cfg, nullptr);
}

LossTerms total_loss_grad(const RegBundle& fixed, const RegBundle& moving,
                          const DisplacementField& field, const RegConfig& cfg,
                          DisplacementField* grad) {
    require_bundles_match(fixed, moving);
    require_field_match(fixed.image, field, "total_loss");
    validate_config(cfg);
    return loss_impl(fixed, moving, field, cfg, grad);
}

RegResult register_pair(const RegBundle& fixed, const RegBundle& moving, const RegConfig& cfg) {
    require_bundles_match(fixed, moving);
    validate_config(cfg);

    // Cap pyramid depth so the coarsest level keeps >= 16 px on the
    // short side.
    int levels = 1;
    {
        int short_side = std::min(fixed.image.width, fixed.image.height);
        while (levels < cfg.levels && (short_side >> 1) >= 16) {
            short_side >>= 1;
            ++levels;
        }
    }

    std::vector<RegBundle> fixed_pyr{fixed}, moving_pyr{moving};
    for (int l = 1; l < levels; ++l) {
        fixed_pyr.push_back(downsample2(fixed_pyr.back()));
        moving_pyr.push_back(downsample2(moving_pyr.back()));
    }

    RegResult result;
    result.initial_loss =
        loss_impl(fixed, moving, DisplacementField(fixed.image.width, fixed.image.height), cfg,
                  nullptr)
            .total;

    DisplacementField field(moving_pyr[levels - 1].image.width,
                            moving_pyr[levels - 1].image.height);

    for (int level = levels - 1; level >= 0; --level) {
        const RegBundle& fx = fixed_pyr[level];
        const RegBundle& mv = moving_pyr[level];
        if (field.width != fx.image.width || field.height != fx.image.height)
            field = upsample_field(field, fx.image.width, fx.image.height);

        if (level == 0) {
            // Keep the descent guarantee relative to the zero field at
            // full resolution.
            const double up_loss = loss_impl(fx, mv, field, cfg, nullptr).total;
            if (up_loss > result.initial_loss)
                field = DisplacementField(fx.image.width, fx.image.height);
        }

        // `step` caps the largest per-pixel displacement change of one
        // update. Heavy-ball momentum carries boundary forces into
        // constant-label interiors; it resets whenever a step is
        // rejected, so accepted iterations always decrease the loss.
        // A translation-subspace step (the gradient projected onto
        // global shifts) runs first each iteration: the Dice terms pin
        // only boundary-normal motion, and without it the bulk of the
        // field lags behind the locked boundary bands.
        double step = cfg.step_size;
        double step_t = cfg.step_size;
        DisplacementField grad;
        DisplacementField velocity(field.width, field.height);
        DisplacementField trial_v(field.width, field.height);
        DisplacementField trial(field.width, field.height);
        double current = loss_impl(fx, mv, field, cfg, nullptr).total;
        result.trace.push_back({level, -1, current});

        // Coarse levels get a larger budget; their sweeps cost 4^level
        // less and set up the interior of the field for the fine levels.
        const int level_iters = cfg.iters_per_level << level;
        for (int iter = 0; iter < level_iters; ++iter) {
            const LossTerms lt = loss_impl(fx, mv, field, cfg, &grad);
            if (!std::isfinite(lt.total))
                throw Error(ErrorCode::numeric, "register: non-finite objective value");
            current = lt.total;

            // Scale so a typical nonzero component moves a good fraction
            // of `step`, then clip: sparse spikes saturate at step
            // instead of stalling every other pixel.
            double gsq = 0.0;
            size_t gnz = 0;
            double gbar_x = 0.0, gbar_y = 0.0;
            for (size_t i = 0; i < grad.pixel_count(); ++i) {
                gsq += grad.ux[i] * grad.ux[i] + grad.uy[i] * grad.uy[i];
                gnz += (grad.ux[i] != 0.0) + (grad.uy[i] != 0.0);
                gbar_x += grad.ux[i];
                gbar_y += grad.uy[i];
            }
            if (gnz == 0) break;
            const double grms = std::sqrt(gsq / static_cast<double>(gnz));

            const double gbar_mag =
                std::hypot(gbar_x, gbar_y) / static_cast<double>(grad.pixel_count());
            while (gbar_mag > 0.0 && step_t >= cfg.min_step) {
                const double tx = -step_t * gbar_x / (gbar_mag * grad.pixel_count());
                const double ty = -step_t * gbar_y / (gbar_mag * grad.pixel_count());
                for (size_t i = 0; i < field.pixel_count(); ++i) {
                    trial.ux[i] = field.ux[i] + tx;
                    trial.uy[i] = field.uy[i] + ty;
                }
                const double trial_loss = loss_impl(fx, mv, trial, cfg, nullptr).total;
                if (std::isfinite(trial_loss) && trial_loss < current) {
                    std::swap(field, trial);
                    current = trial_loss;
                    step_t = std::min(step_t * 2.0, cfg.step_size);
                    result.trace.push_back({level, iter, current});
                    break;
                }
                step_t *= 0.5;
            }

            bool accepted = false;
            bool with_momentum = true;
            while (step >= cfg.min_step) {
                const double scale = step / grms;
                const double mu = with_momentum ? cfg.momentum : 0.0;
                auto move = [&](double g) { return std::clamp(scale * g, -step, step); };
                for (size_t i = 0; i < field.pixel_count(); ++i) {
                    trial_v.ux[i] = mu * velocity.ux[i] + move(grad.ux[i]);
                    trial_v.uy[i] = mu * velocity.uy[i] + move(grad.uy[i]);
                    trial.ux[i] = field.ux[i] - trial_v.ux[i];
                    trial.uy[i] = field.uy[i] - trial_v.uy[i];
                }
                const double trial_loss = loss_impl(fx, mv, trial, cfg, nullptr).total;
                if (std::isfinite(trial_loss) && trial_loss < current) {
                    std::swap(field, trial);
                    std::swap(velocity, trial_v);
                    current = trial_loss;
                    accepted = true;
                    step = std::min(step * 2.0, cfg.step_size);
                    break;
                }
                if (with_momentum) {
                    with_momentum = false;  // retry the same step without momentum
                    continue;
                }
                step *= 0.5;
            }
            if (!accepted) break;
            result.trace.push_back({level, iter, current});
        }
    }

    result.final_loss = loss_impl(fixed_pyr[0], moving_pyr[0], field, cfg, nullptr).total;
    result.field = std::move(field);
    return result;
}

}  // namespace mrct
