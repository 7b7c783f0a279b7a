// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "mrctreg.h"

#include <cstring>
#include <string>
#include <vector>

#include "mrct/align.hpp"
#include "mrct/image.hpp"
#include "mrct/io.hpp"
#include "mrct/metrics.hpp"
#include "mrct/phantom.hpp"
#include "mrct/preprocess.hpp"
#include "mrct/registration.hpp"
#include "mrct/similarity.hpp"

struct mrct_image {
    mrct::Slice slice;
};
struct mrct_stack {
    mrct::ImageStack stack;
};
struct mrct_field {
    mrct::DisplacementField field;
};
struct mrct_correspondence {
    mrct::CorrespondenceSet set;
};
struct mrct_phantom_truth {
    mrct::PhantomTruth truth;
};

namespace {

thread_local std::string g_last_error;

mrct_status map_code(mrct::ErrorCode code) {
    using EC = mrct::ErrorCode;
    switch (code) {
        case EC::invalid_argument: return MRCT_ERR_INVALID_ARGUMENT;
        case EC::io: return MRCT_ERR_IO;
        case EC::format: return MRCT_ERR_FORMAT;
        case EC::dimension_mismatch: return MRCT_ERR_DIMENSION;
        case EC::empty_roi: return MRCT_ERR_EMPTY_ROI;
        case EC::numeric: return MRCT_ERR_NUMERIC;
        case EC::internal: return MRCT_ERR_INTERNAL;
    }
    return MRCT_ERR_INTERNAL;
}

template <typename Fn>
mrct_status wrap(Fn&& fn) noexcept {
    try {
        fn();
        return MRCT_OK;
    } catch (const mrct::Error& e) {
        g_last_error = e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MRCT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return MRCT_ERR_INTERNAL;
    }
}

mrct_status fail_null(const char* what) {
    g_last_error = std::string(what) + ": null argument";
    return MRCT_ERR_INVALID_ARGUMENT;
}

mrct::LabelMask to_mask(const mrct::Slice& s) {
    mrct::LabelMask m(s.width, s.height);
    for (size_t i = 0; i < s.values.size(); ++i) m.values[i] = s.values[i] >= 0.5 ? 1 : 0;
    return m;
}

mrct::AlignConfig to_align_config(const mrct_align_params* p) {
    mrct::AlignConfig cfg;
    if (!p) return cfg;
    cfg.sim.gamma = p->gamma;
    cfg.sim.connectivity = p->connectivity == 4 ? mrct::Connectivity::four : mrct::Connectivity::eight;
    cfg.sim.strict_count = p->strict_count != 0;
    cfg.orientation = p->same_orientation ? mrct::Orientation::same : mrct::Orientation::opposed;
    cfg.blend = p->swapped_blend ? mrct::BlendMode::swapped : mrct::BlendMode::standard;
    cfg.threads = p->threads;
    return cfg;
}

struct PipelineResult {
    mrct::DisplacementField field;
    mrct::Slice warped_image;
    mrct::LabelMask warped_label;
    mrct_metric_report report{};
};

// Shared register pipeline: optional offset correction, ROI extraction,
// optional label denoising, optimization, evaluation.
PipelineResult run_pipeline(mrct::Slice fixed_image, mrct::LabelMask fixed_label,
                            mrct::Slice moving_image, mrct::LabelMask moving_label,
                            const mrct_reg_params& p) {
    mrct::PreprocConfig pre;
    pre.out_h = fixed_image.height;
    pre.out_w = fixed_image.width;
    pre.gamma = p.gamma;

    mrct::LabelMask fixed_roi = mrct::roi_mask(fixed_image, pre);
    mrct::LabelMask moving_roi = mrct::roi_mask(moving_image, pre);

    if (p.offset_correct) {
        auto fc = mrct::offset_correct(fixed_image, fixed_roi, fixed_label, pre);
        fixed_image = std::move(fc.slice);
        fixed_roi = std::move(fc.roi);
        fixed_label = std::move(*fc.label);
        pre.out_h = moving_image.height;
        pre.out_w = moving_image.width;
        auto mc = mrct::offset_correct(moving_image, moving_roi, moving_label, pre);
        moving_image = std::move(mc.slice);
        moving_roi = std::move(mc.roi);
        moving_label = std::move(*mc.label);
    }

    if (p.denoise) {
        auto [dm, dc] = mrct::denoise_pair(moving_label, fixed_label, p.gamma);
        moving_label = std::move(dm);
        fixed_label = std::move(dc);
    }
    if (fixed_label.empty_foreground() || moving_label.empty_foreground())
        throw mrct::Error(mrct::ErrorCode::invalid_argument,
                          "register pipeline: bone label empty after preprocessing");

    const mrct::RegBundle fixed = mrct::make_bundle(fixed_image, fixed_label, fixed_roi);
    const mrct::RegBundle moving = mrct::make_bundle(moving_image, moving_label, moving_roi);

    mrct::RegConfig cfg;
    cfg.lambda = {p.lambda1, p.lambda2, p.lambda3, p.lambda4};
    cfg.sigma = p.sigma;
    cfg.levels = p.levels;
    cfg.iters_per_level = p.iters_per_level;
    cfg.step_size = p.step_size;

    mrct::RegResult reg = mrct::register_pair(fixed, moving, cfg);
    const mrct::MetricReport m = mrct::evaluate_pair(fixed, moving, reg.field);

    PipelineResult out;
    out.report.dsc = m.dsc;
    out.report.jaccard = m.jaccard;
    out.report.hd_px = m.hd_px;
    out.report.ssim = m.ssim;
    out.report.sim_score = m.sim_score;
    out.report.jd_std = m.jd_std;
    out.report.jd_nonpos_frac = m.jd_nonpos_frac;
    out.report.dsc_pre = mrct::dsc(fixed_label, moving_label);
    out.report.loss_initial = reg.initial_loss;
    out.report.loss_final = reg.final_loss;
    out.warped_image = mrct::warp(moving_image, reg.field);
    out.warped_label = mrct::warp(moving_label, reg.field);
    out.field = std::move(reg.field);
    return out;
}

void emit_pipeline(PipelineResult&& r, mrct_field** out_field, mrct_image** out_warped_image,
                   mrct_image** out_warped_label, mrct_metric_report* out_report) {
    if (out_field) *out_field = new mrct_field{std::move(r.field)};
    if (out_warped_image) *out_warped_image = new mrct_image{std::move(r.warped_image)};
    if (out_warped_label) *out_warped_label = new mrct_image{r.warped_label.to_slice()};
    if (out_report) *out_report = r.report;
}

}  // namespace

extern "C" {

const char* mrct_version(void) { return "1.0.0"; }

const char* mrct_status_name(mrct_status status) {
    switch (status) {
        case MRCT_OK: return "ok";
        case MRCT_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case MRCT_ERR_IO: return "io";
        case MRCT_ERR_FORMAT: return "format";
        case MRCT_ERR_DIMENSION: return "dimension";
        case MRCT_ERR_EMPTY_ROI: return "empty_roi";
        case MRCT_ERR_NUMERIC: return "numeric";
        case MRCT_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* mrct_last_error(void) { return g_last_error.c_str(); }

/* ---- images -------------------------------------------------------- */

mrct_status mrct_image_load_pgm(const char* path, mrct_image** out) {
    if (!path || !out) return fail_null("mrct_image_load_pgm");
    return wrap([&] { *out = new mrct_image{mrct::load_pgm(path)}; });
}

mrct_status mrct_image_load_label_pgm(const char* path, mrct_image** out) {
    if (!path || !out) return fail_null("mrct_image_load_label_pgm");
    return wrap([&] { *out = new mrct_image{mrct::load_label_pgm(path).to_slice()}; });
}

mrct_status mrct_image_save_pgm(const mrct_image* image, const char* path, int bits) {
    if (!image || !path) return fail_null("mrct_image_save_pgm");
    return wrap([&] { mrct::save_pgm(image->slice, path, bits); });
}

mrct_status mrct_image_save_label_pgm(const mrct_image* image, const char* path) {
    if (!image || !path) return fail_null("mrct_image_save_label_pgm");
    return wrap([&] { mrct::save_label_pgm(to_mask(image->slice), path); });
}

mrct_status mrct_image_create(int width, int height, const double* values, mrct_image** out) {
    if (!values || !out) return fail_null("mrct_image_create");
    return wrap([&] {
        mrct::Slice s(width, height);
        std::memcpy(s.values.data(), values, s.values.size() * sizeof(double));
        mrct::validate(s);
        *out = new mrct_image{std::move(s)};
    });
}

int mrct_image_width(const mrct_image* image) { return image ? image->slice.width : 0; }
int mrct_image_height(const mrct_image* image) { return image ? image->slice.height : 0; }

mrct_status mrct_image_values(const mrct_image* image, double* out) {
    if (!image || !out) return fail_null("mrct_image_values");
    std::memcpy(out, image->slice.values.data(), image->slice.values.size() * sizeof(double));
    return MRCT_OK;
}

void mrct_image_free(mrct_image* image) { delete image; }

/* ---- stacks -------------------------------------------------------- */

mrct_status mrct_stack_load(const char* manifest_path, mrct_stack** out) {
    if (!manifest_path || !out) return fail_null("mrct_stack_load");
    return wrap([&] { *out = new mrct_stack{mrct::load_stack(manifest_path)}; });
}

mrct_status mrct_stack_save(const mrct_stack* stack, const char* directory,
                            const char* manifest_name) {
    if (!stack || !directory) return fail_null("mrct_stack_save");
    return wrap([&] {
        mrct::save_stack(stack->stack, directory, manifest_name ? manifest_name : "stack.json");
    });
}

int mrct_stack_depth(const mrct_stack* stack) { return stack ? stack->stack.depth() : 0; }
int mrct_stack_width(const mrct_stack* stack) { return stack ? stack->stack.width() : 0; }
int mrct_stack_height(const mrct_stack* stack) { return stack ? stack->stack.height() : 0; }
double mrct_stack_layer_gap_mm(const mrct_stack* stack) {
    return stack ? stack->stack.layer_gap_mm : 0.0;
}
int mrct_stack_has_label(const mrct_stack* stack, int index) {
    return stack && stack->stack.has_label(index) ? 1 : 0;
}

mrct_status mrct_stack_slice(const mrct_stack* stack, int index, mrct_image** out) {
    if (!stack || !out) return fail_null("mrct_stack_slice");
    return wrap([&] {
        if (index < 0 || index >= stack->stack.depth())
            throw mrct::Error(mrct::ErrorCode::invalid_argument, "slice index out of range");
        *out = new mrct_image{stack->stack.slices[index]};
    });
}

mrct_status mrct_stack_label(const mrct_stack* stack, int index, mrct_image** out) {
    if (!stack || !out) return fail_null("mrct_stack_label");
    return wrap([&] {
        if (!stack->stack.has_label(index))
            throw mrct::Error(mrct::ErrorCode::invalid_argument, "no label at this index");
        *out = new mrct_image{stack->stack.labels[index]->to_slice()};
    });
}

mrct_status mrct_stack_offset_correct(const mrct_stack* stack, int out_h, int out_w,
                                      mrct_stack** out) {
    if (!stack || !out) return fail_null("mrct_stack_offset_correct");
    return wrap([&] {
        const mrct::ImageStack& in = stack->stack;
        mrct::PreprocConfig pre;
        pre.out_h = out_h > 0 ? out_h : in.height();
        pre.out_w = out_w > 0 ? out_w : in.width();
        mrct::ImageStack corrected;
        corrected.modality = in.modality;
        corrected.layer_gap_mm = in.layer_gap_mm;
        for (int i = 0; i < in.depth(); ++i) {
            const mrct::LabelMask roi = mrct::roi_mask(in.slices[i], pre);
            auto oc = mrct::offset_correct(in.slices[i], roi, in.labels[i], pre);
            corrected.slices.push_back(std::move(oc.slice));
            corrected.labels.push_back(std::move(oc.label));
        }
        *out = new mrct_stack{std::move(corrected)};
    });
}

void mrct_stack_free(mrct_stack* stack) { delete stack; }

/* ---- phantom ------------------------------------------------------- */

void mrct_phantom_spec_init(mrct_phantom_spec* spec) {
    if (!spec) return;
    const mrct::PhantomSpec d;
    spec->seed = d.seed;
    spec->canvas_h = d.canvas_h;
    spec->canvas_w = d.canvas_w;
    spec->n_bones = d.n_bones;
    spec->depth_mr = d.depth_mr;
    spec->depth_ct = d.depth_ct;
    spec->gap_mr_mm = d.gap_mr_mm;
    spec->gap_ct_mm = d.gap_ct_mm;
    spec->ct_like_contrast = 0;
    spec->noise_sigma = d.noise_sigma;
    spec->warp_amplitude_px = d.warp_amplitude_px;
    spec->translate_x = d.translate_x;
    spec->translate_y = d.translate_y;
    spec->same_orientation = 0;
}

mrct_status mrct_phantom_generate(const mrct_phantom_spec* spec, mrct_stack** mr, mrct_stack** ct,
                                  mrct_phantom_truth** truth) {
    if (!spec || !mr || !ct) return fail_null("mrct_phantom_generate");
    return wrap([&] {
        mrct::PhantomSpec s;
        s.seed = spec->seed;
        s.canvas_h = spec->canvas_h;
        s.canvas_w = spec->canvas_w;
        s.n_bones = spec->n_bones;
        s.depth_mr = spec->depth_mr;
        s.depth_ct = spec->depth_ct;
        s.gap_mr_mm = spec->gap_mr_mm;
        s.gap_ct_mm = spec->gap_ct_mm;
        s.contrast = spec->ct_like_contrast ? mrct::PhantomSpec::Contrast::ct_like
                                            : mrct::PhantomSpec::Contrast::mr_like;
        s.noise_sigma = spec->noise_sigma;
        s.warp_amplitude_px = spec->warp_amplitude_px;
        s.translate_x = spec->translate_x;
        s.translate_y = spec->translate_y;
        s.orientation =
            spec->same_orientation ? mrct::Orientation::same : mrct::Orientation::opposed;

        mrct::Phantom p = mrct::generate(s);
        *mr = new mrct_stack{std::move(p.mr)};
        *ct = new mrct_stack{std::move(p.ct)};
        if (truth) *truth = new mrct_phantom_truth{std::move(p.truth)};
    });
}

int mrct_phantom_truth_depth(const mrct_phantom_truth* truth) {
    return truth ? static_cast<int>(truth->truth.ct_index_for_mr.size()) : 0;
}

double mrct_phantom_truth_ct_index(const mrct_phantom_truth* truth, int mr_index) {
    if (!truth || mr_index < 0 ||
        mr_index >= static_cast<int>(truth->truth.ct_index_for_mr.size()))
        return -1.0;
    return truth->truth.ct_index_for_mr[mr_index];
}

mrct_status mrct_phantom_truth_field(const mrct_phantom_truth* truth, mrct_field** out) {
    if (!truth || !out) return fail_null("mrct_phantom_truth_field");
    return wrap([&] { *out = new mrct_field{truth->truth.true_field}; });
}

void mrct_phantom_truth_free(mrct_phantom_truth* truth) { delete truth; }

/* ---- alignment ----------------------------------------------------- */

void mrct_align_params_init(mrct_align_params* params) {
    if (!params) return;
    params->gamma = 2.0;
    params->connectivity = 8;
    params->strict_count = 0;
    params->same_orientation = 0;
    params->swapped_blend = 0;
    params->threads = 0;
}

mrct_status mrct_align(const mrct_stack* mr, const mrct_stack* ct,
                       const mrct_align_params* params, mrct_correspondence** out) {
    if (!mr || !ct || !out) return fail_null("mrct_align");
    return wrap([&] {
        *out = new mrct_correspondence{mrct::align(mr->stack, ct->stack, to_align_config(params))};
    });
}

int mrct_correspondence_size(const mrct_correspondence* corr) {
    return corr ? static_cast<int>(corr->set.pairs.size()) : 0;
}

mrct_status mrct_correspondence_pair(const mrct_correspondence* corr, int i, int* mr_index,
                                     double* ct_index_frac, double* score) {
    if (!corr) return fail_null("mrct_correspondence_pair");
    if (i < 0 || i >= static_cast<int>(corr->set.pairs.size())) {
        g_last_error = "mrct_correspondence_pair: index out of range";
        return MRCT_ERR_INVALID_ARGUMENT;
    }
    const mrct::CorrespondencePair& p = corr->set.pairs[i];
    if (mr_index) *mr_index = p.mr_index;
    if (ct_index_frac) *ct_index_frac = p.ct_index_frac;
    if (score) *score = p.score;
    return MRCT_OK;
}

mrct_status mrct_correspondence_anchor(const mrct_correspondence* corr, int* mr_index,
                                       int* ct_index, double* score) {
    if (!corr) return fail_null("mrct_correspondence_anchor");
    if (mr_index) *mr_index = corr->set.anchor.mr_index;
    if (ct_index) *ct_index = corr->set.anchor.ct_index;
    if (score) *score = corr->set.anchor.score;
    return MRCT_OK;
}

mrct_status mrct_correspondence_save_csv(const mrct_correspondence* corr, const char* path) {
    if (!corr || !path) return fail_null("mrct_correspondence_save_csv");
    return wrap([&] { mrct::save_correspondence_csv(corr->set, path); });
}

mrct_status mrct_correspondence_load_csv(const char* path, mrct_correspondence** out) {
    if (!path || !out) return fail_null("mrct_correspondence_load_csv");
    return wrap([&] { *out = new mrct_correspondence{mrct::load_correspondence_csv(path)}; });
}

void mrct_correspondence_free(mrct_correspondence* corr) { delete corr; }

mrct_status mrct_sim_score(const mrct_image* label_mr, const mrct_image* label_ct, double gamma,
                           int connectivity, double* score, int* n_matched) {
    if (!label_mr || !label_ct || !score) return fail_null("mrct_sim_score");
    return wrap([&] {
        mrct::SimConfig cfg;
        cfg.gamma = gamma;
        cfg.connectivity = connectivity == 4 ? mrct::Connectivity::four : mrct::Connectivity::eight;
        const mrct::SimResult r = mrct::sim(to_mask(label_mr->slice), to_mask(label_ct->slice), cfg);
        *score = r.score;
        if (n_matched) *n_matched = r.n_matched;
    });
}

mrct_status mrct_denoise_pair(const mrct_image* label_mr, const mrct_image* label_ct, double gamma,
                              mrct_image** out_mr, mrct_image** out_ct) {
    if (!label_mr || !label_ct || !out_mr || !out_ct) return fail_null("mrct_denoise_pair");
    return wrap([&] {
        auto [m, c] = mrct::denoise_pair(to_mask(label_mr->slice), to_mask(label_ct->slice), gamma);
        *out_mr = new mrct_image{m.to_slice()};
        *out_ct = new mrct_image{c.to_slice()};
    });
}

/* ---- registration -------------------------------------------------- */

void mrct_reg_params_init(mrct_reg_params* params) {
    if (!params) return;
    const mrct::RegConfig d;
    params->lambda1 = d.lambda[0];
    params->lambda2 = d.lambda[1];
    params->lambda3 = d.lambda[2];
    params->lambda4 = d.lambda[3];
    params->sigma = d.sigma;
    params->levels = d.levels;
    params->iters_per_level = d.iters_per_level;
    params->step_size = d.step_size;
    params->offset_correct = 1;
    params->denoise = 1;
    params->gamma = 2.0;
    params->swapped_blend = 0;
}

mrct_status mrct_register_images(const mrct_image* fixed_image, const mrct_image* fixed_label,
                                 const mrct_image* moving_image, const mrct_image* moving_label,
                                 const mrct_reg_params* params, mrct_field** out_field,
                                 mrct_image** out_warped_image, mrct_image** out_warped_label,
                                 mrct_metric_report* out_report) {
    if (!fixed_image || !fixed_label || !moving_image || !moving_label || !params)
        return fail_null("mrct_register_images");
    return wrap([&] {
        emit_pipeline(run_pipeline(fixed_image->slice, to_mask(fixed_label->slice),
                                   moving_image->slice, to_mask(moving_label->slice), *params),
                      out_field, out_warped_image, out_warped_label, out_report);
    });
}

mrct_status mrct_register_stack_pair(const mrct_stack* ct_fixed, double ct_index_frac,
                                     const mrct_stack* mr_moving, int mr_index,
                                     const mrct_reg_params* params, mrct_field** out_field,
                                     mrct_image** out_warped_image, mrct_image** out_warped_label,
                                     mrct_metric_report* out_report) {
    if (!ct_fixed || !mr_moving || !params) return fail_null("mrct_register_stack_pair");
    return wrap([&] {
        const mrct::BlendMode blend =
            params->swapped_blend ? mrct::BlendMode::swapped : mrct::BlendMode::standard;
        const mrct::Slice fixed_image =
            mrct::blend_ct_slice(ct_fixed->stack, ct_index_frac, blend);
        const auto fixed_label = mrct::blend_ct_label(ct_fixed->stack, ct_index_frac, blend);
        if (!fixed_label)
            throw mrct::Error(mrct::ErrorCode::invalid_argument,
                              "register: CT layers at the fractional index carry no label");
        if (mr_index < 0 || mr_index >= mr_moving->stack.depth())
            throw mrct::Error(mrct::ErrorCode::invalid_argument, "register: MR index out of range");
        if (!mr_moving->stack.has_label(mr_index))
            throw mrct::Error(mrct::ErrorCode::invalid_argument,
                              "register: MR slice carries no label");
        emit_pipeline(run_pipeline(fixed_image, *fixed_label,
                                   mr_moving->stack.slices[mr_index],
                                   *mr_moving->stack.labels[mr_index], *params),
                      out_field, out_warped_image, out_warped_label, out_report);
    });
}

mrct_status mrct_evaluate_images(const mrct_image* fixed_image, const mrct_image* fixed_label,
                                 const mrct_image* moving_image, const mrct_image* moving_label,
                                 const mrct_field* field, mrct_metric_report* out_report) {
    if (!fixed_image || !fixed_label || !moving_image || !moving_label || !field || !out_report)
        return fail_null("mrct_evaluate_images");
    return wrap([&] {
        mrct::PreprocConfig pre;
        pre.out_h = fixed_image->slice.height;
        pre.out_w = fixed_image->slice.width;
        const mrct::RegBundle fixed = mrct::make_bundle(
            fixed_image->slice, to_mask(fixed_label->slice), mrct::roi_mask(fixed_image->slice, pre));
        const mrct::RegBundle moving =
            mrct::make_bundle(moving_image->slice, to_mask(moving_label->slice),
                              mrct::roi_mask(moving_image->slice, pre));
        const mrct::MetricReport m = mrct::evaluate_pair(fixed, moving, field->field);
        *out_report = mrct_metric_report{};
        out_report->dsc = m.dsc;
        out_report->jaccard = m.jaccard;
        out_report->hd_px = m.hd_px;
        out_report->ssim = m.ssim;
        out_report->sim_score = m.sim_score;
        out_report->jd_std = m.jd_std;
        out_report->jd_nonpos_frac = m.jd_nonpos_frac;
        out_report->dsc_pre = mrct::dsc(to_mask(fixed_label->slice), to_mask(moving_label->slice));
        const mrct::RegConfig cfg;
        out_report->loss_initial =
            mrct::total_loss(fixed, moving,
                             mrct::DisplacementField(field->field.width, field->field.height), cfg)
                .total;
        out_report->loss_final = mrct::total_loss(fixed, moving, field->field, cfg).total;
    });
}

mrct_status mrct_warp_image(const mrct_image* image, const mrct_field* field, int clamp_border,
                            mrct_image** out) {
    if (!image || !field || !out) return fail_null("mrct_warp_image");
    return wrap([&] {
        *out = new mrct_image{mrct::warp(image->slice, field->field,
                                         clamp_border ? mrct::Border::clamp : mrct::Border::zero)};
    });
}

mrct_status mrct_warp_label(const mrct_image* label, const mrct_field* field, int clamp_border,
                            mrct_image** out) {
    if (!label || !field || !out) return fail_null("mrct_warp_label");
    return wrap([&] {
        *out = new mrct_image{mrct::warp(to_mask(label->slice), field->field,
                                         clamp_border ? mrct::Border::clamp : mrct::Border::zero)
                                  .to_slice()};
    });
}

/* ---- displacement fields ------------------------------------------- */

mrct_status mrct_field_create(int width, int height, mrct_field** out) {
    if (!out) return fail_null("mrct_field_create");
    return wrap([&] {
        if (width < 1 || height < 1)
            throw mrct::Error(mrct::ErrorCode::invalid_argument, "field dims must be >= 1");
        *out = new mrct_field{mrct::DisplacementField(width, height)};
    });
}

mrct_status mrct_field_save(const mrct_field* field, const char* path) {
    if (!field || !path) return fail_null("mrct_field_save");
    return wrap([&] { mrct::save_field(field->field, path); });
}

mrct_status mrct_field_load(const char* path, mrct_field** out) {
    if (!path || !out) return fail_null("mrct_field_load");
    return wrap([&] { *out = new mrct_field{mrct::load_field(path)}; });
}

int mrct_field_width(const mrct_field* field) { return field ? field->field.width : 0; }
int mrct_field_height(const mrct_field* field) { return field ? field->field.height : 0; }

mrct_status mrct_field_values(const mrct_field* field, double* out) {
    if (!field || !out) return fail_null("mrct_field_values");
    const mrct::DisplacementField& f = field->field;
    for (size_t i = 0; i < f.pixel_count(); ++i) {
        out[2 * i] = f.ux[i];
        out[2 * i + 1] = f.uy[i];
    }
    return MRCT_OK;
}

void mrct_field_free(mrct_field* field) { delete field; }

/* ---- gamma sweep ---------------------------------------------------- */

mrct_status mrct_sweep_gamma(const mrct_stack* mr, const mrct_stack* ct, const double* gammas,
                             int n_gammas, double pair_gamma, const mrct_align_params* align_params,
                             mrct_sweep_row* rows) {
    if (!mr || !ct || !gammas || !rows) return fail_null("mrct_sweep_gamma");
    return wrap([&] {
        if (n_gammas < 1)
            throw mrct::Error(mrct::ErrorCode::invalid_argument, "sweep: need at least one gamma");

        // Pairs come from one alignment at the reference gamma; each row
        // then re-evaluates similarity and denoising at its own gamma.
        mrct::AlignConfig acfg = to_align_config(align_params);
        acfg.sim.gamma = pair_gamma;
        const mrct::CorrespondenceSet corr = mrct::align(mr->stack, ct->stack, acfg);

        struct PairMasks {
            const mrct::LabelMask* mr;
            mrct::LabelMask ct;
        };
        std::vector<PairMasks> pairs;
        for (const mrct::CorrespondencePair& p : corr.pairs) {
            if (!mr->stack.has_label(p.mr_index)) continue;
            auto ct_label = mrct::blend_ct_label(ct->stack, p.ct_index_frac, acfg.blend);
            if (!ct_label) continue;
            pairs.push_back({&*mr->stack.labels[p.mr_index], std::move(*ct_label)});
        }
        if (pairs.empty())
            throw mrct::Error(mrct::ErrorCode::invalid_argument, "sweep: no labeled pairs");

        for (int g = 0; g < n_gammas; ++g) {
            mrct_sweep_row row{};
            row.gamma = gammas[g];
            double sim_sum = 0.0, matched_sum = 0.0;
            for (const PairMasks& pm : pairs) {
                mrct::SimConfig scfg = acfg.sim;
                scfg.gamma = gammas[g];
                const mrct::SimResult r = mrct::sim(*pm.mr, pm.ct, scfg);
                sim_sum += r.score;
                matched_sum += r.n_matched;
                auto [dm, dc] = mrct::denoise_pair(*pm.mr, pm.ct, gammas[g],
                                                   scfg.connectivity);
                row.n_images += 2;
                row.empty_images += dm.empty_foreground() ? 1 : 0;
                row.empty_images += dc.empty_foreground() ? 1 : 0;
            }
            row.mean_sim = sim_sum / static_cast<double>(pairs.size());
            row.mean_matched = matched_sum / static_cast<double>(pairs.size());
            rows[g] = row;
        }
    });
}

}  // extern "C"
