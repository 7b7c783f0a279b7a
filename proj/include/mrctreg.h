/* mrctreg - MR-CT slice stack alignment and registration toolkit
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API of the mrctreg shared library. All functions that can fail
 * return an mrct_status; MRCT_OK is 0. On failure a thread-local
 * message is available from mrct_last_error(). Objects returned
 * through out-parameters are owned by the caller and released with the
 * matching *_free function.
 */

#ifndef MRCTREG_H
#define MRCTREG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MRCT_API __declspec(dllexport)
#else
#define MRCT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mrct_status {
    MRCT_OK = 0,
    MRCT_ERR_INVALID_ARGUMENT = 1,
    MRCT_ERR_IO = 2,
    MRCT_ERR_FORMAT = 3,
    MRCT_ERR_DIMENSION = 4,
    MRCT_ERR_EMPTY_ROI = 5,
    MRCT_ERR_NUMERIC = 6,
    MRCT_ERR_INTERNAL = 7
} mrct_status;

typedef struct mrct_image mrct_image;   /* grayscale slice or 0/1 mask */
typedef struct mrct_stack mrct_stack;   /* ordered slices + layer gap + labels */
typedef struct mrct_field mrct_field;   /* dense displacement field */
typedef struct mrct_correspondence mrct_correspondence;
typedef struct mrct_phantom_truth mrct_phantom_truth;

MRCT_API const char* mrct_version(void);
MRCT_API const char* mrct_status_name(mrct_status status);
MRCT_API const char* mrct_last_error(void);

/* ---- images -------------------------------------------------------- */

MRCT_API mrct_status mrct_image_load_pgm(const char* path, mrct_image** out);
MRCT_API mrct_status mrct_image_load_label_pgm(const char* path, mrct_image** out);
MRCT_API mrct_status mrct_image_save_pgm(const mrct_image* image, const char* path, int bits);
MRCT_API mrct_status mrct_image_save_label_pgm(const mrct_image* image, const char* path);
MRCT_API mrct_status mrct_image_create(int width, int height, const double* values,
                                       mrct_image** out);
MRCT_API int mrct_image_width(const mrct_image* image);
MRCT_API int mrct_image_height(const mrct_image* image);
/* Copies width*height row-major doubles into `out`. */
MRCT_API mrct_status mrct_image_values(const mrct_image* image, double* out);
MRCT_API void mrct_image_free(mrct_image* image);

/* ---- stacks -------------------------------------------------------- */

MRCT_API mrct_status mrct_stack_load(const char* manifest_path, mrct_stack** out);
MRCT_API mrct_status mrct_stack_save(const mrct_stack* stack, const char* directory,
                                     const char* manifest_name);
MRCT_API int mrct_stack_depth(const mrct_stack* stack);
MRCT_API int mrct_stack_width(const mrct_stack* stack);
MRCT_API int mrct_stack_height(const mrct_stack* stack);
MRCT_API double mrct_stack_layer_gap_mm(const mrct_stack* stack);
MRCT_API int mrct_stack_has_label(const mrct_stack* stack, int index);
MRCT_API mrct_status mrct_stack_slice(const mrct_stack* stack, int index, mrct_image** out);
MRCT_API mrct_status mrct_stack_label(const mrct_stack* stack, int index, mrct_image** out);
/* ROI-centroid recentering of every slice (and label) onto an
 * out_h x out_w canvas; pass 0 for either dimension to keep the input
 * size. */
MRCT_API mrct_status mrct_stack_offset_correct(const mrct_stack* stack, int out_h, int out_w,
                                               mrct_stack** out);
MRCT_API void mrct_stack_free(mrct_stack* stack);

/* ---- phantom ------------------------------------------------------- */

typedef struct mrct_phantom_spec {
    uint64_t seed;
    int canvas_h, canvas_w;
    int n_bones;
    int depth_mr, depth_ct;
    double gap_mr_mm, gap_ct_mm;
    int ct_like_contrast;       /* 0: multimodal palettes, 1: CT palette for both */
    double noise_sigma;
    double warp_amplitude_px;
    double translate_x, translate_y;
    int same_orientation;       /* 0: opposed stack directions, 1: same */
} mrct_phantom_spec;

/* Defaults matching the library's PhantomSpec. */
MRCT_API void mrct_phantom_spec_init(mrct_phantom_spec* spec);
MRCT_API mrct_status mrct_phantom_generate(const mrct_phantom_spec* spec, mrct_stack** mr,
                                           mrct_stack** ct, mrct_phantom_truth** truth);
MRCT_API int mrct_phantom_truth_depth(const mrct_phantom_truth* truth);
MRCT_API double mrct_phantom_truth_ct_index(const mrct_phantom_truth* truth, int mr_index);
MRCT_API mrct_status mrct_phantom_truth_field(const mrct_phantom_truth* truth, mrct_field** out);
MRCT_API void mrct_phantom_truth_free(mrct_phantom_truth* truth);

/* ---- alignment ----------------------------------------------------- */

typedef struct mrct_align_params {
    double gamma;
    int connectivity;           /* 4 or 8 */
    int strict_count;           /* nonzero: domain-count mismatch scores 0 */
    int same_orientation;       /* nonzero flips the layer-gap sign convention */
    int swapped_blend;          /* nonzero: ceil slice weighted by (1-frac) */
    int threads;                /* 0: MRCTREG_THREADS env or 1 */
} mrct_align_params;

MRCT_API void mrct_align_params_init(mrct_align_params* params);
MRCT_API mrct_status mrct_align(const mrct_stack* mr, const mrct_stack* ct,
                                const mrct_align_params* params, mrct_correspondence** out);
MRCT_API int mrct_correspondence_size(const mrct_correspondence* corr);
MRCT_API mrct_status mrct_correspondence_pair(const mrct_correspondence* corr, int i,
                                              int* mr_index, double* ct_index_frac,
                                              double* score);
MRCT_API mrct_status mrct_correspondence_anchor(const mrct_correspondence* corr, int* mr_index,
                                                int* ct_index, double* score);
MRCT_API mrct_status mrct_correspondence_save_csv(const mrct_correspondence* corr,
                                                  const char* path);
MRCT_API mrct_status mrct_correspondence_load_csv(const char* path, mrct_correspondence** out);
MRCT_API void mrct_correspondence_free(mrct_correspondence* corr);

/* Shape similarity between two label images (gate threshold gamma,
 * connectivity 4 or 8). Score is in [0, 0.5]. */
MRCT_API mrct_status mrct_sim_score(const mrct_image* label_mr, const mrct_image* label_ct,
                                    double gamma, int connectivity, double* score,
                                    int* n_matched);

/* Remove connected domains failing the rank pairing / aspect gate. */
MRCT_API mrct_status mrct_denoise_pair(const mrct_image* label_mr, const mrct_image* label_ct,
                                       double gamma, mrct_image** out_mr, mrct_image** out_ct);

/* ---- registration -------------------------------------------------- */

typedef struct mrct_reg_params {
    double lambda1, lambda2, lambda3, lambda4;
    double sigma;
    int levels;
    int iters_per_level;
    double step_size;
    int offset_correct;         /* pipeline: recenter ROIs first */
    int denoise;                /* pipeline: denoise bone labels first */
    double gamma;               /* denoising gate */
    int swapped_blend;          /* fractional CT blending convention */
} mrct_reg_params;

typedef struct mrct_metric_report {
    double dsc, jaccard, hd_px, ssim, sim_score, jd_std, jd_nonpos_frac;
    double dsc_pre;             /* label Dice before registration */
    double loss_initial, loss_final;
} mrct_metric_report;

MRCT_API void mrct_reg_params_init(mrct_reg_params* params);

/* Register a prepared image pair (images plus bone labels; ROI contour
 * masks are derived by thresholding). Outputs may be NULL when not
 * needed. */
MRCT_API mrct_status mrct_register_images(const mrct_image* fixed_image,
                                          const mrct_image* fixed_label,
                                          const mrct_image* moving_image,
                                          const mrct_image* moving_label,
                                          const mrct_reg_params* params, mrct_field** out_field,
                                          mrct_image** out_warped_image,
                                          mrct_image** out_warped_label,
                                          mrct_metric_report* out_report);

/* Full per-pair pipeline on stacks: blend the fixed CT layer at the
 * fractional index, preprocess both sides, register, evaluate. */
MRCT_API mrct_status mrct_register_stack_pair(const mrct_stack* ct_fixed, double ct_index_frac,
                                              const mrct_stack* mr_moving, int mr_index,
                                              const mrct_reg_params* params,
                                              mrct_field** out_field,
                                              mrct_image** out_warped_image,
                                              mrct_image** out_warped_label,
                                              mrct_metric_report* out_report);

/* Metrics of an existing field against a prepared pair. */
MRCT_API mrct_status mrct_evaluate_images(const mrct_image* fixed_image,
                                          const mrct_image* fixed_label,
                                          const mrct_image* moving_image,
                                          const mrct_image* moving_label,
                                          const mrct_field* field,
                                          mrct_metric_report* out_report);

MRCT_API mrct_status mrct_warp_image(const mrct_image* image, const mrct_field* field,
                                     int clamp_border, mrct_image** out);
MRCT_API mrct_status mrct_warp_label(const mrct_image* label, const mrct_field* field,
                                     int clamp_border, mrct_image** out);

/* ---- displacement fields ------------------------------------------- */

MRCT_API mrct_status mrct_field_create(int width, int height, mrct_field** out);
MRCT_API mrct_status mrct_field_save(const mrct_field* field, const char* path);
MRCT_API mrct_status mrct_field_load(const char* path, mrct_field** out);
MRCT_API int mrct_field_width(const mrct_field* field);
MRCT_API int mrct_field_height(const mrct_field* field);
/* Copies width*height (du_x, du_y) pairs, row-major, into `out`. */
MRCT_API mrct_status mrct_field_values(const mrct_field* field, double* out);
MRCT_API void mrct_field_free(mrct_field* field);

/* ---- gamma sweep ---------------------------------------------------- */

typedef struct mrct_sweep_row {
    double gamma;
    double mean_sim;
    double mean_matched;        /* matched domain pairs per image pair */
    int empty_images;           /* denoised label images with no foreground */
    int n_images;               /* label images processed (2 per pair) */
} mrct_sweep_row;

/* Evaluates each gamma over the slice pairs of an alignment computed at
 * pair_gamma. `rows` must hold n_gammas entries. */
MRCT_API mrct_status mrct_sweep_gamma(const mrct_stack* mr, const mrct_stack* ct,
                                      const double* gammas, int n_gammas, double pair_gamma,
                                      const mrct_align_params* align_params,
                                      mrct_sweep_row* rows);

#ifdef __cplusplus
}
#endif

#endif /* MRCTREG_H */
