// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Links the C API of the shared library only.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mrctreg.h"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 ok, 2 input error, 3 numerical failure.
int exit_code_for(mrct_status status) {
    switch (status) {
        case MRCT_OK: return 0;
        case MRCT_ERR_NUMERIC:
        case MRCT_ERR_INTERNAL: return 3;
        default: return 2;
    }
}

[[noreturn]] void die(mrct_status status, const std::string& context) {
    std::fprintf(stderr, "mrctreg: %s: %s (%s)\n", context.c_str(), mrct_last_error(),
                 mrct_status_name(status));
    std::exit(exit_code_for(status));
}

void check(mrct_status status, const std::string& context) {
    if (status != MRCT_OK) die(status, context);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

template <typename T, void (*FreeFn)(T*)>
struct Handle {
    T* p = nullptr;

    Handle() = default;
    Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
    Handle& operator=(Handle&& o) noexcept {
        if (this != &o) {
            reset();
            p = o.p;
            o.p = nullptr;
        }
        return *this;
    }
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { reset(); }
    void reset() {
        if (p) FreeFn(p);
        p = nullptr;
    }
};

using StackHandle = Handle<mrct_stack, mrct_stack_free>;
using ImageHandle = Handle<mrct_image, mrct_image_free>;
using FieldHandle = Handle<mrct_field, mrct_field_free>;
using CorrHandle = Handle<mrct_correspondence, mrct_correspondence_free>;

int env_threads() {
    if (const char* env = std::getenv("MRCTREG_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

void write_text_file(const fs::path& path, const std::string& text, const char* what) {
    std::ofstream out(path);
    out << text;
    if (!out) {
        std::fprintf(stderr, "mrctreg: cannot write %s: %s\n", what, path.string().c_str());
        std::exit(2);
    }
}

std::string metrics_csv_header() {
    return "mr_index,ct_index_frac,dsc_pre,dsc,jaccard,hd_px,ssim,sim,jd_std,jd_nonpos_frac,"
           "loss_initial,loss_final\n";
}

std::string metrics_csv_row(int mr_index, double ct_frac, const mrct_metric_report& r) {
    std::ostringstream os;
    os << mr_index << "," << fmt(ct_frac) << "," << fmt(r.dsc_pre) << "," << fmt(r.dsc) << ","
       << fmt(r.jaccard) << "," << fmt(r.hd_px) << "," << fmt(r.ssim) << "," << fmt(r.sim_score)
       << "," << fmt(r.jd_std) << "," << fmt(r.jd_nonpos_frac) << "," << fmt(r.loss_initial) << ","
       << fmt(r.loss_final) << "\n";
    return os.str();
}

struct AlignFlags {
    double gamma = 2.0;
    int connectivity = 8;
    bool strict = false;
    std::string orientation = "opposed";
    std::string blend = "standard";
    bool no_offset = false;
};

void add_align_flags(CLI::App* cmd, AlignFlags& flags, bool with_offset_flag = true) {
    cmd->add_option("--gamma", flags.gamma, "Aspect-ratio gate threshold")->capture_default_str();
    cmd->add_option("--connectivity", flags.connectivity, "Connected-domain connectivity (4 or 8)")
        ->check(CLI::IsMember({4, 8}))
        ->capture_default_str();
    cmd->add_flag("--strict-count", flags.strict,
                  "Score 0 when the two masks have different domain counts");
    cmd->add_option("--orientation", flags.orientation, "Stack direction relationship")
        ->check(CLI::IsMember({"opposed", "same"}))
        ->capture_default_str();
    cmd->add_option("--blend", flags.blend, "Fractional layer blending convention")
        ->check(CLI::IsMember({"standard", "swapped"}))
        ->capture_default_str();
    if (with_offset_flag)
        cmd->add_flag("--no-offset", flags.no_offset, "Skip ROI offset correction");
}

mrct_align_params to_params(const AlignFlags& f) {
    mrct_align_params p;
    mrct_align_params_init(&p);
    p.gamma = f.gamma;
    p.connectivity = f.connectivity;
    p.strict_count = f.strict ? 1 : 0;
    p.same_orientation = f.orientation == "same" ? 1 : 0;
    p.swapped_blend = f.blend == "swapped" ? 1 : 0;
    return p;
}

StackHandle load_stack_checked(const std::string& path, const char* what) {
    StackHandle h;
    check(mrct_stack_load(path.c_str(), &h.p), std::string("loading ") + what);
    return h;
}

StackHandle maybe_offset_correct(StackHandle stack, bool no_offset, const char* what) {
    if (no_offset) return stack;
    StackHandle corrected;
    check(mrct_stack_offset_correct(stack.p, 0, 0, &corrected.p),
          std::string("offset-correcting ") + what);
    return corrected;
}

/* ---- phantom ------------------------------------------------------- */

int cmd_phantom(CLI::App& app) {
    auto* cmd = app.add_subcommand("phantom", "Generate a synthetic stack pair with ground truth");
    auto spec = std::make_shared<mrct_phantom_spec>();
    mrct_phantom_spec_init(spec.get());
    auto out_dir = std::make_shared<std::string>("phantom_out");
    auto same_orientation = std::make_shared<bool>(false);
    auto ct_like = std::make_shared<bool>(false);

    cmd->add_option("--seed", spec->seed, "RNG seed")->capture_default_str();
    cmd->add_option("--canvas-h", spec->canvas_h, "Canvas height")->capture_default_str();
    cmd->add_option("--canvas-w", spec->canvas_w, "Canvas width")->capture_default_str();
    cmd->add_option("--bones", spec->n_bones, "Number of bone structures")->capture_default_str();
    cmd->add_option("--depth-mr", spec->depth_mr, "MR slice count")->capture_default_str();
    cmd->add_option("--depth-ct", spec->depth_ct, "CT slice count")->capture_default_str();
    cmd->add_option("--gap-mr", spec->gap_mr_mm, "MR layer gap (mm)")->capture_default_str();
    cmd->add_option("--gap-ct", spec->gap_ct_mm, "CT layer gap (mm)")->capture_default_str();
    cmd->add_option("--noise", spec->noise_sigma, "Gaussian image noise sigma")
        ->capture_default_str();
    cmd->add_option("--warp-amplitude", spec->warp_amplitude_px,
                    "Smooth in-plane warp amplitude (px)")
        ->capture_default_str();
    cmd->add_option("--translate-x", spec->translate_x, "Moving-stack x translation (px)")
        ->capture_default_str();
    cmd->add_option("--translate-y", spec->translate_y, "Moving-stack y translation (px)")
        ->capture_default_str();
    cmd->add_flag("--ct-like", *ct_like, "Render both stacks with the CT palette");
    cmd->add_flag("--same-orientation", *same_orientation,
                  "Stacks advance in the same physical direction");
    cmd->add_option("--out", *out_dir, "Output directory")->capture_default_str();

    cmd->callback([spec, out_dir, same_orientation, ct_like] {
        spec->same_orientation = *same_orientation ? 1 : 0;
        spec->ct_like_contrast = *ct_like ? 1 : 0;

        StackHandle mr, ct;
        mrct_phantom_truth* truth = nullptr;
        check(mrct_phantom_generate(spec.get(), &mr.p, &ct.p, &truth), "generating phantom");

        fs::create_directories(fs::path(*out_dir) / "mr");
        fs::create_directories(fs::path(*out_dir) / "ct");
        check(mrct_stack_save(mr.p, (fs::path(*out_dir) / "mr").string().c_str(), "stack.json"),
              "writing MR stack");
        check(mrct_stack_save(ct.p, (fs::path(*out_dir) / "ct").string().c_str(), "stack.json"),
              "writing CT stack");

        std::ostringstream truth_csv;
        truth_csv << "mr_index,ct_index_frac\n";
        for (int k = 0; k < mrct_phantom_truth_depth(truth); ++k)
            truth_csv << k << "," << fmt(mrct_phantom_truth_ct_index(truth, k)) << "\n";
        write_text_file(fs::path(*out_dir) / "truth.csv", truth_csv.str(), "truth table");

        if (spec->translate_x != 0 || spec->translate_y != 0 || spec->warp_amplitude_px != 0) {
            FieldHandle field;
            check(mrct_phantom_truth_field(truth, &field.p), "extracting truth field");
            check(mrct_field_save(field.p, (fs::path(*out_dir) / "truth_field.bin").string().c_str()),
                  "writing truth field");
        }
        mrct_phantom_truth_free(truth);
        std::fprintf(stderr, "phantom: wrote %d MR / %d CT slices to %s\n",
                     mrct_stack_depth(mr.p), mrct_stack_depth(ct.p), out_dir->c_str());
    });
    return 0;
}

/* ---- align ---------------------------------------------------------- */

int cmd_align(CLI::App& app) {
    auto* cmd = app.add_subcommand("align", "Spatially align two stacks by bone-label shape");
    auto mr_path = std::make_shared<std::string>();
    auto ct_path = std::make_shared<std::string>();
    auto out_dir = std::make_shared<std::string>("align_out");
    auto flags = std::make_shared<AlignFlags>();

    cmd->add_option("--mr", *mr_path, "MR stack manifest")->required();
    cmd->add_option("--ct", *ct_path, "CT stack manifest")->required();
    add_align_flags(cmd, *flags);
    cmd->add_option("--out", *out_dir, "Output directory")->capture_default_str();

    cmd->callback([mr_path, ct_path, out_dir, flags] {
        StackHandle mr = maybe_offset_correct(load_stack_checked(*mr_path, "MR stack"),
                                              flags->no_offset, "MR stack");
        StackHandle ct = maybe_offset_correct(load_stack_checked(*ct_path, "CT stack"),
                                              flags->no_offset, "CT stack");

        mrct_align_params params = to_params(*flags);
        CorrHandle corr;
        check(mrct_align(mr.p, ct.p, &params, &corr.p), "aligning stacks");

        fs::create_directories(*out_dir);
        check(mrct_correspondence_save_csv(corr.p,
                                           (fs::path(*out_dir) / "correspondence.csv").string().c_str()),
              "writing correspondence file");

        const int n = mrct_correspondence_size(corr.p);
        std::vector<double> scores(n);
        for (int i = 0; i < n; ++i) {
            int mr_index = 0;
            double frac = 0, score = 0;
            check(mrct_correspondence_pair(corr.p, i, &mr_index, &frac, &score), "reading pair");
            scores[i] = score;
        }
        std::vector<double> sorted = scores;
        std::sort(sorted.begin(), sorted.end());
        double mean = 0;
        for (double s : scores) mean += s;
        mean /= n;
        const double median =
            n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

        std::ostringstream summary;
        summary << "stat,value\n";
        summary << "pairs," << n << "\n";
        summary << "mean_sim," << fmt(mean) << "\n";
        summary << "median_sim," << fmt(median) << "\n";
        write_text_file(fs::path(*out_dir) / "summary.csv", summary.str(), "summary");

        int anchor_mr = 0, anchor_ct = 0;
        double anchor_score = 0;
        mrct_correspondence_anchor(corr.p, &anchor_mr, &anchor_ct, &anchor_score);
        std::fprintf(stderr, "align: %d pairs, anchor mr=%d ct=%d score=%.4f, mean SIM %.4f\n", n,
                     anchor_mr, anchor_ct, anchor_score, mean);
    });
    return 0;
}

/* ---- register ------------------------------------------------------- */

struct RegFlags {
    std::vector<double> lambda{1.0, 4.0, 3.0, 4.0};
    double sigma = 1e-5;
    int levels = 3;
    int iters = 250;
    double step = 1.0;
    bool no_offset = false;
    bool no_denoise = false;
};

void add_reg_flags(CLI::App* cmd, RegFlags& flags) {
    cmd->add_option("--lambda", flags.lambda, "Loss weights (4 values)")
        ->expected(4)
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--sigma", flags.sigma, "Dice smoothing factor")->capture_default_str();
    cmd->add_option("--levels", flags.levels, "Pyramid levels")->capture_default_str();
    cmd->add_option("--iters", flags.iters, "Iterations per level")->capture_default_str();
    cmd->add_option("--step", flags.step, "Initial gradient step size")->capture_default_str();
    cmd->add_flag("--no-offset", flags.no_offset, "Skip ROI offset correction");
    cmd->add_flag("--no-denoise", flags.no_denoise, "Skip label denoising");
}

mrct_reg_params to_params(const RegFlags& f, const AlignFlags& a) {
    mrct_reg_params p;
    mrct_reg_params_init(&p);
    p.lambda1 = f.lambda[0];
    p.lambda2 = f.lambda[1];
    p.lambda3 = f.lambda[2];
    p.lambda4 = f.lambda[3];
    p.sigma = f.sigma;
    p.levels = f.levels;
    p.iters_per_level = f.iters;
    p.step_size = f.step;
    p.offset_correct = f.no_offset ? 0 : 1;
    p.denoise = f.no_denoise ? 0 : 1;
    p.gamma = a.gamma;
    p.swapped_blend = a.blend == "swapped" ? 1 : 0;
    return p;
}

int cmd_register(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "register", "Deformable registration of aligned slice pairs (or one explicit pair)");
    auto mr_path = std::make_shared<std::string>();
    auto ct_path = std::make_shared<std::string>();
    auto corr_path = std::make_shared<std::string>();
    auto fixed_image = std::make_shared<std::string>();
    auto fixed_label = std::make_shared<std::string>();
    auto moving_image = std::make_shared<std::string>();
    auto moving_label = std::make_shared<std::string>();
    auto out_dir = std::make_shared<std::string>("register_out");
    auto reg_flags = std::make_shared<RegFlags>();
    auto align_flags = std::make_shared<AlignFlags>();

    cmd->add_option("--mr", *mr_path, "MR stack manifest (stack mode)");
    cmd->add_option("--ct", *ct_path, "CT stack manifest (stack mode)");
    cmd->add_option("--correspondence", *corr_path,
                    "Correspondence CSV (stack mode; computed when omitted)");
    cmd->add_option("--fixed-image", *fixed_image, "Fixed image PGM (pair mode)");
    cmd->add_option("--fixed-label", *fixed_label, "Fixed bone label PGM (pair mode)");
    cmd->add_option("--moving-image", *moving_image, "Moving image PGM (pair mode)");
    cmd->add_option("--moving-label", *moving_label, "Moving bone label PGM (pair mode)");
    add_reg_flags(cmd, *reg_flags);
    add_align_flags(cmd, *align_flags, /*with_offset_flag=*/false);
    cmd->add_option("--out", *out_dir, "Output directory")->capture_default_str();

    cmd->callback([=] {
        fs::create_directories(*out_dir);
        mrct_reg_params params = to_params(*reg_flags, *align_flags);
        params.offset_correct = reg_flags->no_offset ? 0 : 1;

        std::ostringstream csv;
        csv << metrics_csv_header();

        if (!fixed_image->empty()) {
            // Pair mode.
            ImageHandle fi, fl, mi, ml;
            check(mrct_image_load_pgm(fixed_image->c_str(), &fi.p), "loading fixed image");
            check(mrct_image_load_label_pgm(fixed_label->c_str(), &fl.p), "loading fixed label");
            check(mrct_image_load_pgm(moving_image->c_str(), &mi.p), "loading moving image");
            check(mrct_image_load_label_pgm(moving_label->c_str(), &ml.p), "loading moving label");

            FieldHandle field;
            ImageHandle warped, warped_label;
            mrct_metric_report report{};
            check(mrct_register_images(fi.p, fl.p, mi.p, ml.p, &params, &field.p, &warped.p,
                                       &warped_label.p, &report),
                  "registering pair");

            check(mrct_field_save(field.p, (fs::path(*out_dir) / "field.bin").string().c_str()),
                  "writing field");
            check(mrct_image_save_pgm(warped.p, (fs::path(*out_dir) / "warped.pgm").string().c_str(),
                                      16),
                  "writing warped image");
            check(mrct_image_save_label_pgm(
                      warped_label.p, (fs::path(*out_dir) / "warped_label.pgm").string().c_str()),
                  "writing warped label");
            csv << metrics_csv_row(0, 0.0, report);
            write_text_file(fs::path(*out_dir) / "metrics.csv", csv.str(), "metrics");
            std::fprintf(stderr, "register: dsc %.4f -> %.4f, hd %.2f px\n", report.dsc_pre,
                         report.dsc, report.hd_px);
            return;
        }

        if (mr_path->empty() || ct_path->empty()) {
            std::fprintf(stderr,
                         "mrctreg register: need either --mr/--ct or the four pair-mode images\n");
            std::exit(2);
        }

        StackHandle mr = maybe_offset_correct(load_stack_checked(*mr_path, "MR stack"),
                                              reg_flags->no_offset, "MR stack");
        StackHandle ct = maybe_offset_correct(load_stack_checked(*ct_path, "CT stack"),
                                              reg_flags->no_offset, "CT stack");
        // Preprocessing already applied stack-wide; the per-pair pipeline
        // must not recenter blended layers again.
        params.offset_correct = 0;

        CorrHandle corr;
        if (!corr_path->empty()) {
            check(mrct_correspondence_load_csv(corr_path->c_str(), &corr.p),
                  "loading correspondence file");
        } else {
            mrct_align_params aparams = to_params(*align_flags);
            check(mrct_align(mr.p, ct.p, &aparams, &corr.p), "aligning stacks");
        }

        struct PairJob {
            int mr_index;
            double ct_frac;
        };
        std::vector<PairJob> jobs;
        for (int i = 0; i < mrct_correspondence_size(corr.p); ++i) {
            PairJob job{};
            double score = 0;
            check(mrct_correspondence_pair(corr.p, i, &job.mr_index, &job.ct_frac, &score),
                  "reading pair");
            jobs.push_back(job);
        }

        struct PairOutput {
            mrct_status status = MRCT_OK;
            mrct_field* field = nullptr;
            mrct_image* warped = nullptr;
            mrct_image* warped_label = nullptr;
            mrct_metric_report report{};
        };
        std::vector<PairOutput> outputs(jobs.size());

        const int n_threads = std::min<int>(env_threads(), (int)jobs.size());
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        auto work = [&] {
            while (true) {
                const size_t i = next.fetch_add(1);
                if (i >= jobs.size()) break;
                PairOutput& o = outputs[i];
                o.status = mrct_register_stack_pair(ct.p, jobs[i].ct_frac, mr.p, jobs[i].mr_index,
                                                    &params, &o.field, &o.warped, &o.warped_label,
                                                    &o.report);
            }
        };
        if (n_threads <= 1) {
            work();
        } else {
            for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
            for (auto& th : pool) th.join();
        }

        for (size_t i = 0; i < jobs.size(); ++i) {
            PairOutput& o = outputs[i];
            if (o.status != MRCT_OK)
                die(o.status, "registering pair mr=" + std::to_string(jobs[i].mr_index));
            char name[64];
            std::snprintf(name, sizeof(name), "field_%04d.bin", jobs[i].mr_index);
            check(mrct_field_save(o.field, (fs::path(*out_dir) / name).string().c_str()),
                  "writing field");
            std::snprintf(name, sizeof(name), "warped_%04d.pgm", jobs[i].mr_index);
            check(mrct_image_save_pgm(o.warped, (fs::path(*out_dir) / name).string().c_str(), 16),
                  "writing warped image");
            std::snprintf(name, sizeof(name), "warped_label_%04d.pgm", jobs[i].mr_index);
            check(mrct_image_save_label_pgm(o.warped_label,
                                            (fs::path(*out_dir) / name).string().c_str()),
                  "writing warped label");
            csv << metrics_csv_row(jobs[i].mr_index, jobs[i].ct_frac, o.report);
            std::fprintf(stderr, "register: pair %zu/%zu mr=%d ct=%.2f dsc %.4f -> %.4f\n", i + 1,
                         jobs.size(), jobs[i].mr_index, jobs[i].ct_frac, o.report.dsc_pre,
                         o.report.dsc);
            mrct_field_free(o.field);
            mrct_image_free(o.warped);
            mrct_image_free(o.warped_label);
        }
        write_text_file(fs::path(*out_dir) / "metrics.csv", csv.str(), "metrics");
    });
    return 0;
}

/* ---- evaluate ------------------------------------------------------- */

int cmd_evaluate(CLI::App& app) {
    auto* cmd = app.add_subcommand("evaluate", "Metrics for an existing displacement field");
    auto fixed_image = std::make_shared<std::string>();
    auto fixed_label = std::make_shared<std::string>();
    auto moving_image = std::make_shared<std::string>();
    auto moving_label = std::make_shared<std::string>();
    auto field_path = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>("report.csv");

    cmd->add_option("--fixed-image", *fixed_image, "Fixed image PGM")->required();
    cmd->add_option("--fixed-label", *fixed_label, "Fixed bone label PGM")->required();
    cmd->add_option("--moving-image", *moving_image, "Moving image PGM")->required();
    cmd->add_option("--moving-label", *moving_label, "Moving bone label PGM")->required();
    cmd->add_option("--field", *field_path, "Displacement field file")->required();
    cmd->add_option("--out", *out_path, "Report CSV path")->capture_default_str();

    cmd->callback([=] {
        ImageHandle fi, fl, mi, ml;
        check(mrct_image_load_pgm(fixed_image->c_str(), &fi.p), "loading fixed image");
        check(mrct_image_load_label_pgm(fixed_label->c_str(), &fl.p), "loading fixed label");
        check(mrct_image_load_pgm(moving_image->c_str(), &mi.p), "loading moving image");
        check(mrct_image_load_label_pgm(moving_label->c_str(), &ml.p), "loading moving label");
        FieldHandle field;
        check(mrct_field_load(field_path->c_str(), &field.p), "loading field");

        mrct_metric_report report{};
        check(mrct_evaluate_images(fi.p, fl.p, mi.p, ml.p, field.p, &report), "evaluating pair");

        std::ostringstream csv;
        csv << metrics_csv_header() << metrics_csv_row(0, 0.0, report);
        write_text_file(*out_path, csv.str(), "report");
        std::printf("dsc=%s jaccard=%s hd_px=%s ssim=%s sim=%s jd_std=%s jd_nonpos_frac=%s\n",
                    fmt(report.dsc).c_str(), fmt(report.jaccard).c_str(), fmt(report.hd_px).c_str(),
                    fmt(report.ssim).c_str(), fmt(report.sim_score).c_str(),
                    fmt(report.jd_std).c_str(), fmt(report.jd_nonpos_frac).c_str());
    });
    return 0;
}

/* ---- denoise -------------------------------------------------------- */

int cmd_denoise(CLI::App& app) {
    auto* cmd = app.add_subcommand("denoise", "Shape-gated denoising of a label pair");
    auto mr_label = std::make_shared<std::string>();
    auto ct_label = std::make_shared<std::string>();
    auto out_mr = std::make_shared<std::string>("denoised_mr.pgm");
    auto out_ct = std::make_shared<std::string>("denoised_ct.pgm");
    auto gamma = std::make_shared<double>(2.0);

    cmd->add_option("--mr-label", *mr_label, "MR label PGM")->required();
    cmd->add_option("--ct-label", *ct_label, "CT label PGM")->required();
    cmd->add_option("--gamma", *gamma, "Aspect-ratio gate threshold")->capture_default_str();
    cmd->add_option("--out-mr", *out_mr, "Denoised MR label path")->capture_default_str();
    cmd->add_option("--out-ct", *out_ct, "Denoised CT label path")->capture_default_str();

    cmd->callback([=] {
        ImageHandle a, b;
        check(mrct_image_load_label_pgm(mr_label->c_str(), &a.p), "loading MR label");
        check(mrct_image_load_label_pgm(ct_label->c_str(), &b.p), "loading CT label");
        ImageHandle da, db;
        check(mrct_denoise_pair(a.p, b.p, *gamma, &da.p, &db.p), "denoising");
        check(mrct_image_save_label_pgm(da.p, out_mr->c_str()), "writing denoised MR label");
        check(mrct_image_save_label_pgm(db.p, out_ct->c_str()), "writing denoised CT label");
    });
    return 0;
}

/* ---- sweep-gamma ---------------------------------------------------- */

int cmd_sweep(CLI::App& app) {
    auto* cmd = app.add_subcommand("sweep-gamma",
                                   "Similarity / retention statistics over a gamma sweep");
    auto mr_path = std::make_shared<std::string>();
    auto ct_path = std::make_shared<std::string>();
    auto gammas = std::make_shared<std::vector<double>>(std::vector<double>{0, 1, 2, 3, 4, 5});
    auto pair_gamma = std::make_shared<double>(2.0);
    auto out_path = std::make_shared<std::string>("sweep.csv");
    auto flags = std::make_shared<AlignFlags>();

    cmd->add_option("--mr", *mr_path, "MR stack manifest")->required();
    cmd->add_option("--ct", *ct_path, "CT stack manifest")->required();
    cmd->add_option("--gammas", *gammas, "Gamma values to sweep")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--pair-gamma", *pair_gamma, "Gamma used to form the slice pairs")
        ->capture_default_str();
    add_align_flags(cmd, *flags);
    cmd->add_option("--out", *out_path, "Sweep CSV path")->capture_default_str();

    cmd->callback([=] {
        StackHandle mr = maybe_offset_correct(load_stack_checked(*mr_path, "MR stack"),
                                              flags->no_offset, "MR stack");
        StackHandle ct = maybe_offset_correct(load_stack_checked(*ct_path, "CT stack"),
                                              flags->no_offset, "CT stack");
        mrct_align_params params = to_params(*flags);
        std::vector<mrct_sweep_row> rows(gammas->size());
        check(mrct_sweep_gamma(mr.p, ct.p, gammas->data(), (int)gammas->size(), *pair_gamma,
                               &params, rows.data()),
              "sweeping gamma");

        std::ostringstream csv;
        csv << "gamma,mean_sim,mean_matched,empty_images,n_images\n";
        for (const mrct_sweep_row& r : rows)
            csv << fmt(r.gamma) << "," << fmt(r.mean_sim) << "," << fmt(r.mean_matched) << ","
                << r.empty_images << "," << r.n_images << "\n";
        write_text_file(*out_path, csv.str(), "sweep CSV");
        for (const mrct_sweep_row& r : rows)
            std::fprintf(stderr, "gamma %.1f: mean SIM %.4f, matched %.2f, empty %d/%d\n", r.gamma,
                         r.mean_sim, r.mean_matched, r.empty_images, r.n_images);
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MR-CT slice stack alignment and weakly supervised registration"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(mrct_version()));

    cmd_phantom(app);
    cmd_align(app);
    cmd_register(app);
    cmd_evaluate(app);
    cmd_denoise(app);
    cmd_sweep(app);

    CLI11_PARSE(app, argc, argv);
    return 0;
}
