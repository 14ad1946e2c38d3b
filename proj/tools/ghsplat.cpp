// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: fitting, rendering and the self-checks.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ghsplat/io.hpp"
#include "ghsplat/optim.hpp"
#include "ghsplat/scenes.hpp"
#include "ghsplat/studies.hpp"

namespace fs = std::filesystem;
using namespace ghs;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kCheckFailed = 3, kDiverged = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitOptions {
    std::string target;
    std::string kernel = "gh";
    int splats = 2;
    int steps = 3000;
    int phase1 = 1000;
    int rank_period = 1000;
    int max_rank = kMaxRank;
    std::uint64_t seed = 0;
    double lambda = 0.2;
    std::vector<double> background{0.0, 0.0, 0.0};
    bool random_background = false;
    double beta = 2.0;
    int log_every = 100;
    LearningRates lr;
};

void add_fit_options(CLI::App* cmd, FitOptions& o, bool with_kernel)
{
    cmd->add_option("--target", o.target, "Target image (PPM/PGM/PAM)")->required();
    if (with_kernel) {
        cmd->add_option("--kernel", o.kernel, "gaussian, gaussian-gl, ges or gh")
            ->check(CLI::IsMember({"gaussian", "gaussian-gl", "ges", "gh"}))
            ->capture_default_str();
    }
    cmd->add_option("--splats", o.splats, "Number of splats")->capture_default_str();
    cmd->add_option("--steps", o.steps, "Total optimisation steps")->capture_default_str();
    cmd->add_option("--phase1", o.phase1, "Steps before Hermite coefficients are trained")->capture_default_str();
    cmd->add_option("--rank-period", o.rank_period, "Steps per Hermite rank increment")->capture_default_str();
    if (with_kernel) {
        cmd->add_option("--max-rank", o.max_rank, "Highest Hermite rank")->check(CLI::Range(0, kMaxRank))
            ->capture_default_str();
    }
    cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd->add_option("--lambda", o.lambda, "SSIM weight in the loss")->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--background", o.background, "Background colour r g b")->expected(3);
    cmd->add_flag("--random-background", o.random_background, "Random background per step (alpha targets)");
    cmd->add_option("--beta", o.beta, "Initial GES shape parameter")->check(CLI::Range(kMinBeta, kMaxBeta))
        ->capture_default_str();
    cmd->add_option("--log-every", o.log_every, "Progress line every N steps on stderr (0 = off)")
        ->capture_default_str();
    cmd->add_option("--lr-mu", o.lr.mu, "Learning rate of centres (image widths)")->capture_default_str();
    cmd->add_option("--lr-theta", o.lr.theta)->capture_default_str();
    cmd->add_option("--lr-scale", o.lr.log_scale, "Learning rate of log scales")->capture_default_str();
    cmd->add_option("--lr-opacity", o.lr.opacity_logit, "Learning rate of the opacity logit")->capture_default_str();
    cmd->add_option("--lr-color", o.lr.color)->capture_default_str();
    cmd->add_option("--lr-coeffs", o.lr.coeffs, "Learning rate of Hermite coefficient 0; index n uses lr / sqrt(n!)")
        ->capture_default_str();
    cmd->add_option("--lr-beta", o.lr.beta)->capture_default_str();
}

FitConfig to_config(const FitOptions& o)
{
    FitConfig cfg;
    try {
        cfg.kernel.family = parse_kernel_family(o.kernel);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    cfg.kernel.beta = o.beta;
    cfg.splat_count = o.splats;
    cfg.total_steps = o.steps;
    cfg.phase1_steps = o.phase1;
    cfg.rank_period = o.rank_period;
    cfg.max_rank = o.max_rank;
    cfg.seed = o.seed;
    cfg.lambda_ssim = o.lambda;
    cfg.background = Eigen::Vector3d(o.background[0], o.background[1], o.background[2]);
    cfg.background_policy = o.random_background ? BackgroundPolicy::RandomPerStep : BackgroundPolicy::Fixed;
    cfg.lr = o.lr;
    try {
        cfg.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

std::function<void(const MetricsRow&)> progress(int every, const std::string& prefix = "")
{
    if (every <= 0) {
        return {};
    }
    return [every, prefix](const MetricsRow& r) {
        if (r.step % every == 0) {
            std::fprintf(stderr, "%sstep %6ld  loss %.6f  psnr %7.3f  rank %d\n", prefix.c_str(), r.step, r.loss,
                         r.psnr, r.active_rank);
        }
    };
}

int run_fit(const FitOptions& o, const std::string& out_dir)
{
    const FitConfig cfg = to_config(o);
    const Image target = read_image(o.target);
    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    FitResult result;
    try {
        result = fit_image(target, cfg, progress(o.log_every));
    } catch (const DivergenceError& e) {
        write_metrics_csv(out / "metrics.csv", e.trace);
        std::cerr << "error: " << e.what() << "\n";
        return kDiverged;
    }

    SceneFile scene;
    scene.dimension = 2;
    scene.kernel = cfg.kernel;
    scene.width = target.width();
    scene.height = target.height();
    scene.background = cfg.background;
    scene.splats_2d = result.splats;
    save_scene(out / "scene.json", scene);
    write_ppm(out / "render.ppm", result.final_render);
    write_metrics_csv(out / "metrics.csv", result.trace);
    write_ppm(out / "strip.ppm", make_strip(composite_target(target, cfg.background), result.final_render));
    std::printf("psnr %.4f  ssim %.5f  mse %.6e\n", result.final_psnr, result.final_ssim, result.final_mse);
    return kOk;
}

int run_render(const std::string& scene_path, const std::string& camera_path, const std::string& out,
               const std::string& depth_out)
{
    const SceneFile scene = load_scene(scene_path);
    const RenderOptions options{scene.background, {}};
    if (scene.dimension == 2) {
        if (!camera_path.empty()) {
            throw UsageError("--camera applies to 3D scenes only");
        }
        write_ppm(out, rasterize_2d(scene.splats_2d, scene.width, scene.height, options));
        return kOk;
    }
    std::optional<Camera> camera = scene.camera;
    if (!camera_path.empty()) {
        camera = load_camera(camera_path);
    }
    if (!camera) {
        throw UsageError("3D scene has no camera; pass --camera");
    }
    const Image image = rasterize_3d(scene.splats_3d, *camera, options);
    write_ppm(out, image);
    fs::path depth_path = depth_out;
    if (depth_path.empty()) {
        depth_path = fs::path(out).replace_extension().string() + "_depth.pgm";
    }
    write_depth_pgm(depth_path, image);
    return kOk;
}

int run_gradcheck(const GradientSuiteConfig& cfg)
{
    const GradientSuiteReport report = gradient_suite(cfg);
    constexpr double kTolerance = 1e-4;
    std::printf("group     max_rel_error  checked\n");
    for (int g = 0; g < kParamGroupCount; ++g) {
        std::printf("%-8s  %13.3e  %7d\n", std::string(to_string(static_cast<ParamGroup>(g))).c_str(),
                    report.max_rel_error[static_cast<std::size_t>(g)], report.checked[static_cast<std::size_t>(g)]);
    }
    if (report.inert_nonzero > 0) {
        std::printf("%d inert parameters received a nonzero gradient\n", report.inert_nonzero);
    }
    const bool ok = report.worst() <= kTolerance && report.inert_nonzero == 0;
    std::printf("%s (tolerance %.0e)\n", ok ? "ok" : "FAILED", kTolerance);
    return ok ? kOk : kCheckFailed;
}

int run_ortho()
{
    const OrthogonalityReport report = check_orthogonality();
    for (int n = 0; n < kNumCoeffs; ++n) {
        for (int m = 0; m < kNumCoeffs; ++m) {
            std::printf("%s%14.6e", m ? " " : "", report.gram(n, m));
        }
        std::printf("\n");
    }
    std::printf("max off-diagonal (normalised) %.3e\n", report.max_off_diagonal);
    std::printf("max diagonal error vs n! sqrt(2 pi) %.3e\n", report.max_diagonal_error);
    const bool ok = report.max_off_diagonal <= 1e-8 && report.max_diagonal_error <= 1e-6;
    std::printf("%s\n", ok ? "ok" : "FAILED");
    return ok ? kOk : kCheckFailed;
}

FitConfig study_config(const FitOptions& o, const CLI::App* cmd)
{
    FitConfig cfg = photo_study_config(o.seed);
    const auto given = [cmd](const char* name) { return cmd->count(name) > 0; };
    if (given("--splats")) cfg.splat_count = o.splats;
    if (given("--steps")) cfg.total_steps = o.steps;
    if (given("--phase1")) cfg.phase1_steps = o.phase1;
    if (given("--rank-period")) cfg.rank_period = o.rank_period;
    if (given("--max-rank")) cfg.max_rank = o.max_rank;
    cfg.lambda_ssim = o.lambda;
    cfg.background = Eigen::Vector3d(o.background[0], o.background[1], o.background[2]);
    cfg.background_policy = o.random_background ? BackgroundPolicy::RandomPerStep : BackgroundPolicy::Fixed;
    cfg.lr = o.lr;
    try {
        cfg.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

void print_row(const StudyRow& row)
{
    std::fprintf(stderr, "%s: psnr %.4f\n", row.label.c_str(), row.result.final_psnr);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Gaussian-Hermite splatting on the CPU"};
    app.require_subcommand(1);

    FitOptions fit;
    std::string fit_out;
    auto* fit_cmd = app.add_subcommand("fit", "Fit splats to an image");
    add_fit_options(fit_cmd, fit, true);
    fit_cmd->add_option("--out", fit_out, "Output directory")->required();

    std::string scene_path, camera_path, render_out, depth_out;
    auto* render_cmd = app.add_subcommand("render", "Render a scene file");
    render_cmd->add_option("--scene", scene_path)->required();
    render_cmd->add_option("--camera", camera_path, "Camera file (3D scenes)");
    render_cmd->add_option("--out", render_out, "Output PPM")->required();
    render_cmd->add_option("--depth", depth_out, "Depth PGM for 3D scenes (default <out>_depth.pgm)");

    GradientSuiteConfig grad_cfg;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
    grad_cmd->add_option("--seed", grad_cfg.seed)->capture_default_str();
    grad_cmd->add_option("--scenes", grad_cfg.scenes, "Random scenes")->check(CLI::PositiveNumber)
        ->capture_default_str();
    grad_cmd->add_option("--size", grad_cfg.size, "Image side in pixels")->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* ortho_cmd = app.add_subcommand("ortho", "Print the Hermite orthogonality integrals");

    FitOptions ablate;
    std::vector<int> ranks{0, 3, 6, 9};
    auto* ablate_cmd = app.add_subcommand("ablate-rank", "Final quality against the highest Hermite rank");
    add_fit_options(ablate_cmd, ablate, false);
    ablate_cmd->add_option("--ranks", ranks, "Comma-separated rank caps")->delimiter(',')
        ->check(CLI::Range(0, kMaxRank));

    FitOptions compare;
    auto* compare_cmd = app.add_subcommand("compare-kernels", "Fit with every kernel kind");
    add_fit_options(compare_cmd, compare, false);
    compare_cmd->add_option("--max-rank", compare.max_rank, "Highest Hermite rank")->check(CLI::Range(0, kMaxRank))
        ->capture_default_str();

    int synth_size = 128;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Write the anti-aliased triangle target");
    synth_cmd->add_option("--size", synth_size)->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "Output PPM")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*fit_cmd) {
            return run_fit(fit, fit_out);
        }
        if (*render_cmd) {
            return run_render(scene_path, camera_path, render_out, depth_out);
        }
        if (*grad_cmd) {
            return run_gradcheck(grad_cfg);
        }
        if (*ortho_cmd) {
            return run_ortho();
        }
        if (*ablate_cmd) {
            const FitConfig cfg = study_config(ablate, ablate_cmd);
            const Image target = read_image(ablate.target);
            const auto rows = rank_ablation(target, cfg, ranks, print_row);
            std::cout << format_study_table(rows);
            return kOk;
        }
        if (*compare_cmd) {
            FitConfig cfg = study_config(compare, compare_cmd);
            cfg.kernel.beta = compare.beta;
            const Image target = read_image(compare.target);
            const auto rows = kernel_comparison(target, cfg, print_row);
            std::cout << format_study_table(rows);
            return kOk;
        }
        if (*synth_cmd) {
            write_ppm(synth_out, make_triangle_target(synth_size, synth_size));
            return kOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDiverged;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
