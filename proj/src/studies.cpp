// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include "ghsplat/studies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "ghsplat/random.hpp"
#include "ghsplat/scenes.hpp"

namespace ghs {

OrthogonalityReport check_orthogonality()
{
    OrthogonalityReport report;
    report.gram = orthogonality_matrix();
    const double root_two_pi = std::sqrt(2.0 * std::numbers::pi);
    double factorial = 1.0;
    for (int n = 0; n < kNumCoeffs; ++n) {
        factorial *= std::max(n, 1);
        const double exact = factorial * root_two_pi;
        report.max_diagonal_error =
            std::max(report.max_diagonal_error, std::abs(report.gram(n, n) - exact) / exact);
        for (int m = 0; m < kNumCoeffs; ++m) {
            if (m != n) {
                const double scale = std::sqrt(report.gram(n, n) * report.gram(m, m));
                report.max_off_diagonal = std::max(report.max_off_diagonal, std::abs(report.gram(n, m)) / scale);
            }
        }
    }
    return report;
}

double GradientSuiteReport::worst() const { return *std::max_element(max_rel_error.begin(), max_rel_error.end()); }

namespace {

bool is_inert(const Splat2D& s, int index)
{
    const ParamGroup group = group_of(index);
    if (group == ParamGroup::Beta) {
        return s.kind.family != KernelFamily::GES;
    }
    if (group == ParamGroup::CoeffC || group == ParamGroup::CoeffD) {
        const int n = index - (group == ParamGroup::CoeffC ? param::kC : param::kD);
        return s.kind.family != KernelFamily::GaussianHermite || n > s.gh.active_rank;
    }
    return false;
}

} // namespace

GradientSuiteReport gradient_suite(const GradientSuiteConfig& cfg)
{
    GradientSuiteReport report;
    const CounterRng root(cfg.seed);
    for (int scene = 0; scene < cfg.scenes; ++scene) {
        CounterRng rng = root.fork(static_cast<std::uint64_t>(scene));
        const std::vector<Splat2D> splats = random_scene_2d(rng, cfg.size, cfg.size, cfg.splats);
        const std::vector<Splat2D> other = random_scene_2d(rng, cfg.size, cfg.size, cfg.splats);
        Image target = rasterize_2d(other, cfg.size, cfg.size);
        for (Eigen::Index i = 0; i < target.rgb().size(); ++i) {
            target.rgb().data()[i] += rng.uniform(-0.05, 0.05);
        }
        for (const double lambda : cfg.lambdas) {
            const LossConfig loss_cfg{lambda};
            const BackwardResult back = backward_2d(splats, target, loss_cfg);
            for (std::size_t k = 0; k < splats.size(); ++k) {
                for (int index = 0; index < param::kCount; ++index) {
                    const double analytic = back.grads[k].values[index];
                    if (is_inert(splats[k], index)) {
                        report.inert_nonzero += analytic != 0.0;
                        continue;
                    }
                    const FiniteDiffReport fd =
                        finite_diff_check(splats, target, loss_cfg, {}, {k, index}, analytic, cfg.step);
                    const auto g = static_cast<std::size_t>(group_of(index));
                    report.max_rel_error[g] = std::max(report.max_rel_error[g], fd.rel_error);
                    ++report.checked[g];
                }
            }
        }
    }
    return report;
}

FitConfig triangle_study_config(KernelFamily family, std::uint64_t seed)
{
    FitConfig cfg;
    cfg.kernel = KernelKind{family};
    cfg.splat_count = 2;
    cfg.total_steps = 3000;
    cfg.phase1_steps = 1000;
    cfg.rank_period = 200;
    cfg.max_rank = kMaxRank;
    cfg.seed = seed;
    return cfg;
}

FitConfig photo_study_config(std::uint64_t seed)
{
    FitConfig cfg;
    cfg.splat_count = 300;
    cfg.total_steps = 600;
    cfg.phase1_steps = 150;
    cfg.rank_period = 45;
    cfg.max_rank = kMaxRank;
    cfg.seed = seed;
    return cfg;
}

std::vector<StudyRow> rank_ablation(const Image& target, const FitConfig& base, std::span<const int> ranks,
                                    const std::function<void(const StudyRow&)>& on_row)
{
    std::vector<StudyRow> rows;
    for (const int rank : ranks) {
        StudyRow row;
        row.label = "gh rank " + std::to_string(rank);
        row.config = base;
        row.config.kernel = KernelKind{KernelFamily::GaussianHermite};
        row.config.max_rank = rank;
        row.result = fit_image(target, row.config);
        if (on_row) {
            on_row(row);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<StudyRow> kernel_comparison(const Image& target, const FitConfig& base,
                                        const std::function<void(const StudyRow&)>& on_row)
{
    std::vector<StudyRow> rows;
    for (const KernelFamily family :
         {KernelFamily::Gaussian, KernelFamily::GaussianGL, KernelFamily::GES, KernelFamily::GaussianHermite}) {
        StudyRow row;
        row.label = std::string(to_string(family));
        if (family == KernelFamily::GaussianHermite) {
            row.label += " rank " + std::to_string(base.max_rank);
        }
        row.config = base;
        row.config.kernel = KernelKind{family};
        row.result = fit_image(target, row.config);
        if (on_row) {
            on_row(row);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_study_table(std::span<const StudyRow> rows)
{
    std::string out = "kernel              psnr_db    ssim      mse         steps\n";
    char line[160];
    for (const StudyRow& r : rows) {
        std::snprintf(line, sizeof line, "%-18s  %8.4f  %7.5f  %.4e  %6d\n", r.label.c_str(), r.result.final_psnr,
                      r.result.final_ssim, r.result.final_mse, r.config.total_steps);
        out += line;
    }
    return out;
}

} // namespace ghs
