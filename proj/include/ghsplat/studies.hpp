// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ghsplat/optim.hpp"

namespace ghs {

// Self-checks and fitting studies shared by the command-line tool and the
// acceptance suite.

struct OrthogonalityReport {
    Eigen::Matrix<double, kNumCoeffs, kNumCoeffs> gram;
    /// max |G_nm| / sqrt(G_nn G_mm) over n != m.
    double max_off_diagonal = 0.0;
    /// max |G_nn - n! sqrt(2 pi)| / (n! sqrt(2 pi)).
    double max_diagonal_error = 0.0;
};

OrthogonalityReport check_orthogonality();

struct GradientSuiteConfig {
    std::uint64_t seed = 0;
    int scenes = 20;
    int size = 64;
    int splats = 5;
    std::vector<double> lambdas{0.0, 0.2};
    double step = 1e-4;
};

struct GradientSuiteReport {
    std::array<double, kParamGroupCount> max_rel_error{};
    std::array<int, kParamGroupCount> checked{};
    /// Parameters with no influence on the kernel (beta outside GES,
    /// coefficients outside GH or above the active rank) whose analytic
    /// gradient was not exactly zero.
    int inert_nonzero = 0;

    double worst() const;
};

/// Analytic gradients against central finite differences on random scenes of
/// mixed kernel kinds, fitted against a noisy render of a second random
/// scene. Inert parameters are only checked for an exactly zero gradient.
GradientSuiteReport gradient_suite(const GradientSuiteConfig& cfg);

/// 128x128 triangle, 2 splats, 3000 steps; rank 9 is reached at step 2800.
FitConfig triangle_study_config(KernelFamily family, std::uint64_t seed = 0);

/// 300 splats on a 256x256 photograph, 600 steps; rank 9 is reached at step 555.
FitConfig photo_study_config(std::uint64_t seed = 0);

struct StudyRow {
    std::string label;
    FitConfig config;
    FitResult result;
};

/// One fit per rank cap; GH kernel, everything else from `base`.
std::vector<StudyRow> rank_ablation(const Image& target, const FitConfig& base, std::span<const int> ranks,
                                    const std::function<void(const StudyRow&)>& on_row = {});

/// Gaussian, Gaussian+GL, GES and GH(base.max_rank) with shared settings.
std::vector<StudyRow> kernel_comparison(const Image& target, const FitConfig& base,
                                        const std::function<void(const StudyRow&)>& on_row = {});

/// Fixed-width text table: label, PSNR, SSIM, MSE, steps.
std::string format_study_table(std::span<const StudyRow> rows);

} // namespace ghs
