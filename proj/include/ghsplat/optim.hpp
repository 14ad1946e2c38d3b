// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ghsplat/grad.hpp"

namespace ghs {

/// Per-group Adam learning rates. `mu` is in units of the image width.
/// `coeffs` applies to index 0; index n uses coeffs / sqrt(n!), which evens
/// out the step each index makes in image space.
struct LearningRates {
    double mu = 2e-3;
    double theta = 1e-2;
    double log_scale = 5e-3;
    double opacity_logit = 5e-2;
    double color = 1e-2;
    double coeffs = 5e-3;
    double beta = 2e-3;
};

enum class BackgroundPolicy { Fixed, RandomPerStep };

struct FitConfig {
    int total_steps = 3000;
    /// Gaussian-only warm-up; Hermite coefficients stay frozen until then.
    int phase1_steps = 1000;
    /// Steps per Hermite rank increment once the warm-up is over.
    int rank_period = 1000;
    int max_rank = kMaxRank;
    LearningRates lr;
    double lambda_ssim = 0.2;
    std::uint64_t seed = 0;
    KernelKind kernel{KernelFamily::GaussianHermite};
    int splat_count = 2;
    BackgroundPolicy background_policy = BackgroundPolicy::Fixed;
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
    GLConfig gl;
    /// Writes elapsed wall time into the trace. Off by default so traces are
    /// byte-reproducible.
    bool record_wall_time = false;

    /// Throws DomainError on inconsistent settings.
    void validate() const;
};

/// Adam with per-parameter-row step counts, so rows that join late get a
/// fresh bias correction. beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct AdamState {
    Eigen::MatrixXd m;
    Eigen::MatrixXd v;
    Eigen::VectorXi row_steps;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    AdamState(Eigen::Index rows, Eigen::Index cols)
        : m(Eigen::MatrixXd::Zero(rows, cols)), v(Eigen::MatrixXd::Zero(rows, cols)),
          row_steps(Eigen::VectorXi::Zero(rows))
    {
    }
};

class NonFiniteGradient : public std::runtime_error {
public:
    NonFiniteGradient(Eigen::Index row, Eigen::Index col);
    Eigen::Index row;
    Eigen::Index col;
};

/// One bias-corrected Adam update. Rows with a zero learning rate are left
/// untouched, moments included. Throws NonFiniteGradient before modifying
/// anything if an active gradient entry is not finite.
void adam_step(AdamState& state, Eigen::Ref<Eigen::MatrixXd> params, const Eigen::MatrixXd& grads,
               const Eigen::VectorXd& row_lr);

/// 0 during the warm-up, then one more every rank_period steps up to max_rank.
/// Always 0 for kernels without Hermite coefficients.
int active_rank(long step, const FitConfig& cfg);

struct MetricsRow {
    long step = 0;
    double loss = 0.0;
    double l1 = 0.0;
    double ssim = 0.0;
    double psnr = 0.0;
    int active_rank = 0;
    double wall_ms = 0.0;

    bool operator==(const MetricsRow&) const = default;
};

struct FitResult {
    std::vector<Splat2D> splats;
    std::vector<MetricsRow> trace;
    Image final_render;
    double final_psnr = 0.0;
    double final_ssim = 0.0;
    double final_mse = 0.0;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::vector<MetricsRow> trace)
        : std::runtime_error(what), trace(std::move(trace))
    {
    }
    std::vector<MetricsRow> trace;
};

/// Jittered-grid initialisation: scales of half the grid pitch, random
/// rotation, opacity 0.5, colour sampled from the target under each centre.
std::vector<Splat2D> initialize_splats(const Image& target, const FitConfig& cfg);

/// Target as seen over `background` (alpha targets only; others are returned
/// unchanged).
Image composite_target(const Image& target, const Eigen::Vector3d& background);

/// Fits cfg.splat_count splats to `target`. The final render and metrics use
/// cfg.background.
FitResult fit_image(const Image& target, const FitConfig& cfg,
                    const std::function<void(const MetricsRow&)>& on_step = {});

} // namespace ghs
