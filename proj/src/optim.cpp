// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include "ghsplat/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "ghsplat/random.hpp"

namespace ghs {

void FitConfig::validate() const
{
    if (total_steps < 0 || phase1_steps < 0 || phase1_steps > total_steps) {
        throw DomainError("phase1_steps must lie in [0, total_steps]");
    }
    if (rank_period < 1) {
        throw DomainError("rank_period must be at least 1");
    }
    HermiteRank{max_rank};
    if (splat_count < 1) {
        throw DomainError("splat count must be at least 1");
    }
    if (!(lambda_ssim >= 0.0 && lambda_ssim <= 1.0)) {
        throw DomainError("lambda_ssim must lie in [0, 1]");
    }
    if (!(gl.sigma > 0.0)) {
        throw DomainError("GL sigma must be positive");
    }
}

NonFiniteGradient::NonFiniteGradient(Eigen::Index row, Eigen::Index col)
    : std::runtime_error("non-finite gradient for parameter " + std::to_string(row) + " of splat " +
                         std::to_string(col)),
      row(row), col(col)
{
}

void adam_step(AdamState& state, Eigen::Ref<Eigen::MatrixXd> params, const Eigen::MatrixXd& grads,
               const Eigen::VectorXd& row_lr)
{
    for (Eigen::Index r = 0; r < grads.rows(); ++r) {
        if (row_lr[r] == 0.0) {
            continue;
        }
        for (Eigen::Index c = 0; c < grads.cols(); ++c) {
            if (!std::isfinite(grads(r, c))) {
                throw NonFiniteGradient(r, c);
            }
        }
    }
    for (Eigen::Index r = 0; r < grads.rows(); ++r) {
        if (row_lr[r] == 0.0) {
            continue;
        }
        const int t = ++state.row_steps[r];
        const double bias1 = 1.0 - std::pow(state.beta1, t);
        const double bias2 = 1.0 - std::pow(state.beta2, t);
        state.m.row(r) = state.beta1 * state.m.row(r) + (1.0 - state.beta1) * grads.row(r);
        state.v.row(r) = state.beta2 * state.v.row(r) + (1.0 - state.beta2) * grads.row(r).cwiseAbs2();
        const Eigen::ArrayXd m_hat = state.m.row(r).transpose().array() / bias1;
        const Eigen::ArrayXd v_hat = state.v.row(r).transpose().array() / bias2;
        params.row(r) -= (row_lr[r] * m_hat / (v_hat.sqrt() + state.eps)).matrix().transpose();
    }
}

int active_rank(long step, const FitConfig& cfg)
{
    if (cfg.kernel.family != KernelFamily::GaussianHermite || step < cfg.phase1_steps) {
        return 0;
    }
    return static_cast<int>(std::min<long>(cfg.max_rank, (step - cfg.phase1_steps) / cfg.rank_period));
}

std::vector<Splat2D> initialize_splats(const Image& target, const FitConfig& cfg)
{
    CounterRng rng = CounterRng(cfg.seed).fork(0);
    const int n = cfg.splat_count;
    const double w = target.width();
    const double h = target.height();
    const int cols = static_cast<int>(std::ceil(std::sqrt(n * w / h)));
    const int rows = (n + cols - 1) / cols;
    const double cell_w = w / cols;
    const double cell_h = h / rows;
    const double pitch = std::sqrt(w * h / n);

    std::vector<Splat2D> splats(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Splat2D& s = splats[static_cast<std::size_t>(i)];
        const int gx = i % cols;
        const int gy = i / cols;
        s.mu = {(gx + 0.5 + rng.uniform(-0.25, 0.25)) * cell_w, (gy + 0.5 + rng.uniform(-0.25, 0.25)) * cell_h};
        s.theta = rng.uniform(0.0, std::numbers::pi);
        s.scale = Eigen::Vector2d::Constant(0.5 * pitch);
        s.opacity = 0.5;
        const int px = std::clamp(static_cast<int>(s.mu.x()), 0, target.width() - 1);
        const int py = std::clamp(static_cast<int>(s.mu.y()), 0, target.height() - 1);
        s.color = target.pixel(px, py).transpose().matrix().cwiseMax(0.0).cwiseMin(1.0);
        s.kind = cfg.kernel;
        if (s.kind.family == KernelFamily::GES) {
            s.kind.beta = std::clamp(s.kind.beta, kMinBeta, kMaxBeta);
        }
        s.gh = GHParams::gaussian();
        s.z_order = i;
    }
    return splats;
}

Image composite_target(const Image& target, const Eigen::Vector3d& background)
{
    if (!target.alpha()) {
        return target;
    }
    Image out(target.width(), target.height());
    const Eigen::ArrayXd& a = *target.alpha();
    out.rgb() = target.rgb().colwise() * a;
    out.rgb() += ((1.0 - a).matrix() * background.transpose()).array();
    return out;
}

namespace {

Eigen::VectorXd row_learning_rates(const FitConfig& cfg, long step, int rank, double width)
{
    Eigen::VectorXd lr = Eigen::VectorXd::Zero(param::kCount);
    lr.segment<2>(param::kMu).setConstant(cfg.lr.mu * width);
    lr[param::kTheta] = cfg.lr.theta;
    lr.segment<2>(param::kLogScale).setConstant(cfg.lr.log_scale);
    lr[param::kOpacityLogit] = cfg.lr.opacity_logit;
    lr.segment<3>(param::kColor).setConstant(cfg.lr.color);
    if (cfg.kernel.family == KernelFamily::GaussianHermite && step >= cfg.phase1_steps) {
        // ||He_n||^2 grows like n!, so an equal Adam step on every index
        // would move the high orders hardest. Scale by 1/sqrt(n!).
        double factorial = 1.0;
        for (int n = 0; n <= rank; ++n) {
            factorial *= std::max(n, 1);
            lr[param::kC + n] = cfg.lr.coeffs / std::sqrt(factorial);
            lr[param::kD + n] = cfg.lr.coeffs / std::sqrt(factorial);
        }
    }
    if (cfg.kernel.family == KernelFamily::GES) {
        lr[param::kBeta] = cfg.lr.beta;
    }
    return lr;
}

void materialize(const Eigen::MatrixXd& params, int rank, std::vector<Splat2D>& splats)
{
    for (std::size_t i = 0; i < splats.size(); ++i) {
        apply_raw(splats[i], params.col(static_cast<Eigen::Index>(i)));
        splats[i].gh.active_rank = rank;
    }
}

} // namespace

FitResult fit_image(const Image& target, const FitConfig& cfg, const std::function<void(const MetricsRow&)>& on_step)
{
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const LossConfig loss_cfg{cfg.lambda_ssim};
    CounterRng background_rng = CounterRng(cfg.seed).fork(1);

    FitResult result;
    result.splats = initialize_splats(target, cfg);
    Eigen::MatrixXd params(param::kCount, cfg.splat_count);
    for (int i = 0; i < cfg.splat_count; ++i) {
        params.col(i) = to_raw(result.splats[static_cast<std::size_t>(i)]);
    }
    AdamState adam(param::kCount, cfg.splat_count);
    Eigen::MatrixXd grads(param::kCount, cfg.splat_count);

    const Image fixed_target = composite_target(target, cfg.background);
    result.trace.reserve(static_cast<std::size_t>(cfg.total_steps));
    for (long step = 0; step < cfg.total_steps; ++step) {
        const int rank = active_rank(step, cfg);
        materialize(params, rank, result.splats);

        RenderOptions options{cfg.background, cfg.gl};
        Image step_target;
        if (cfg.background_policy == BackgroundPolicy::RandomPerStep) {
            options.background = {background_rng.uniform(), background_rng.uniform(), background_rng.uniform()};
            step_target = composite_target(target, options.background);
        }
        const Image& supervision = cfg.background_policy == BackgroundPolicy::RandomPerStep ? step_target : fixed_target;

        const BackwardResult back = backward_2d(result.splats, supervision, loss_cfg, options);
        MetricsRow row;
        row.step = step;
        row.loss = back.loss.total;
        row.l1 = back.loss.l1;
        row.ssim = back.loss.ssim;
        row.psnr = psnr(back.rendered, supervision);
        row.active_rank = rank;
        if (cfg.record_wall_time) {
            row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
        result.trace.push_back(row);
        if (on_step) {
            on_step(row);
        }
        if (!std::isfinite(row.loss)) {
            throw DivergenceError("loss became non-finite at step " + std::to_string(step), result.trace);
        }

        for (int i = 0; i < cfg.splat_count; ++i) {
            grads.col(i) = back.grads[static_cast<std::size_t>(i)].values;
        }
        try {
            adam_step(adam, params, grads, row_learning_rates(cfg, step, rank, target.width()));
        } catch (const NonFiniteGradient& e) {
            throw DivergenceError(e.what(), result.trace);
        }
        params.block(param::kColor, 0, 3, params.cols()) =
            params.block(param::kColor, 0, 3, params.cols()).cwiseMax(0.0).cwiseMin(1.0);
        params.row(param::kBeta) = params.row(param::kBeta).cwiseMax(kMinBeta).cwiseMin(kMaxBeta);
    }

    materialize(params, cfg.total_steps > 0 ? active_rank(cfg.total_steps - 1, cfg) : 0, result.splats);
    result.final_render = rasterize_2d(result.splats, target.width(), target.height(), {cfg.background, cfg.gl});
    result.final_psnr = psnr(result.final_render, fixed_target);
    result.final_ssim = ssim(result.final_render, fixed_target);
    result.final_mse = mean_squared_error(result.final_render, fixed_target);
    return result;
}

} // namespace ghs
