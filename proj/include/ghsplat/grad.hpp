// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ghsplat/loss.hpp"
#include "ghsplat/raster.hpp"

namespace ghs {

/// Raw (unconstrained) parameter layout of one image-plane splat. Scales are
/// optimised as logs, opacity as a logit; everything else is used directly.
namespace param {
inline constexpr int kMu = 0;
inline constexpr int kTheta = 2;
inline constexpr int kLogScale = 3;
inline constexpr int kOpacityLogit = 5;
inline constexpr int kColor = 6;
inline constexpr int kC = 9;
inline constexpr int kD = kC + kNumCoeffs;
inline constexpr int kBeta = kD + kNumCoeffs;
inline constexpr int kCount = kBeta + 1;
} // namespace param

using ParamVector = Eigen::Matrix<double, param::kCount, 1>;

enum class ParamGroup { Mu, Theta, Scale, Opacity, Color, CoeffC, CoeffD, Beta };
inline constexpr int kParamGroupCount = 8;

ParamGroup group_of(int index);
std::string_view to_string(ParamGroup group);

ParamVector to_raw(const Splat2D& splat);
/// Writes every raw field back into `splat` (beta clamped to [1, 8]).
void apply_raw(Splat2D& splat, const ParamVector& raw);
double raw_value(const Splat2D& splat, int index);
void set_raw_value(Splat2D& splat, int index, double value);

/// dLoss/d(raw parameter) for one splat.
struct GradientRecord {
    ParamVector values = ParamVector::Zero();

    auto d_mu() { return values.segment<2>(param::kMu); }
    auto d_mu() const { return values.segment<2>(param::kMu); }
    double& d_theta() { return values[param::kTheta]; }
    double d_theta() const { return values[param::kTheta]; }
    auto d_log_scale() { return values.segment<2>(param::kLogScale); }
    auto d_log_scale() const { return values.segment<2>(param::kLogScale); }
    double& d_opacity_logit() { return values[param::kOpacityLogit]; }
    double d_opacity_logit() const { return values[param::kOpacityLogit]; }
    auto d_color() { return values.segment<3>(param::kColor); }
    auto d_color() const { return values.segment<3>(param::kColor); }
    auto d_c() { return values.segment<kNumCoeffs>(param::kC); }
    auto d_c() const { return values.segment<kNumCoeffs>(param::kC); }
    auto d_d() { return values.segment<kNumCoeffs>(param::kD); }
    auto d_d() const { return values.segment<kNumCoeffs>(param::kD); }
    double& d_beta() { return values[param::kBeta]; }
    double d_beta() const { return values[param::kBeta]; }
};

struct BackwardResult {
    LossValue loss;
    Image rendered;
    std::vector<GradientRecord> grads;
};

/// Renders, evaluates the loss against `target`, and backpropagates through
/// compositing, the kernel response and the pixel-to-local map. Per-tile
/// partial sums are reduced in tile order, so results do not depend on the
/// worker count.
BackwardResult backward_2d(std::span<const Splat2D> splats, const Image& target, const LossConfig& cfg,
                           const RenderOptions& options = {});

/// Loss of the rendered splats only (no gradient).
double evaluate_loss_2d(std::span<const Splat2D> splats, const Image& target, const LossConfig& cfg,
                        const RenderOptions& options = {});

struct ParamSelector {
    std::size_t splat = 0;
    int index = 0;
};

struct FiniteDiffReport {
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
    double step_used = 0.0;
};

inline constexpr double kRelErrorFloor = 1e-8;

/// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = kRelErrorFloor);

/// Central difference of the loss in one raw parameter against `analytic`.
/// Central differences at h and h/2 must agree to 1e-6; where they do not, a
/// discontinuity (composite floor, support edge, early stop) lies within the
/// stencil and h shrinks tenfold, at most four times. The best-agreeing pair
/// is reported.
FiniteDiffReport finite_diff_check(std::span<const Splat2D> splats, const Image& target, const LossConfig& cfg,
                                   const RenderOptions& options, ParamSelector which, double analytic,
                                   double step = 1e-4);

/// As above, computing the analytic gradient with backward_2d.
FiniteDiffReport finite_diff_check(std::span<const Splat2D> splats, const Image& target, const LossConfig& cfg,
                                   const RenderOptions& options, ParamSelector which, double step = 1e-4);

} // namespace ghs
