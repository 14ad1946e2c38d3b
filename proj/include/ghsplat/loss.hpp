// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ghsplat/image.hpp"

namespace ghs {

/// loss = (1 - lambda) L1 + lambda (1 - SSIM). SSIM uses an 11x11 Gaussian
/// window (sigma 1.5) with zero padding, C1 = 0.01^2, C2 = 0.03^2, and is
/// averaged over every pixel and channel.
struct LossConfig {
    double lambda_ssim = 0.2;
};

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr double kPsnrCap = 99.0;

struct LossValue {
    double total = 0.0;
    double l1 = 0.0;
    double ssim = 1.0;
};

double l1_loss(const Image& rendered, const Image& target);
double mean_squared_error(const Image& rendered, const Image& target);
double ssim(const Image& rendered, const Image& target);

/// 10 log10(1 / MSE), capped at 99 dB.
double psnr(const Image& rendered, const Image& target);

LossValue loss(const Image& rendered, const Image& target, const LossConfig& cfg);

/// Loss plus its gradient with respect to every rendered channel value.
LossValue loss_with_gradient(const Image& rendered, const Image& target, const LossConfig& cfg, PixelArray& grad);

/// 1D normalised Gaussian window used by SSIM.
Eigen::Matrix<double, kSsimWindow, 1> ssim_window();

} // namespace ghs
