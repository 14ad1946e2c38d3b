// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include "ghsplat/loss.hpp"

#include <algorithm>
#include <cmath>

namespace ghs {

Eigen::Matrix<double, kSsimWindow, 1> ssim_window()
{
    Eigen::Matrix<double, kSsimWindow, 1> w;
    const int half = kSsimWindow / 2;
    for (int k = 0; k < kSsimWindow; ++k) {
        const double d = k - half;
        w[k] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    }
    return w / w.sum();
}

namespace {

void require_same_size(const Image& a, const Image& b)
{
    if (!a.same_size(b)) {
        throw DomainError("image dimensions differ");
    }
}

// Separable Gaussian filter with zero padding. The window is symmetric, so
// this is also its own adjoint.
Plane blur(const Plane& in)
{
    static const Eigen::Matrix<double, kSsimWindow, 1> w = ssim_window();
    const int half = kSsimWindow / 2;
    const Eigen::Index rows = in.rows();
    const Eigen::Index cols = in.cols();
    Plane tmp = Plane::Zero(rows, cols);
    for (Eigen::Index y = 0; y < rows; ++y) {
        for (Eigen::Index x = 0; x < cols; ++x) {
            const Eigen::Index k0 = std::max<Eigen::Index>(0, half - x);
            const Eigen::Index k1 = std::min<Eigen::Index>(kSsimWindow, cols - x + half);
            double acc = 0.0;
            for (Eigen::Index k = k0; k < k1; ++k) {
                acc += w[k] * in(y, x + k - half);
            }
            tmp(y, x) = acc;
        }
    }
    Plane out = Plane::Zero(rows, cols);
    for (Eigen::Index y = 0; y < rows; ++y) {
        for (int k = 0; k < kSsimWindow; ++k) {
            const Eigen::Index yy = y + k - half;
            if (yy >= 0 && yy < rows) {
                out.row(y) += w[k] * tmp.row(yy);
            }
        }
    }
    return out;
}

struct SsimChannel {
    double sum = 0.0;
    Plane grad; // d(sum of SSIM map) / d(rendered)
};

SsimChannel ssim_channel(const Plane& x, const Plane& y, bool with_grad)
{
    const Plane mu_x = blur(x);
    const Plane mu_y = blur(y);
    const Plane e_xx = blur(x * x);
    const Plane e_yy = blur(y * y);
    const Plane e_xy = blur(x * y);

    const Plane n1 = 2.0 * mu_x * mu_y + kSsimC1;
    const Plane n2 = 2.0 * (e_xy - mu_x * mu_y) + kSsimC2;
    const Plane d1 = mu_x.square() + mu_y.square() + kSsimC1;
    const Plane d2 = (e_xx - mu_x.square()) + (e_yy - mu_y.square()) + kSsimC2;
    const Plane map = (n1 * n2) / (d1 * d2);

    SsimChannel out;
    out.sum = map.sum();
    if (with_grad) {
        const Plane dd = d1 * d2;
        const Plane d_mu = (2.0 * mu_y * n2 - 2.0 * mu_y * n1) / dd - map * (2.0 * mu_x / d1 - 2.0 * mu_x / d2);
        const Plane d_exx = -map / d2;
        const Plane d_exy = 2.0 * n1 / dd;
        out.grad = blur(d_mu) + 2.0 * x * blur(d_exx) + y * blur(d_exy);
    }
    return out;
}

double ssim_impl(const Image& rendered, const Image& target, PixelArray* grad)
{
    double sum = 0.0;
    const double n = static_cast<double>(rendered.pixel_count()) * 3.0;
    for (int c = 0; c < 3; ++c) {
        const SsimChannel ch = ssim_channel(rendered.channel(c), target.channel(c), grad != nullptr);
        sum += ch.sum;
        if (grad) {
            grad->col(c) = Eigen::Map<const Eigen::ArrayXd>(ch.grad.data(), ch.grad.size()) / n;
        }
    }
    return sum / n;
}

} // namespace

double l1_loss(const Image& rendered, const Image& target)
{
    require_same_size(rendered, target);
    return (rendered.rgb() - target.rgb()).abs().mean();
}

double mean_squared_error(const Image& rendered, const Image& target)
{
    require_same_size(rendered, target);
    return (rendered.rgb() - target.rgb()).square().mean();
}

double ssim(const Image& rendered, const Image& target)
{
    require_same_size(rendered, target);
    return ssim_impl(rendered, target, nullptr);
}

double psnr(const Image& rendered, const Image& target)
{
    const double mse = mean_squared_error(rendered, target);
    if (mse <= 0.0) {
        return kPsnrCap;
    }
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

LossValue loss(const Image& rendered, const Image& target, const LossConfig& cfg)
{
    LossValue v;
    v.l1 = l1_loss(rendered, target);
    v.ssim = ssim(rendered, target);
    v.total = (1.0 - cfg.lambda_ssim) * v.l1 + cfg.lambda_ssim * (1.0 - v.ssim);
    return v;
}

LossValue loss_with_gradient(const Image& rendered, const Image& target, const LossConfig& cfg, PixelArray& grad)
{
    require_same_size(rendered, target);
    const double lambda = cfg.lambda_ssim;
    const double n = static_cast<double>(rendered.pixel_count()) * 3.0;
    LossValue v;
    const PixelArray diff = rendered.rgb() - target.rgb();
    v.l1 = diff.abs().mean();
    grad = ((1.0 - lambda) / n) * diff.sign();
    if (lambda != 0.0) {
        PixelArray ssim_grad(rendered.pixel_count(), 3);
        v.ssim = ssim_impl(rendered, target, &ssim_grad);
        grad -= lambda * ssim_grad;
    } else {
        v.ssim = ssim_impl(rendered, target, nullptr);
    }
    v.total = (1.0 - lambda) * v.l1 + lambda * (1.0 - v.ssim);
    return v;
}

} // namespace ghs
