// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include "ghsplat/grad.hpp"

#include <cmath>
#include <limits>

#include "ghsplat/parallel.hpp"
#include "raster_detail.hpp"

namespace ghs {

namespace {

constexpr double kOpacityClamp = 1e-12;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p)
{
    const double q = std::clamp(p, kOpacityClamp, 1.0 - kOpacityClamp);
    return std::log(q / (1.0 - q));
}

struct Hit {
    std::uint32_t slot;
    double u;
    double v;
    double alpha;
    double transmittance;
};

} // namespace

ParamGroup group_of(int index)
{
    using namespace param;
    if (index < kTheta) return ParamGroup::Mu;
    if (index < kLogScale) return ParamGroup::Theta;
    if (index < kOpacityLogit) return ParamGroup::Scale;
    if (index < kColor) return ParamGroup::Opacity;
    if (index < kC) return ParamGroup::Color;
    if (index < kD) return ParamGroup::CoeffC;
    if (index < kBeta) return ParamGroup::CoeffD;
    return ParamGroup::Beta;
}

std::string_view to_string(ParamGroup group)
{
    switch (group) {
    case ParamGroup::Mu: return "mu";
    case ParamGroup::Theta: return "theta";
    case ParamGroup::Scale: return "scales";
    case ParamGroup::Opacity: return "opacity";
    case ParamGroup::Color: return "color";
    case ParamGroup::CoeffC: return "c";
    case ParamGroup::CoeffD: return "d";
    case ParamGroup::Beta: return "beta";
    }
    return "unknown";
}

ParamVector to_raw(const Splat2D& splat)
{
    ParamVector raw;
    for (int i = 0; i < param::kCount; ++i) {
        raw[i] = raw_value(splat, i);
    }
    return raw;
}

void apply_raw(Splat2D& splat, const ParamVector& raw)
{
    for (int i = 0; i < param::kCount; ++i) {
        set_raw_value(splat, i, raw[i]);
    }
}

double raw_value(const Splat2D& splat, int index)
{
    using namespace param;
    if (index < kTheta) return splat.mu[index - kMu];
    if (index < kLogScale) return splat.theta;
    if (index < kOpacityLogit) return std::log(splat.scale[index - kLogScale]);
    if (index < kColor) return logit(splat.opacity);
    if (index < kC) return splat.color[index - kColor];
    if (index < kD) return splat.gh.c[index - kC];
    if (index < kBeta) return splat.gh.d[index - kD];
    return splat.kind.beta;
}

void set_raw_value(Splat2D& splat, int index, double value)
{
    using namespace param;
    if (index < kTheta) {
        splat.mu[index - kMu] = value;
    } else if (index < kLogScale) {
        splat.theta = value;
    } else if (index < kOpacityLogit) {
        splat.scale[index - kLogScale] = std::exp(value);
    } else if (index < kColor) {
        splat.opacity = sigmoid(value);
    } else if (index < kC) {
        splat.color[index - kColor] = value;
    } else if (index < kD) {
        splat.gh.c[index - kC] = value;
    } else if (index < kBeta) {
        splat.gh.d[index - kD] = value;
    } else {
        splat.kind.beta = std::clamp(value, kMinBeta, kMaxBeta);
    }
}

BackwardResult backward_2d(std::span<const Splat2D> splats, const Image& target, const LossConfig& cfg,
                           const RenderOptions& options)
{
    const int width = target.width();
    const int height = target.height();
    BackwardResult result;
    result.rendered = rasterize_2d(splats, width, height, options);

    PixelArray d_pixel;
    result.loss = loss_with_gradient(result.rendered, target, cfg, d_pixel);

    const auto prepared = detail::prepare(splats);
    const TileBinning binning = bin_tiles(splats, width, height);
    std::vector<std::vector<ParamVector>> partials(binning.tiles.size());

    parallel_for(binning.tiles.size(), [&](std::size_t t) {
        const auto& order = binning.tiles[t];
        if (order.empty()) {
            return;
        }
        auto& acc = partials[t];
        acc.assign(order.size(), ParamVector::Zero());
        const PixelRect rect = binning.tile_rect(static_cast<int>(t % binning.tiles_x),
                                                 static_cast<int>(t / binning.tiles_x), width, height);
        std::vector<Hit> hits;
        Eigen::Vector3d color;
        for (int y = rect.y0; y <= rect.y1; ++y) {
            for (int x = rect.x0; x <= rect.x1; ++x) {
                hits.clear();
                const Eigen::Vector2d px = pixel_center(x, y);
                detail::composite_2d(prepared, order, px, options.gl, color,
                                     [&](std::size_t j, double u, double v, double a, double tr) {
                                         hits.push_back({static_cast<std::uint32_t>(j), u, v, a, tr});
                                     });
                if (hits.empty()) {
                    continue;
                }
                const Eigen::Vector3d g = d_pixel.row(target.index(x, y)).transpose().matrix();
                // Colour of everything composited behind the current splat.
                Eigen::Vector3d behind = options.background;
                for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
                    const detail::Prepared2D& p = prepared[order[it->slot]];
                    const Splat2D& s = *p.splat;
                    ParamVector& out = acc[it->slot];
                    const double a = it->alpha;
                    const double tr = it->transmittance;

                    out.segment<3>(param::kColor) += (a * tr) * g;
                    const double d_alpha = tr * g.dot(s.color - behind);
                    behind = a * s.color + (1.0 - a) * behind;

                    const ResponseGrad rg = splat_response_grad(it->u, it->v, s.kind, s.gh, s.opacity, options.gl);
                    const double du = d_alpha * rg.du;
                    const double dv = d_alpha * rg.dv;
                    const double su = s.scale.x();
                    const double sv = s.scale.y();
                    out[param::kMu] += du * (-p.cos_t / su) + dv * (p.sin_t / sv);
                    out[param::kMu + 1] += du * (-p.sin_t / su) + dv * (-p.cos_t / sv);
                    out[param::kTheta] += du * (it->v * sv / su) - dv * (it->u * su / sv);
                    out[param::kLogScale] += -du * it->u;
                    out[param::kLogScale + 1] += -dv * it->v;
                    out[param::kOpacityLogit] += d_alpha * rg.dopacity * s.opacity * (1.0 - s.opacity);
                    out.segment<kNumCoeffs>(param::kC) += d_alpha * rg.dc;
                    out.segment<kNumCoeffs>(param::kD) += d_alpha * rg.dd;
                    out[param::kBeta] += d_alpha * rg.dbeta;
                }
            }
        }
    });

    result.grads.assign(splats.size(), GradientRecord{});
    for (std::size_t t = 0; t < binning.tiles.size(); ++t) {
        const auto& order = binning.tiles[t];
        for (std::size_t j = 0; j < partials[t].size(); ++j) {
            result.grads[order[j]].values += partials[t][j];
        }
    }
    return result;
}

double evaluate_loss_2d(std::span<const Splat2D> splats, const Image& target, const LossConfig& cfg,
                        const RenderOptions& options)
{
    const Image rendered = rasterize_2d(splats, target.width(), target.height(), options);
    if (cfg.lambda_ssim == 0.0) {
        return l1_loss(rendered, target);
    }
    return loss(rendered, target, cfg).total;
}

double relative_error(double a, double b, double floor)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

FiniteDiffReport finite_diff_check(std::span<const Splat2D> splats, const Image& target, const LossConfig& cfg,
                                   const RenderOptions& options, ParamSelector which, double analytic, double step)
{
    if (!(step > 0.0)) {
        throw DomainError("finite-difference step must be positive");
    }
    if (which.splat >= splats.size() || which.index < 0 || which.index >= param::kCount) {
        throw DomainError("finite-difference parameter selector out of range");
    }
    std::vector<Splat2D> work(splats.begin(), splats.end());
    const double x0 = raw_value(splats[which.splat], which.index);
    const auto central = [&](double h) {
        set_raw_value(work[which.splat], which.index, x0 + h);
        const double plus = evaluate_loss_2d(work, target, cfg, options);
        set_raw_value(work[which.splat], which.index, x0 - h);
        const double minus = evaluate_loss_2d(work, target, cfg, options);
        work[which.splat] = splats[which.splat];
        return (plus - minus) / (2.0 * h);
    };

    // If no pair agrees, the closest one is used; the last one would sit
    // deepest in rounding noise.
    constexpr double kAgreement = 1e-6;
    constexpr int kRefinements = 4;
    FiniteDiffReport report;
    report.analytic = analytic;
    double best = std::numeric_limits<double>::infinity();
    double h = step;
    for (int attempt = 0; attempt <= kRefinements; ++attempt) {
        const double coarse = central(h);
        const double fine = central(h / 2.0);
        const double disagreement = relative_error(coarse, fine);
        if (disagreement < best) {
            best = disagreement;
            report.numeric = fine;
            report.step_used = h / 2.0;
        }
        if (disagreement <= kAgreement) {
            break;
        }
        h /= 10.0;
    }
    report.rel_error = relative_error(report.analytic, report.numeric);
    return report;
}

FiniteDiffReport finite_diff_check(std::span<const Splat2D> splats, const Image& target, const LossConfig& cfg,
                                   const RenderOptions& options, ParamSelector which, double step)
{
    const BackwardResult back = backward_2d(splats, target, cfg, options);
    if (which.splat >= back.grads.size()) {
        throw DomainError("finite-difference parameter selector out of range");
    }
    return finite_diff_check(splats, target, cfg, options, which, back.grads[which.splat].values[which.index], step);
}

} // namespace ghs
