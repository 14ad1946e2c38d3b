// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ghsplat/raster.hpp"

namespace ghs::detail {

/// Per-render constants of an image-plane splat. Every path that needs local
/// coordinates (render, backward, finite differences) goes through local().
struct Prepared2D {
    const Splat2D* splat = nullptr;
    double cos_t = 1.0;
    double sin_t = 0.0;
    double support2 = 0.0;

    explicit Prepared2D(const Splat2D& s)
        : splat(&s), cos_t(std::cos(s.theta)), sin_t(std::sin(s.theta))
    {
        const double r = cutoff_radius(s.kind, s.gh, s.opacity);
        support2 = r * r;
    }

    Eigen::Vector2d local(const Eigen::Vector2d& px) const
    {
        const double dx = px.x() - splat->mu.x();
        const double dy = px.y() - splat->mu.y();
        return {(cos_t * dx + sin_t * dy) / splat->scale.x(), (-sin_t * dx + cos_t * dy) / splat->scale.y()};
    }
};

struct Prepared3D {
    const Splat3D* splat = nullptr;
    Eigen::Matrix4d wh;
    double support2 = 0.0;

    Prepared3D(const Splat3D& s, const Camera& camera)
        : splat(&s), wh(camera.world_to_screen * local_to_world(s))
    {
        const double r = cutoff_radius(s.kind, s.gh, s.opacity);
        support2 = r * r;
    }
};

inline std::vector<Prepared2D> prepare(std::span<const Splat2D> splats)
{
    std::vector<Prepared2D> out;
    out.reserve(splats.size());
    for (const auto& s : splats) {
        out.emplace_back(s);
    }
    return out;
}

/// Front-to-back compositing at one pixel of the 2D path. on_hit(position in
/// order, u, v, alpha, transmittance_before) fires for every composited splat.
/// Returns the final transmittance; splat colours accumulate into `color`.
template <typename OnHit>
double composite_2d(std::span<const Prepared2D> prepared, std::span<const std::uint32_t> order,
                    const Eigen::Vector2d& px, const GLConfig& gl, Eigen::Vector3d& color, OnHit&& on_hit)
{
    double transmittance = 1.0;
    color.setZero();
    for (std::size_t j = 0; j < order.size(); ++j) {
        const Prepared2D& p = prepared[order[j]];
        const Eigen::Vector2d uv = p.local(px);
        if (uv.squaredNorm() > p.support2) {
            continue;
        }
        const Splat2D& s = *p.splat;
        const double alpha = splat_response(uv.x(), uv.y(), s.kind, s.gh, s.opacity, gl);
        if (alpha < kResponseFloor) {
            continue;
        }
        on_hit(j, uv.x(), uv.y(), alpha, transmittance);
        color += (alpha * transmittance) * s.color;
        transmittance *= 1.0 - alpha;
        if (transmittance < kTransmittanceStop) {
            break;
        }
    }
    return transmittance;
}

} // namespace ghs::detail
