// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include "ghsplat/raster.hpp"

#include <algorithm>
#include <numeric>

#include "ghsplat/parallel.hpp"
#include "raster_detail.hpp"

namespace ghs {

PixelRect TileBinning::tile_rect(int tx, int ty, int width, int height) const
{
    return {tx * tile_size, ty * tile_size, std::min((tx + 1) * tile_size, width) - 1,
            std::min((ty + 1) * tile_size, height) - 1};
}

std::vector<std::uint32_t> blend_order(std::span<const double> keys)
{
    std::vector<std::uint32_t> order(keys.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
    return order;
}

TileBinning bin_tiles(std::span<const PixelRect> boxes, std::span<const std::uint32_t> order, int width, int height)
{
    if (width <= 0 || height <= 0) {
        throw DomainError("cannot bin splats into an empty image");
    }
    TileBinning binning;
    binning.tiles_x = (width + kTileSize - 1) / kTileSize;
    binning.tiles_y = (height + kTileSize - 1) / kTileSize;
    binning.tiles.resize(static_cast<std::size_t>(binning.tiles_x) * binning.tiles_y);
    for (const std::uint32_t idx : order) {
        const PixelRect& box = boxes[idx];
        if (box.empty()) {
            continue;
        }
        for (int ty = box.y0 / kTileSize; ty <= box.y1 / kTileSize; ++ty) {
            for (int tx = box.x0 / kTileSize; tx <= box.x1 / kTileSize; ++tx) {
                binning.tiles[static_cast<std::size_t>(ty) * binning.tiles_x + tx].push_back(idx);
            }
        }
    }
    return binning;
}

TileBinning bin_tiles(std::span<const Splat2D> splats, int width, int height)
{
    std::vector<PixelRect> boxes;
    std::vector<double> keys;
    boxes.reserve(splats.size());
    keys.reserve(splats.size());
    for (const auto& s : splats) {
        boxes.push_back(bounding_box(s, width, height));
        keys.push_back(s.z_order);
    }
    return bin_tiles(boxes, blend_order(keys), width, height);
}

TileBinning bin_tiles(std::span<const Splat3D> splats, const Camera& camera)
{
    std::vector<PixelRect> boxes;
    std::vector<double> keys;
    boxes.reserve(splats.size());
    keys.reserve(splats.size());
    for (const auto& s : splats) {
        boxes.push_back(bounding_box(s, camera));
        keys.push_back(view_depth(s, camera));
    }
    return bin_tiles(boxes, blend_order(keys), camera.width, camera.height);
}

namespace {

void check_size(int width, int height)
{
    if (width <= 0 || height <= 0) {
        throw DomainError("cannot render a zero-area image");
    }
}

void render_pixel_2d(std::span<const detail::Prepared2D> prepared, std::span<const std::uint32_t> order, int x, int y,
                     const RenderOptions& options, Image& out)
{
    Eigen::Vector3d color;
    const double t_final =
        detail::composite_2d(prepared, order, pixel_center(x, y), options.gl, color, [](auto&&...) {});
    out.pixel(x, y) = (color + t_final * options.background).transpose().array();
}

void render_pixel_3d(std::span<const detail::Prepared3D> prepared, std::span<const std::uint32_t> order, int x, int y,
                     const RenderOptions& options, Image& out)
{
    const Eigen::Vector2d px = pixel_center(x, y);
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    double transmittance = 1.0;
    double depth_sum = 0.0;
    double weight_sum = 0.0;
    for (const std::uint32_t idx : order) {
        const detail::Prepared3D& p = prepared[idx];
        const auto hit = ray_splat_intersect(p.wh, px);
        if (!hit || hit->u * hit->u + hit->v * hit->v > p.support2) {
            continue;
        }
        const Splat3D& s = *p.splat;
        const double alpha = splat_response(hit->u, hit->v, s.kind, s.gh, s.opacity, options.gl);
        if (alpha < kResponseFloor) {
            continue;
        }
        const double weight = alpha * transmittance;
        color += weight * s.color;
        depth_sum += weight * hit->z;
        weight_sum += weight;
        transmittance *= 1.0 - alpha;
        if (transmittance < kTransmittanceStop) {
            break;
        }
    }
    const Eigen::Index i = out.index(x, y);
    out.rgb().row(i) = (color + transmittance * options.background).transpose().array();
    (*out.depth())[i] = weight_sum >= 1e-6 ? depth_sum / weight_sum : kDepthSentinel;
}

template <typename PixelFn>
void render_tiles(const TileBinning& binning, int width, int height, PixelFn&& pixel_fn)
{
    parallel_for(binning.tiles.size(), [&](std::size_t t) {
        const int tx = static_cast<int>(t % binning.tiles_x);
        const int ty = static_cast<int>(t / binning.tiles_x);
        const PixelRect rect = binning.tile_rect(tx, ty, width, height);
        const auto& order = binning.tiles[t];
        for (int y = rect.y0; y <= rect.y1; ++y) {
            for (int x = rect.x0; x <= rect.x1; ++x) {
                pixel_fn(order, x, y);
            }
        }
    });
}

std::vector<detail::Prepared3D> prepare_3d(std::span<const Splat3D> splats, const Camera& camera)
{
    camera.validate();
    std::vector<detail::Prepared3D> prepared;
    prepared.reserve(splats.size());
    for (const auto& s : splats) {
        prepared.emplace_back(s, camera);
    }
    return prepared;
}

} // namespace

Image rasterize_2d(std::span<const Splat2D> splats, int width, int height, const RenderOptions& options)
{
    check_size(width, height);
    Image out(width, height);
    const auto prepared = detail::prepare(splats);
    const TileBinning binning = bin_tiles(splats, width, height);
    render_tiles(binning, width, height, [&](const std::vector<std::uint32_t>& order, int x, int y) {
        render_pixel_2d(prepared, order, x, y, options, out);
    });
    return out;
}

Image rasterize_2d_exhaustive(std::span<const Splat2D> splats, int width, int height, const RenderOptions& options)
{
    check_size(width, height);
    Image out(width, height);
    const auto prepared = detail::prepare(splats);
    std::vector<double> keys;
    for (const auto& s : splats) {
        keys.push_back(s.z_order);
    }
    const auto order = blend_order(keys);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            render_pixel_2d(prepared, order, x, y, options, out);
        }
    }
    return out;
}

Image rasterize_3d(std::span<const Splat3D> splats, const Camera& camera, const RenderOptions& options)
{
    const auto prepared = prepare_3d(splats, camera);
    Image out(camera.width, camera.height);
    out.depth() = Eigen::ArrayXd::Zero(out.pixel_count());
    const TileBinning binning = bin_tiles(splats, camera);
    render_tiles(binning, camera.width, camera.height, [&](const std::vector<std::uint32_t>& order, int x, int y) {
        render_pixel_3d(prepared, order, x, y, options, out);
    });
    return out;
}

Image rasterize_3d_exhaustive(std::span<const Splat3D> splats, const Camera& camera, const RenderOptions& options)
{
    const auto prepared = prepare_3d(splats, camera);
    Image out(camera.width, camera.height);
    out.depth() = Eigen::ArrayXd::Zero(out.pixel_count());
    std::vector<double> keys;
    for (const auto& s : splats) {
        keys.push_back(view_depth(s, camera));
    }
    const auto order = blend_order(keys);
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            render_pixel_3d(prepared, order, x, y, options, out);
        }
    }
    return out;
}

} // namespace ghs
