// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ghsplat/geometry.hpp"
#include "ghsplat/image.hpp"

namespace ghs {

inline constexpr int kTileSize = 16;
/// Compositing stops once transmittance falls below this.
inline constexpr double kTransmittanceStop = 1e-4;
/// Depth written where a pixel received (almost) no splat coverage.
inline constexpr double kDepthSentinel = 0.0;

struct RenderOptions {
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
    GLConfig gl;
};

/// Splat indices per 16x16 tile, each list in blend order.
struct TileBinning {
    int tile_size = kTileSize;
    int tiles_x = 0;
    int tiles_y = 0;
    std::vector<std::vector<std::uint32_t>> tiles;

    const std::vector<std::uint32_t>& tile(int tx, int ty) const { return tiles[static_cast<std::size_t>(ty) * tiles_x + tx]; }
    PixelRect tile_rect(int tx, int ty, int width, int height) const;
};

/// Indices sorted by ascending key; equal keys keep index order.
std::vector<std::uint32_t> blend_order(std::span<const double> keys);

/// A splat lands in every tile its box overlaps; `order` fixes the sequence
/// within each tile.
TileBinning bin_tiles(std::span<const PixelRect> boxes, std::span<const std::uint32_t> order, int width, int height);
TileBinning bin_tiles(std::span<const Splat2D> splats, int width, int height);
TileBinning bin_tiles(std::span<const Splat3D> splats, const Camera& camera);

/// Front-to-back compositing of image-plane splats ordered by z_order.
Image rasterize_2d(std::span<const Splat2D> splats, int width, int height, const RenderOptions& options = {});

/// Same output as rasterize_2d, visiting every splat at every pixel.
Image rasterize_2d_exhaustive(std::span<const Splat2D> splats, int width, int height,
                              const RenderOptions& options = {});

/// Ray-splat rendering through a camera; fills depth() with the
/// alpha-weighted mean intersection depth.
Image rasterize_3d(std::span<const Splat3D> splats, const Camera& camera, const RenderOptions& options = {});
Image rasterize_3d_exhaustive(std::span<const Splat3D> splats, const Camera& camera,
                              const RenderOptions& options = {});

} // namespace ghs
