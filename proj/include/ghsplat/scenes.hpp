// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ghsplat/geometry.hpp"
#include "ghsplat/image.hpp"
#include "ghsplat/random.hpp"

namespace ghs {

/// Anti-aliased (8x8 supersampled) orange triangle on black.
Image make_triangle_target(int width, int height);

/// Random image-plane splats cycling through every kernel family; the
/// Gaussian-Hermite ones carry rank-9 coefficients scaled by 1/sqrt(n!).
std::vector<Splat2D> random_scene_2d(CounterRng& rng, int width, int height, int count);

struct Scene3D {
    std::vector<Splat3D> splats;
    Camera camera;
};

/// Random planar splats around the origin seen by a random look-at camera.
Scene3D random_scene_3d(CounterRng& rng, int width, int height, int count);

/// Uniformly random unit quaternion.
Eigen::Quaterniond random_rotation(CounterRng& rng);

} // namespace ghs
