// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>

#include "ghsplat/kernel.hpp"

namespace ghs {

/// Responses below this are not composited.
inline constexpr double kResponseFloor = 1.0 / 512.0;
inline constexpr double kNearPlane = 0.01;
inline constexpr double kEdgeOnEps = 1e-9;
inline constexpr double kMinScale2D = 1e-3;
inline constexpr double kMinScale3D = 1e-6;

/// Image-plane splat. Local (u, v) is the inverse of
///   px = mu + Rot(theta) diag(scale) (u, v).
struct Splat2D {
    Eigen::Vector2d mu = Eigen::Vector2d::Zero(); ///< pixels
    double theta = 0.0;
    Eigen::Vector2d scale = Eigen::Vector2d::Ones(); ///< pixels
    double opacity = 1.0;
    Eigen::Vector3d color = Eigen::Vector3d::Ones();
    KernelKind kind;
    GHParams gh;
    double z_order = 0.0; ///< ascending = front to back

    bool operator==(const Splat2D&) const = default;
};

/// Planar splat in world space with frame [t_u, t_v, t_w] = rotation matrix.
struct Splat3D {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
    Eigen::Vector2d scale = Eigen::Vector2d::Ones();
    double opacity = 1.0;
    Eigen::Vector3d color = Eigen::Vector3d::Ones();
    KernelKind kind;
    GHParams gh;

    bool operator==(const Splat3D& o) const
    {
        return position == o.position && rotation.coeffs() == o.rotation.coeffs() && scale == o.scale &&
               opacity == o.opacity && color == o.color && kind == o.kind && gh == o.gh;
    }
};

/// Projective world-to-screen transform. A world point X maps to
///   W (X, 1) = (x z, y z, 1, z)
/// where (x, y) is the pixel position and z the view depth; the fourth entry
/// is the homogeneous divisor the ray-splat intersection expects.
struct Camera {
    Eigen::Matrix4d world_to_screen = Eigen::Matrix4d::Identity();
    int width = 0;
    int height = 0;

    /// Throws GeometryError unless |det W| > 1e-12 and the size is positive.
    void validate() const;

    /// Pinhole camera; `view` maps world to camera coordinates (+z forward).
    static Camera from_intrinsics(double fx, double fy, double cx, double cy, const Eigen::Isometry3d& view,
                                  int width, int height);
    static Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
                          double focal, int width, int height);

    bool operator==(const Camera&) const = default;
};

/// Pixel centres sit at half-integer positions.
inline Eigen::Vector2d pixel_center(int x, int y) { return {x + 0.5, y + 0.5}; }

/// Local-to-world transform [s_u t_u, s_v t_v, 0, p; 0 0 0 1].
Eigen::Matrix4d local_to_world(const Splat3D& splat);

struct SplatHit {
    double u = 0.0;
    double v = 0.0;
    double z = 0.0;
};

/// Exact ray-splat intersection for the pixel position `px` given WH = W * H.
/// Returns nullopt when the splat is edge-on to the ray or the hit is in
/// front of the near plane.
std::optional<SplatHit> ray_splat_intersect(const Eigen::Matrix4d& wh, const Eigen::Vector2d& px);

/// Pixel position to local (u, v) for an image-plane splat.
Eigen::Vector2d pixel_to_local(const Splat2D& splat, const Eigen::Vector2d& px);
Eigen::Vector2d local_to_pixel(const Splat2D& splat, const Eigen::Vector2d& uv);

/// Local radius of the rendered support disk. Outside it a splat contributes
/// nothing. Gaussian and GES radii are where the untruncated response falls to
/// the composite floor; Gaussian-Hermite uses 3 at rank 0 and 4 + rank/4 above.
double cutoff_radius(const KernelKind& kind, const GHParams& gh, double opacity);

/// Inclusive pixel rectangle.
struct PixelRect {
    int x0 = 0;
    int y0 = 0;
    int x1 = -1;
    int y1 = -1;

    bool empty() const { return x1 < x0 || y1 < y0; }
    bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
    bool operator==(const PixelRect&) const = default;
};

/// Conservative box around the support disk, clipped to the image.
PixelRect bounding_box(const Splat2D& splat, int width, int height);
PixelRect bounding_box(const Splat3D& splat, const Camera& camera);

/// View depth of the splat centre (blend key for the 3D path).
double view_depth(const Splat3D& splat, const Camera& camera);

/// Throws GeometryError if the invariants of the type do not hold.
void validate(const Splat2D& splat);
void validate(const Splat3D& splat);

} // namespace ghs
