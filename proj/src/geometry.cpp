// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include "ghsplat/geometry.hpp"

#include <array>
#include <cmath>

namespace ghs {

void Camera::validate() const
{
    if (width <= 0 || height <= 0) {
        throw GeometryError("camera image size must be positive");
    }
    if (!world_to_screen.allFinite() || std::abs(world_to_screen.determinant()) <= 1e-12) {
        throw GeometryError("camera world-to-screen matrix is singular");
    }
}

Camera Camera::from_intrinsics(double fx, double fy, double cx, double cy, const Eigen::Isometry3d& view, int width,
                               int height)
{
    Eigen::Matrix4d projection;
    projection << fx, 0, cx, 0, //
        0, fy, cy, 0,           //
        0, 0, 0, 1,             //
        0, 0, 1, 0;
    Camera camera{projection * view.matrix(), width, height};
    camera.validate();
    return camera;
}

Camera Camera::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
                       double focal, int width, int height)
{
    const Eigen::Vector3d forward = (target - eye).normalized();
    const Eigen::Vector3d right = forward.cross(up).normalized();
    const Eigen::Vector3d down = forward.cross(right);
    if (!right.allFinite()) {
        throw GeometryError("look_at: up vector is parallel to the view direction");
    }
    Eigen::Matrix3d rot;
    rot.row(0) = right.transpose();
    rot.row(1) = down.transpose();
    rot.row(2) = forward.transpose();
    Eigen::Isometry3d view = Eigen::Isometry3d::Identity();
    view.linear() = rot;
    view.translation() = -rot * eye;
    return from_intrinsics(focal, focal, 0.5 * width, 0.5 * height, view, width, height);
}

void validate(const Splat2D& splat)
{
    if (!splat.mu.allFinite() || !std::isfinite(splat.theta) || !splat.color.allFinite()) {
        throw GeometryError("2D splat has non-finite fields");
    }
    if (!(splat.scale.minCoeff() > kMinScale2D)) {
        throw GeometryError("2D splat scales must exceed 1e-3 px");
    }
    if (!(splat.opacity >= 0.0 && splat.opacity <= 1.0)) {
        throw GeometryError("splat opacity outside [0, 1]");
    }
}

void validate(const Splat3D& splat)
{
    if (!splat.position.allFinite() || !splat.color.allFinite()) {
        throw GeometryError("3D splat has non-finite fields");
    }
    if (!(std::abs(splat.rotation.norm() - 1.0) <= 1e-9)) {
        throw GeometryError("3D splat rotation is not a unit quaternion");
    }
    if (!(splat.scale.minCoeff() > kMinScale3D)) {
        throw GeometryError("3D splat scales must exceed 1e-6");
    }
    if (!(splat.opacity >= 0.0 && splat.opacity <= 1.0)) {
        throw GeometryError("splat opacity outside [0, 1]");
    }
}

Eigen::Matrix4d local_to_world(const Splat3D& splat)
{
    const Eigen::Matrix3d frame = splat.rotation.toRotationMatrix();
    const Eigen::Vector3d tu = frame.col(0);
    const Eigen::Vector3d tv = frame.col(1);
    if (!(tu.cross(tv).norm() >= 1e-9)) {
        throw GeometryError("degenerate splat frame");
    }
    Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
    h.block<3, 1>(0, 0) = splat.scale.x() * tu;
    h.block<3, 1>(0, 1) = splat.scale.y() * tv;
    h.block<3, 1>(0, 3) = splat.position;
    h(3, 3) = 1.0;
    return h;
}

std::optional<SplatHit> ray_splat_intersect(const Eigen::Matrix4d& wh, const Eigen::Vector2d& px)
{
    // Planes through the camera containing the pixel, pulled back to local space.
    const Eigen::Vector4d hu = wh.transpose() * Eigen::Vector4d(-1.0, 0.0, 0.0, px.x());
    const Eigen::Vector4d hv = wh.transpose() * Eigen::Vector4d(0.0, -1.0, 0.0, px.y());
    const double denom = hu[0] * hv[1] - hu[1] * hv[0];
    if (!(std::abs(denom) >= kEdgeOnEps)) {
        return std::nullopt;
    }
    SplatHit hit;
    hit.u = (hu[1] * hv[3] - hu[3] * hv[1]) / denom;
    hit.v = (hu[3] * hv[0] - hu[0] * hv[3]) / denom;
    hit.z = wh.row(3).dot(Eigen::Vector4d(hit.u, hit.v, 1.0, 1.0));
    if (!(hit.z > kNearPlane)) {
        return std::nullopt;
    }
    return hit;
}

Eigen::Vector2d pixel_to_local(const Splat2D& splat, const Eigen::Vector2d& px)
{
    const double c = std::cos(splat.theta);
    const double s = std::sin(splat.theta);
    const Eigen::Vector2d d = px - splat.mu;
    return {(c * d.x() + s * d.y()) / splat.scale.x(), (-s * d.x() + c * d.y()) / splat.scale.y()};
}

Eigen::Vector2d local_to_pixel(const Splat2D& splat, const Eigen::Vector2d& uv)
{
    return splat.mu + Eigen::Rotation2Dd(splat.theta) * splat.scale.cwiseProduct(uv);
}

double cutoff_radius(const KernelKind& kind, const GHParams& gh, double opacity)
{
    // Local radius at which opacity * kernel falls to the composite floor.
    const double log_ratio = std::max(0.0, 2.0 * std::log(opacity / kResponseFloor));
    switch (kind.family) {
    case KernelFamily::Gaussian: return std::sqrt(log_ratio);
    case KernelFamily::GES: return std::pow(log_ratio, 1.0 / kind.beta);
    case KernelFamily::GaussianGL: return 3.0;
    case KernelFamily::GaussianHermite: return gh.active_rank == 0 ? 3.0 : 4.0 + 0.25 * gh.active_rank;
    }
    return 3.0;
}

namespace {

PixelRect clip_extent(double xmin, double xmax, double ymin, double ymax, int width, int height)
{
    // One pixel of slack on each side absorbs rounding in the support test.
    const auto lo = [](double v, int size) {
        return static_cast<int>(std::clamp(std::floor(v - 0.5) - 1.0, -1.0, static_cast<double>(size)));
    };
    const auto hi = [](double v, int size) {
        return static_cast<int>(std::clamp(std::ceil(v - 0.5) + 1.0, -1.0, static_cast<double>(size)));
    };
    PixelRect r{lo(xmin, width), lo(ymin, height), hi(xmax, width), hi(ymax, height)};
    if (r.x1 < 0 || r.y1 < 0 || r.x0 >= width || r.y0 >= height) {
        return {};
    }
    r.x0 = std::max(r.x0, 0);
    r.y0 = std::max(r.y0, 0);
    r.x1 = std::min(r.x1, width - 1);
    r.y1 = std::min(r.y1, height - 1);
    return r;
}

PixelRect full_frame(int width, int height) { return {0, 0, width - 1, height - 1}; }

} // namespace

PixelRect bounding_box(const Splat2D& splat, int width, int height)
{
    const double r = cutoff_radius(splat.kind, splat.gh, splat.opacity);
    const double c = std::cos(splat.theta);
    const double s = std::sin(splat.theta);
    const double su = splat.scale.x();
    const double sv = splat.scale.y();
    const double hx = r * std::hypot(su * c, sv * s);
    const double hy = r * std::hypot(su * s, sv * c);
    if (!std::isfinite(hx) || !std::isfinite(hy) || !splat.mu.allFinite()) {
        return full_frame(width, height);
    }
    return clip_extent(splat.mu.x() - hx, splat.mu.x() + hx, splat.mu.y() - hy, splat.mu.y() + hy, width, height);
}

PixelRect bounding_box(const Splat3D& splat, const Camera& camera)
{
    const double r = cutoff_radius(splat.kind, splat.gh, splat.opacity);
    const Eigen::Matrix4d wh = camera.world_to_screen * local_to_world(splat);
    // The support disk lies inside the local square [-r, r]^2; under a
    // perspective map with every corner in front of the camera its image lies
    // inside the hull of the projected corners.
    constexpr std::array<std::array<double, 2>, 4> kCorners{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
    int in_front = 0;
    double xmin = std::numeric_limits<double>::infinity();
    double ymin = xmin;
    double xmax = -xmin;
    double ymax = -xmin;
    for (const auto& corner : kCorners) {
        const Eigen::Vector4d s = wh * Eigen::Vector4d(r * corner[0], r * corner[1], 1.0, 1.0);
        if (s[3] > kNearPlane) {
            ++in_front;
            xmin = std::min(xmin, s[0] / s[3]);
            xmax = std::max(xmax, s[0] / s[3]);
            ymin = std::min(ymin, s[1] / s[3]);
            ymax = std::max(ymax, s[1] / s[3]);
        }
    }
    if (in_front == 0) {
        return {};
    }
    if (in_front < 4 || !std::isfinite(xmin + xmax + ymin + ymax)) {
        return full_frame(camera.width, camera.height);
    }
    return clip_extent(xmin, xmax, ymin, ymax, camera.width, camera.height);
}

double view_depth(const Splat3D& splat, const Camera& camera)
{
    return camera.world_to_screen.row(3).dot(splat.position.homogeneous());
}

} // namespace ghs
