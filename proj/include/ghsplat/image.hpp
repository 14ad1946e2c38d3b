// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <optional>

#include "ghsplat/errors.hpp"

namespace ghs {

/// One row per pixel (row-major pixel order), one column per channel.
using PixelArray = Eigen::Array<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Plane = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Linear RGB image in 64-bit floats. Values are only clamped on export.
class Image {
public:
    Image() = default;
    Image(int width, int height, const Eigen::Vector3d& fill = Eigen::Vector3d::Zero())
        : width_(width), height_(height)
    {
        if (width <= 0 || height <= 0) {
            throw DomainError("image dimensions must be positive");
        }
        rgb_.resize(static_cast<Eigen::Index>(width) * height, 3);
        rgb_.rowwise() = fill.transpose().array();
    }

    int width() const { return width_; }
    int height() const { return height_; }
    Eigen::Index pixel_count() const { return rgb_.rows(); }
    Eigen::Index index(int x, int y) const { return static_cast<Eigen::Index>(y) * width_ + x; }

    PixelArray& rgb() { return rgb_; }
    const PixelArray& rgb() const { return rgb_; }

    auto pixel(int x, int y) { return rgb_.row(index(x, y)); }
    auto pixel(int x, int y) const { return rgb_.row(index(x, y)); }

    /// Channel `c` as a height x width plane.
    Plane channel(int c) const
    {
        Plane p(height_, width_);
        for (Eigen::Index i = 0; i < rgb_.rows(); ++i) {
            p.data()[i] = rgb_(i, c);
        }
        return p;
    }

    /// Per-pixel depth, filled by the 3D renderer.
    std::optional<Eigen::ArrayXd>& depth() { return depth_; }
    const std::optional<Eigen::ArrayXd>& depth() const { return depth_; }

    /// Per-pixel coverage of a target with transparency.
    std::optional<Eigen::ArrayXd>& alpha() { return alpha_; }
    const std::optional<Eigen::ArrayXd>& alpha() const { return alpha_; }

    bool same_size(const Image& o) const { return width_ == o.width_ && height_ == o.height_; }

private:
    int width_ = 0;
    int height_ = 0;
    PixelArray rgb_;
    std::optional<Eigen::ArrayXd> depth_;
    std::optional<Eigen::ArrayXd> alpha_;
};

} // namespace ghs
