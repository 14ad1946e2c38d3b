// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include "ghsplat/scenes.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace ghs {

Image make_triangle_target(int width, int height)
{
    const std::array<Eigen::Vector2d, 3> v{Eigen::Vector2d(0.15 * width, 0.85 * height),
                                           Eigen::Vector2d(0.85 * width, 0.80 * height),
                                           Eigen::Vector2d(0.40 * width, 0.12 * height)};
    const Eigen::Vector3d color(0.95, 0.6, 0.15);
    const auto edge = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
        return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    };
    constexpr int kSamples = 8;
    Image out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            int inside = 0;
            for (int sy = 0; sy < kSamples; ++sy) {
                for (int sx = 0; sx < kSamples; ++sx) {
                    const Eigen::Vector2d p(x + (sx + 0.5) / kSamples, y + (sy + 0.5) / kSamples);
                    const double e0 = edge(v[0], v[1], p);
                    const double e1 = edge(v[1], v[2], p);
                    const double e2 = edge(v[2], v[0], p);
                    if ((e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0)) {
                        ++inside;
                    }
                }
            }
            out.pixel(x, y) = (color * (static_cast<double>(inside) / (kSamples * kSamples))).transpose().array();
        }
    }
    return out;
}

namespace {

constexpr std::array<KernelFamily, 5> kFamilyCycle{KernelFamily::GaussianHermite, KernelFamily::GES,
                                                   KernelFamily::Gaussian, KernelFamily::GaussianGL,
                                                   KernelFamily::GaussianHermite};

void randomize_kernel(CounterRng& rng, std::size_t i, KernelKind& kind, GHParams& gh)
{
    kind.family = kFamilyCycle[i % kFamilyCycle.size()];
    if (kind.family == KernelFamily::GES) {
        kind.beta = rng.uniform(1.3, 6.0);
    }
    if (kind.family == KernelFamily::GaussianHermite) {
        gh.active_rank = kMaxRank;
        double factorial = 1.0;
        for (int n = 0; n < kNumCoeffs; ++n) {
            factorial *= std::max(n, 1);
            const double scale = 0.5 / std::sqrt(factorial);
            gh.c[n] = (n == 0 ? 1.0 : 0.0) + rng.uniform(-scale, scale);
            gh.d[n] = (n == 0 ? 1.0 : 0.0) + rng.uniform(-scale, scale);
        }
    }
}

} // namespace

std::vector<Splat2D> random_scene_2d(CounterRng& rng, int width, int height, int count)
{
    std::vector<Splat2D> splats(static_cast<std::size_t>(count));
    const double size = std::min(width, height);
    for (std::size_t i = 0; i < splats.size(); ++i) {
        Splat2D& s = splats[i];
        s.mu = {rng.uniform(0.15, 0.85) * width, rng.uniform(0.15, 0.85) * height};
        s.theta = rng.uniform(0.0, std::numbers::pi);
        s.scale = {rng.uniform(0.06, 0.18) * size, rng.uniform(0.06, 0.18) * size};
        s.opacity = rng.uniform(0.3, 0.9);
        s.color = {rng.uniform(), rng.uniform(), rng.uniform()};
        s.z_order = rng.uniform();
        randomize_kernel(rng, i, s.kind, s.gh);
    }
    return splats;
}

Eigen::Quaterniond random_rotation(CounterRng& rng)
{
    Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    q.normalize();
    return q;
}

Scene3D random_scene_3d(CounterRng& rng, int width, int height, int count)
{
    Scene3D scene;
    Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
    dir.normalize();
    const Eigen::Vector3d eye = rng.uniform(3.5, 5.0) * dir;
    const Eigen::Vector3d up = std::abs(dir.y()) < 0.9 ? Eigen::Vector3d::UnitY() : Eigen::Vector3d::UnitX();
    const double focal = 0.5 * width / std::tan(0.5 * rng.uniform(0.6, 0.9));
    scene.camera = Camera::look_at(eye, Eigen::Vector3d::Zero(), up, focal, width, height);
    scene.splats.resize(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < scene.splats.size(); ++i) {
        Splat3D& s = scene.splats[i];
        s.position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        s.rotation = random_rotation(rng);
        s.scale = {rng.uniform(0.08, 0.35), rng.uniform(0.08, 0.35)};
        s.opacity = rng.uniform(0.3, 0.95);
        s.color = {rng.uniform(), rng.uniform(), rng.uniform()};
        randomize_kernel(rng, i, s.kind, s.gh);
    }
    return scene;
}

} // namespace ghs
