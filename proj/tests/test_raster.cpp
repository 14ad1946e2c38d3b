// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ghsplat/raster.hpp"
#include "ghsplat/scenes.hpp"

using namespace ghs;

namespace {

double response_at(const Splat2D& s, int x, int y)
{
    const Eigen::Vector2d uv = pixel_to_local(s, pixel_center(x, y));
    return splat_response(uv.x(), uv.y(), s.kind, s.gh, s.opacity, GLConfig{});
}

Splat2D disc(Eigen::Vector2d mu, Eigen::Vector3d color, double opacity, double z)
{
    Splat2D s;
    s.mu = mu;
    s.scale = {5.0, 4.0};
    s.color = color;
    s.opacity = opacity;
    s.kind = {KernelFamily::Gaussian};
    s.z_order = z;
    return s;
}

} // namespace

TEST_CASE("single splat blends over the background")
{
    const Eigen::Vector3d b(0.1, 0.2, 0.3);
    const Splat2D s = disc({16.3, 15.1}, {0.9, 0.5, 0.0}, 0.8, 0.0);
    const Image img = rasterize_2d(std::vector{s}, 32, 32, {b, {}});
    for (auto [x, y] : {std::pair{16, 15}, {18, 17}, {13, 11}}) {
        const double a = response_at(s, x, y);
        const Eigen::Vector3d expected = a * s.color + (1 - a) * b;
        CHECK((img.pixel(x, y).matrix().transpose() - expected).norm() <= 1e-15);
    }
}

TEST_CASE("two splats telescope")
{
    const Eigen::Vector3d b(0.4, 0.4, 0.4);
    const Splat2D front = disc({15.0, 16.0}, {1, 0, 0}, 0.7, 0.0);
    const Splat2D back = disc({18.0, 15.0}, {0, 0, 1}, 0.9, 1.0);
    // Input order must not matter; z_order does.
    const Image img = rasterize_2d(std::vector{back, front}, 32, 32, {b, {}});
    for (auto [x, y] : {std::pair{16, 16}, {17, 15}, {14, 17}}) {
        const double a1 = response_at(front, x, y);
        const double a2 = response_at(back, x, y);
        const Eigen::Vector3d expected =
            a1 * front.color + (1 - a1) * a2 * back.color + (1 - a1) * (1 - a2) * b;
        CHECK((img.pixel(x, y).matrix().transpose() - expected).norm() <= 1e-15);
    }
}

TEST_CASE("empty scene is the background")
{
    const Eigen::Vector3d b(0.25, 0.5, 0.75);
    const Image img = rasterize_2d(std::vector<Splat2D>{}, 20, 12, {b, {}});
    for (Eigen::Index i = 0; i < img.pixel_count(); ++i) {
        CHECK(img.rgb().row(i).matrix() == b.transpose());
    }
    CHECK_THROWS_AS(rasterize_2d(std::vector<Splat2D>{}, 0, 12), DomainError);
    CHECK_THROWS_AS(Image(5, 0), DomainError);
}

TEST_CASE("opaque splats occlude everything behind them")
{
    Splat2D front = disc({8.5, 8.5}, {0.2, 0.9, 0.3}, 1.0, 0.0);
    const Splat2D behind = disc({9.0, 9.0}, {1, 0, 0}, 1.0, 1.0);
    // Response is exactly 1 at the centre pixel.
    CHECK(response_at(front, 8, 8) == 1.0);
    const Image img = rasterize_2d(std::vector{front, behind}, 16, 16, {{0.5, 0.5, 0.5}, {}});
    CHECK(img.pixel(8, 8).matrix() == front.color.transpose());
}

TEST_CASE("equal blend keys keep index order")
{
    const std::vector<double> keys{2.0, 1.0, 2.0, 1.0, 0.5};
    CHECK(blend_order(keys) == std::vector<std::uint32_t>{4, 1, 3, 0, 2});
}

TEST_CASE("tile binning examples")
{
    const std::vector<std::uint32_t> order{0};
    const std::vector<PixelRect> inside{{17, 18, 30, 29}};
    const TileBinning one = bin_tiles(inside, order, 64, 64);
    CHECK(one.tiles_x == 4);
    CHECK(one.tiles_y == 4);
    for (int ty = 0; ty < 4; ++ty) {
        for (int tx = 0; tx < 4; ++tx) {
            CHECK(one.tile(tx, ty).size() == ((tx == 1 && ty == 1) ? 1u : 0u));
        }
    }

    const std::vector<PixelRect> spanning{{10, 20, 20, 40}};
    const TileBinning four = bin_tiles(spanning, order, 64, 64);
    int count = 0;
    for (int ty = 0; ty < 4; ++ty) {
        for (int tx = 0; tx < 4; ++tx) {
            const bool expected = tx <= 1 && ty >= 1 && ty <= 2;
            CHECK(four.tile(tx, ty).size() == (expected ? 1u : 0u));
            count += static_cast<int>(four.tile(tx, ty).size());
        }
    }
    CHECK(count == 4);

    // Partial edge tile.
    const TileBinning edge = bin_tiles(std::vector<PixelRect>{{33, 0, 39, 3}}, order, 40, 20);
    CHECK(edge.tiles_x == 3);
    CHECK(edge.tiles_y == 2);
    CHECK(edge.tile_rect(2, 1, 40, 20) == PixelRect{32, 16, 39, 19});
    CHECK(edge.tile(2, 0).size() == 1);
}

TEST_CASE("tile binning matches a brute-force overlap test")
{
    CounterRng rng(9);
    const int width = 100;
    const int height = 70;
    std::vector<PixelRect> boxes;
    std::vector<double> keys;
    for (int i = 0; i < 300; ++i) {
        const int x0 = static_cast<int>(rng.uniform(0, width));
        const int y0 = static_cast<int>(rng.uniform(0, height));
        boxes.push_back({x0, y0, std::min(width - 1, x0 + static_cast<int>(rng.uniform(0, 40))),
                         std::min(height - 1, y0 + static_cast<int>(rng.uniform(0, 40)))});
        if (i % 10 == 0) {
            boxes.back() = PixelRect{};
        }
        keys.push_back(rng.uniform());
    }
    const std::vector<std::uint32_t> order = blend_order(keys);
    const TileBinning bins = bin_tiles(boxes, order, width, height);
    for (int ty = 0; ty < bins.tiles_y; ++ty) {
        for (int tx = 0; tx < bins.tiles_x; ++tx) {
            const PixelRect t = bins.tile_rect(tx, ty, width, height);
            std::vector<std::uint32_t> expected;
            for (std::uint32_t i : order) {
                const PixelRect& b = boxes[i];
                if (!b.empty() && b.x0 <= t.x1 && t.x0 <= b.x1 && b.y0 <= t.y1 && t.y0 <= b.y1) {
                    expected.push_back(i);
                }
            }
            CHECK(bins.tile(tx, ty) == expected);
        }
    }
}

TEST_CASE("tiled and exhaustive 2D renders are identical")
{
    CounterRng rng(10);
    for (int scene = 0; scene < 20; ++scene) {
        const auto splats = random_scene_2d(rng, 64, 64, 30);
        const RenderOptions options{{rng.uniform(), rng.uniform(), rng.uniform()}, {}};
        const Image tiled = rasterize_2d(splats, 64, 64, options);
        const Image exhaustive = rasterize_2d_exhaustive(splats, 64, 64, options);
        CHECK((tiled.rgb() == exhaustive.rgb()).all());
    }
}

TEST_CASE("tiled and exhaustive 3D renders are identical")
{
    CounterRng rng(11);
    for (int scene = 0; scene < 20; ++scene) {
        const Scene3D s = random_scene_3d(rng, 64, 64, 30);
        const RenderOptions options{{rng.uniform(), rng.uniform(), rng.uniform()}, {}};
        const Image tiled = rasterize_3d(s.splats, s.camera, options);
        const Image exhaustive = rasterize_3d_exhaustive(s.splats, s.camera, options);
        CHECK((tiled.rgb() == exhaustive.rgb()).all());
        REQUIRE(tiled.depth());
        REQUIRE(exhaustive.depth());
        CHECK((*tiled.depth() == *exhaustive.depth()).all());
    }
}

TEST_CASE("renders are linear in the background")
{
    CounterRng rng(12);
    const auto splats = random_scene_2d(rng, 48, 48, 25);
    const Image black = rasterize_2d(splats, 48, 48, {Eigen::Vector3d::Zero(), {}});
    const Image white = rasterize_2d(splats, 48, 48, {Eigen::Vector3d::Ones(), {}});
    const Eigen::Vector3d b(0.3, 0.6, 0.9);
    const Image other = rasterize_2d(splats, 48, 48, {b, {}});
    // Final transmittance per pixel.
    const Eigen::ArrayXd t = white.rgb().col(0) - black.rgb().col(0);
    CHECK((t >= -1e-15).all());
    CHECK((t <= 1.0 + 1e-15).all());
    for (int c = 0; c < 3; ++c) {
        CHECK(((white.rgb().col(c) - black.rgb().col(c)) - t).abs().maxCoeff() <= 1e-15);
        CHECK(((other.rgb().col(c) - black.rgb().col(c)) - t * b[c]).abs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("flipping the splat normal leaves the image unchanged")
{
    CounterRng rng(13);
    for (int scene = 0; scene < 10; ++scene) {
        const Scene3D s = random_scene_3d(rng, 48, 48, 20);
        // Rotating the frame by pi about t_u maps (t_v, t_w) to (-t_v, -t_w);
        // negating the odd d coefficients undoes the v mirror.
        std::vector<Splat3D> flipped = s.splats;
        for (Splat3D& f : flipped) {
            f.rotation = f.rotation * Eigen::Quaterniond(Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitX()));
            for (int m = 1; m < kNumCoeffs; m += 2) {
                f.gh.d[m] = -f.gh.d[m];
            }
        }
        const Image a = rasterize_3d(s.splats, s.camera);
        const Image b = rasterize_3d(flipped, s.camera);
        CHECK((a.rgb() - b.rgb()).abs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("front-facing 3D splat at the image centre")
{
    const Camera cam = Camera::look_at({0, 0, -5}, {0, 0, 0}, {0, -1, 0}, 60.0, 65, 65);
    Splat3D s;
    s.scale = {0.5, 0.5};
    s.opacity = 0.75;
    s.color = {0.2, 0.4, 0.8};
    s.kind = {KernelFamily::Gaussian};
    const Eigen::Vector3d b(1, 1, 1);
    const Image img = rasterize_3d(std::vector{s}, cam, {b, {}});
    const Eigen::Vector3d expected = s.opacity * s.color + (1 - s.opacity) * b;
    CHECK((img.pixel(32, 32).matrix().transpose() - expected).norm() <= 1e-12);
    REQUIRE(img.depth());
    CHECK((*img.depth())[img.index(32, 32)] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK((*img.depth())[img.index(0, 0)] == kDepthSentinel);
}
