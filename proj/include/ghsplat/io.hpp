// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghsplat/geometry.hpp"
#include "ghsplat/image.hpp"
#include "ghsplat/optim.hpp"

namespace ghs {

/// floor(clamp(v, 0, 1) * 255 + 0.5); NaN maps to 0.
std::uint8_t quantize(double v);

/// Binary PPM (P6, maxval 255, RGB, top row first).
std::vector<std::uint8_t> encode_ppm(const Image& image);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Depth map as binary PGM (P5, 16 bit). Depth is scaled so the largest
/// value maps to 65535; pixels without depth are 0.
void write_depth_pgm(const std::filesystem::path& path, const Image& image);

/// Reads P3, P5, P6 and P7 (RGB, RGB_ALPHA, GRAYSCALE). Samples are divided by
/// maxval. An RGB_ALPHA source fills Image::alpha().
Image decode_pnm(std::span<const std::uint8_t> bytes, std::string_view source = "<memory>");
Image read_image(const std::filesystem::path& path);

/// target | render | per-channel absolute error, left to right.
Image make_strip(const Image& target, const Image& render);

struct SceneFile {
    int dimension = 2; ///< 2 = image-plane splats, 3 = world-space splats
    KernelKind kernel{KernelFamily::GaussianHermite};
    int width = 0;
    int height = 0;
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
    std::vector<Splat2D> splats_2d;
    std::vector<Splat3D> splats_3d;
    std::optional<Camera> camera;

    bool operator==(const SceneFile&) const = default;
};

inline constexpr int kSceneVersion = 1;

/// JSON text with every number written to round-trip exactly.
std::string scene_to_string(const SceneFile& scene);
/// Throws ParseError naming the line (syntax) or the field path (content).
SceneFile parse_scene(std::string_view text, std::string_view source = "<memory>");

void save_scene(const std::filesystem::path& path, const SceneFile& scene);
SceneFile load_scene(const std::filesystem::path& path);

/// Either {"width", "height", "world_to_screen": 16 numbers, row-major} or
/// {"width", "height", "look_at": {"eye", "target", "up", "focal"}}.
Camera parse_camera(std::string_view text, std::string_view source = "<memory>");
Camera load_camera(const std::filesystem::path& path);

inline constexpr std::string_view kMetricsHeader = "step,loss,l1,ssim,psnr,active_rank,wall_ms";

std::string format_metrics_csv(std::span<const MetricsRow> rows);
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows);

/// Whole file as bytes; throws IoError.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file(const std::filesystem::path& path, std::string_view text);

} // namespace ghs
