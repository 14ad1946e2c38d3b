// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "ghsplat/io.hpp"
#include "ghsplat/raster.hpp"
#include "ghsplat/scenes.hpp"

using namespace ghs;

namespace {

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

std::string parse_error_of(std::string_view text)
{
    try {
        parse_scene(text, "scene.json");
    } catch (const ParseError& e) {
        return e.what();
    }
    return {};
}

std::filesystem::path scratch_dir()
{
    const auto dir = std::filesystem::temp_directory_path() / "ghsplat_test_io";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("quantisation rounds half up")
{
    CHECK(quantize(0.0) == 0);
    CHECK(quantize(1.0) == 255);
    CHECK(quantize(-0.5) == 0);
    CHECK(quantize(7.0) == 255);
    CHECK(quantize(0.5 / 255.0) == 1);
    CHECK(quantize(0.49 / 255.0) == 0);
    CHECK(quantize(127.5 / 255.0) == 128);
    CHECK(quantize(std::numeric_limits<double>::quiet_NaN()) == 0);
}

TEST_CASE("ppm encoding")
{
    Image img(2, 2);
    img.pixel(0, 0) = Eigen::RowVector3d(1.0, 0.0, 0.5).array();
    img.pixel(1, 0) = Eigen::RowVector3d(0.2, 0.4, 0.6).array();
    img.pixel(0, 1) = Eigen::RowVector3d(0.0, 0.0, 0.0).array();
    img.pixel(1, 1) = Eigen::RowVector3d(1.0, 1.0, 1.0).array();
    const auto bytes = encode_ppm(img);
    const std::string header = "P6\n2 2\n255\n";
    REQUIRE(bytes.size() == header.size() + 12);
    CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())) == header);
    const std::vector<std::uint8_t> body(bytes.begin() + static_cast<long>(header.size()), bytes.end());
    CHECK(body == std::vector<std::uint8_t>{255, 0, 128, 51, 102, 153, 0, 0, 0, 255, 255, 255});
    CHECK(encode_ppm(img) == bytes);

    const Image back = decode_pnm(bytes);
    CHECK(back.width() == 2);
    CHECK(back.pixel(1, 0)[1] == 102.0 / 255.0);
}

TEST_CASE("pnm variants decode")
{
    const Image p3 = decode_pnm(bytes_of("P3\n# comment\n2 1\n15\n15 0 0  3 6 9\n"));
    CHECK(p3.pixel(0, 0).matrix() == Eigen::RowVector3d(1, 0, 0));
    CHECK(p3.pixel(1, 0).matrix() == Eigen::RowVector3d(0.2, 0.4, 0.6));

    std::string p5 = "P5 2 1 255\n";
    p5 += static_cast<char>(0);
    p5 += static_cast<char>(255);
    const Image grey = decode_pnm(bytes_of(p5));
    CHECK(grey.pixel(1, 0).matrix() == Eigen::RowVector3d(1, 1, 1));

    std::string p6 = "P6\n1 1\n65535\n";
    for (int c : {0xff, 0xff, 0x80, 0x00, 0x00, 0x00}) {
        p6 += static_cast<char>(c);
    }
    const Image wide = decode_pnm(bytes_of(p6));
    CHECK(wide.pixel(0, 0)[0] == 1.0);
    CHECK(wide.pixel(0, 0)[1] == doctest::Approx(0x8000 / 65535.0));

    std::string pam = "P7\nWIDTH 1\nHEIGHT 1\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\nENDHDR\n";
    for (int c : {255, 0, 0, 51}) {
        pam += static_cast<char>(c);
    }
    const Image alpha = decode_pnm(bytes_of(pam));
    REQUIRE(alpha.alpha());
    CHECK((*alpha.alpha())[0] == 0.2);
    CHECK(alpha.pixel(0, 0).matrix() == Eigen::RowVector3d(1, 0, 0));

    CHECK_THROWS_AS(decode_pnm(bytes_of("P6\n2 2\n255\nabc")), ParseError);
    CHECK_THROWS_AS(decode_pnm(bytes_of("GIF89a")), ParseError);
    CHECK_THROWS_AS(read_image(scratch_dir() / "missing.ppm"), IoError);
}

TEST_CASE("strip layout")
{
    const Image t(3, 2, {1.0, 0.5, 0.0});
    const Image r(3, 2, {0.0, 0.5, 0.25});
    const Image s = make_strip(t, r);
    CHECK(s.width() == 9);
    CHECK(s.height() == 2);
    CHECK(s.pixel(1, 1).matrix() == t.pixel(1, 1).matrix());
    CHECK(s.pixel(4, 0).matrix() == r.pixel(1, 0).matrix());
    CHECK(s.pixel(8, 1).matrix() == Eigen::RowVector3d(1.0, 0.0, 0.25));
}

TEST_CASE("2D scene round trip")
{
    CounterRng rng(1);
    SceneFile scene;
    scene.width = 64;
    scene.height = 48;
    scene.background = {0.1, 1.0 / 3.0, std::nextafter(0.7, 1.0)};
    scene.splats_2d = random_scene_2d(rng, 64, 48, 12);
    for (Splat2D& s : scene.splats_2d) {
        s.mu.x() += 1e-13;
        s.opacity = std::nextafter(s.opacity, 0.0);
    }
    const std::string text = scene_to_string(scene);
    CHECK(text.find("\"format\": \"ghsplat-scene\"") != std::string::npos);
    const SceneFile back = parse_scene(text);
    CHECK(back == scene);
    CHECK(scene_to_string(back) == text);

    const auto path = scratch_dir() / "scene2d.json";
    save_scene(path, scene);
    CHECK(load_scene(path) == scene);

    // Re-rendering the loaded scene is pixel-identical.
    const Image a = rasterize_2d(scene.splats_2d, 64, 48, {scene.background, {}});
    const Image b = rasterize_2d(back.splats_2d, 64, 48, {back.background, {}});
    CHECK(encode_ppm(a) == encode_ppm(b));
}

TEST_CASE("3D scene round trip")
{
    CounterRng rng(2);
    const Scene3D random = random_scene_3d(rng, 40, 30, 8);
    SceneFile scene;
    scene.dimension = 3;
    scene.width = 40;
    scene.height = 30;
    scene.splats_3d = random.splats;
    scene.camera = random.camera;
    const SceneFile back = parse_scene(scene_to_string(scene));
    CHECK(back == scene);
}

TEST_CASE("camera files")
{
    const Camera a = parse_camera(
        R"({"width": 32, "height": 24, "look_at": {"eye": [0, 0, -5], "target": [0, 0, 0], "up": [0, -1, 0], "focal": 40}})");
    CHECK(a == Camera::look_at({0, 0, -5}, {0, 0, 0}, {0, -1, 0}, 40, 32, 24));

    std::string explicit_matrix = R"({"width": 32, "height": 24, "world_to_screen": [)";
    for (int i = 0; i < 16; ++i) {
        explicit_matrix += (i ? ", " : "") + std::to_string(i % 5 == 0 ? 1.0 : 0.0);
    }
    explicit_matrix += "]}";
    const Camera b = parse_camera(explicit_matrix);
    CHECK(b.world_to_screen.isIdentity(0.0));
    CHECK_THROWS_AS(parse_camera(R"({"width": 32, "height": 24})"), ParseError);
}

TEST_CASE("scene diagnostics")
{
    const std::string bad_syntax = "{\n  \"format\": \"ghsplat-scene\",\n  oops\n}";
    const std::string syntax = parse_error_of(bad_syntax);
    CHECK(syntax.find("scene.json") != std::string::npos);
    CHECK(syntax.find("line 3") != std::string::npos);

    SceneFile scene;
    scene.width = 8;
    scene.height = 8;
    scene.splats_2d.resize(2);
    std::string text = scene_to_string(scene);
    const auto pos = text.find("\"scale\"");
    REQUIRE(pos != std::string::npos);
    const auto pos2 = text.find("\"scale\"", pos + 1);
    text.replace(pos2, 7, "\"scalex\"");
    const std::string missing = parse_error_of(text);
    INFO(missing);
    CHECK(missing.find("scene.splats[1]: missing field 'scale'") != std::string::npos);

    CHECK(!parse_error_of(R"({"format": "ghsplat-scene", "version": 99})").empty());
    CHECK(!parse_error_of(R"({"format": "something-else", "version": 1})").empty());
}

TEST_CASE("metrics csv")
{
    std::vector<MetricsRow> rows(2);
    rows[0] = {0, 0.5, 0.25, 0.75, 12.0, 0, 0.0};
    rows[1] = {1, 0.1, 1.0 / 3.0, 0.9, 20.5, 2, 0.0};
    const std::string csv = format_metrics_csv(rows);
    CHECK(csv.rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
    CHECK(csv.find("\n0,0.5,0.25,0.75,12,0,0\n") != std::string::npos);
    CHECK(csv.find("1,0.10000000000000001,0.33333333333333331,0.90000000000000002,20.5,2,0\n") != std::string::npos);
    CHECK(format_metrics_csv(rows) == csv);
}
