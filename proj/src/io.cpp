// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include "ghsplat/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ghs {

using json = nlohmann::ordered_json;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("read failed: " + path.string());
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

void write_file(const std::filesystem::path& path, std::string_view text)
{
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// Netpbm

std::uint8_t quantize(double v)
{
    if (!(v > 0.0)) {
        return 0;
    }
    if (v >= 1.0) {
        return 255;
    }
    return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

std::vector<std::uint8_t> encode_ppm(const Image& image)
{
    const std::string header =
        "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + static_cast<std::size_t>(image.pixel_count()) * 3);
    const PixelArray& rgb = image.rgb();
    for (Eigen::Index i = 0; i < rgb.rows(); ++i) {
        for (int c = 0; c < 3; ++c) {
            out.push_back(quantize(rgb(i, c)));
        }
    }
    return out;
}

void write_ppm(const std::filesystem::path& path, const Image& image) { write_file(path, encode_ppm(image)); }

void write_depth_pgm(const std::filesystem::path& path, const Image& image)
{
    if (!image.depth()) {
        throw DomainError("image has no depth channel");
    }
    const Eigen::ArrayXd& depth = *image.depth();
    const double top = depth.maxCoeff();
    const std::string header =
        "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n65535\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    for (Eigen::Index i = 0; i < depth.size(); ++i) {
        const double scaled = top > 0.0 ? std::clamp(depth[i] / top, 0.0, 1.0) : 0.0;
        const auto q = static_cast<std::uint16_t>(std::floor(scaled * 65535.0 + 0.5));
        out.push_back(static_cast<std::uint8_t>(q >> 8));
        out.push_back(static_cast<std::uint8_t>(q & 0xff));
    }
    write_file(path, out);
}

namespace {

class PnmCursor {
public:
    PnmCursor(std::span<const std::uint8_t> bytes, std::string_view source) : bytes_(bytes), source_(source) {}

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError(std::string(source_) + ": " + what);
    }

    void skip_space()
    {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string token()
    {
        skip_space();
        std::string out;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
            out.push_back(static_cast<char>(bytes_[pos_++]));
        }
        if (out.empty()) {
            fail("unexpected end of header");
        }
        return out;
    }

    long number(const char* what)
    {
        const std::string t = token();
        char* end = nullptr;
        const long v = std::strtol(t.c_str(), &end, 10);
        if (*end != '\0' || v < 0) {
            fail(std::string("bad ") + what + " '" + t + "'");
        }
        return v;
    }

    /// Consumes the single whitespace byte that ends a binary header.
    void end_header()
    {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            fail("header not terminated by whitespace");
        }
        ++pos_;
    }

    double sample(long maxval)
    {
        if (maxval < 256) {
            need(1);
            return bytes_[pos_++] / static_cast<double>(maxval);
        }
        need(2);
        const unsigned v = (unsigned(bytes_[pos_]) << 8) | bytes_[pos_ + 1];
        pos_ += 2;
        return v / static_cast<double>(maxval);
    }

    std::string_view line_until_space()
    {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
            ++pos_;
        }
        return {reinterpret_cast<const char*>(bytes_.data()) + start, pos_ - start};
    }

private:
    void need(std::size_t n) const
    {
        if (pos_ + n > bytes_.size()) {
            fail("truncated pixel data");
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::string_view source_;
    std::size_t pos_ = 0;
};

void check_size(const PnmCursor& in, long w, long h, long maxval)
{
    if (w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16) {
        in.fail("unsupported size " + std::to_string(w) + "x" + std::to_string(h));
    }
    if (maxval <= 0 || maxval > 65535) {
        in.fail("maxval out of range: " + std::to_string(maxval));
    }
}

Image decode_pam(PnmCursor& in)
{
    long w = -1, h = -1, depth = -1, maxval = -1;
    std::string tupltype;
    for (;;) {
        const std::string key = in.token();
        if (key == "ENDHDR") {
            break;
        }
        if (key == "WIDTH") {
            w = in.number("WIDTH");
        } else if (key == "HEIGHT") {
            h = in.number("HEIGHT");
        } else if (key == "DEPTH") {
            depth = in.number("DEPTH");
        } else if (key == "MAXVAL") {
            maxval = in.number("MAXVAL");
        } else if (key == "TUPLTYPE") {
            tupltype = std::string(in.line_until_space());
        } else {
            in.fail("unknown PAM header field '" + key + "'");
        }
    }
    in.end_header();
    check_size(in, w, h, maxval);
    if (depth != 1 && depth != 2 && depth != 3 && depth != 4) {
        in.fail("unsupported PAM depth " + std::to_string(depth));
    }
    Image image(static_cast<int>(w), static_cast<int>(h));
    const bool has_alpha = depth == 2 || depth == 4;
    if (has_alpha) {
        image.alpha() = Eigen::ArrayXd(image.pixel_count());
    }
    for (Eigen::Index i = 0; i < image.pixel_count(); ++i) {
        if (depth <= 2) {
            image.rgb().row(i).setConstant(in.sample(maxval));
        } else {
            for (int c = 0; c < 3; ++c) {
                image.rgb()(i, c) = in.sample(maxval);
            }
        }
        if (has_alpha) {
            (*image.alpha())[i] = in.sample(maxval);
        }
    }
    return image;
}

} // namespace

Image decode_pnm(std::span<const std::uint8_t> bytes, std::string_view source)
{
    PnmCursor in(bytes, source);
    const std::string magic = in.token();
    if (magic == "P7") {
        return decode_pam(in);
    }
    if (magic != "P3" && magic != "P5" && magic != "P6") {
        in.fail("unsupported format '" + magic + "' (expected P3, P5, P6 or P7)");
    }
    const long w = in.number("width");
    const long h = in.number("height");
    const long maxval = in.number("maxval");
    check_size(in, w, h, maxval);
    Image image(static_cast<int>(w), static_cast<int>(h));
    if (magic == "P3") {
        for (Eigen::Index i = 0; i < image.pixel_count(); ++i) {
            for (int c = 0; c < 3; ++c) {
                const long v = in.number("sample");
                if (v > maxval) {
                    in.fail("sample exceeds maxval");
                }
                image.rgb()(i, c) = v / static_cast<double>(maxval);
            }
        }
        return image;
    }
    in.end_header();
    for (Eigen::Index i = 0; i < image.pixel_count(); ++i) {
        if (magic == "P5") {
            image.rgb().row(i).setConstant(in.sample(maxval));
        } else {
            for (int c = 0; c < 3; ++c) {
                image.rgb()(i, c) = in.sample(maxval);
            }
        }
    }
    return image;
}

Image read_image(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    return decode_pnm(bytes, path.string());
}

Image make_strip(const Image& target, const Image& render)
{
    if (!target.same_size(render)) {
        throw DomainError("strip panels must have equal size");
    }
    const int w = target.width();
    const int h = target.height();
    Image strip(3 * w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            strip.pixel(x, y) = target.pixel(x, y);
            strip.pixel(w + x, y) = render.pixel(x, y);
            strip.pixel(2 * w + x, y) = (render.pixel(x, y) - target.pixel(x, y)).abs();
        }
    }
    return strip;
}

// ---------------------------------------------------------------------------
// Scene and camera files

namespace {

/// Cursor into a JSON document that remembers its field path for messages.
class Field {
public:
    Field(const json& node, std::string path, std::string_view source)
        : node_(node), path_(std::move(path)), source_(source)
    {
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError(std::string(source_) + ": " + path_ + ": " + what);
    }

    bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

    Field operator[](const char* key) const
    {
        if (!node_.is_object()) {
            fail("expected an object");
        }
        const auto it = node_.find(key);
        if (it == node_.end()) {
            fail(std::string("missing field '") + key + "'");
        }
        return {*it, path_ + "." + key, source_};
    }

    Field operator[](std::size_t i) const { return {node_.at(i), path_ + "[" + std::to_string(i) + "]", source_}; }

    std::size_t array_size() const
    {
        if (!node_.is_array()) {
            fail("expected an array");
        }
        return node_.size();
    }

    double number() const
    {
        if (!node_.is_number()) {
            fail("expected a number");
        }
        return node_.get<double>();
    }

    int integer() const
    {
        if (!node_.is_number_integer()) {
            fail("expected an integer");
        }
        return node_.get<int>();
    }

    std::string string() const
    {
        if (!node_.is_string()) {
            fail("expected a string");
        }
        return node_.get<std::string>();
    }

    template <int N>
    Eigen::Matrix<double, N, 1> vec() const
    {
        if (array_size() != static_cast<std::size_t>(N)) {
            fail("expected " + std::to_string(N) + " numbers");
        }
        Eigen::Matrix<double, N, 1> out;
        for (int i = 0; i < N; ++i) {
            out[i] = (*this)[static_cast<std::size_t>(i)].number();
        }
        return out;
    }

    KernelFamily family() const
    {
        try {
            return parse_kernel_family(string());
        } catch (const DomainError& e) {
            fail(e.what());
        }
    }

    template <typename Fn>
    auto checked(Fn&& fn) const
    {
        try {
            return fn();
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }

private:
    const json& node_;
    std::string path_;
    std::string_view source_;
};

json parse_json(std::string_view text, std::string_view source)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.what() carries "line L, column C".
        throw ParseError(std::string(source) + ": " + e.what());
    }
}

template <typename Derived>
json to_array(const Eigen::MatrixBase<Derived>& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v(i))) {
            throw DomainError("cannot serialise a non-finite value");
        }
        out.push_back(v(i));
    }
    return out;
}

json finite(double v)
{
    if (!std::isfinite(v)) {
        throw DomainError("cannot serialise a non-finite value");
    }
    return v;
}

void write_kernel_fields(json& out, const KernelKind& kind, const GHParams& gh)
{
    out["kernel"] = std::string(to_string(kind.family));
    if (kind.family == KernelFamily::GES) {
        out["beta"] = finite(kind.beta);
    }
    if (kind.family == KernelFamily::GaussianHermite) {
        out["rank"] = gh.active_rank;
        out["c"] = to_array(gh.c);
        out["d"] = to_array(gh.d);
    }
}

void read_kernel_fields(const Field& f, KernelKind default_kind, KernelKind& kind, GHParams& gh)
{
    kind = default_kind;
    if (f.has("kernel")) {
        kind.family = f["kernel"].family();
    }
    if (kind.family == KernelFamily::GES && f.has("beta")) {
        const double beta = f["beta"].number();
        if (beta < kMinBeta || beta > kMaxBeta) {
            f["beta"].fail("must lie in [1, 8]");
        }
        kind.beta = beta;
    }
    gh = GHParams::gaussian();
    if (kind.family == KernelFamily::GaussianHermite) {
        if (f.has("c")) {
            gh.c = f["c"].vec<kNumCoeffs>();
        }
        if (f.has("d")) {
            gh.d = f["d"].vec<kNumCoeffs>();
        }
        const int rank = f.has("rank") ? f["rank"].integer() : 0;
        if (rank < 0 || rank > kMaxRank) {
            f["rank"].fail("must lie in [0, 9]");
        }
        gh.active_rank = rank;
    }
}

json camera_to_json(const Camera& camera)
{
    json out;
    out["width"] = camera.width;
    out["height"] = camera.height;
    json m = json::array();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            m.push_back(finite(camera.world_to_screen(r, c)));
        }
    }
    out["world_to_screen"] = std::move(m);
    return out;
}

Camera camera_from(const Field& f)
{
    const int width = f["width"].integer();
    const int height = f["height"].integer();
    Camera camera;
    if (f.has("world_to_screen")) {
        const Field m = f["world_to_screen"];
        if (m.array_size() != 16) {
            m.fail("expected 16 numbers (row-major 4x4)");
        }
        camera.width = width;
        camera.height = height;
        for (std::size_t i = 0; i < 16; ++i) {
            camera.world_to_screen(static_cast<int>(i / 4), static_cast<int>(i % 4)) = m[i].number();
        }
    } else if (f.has("look_at")) {
        const Field la = f["look_at"];
        const Eigen::Vector3d eye = la["eye"].vec<3>();
        const Eigen::Vector3d target = la["target"].vec<3>();
        const Eigen::Vector3d up = la.has("up") ? la["up"].vec<3>() : Eigen::Vector3d(0, 1, 0);
        const double focal = la["focal"].number();
        camera = la.checked([&] { return Camera::look_at(eye, target, up, focal, width, height); });
    } else {
        f.fail("expected 'world_to_screen' or 'look_at'");
    }
    f.checked([&] {
        camera.validate();
        return 0;
    });
    return camera;
}

} // namespace

std::string scene_to_string(const SceneFile& scene)
{
    if (scene.dimension != 2 && scene.dimension != 3) {
        throw DomainError("scene dimension must be 2 or 3");
    }
    json doc;
    doc["format"] = "ghsplat-scene";
    doc["version"] = kSceneVersion;
    doc["dimension"] = scene.dimension;
    doc["kernel"] = std::string(to_string(scene.kernel.family));
    if (scene.kernel.family == KernelFamily::GES) {
        doc["beta"] = finite(scene.kernel.beta);
    }
    doc["width"] = scene.width;
    doc["height"] = scene.height;
    doc["background"] = to_array(scene.background);

    json splats = json::array();
    if (scene.dimension == 2) {
        for (const Splat2D& s : scene.splats_2d) {
            json j;
            j["mu"] = to_array(s.mu);
            j["theta"] = finite(s.theta);
            j["scale"] = to_array(s.scale);
            j["opacity"] = finite(s.opacity);
            j["color"] = to_array(s.color);
            j["z_order"] = finite(s.z_order);
            write_kernel_fields(j, s.kind, s.gh);
            splats.push_back(std::move(j));
        }
    } else {
        for (const Splat3D& s : scene.splats_3d) {
            json j;
            j["position"] = to_array(s.position);
            j["rotation"] = to_array(Eigen::Vector4d(s.rotation.w(), s.rotation.x(), s.rotation.y(), s.rotation.z()));
            j["scale"] = to_array(s.scale);
            j["opacity"] = finite(s.opacity);
            j["color"] = to_array(s.color);
            write_kernel_fields(j, s.kind, s.gh);
            splats.push_back(std::move(j));
        }
    }
    doc["splats"] = std::move(splats);
    if (scene.camera) {
        doc["camera"] = camera_to_json(*scene.camera);
    }
    return doc.dump(2) + "\n";
}

SceneFile parse_scene(std::string_view text, std::string_view source)
{
    const json doc = parse_json(text, source);
    const Field root(doc, "scene", source);
    if (root.has("format") && root["format"].string() != "ghsplat-scene") {
        root["format"].fail("not a ghsplat scene");
    }
    const int version = root["version"].integer();
    if (version != kSceneVersion) {
        root["version"].fail("unsupported version " + std::to_string(version));
    }

    SceneFile scene;
    scene.dimension = root.has("dimension") ? root["dimension"].integer() : 2;
    if (scene.dimension != 2 && scene.dimension != 3) {
        root["dimension"].fail("must be 2 or 3");
    }
    scene.kernel.family = root["kernel"].family();
    if (scene.kernel.family == KernelFamily::GES && root.has("beta")) {
        scene.kernel.beta = root["beta"].number();
    }
    if (root.has("background")) {
        scene.background = root["background"].vec<3>();
    }
    if (root.has("camera")) {
        scene.camera = camera_from(root["camera"]);
    }
    if (root.has("width") || !scene.camera) {
        scene.width = root["width"].integer();
        scene.height = root["height"].integer();
    } else {
        scene.width = scene.camera->width;
        scene.height = scene.camera->height;
    }
    if (scene.width <= 0 || scene.height <= 0) {
        root.fail("image size must be positive");
    }

    const Field list = root["splats"];
    const std::size_t n = list.array_size();
    for (std::size_t i = 0; i < n; ++i) {
        const Field f = list[i];
        if (scene.dimension == 2) {
            Splat2D s;
            s.mu = f["mu"].vec<2>();
            s.theta = f["theta"].number();
            s.scale = f["scale"].vec<2>();
            s.opacity = f["opacity"].number();
            s.color = f["color"].vec<3>();
            s.z_order = f.has("z_order") ? f["z_order"].number() : static_cast<double>(i);
            read_kernel_fields(f, scene.kernel, s.kind, s.gh);
            f.checked([&] {
                validate(s);
                return 0;
            });
            scene.splats_2d.push_back(s);
        } else {
            Splat3D s;
            s.position = f["position"].vec<3>();
            const Eigen::Vector4d q = f["rotation"].vec<4>();
            s.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
            s.scale = f["scale"].vec<2>();
            s.opacity = f["opacity"].number();
            s.color = f["color"].vec<3>();
            read_kernel_fields(f, scene.kernel, s.kind, s.gh);
            f.checked([&] {
                validate(s);
                return 0;
            });
            scene.splats_3d.push_back(s);
        }
    }
    return scene;
}

void save_scene(const std::filesystem::path& path, const SceneFile& scene)
{
    write_file(path, scene_to_string(scene));
}

SceneFile load_scene(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    return parse_scene(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

Camera parse_camera(std::string_view text, std::string_view source)
{
    const json doc = parse_json(text, source);
    return camera_from(Field(doc, "camera", source));
}

Camera load_camera(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    return parse_camera(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

// ---------------------------------------------------------------------------
// Metrics

std::string format_metrics_csv(std::span<const MetricsRow> rows)
{
    std::string out(kMetricsHeader);
    out += '\n';
    char buf[256];
    for (const MetricsRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", r.step, r.loss, r.l1, r.ssim,
                      r.psnr, r.active_rank, r.wall_ms);
        out += buf;
    }
    return out;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows)
{
    write_file(path, format_metrics_csv(rows));
}

} // namespace ghs
