// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ghsplat/optim.hpp"
#include "ghsplat/scenes.hpp"

using namespace ghs;

namespace {

double median_loss(const std::vector<MetricsRow>& trace, std::size_t begin, std::size_t end)
{
    std::vector<double> v;
    for (std::size_t i = begin; i < end; ++i) {
        v.push_back(trace[i].loss);
    }
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

FitConfig small_config(KernelFamily family)
{
    FitConfig cfg;
    cfg.kernel = {family};
    cfg.splat_count = 6;
    cfg.total_steps = 60;
    cfg.phase1_steps = 20;
    cfg.rank_period = 15;
    cfg.seed = 3;
    return cfg;
}

} // namespace

TEST_CASE("adam first step has the size of the learning rate")
{
    AdamState state(3, 2);
    Eigen::MatrixXd params = Eigen::MatrixXd::Zero(3, 2);
    Eigen::MatrixXd grads(3, 2);
    grads << 2.0, -0.001, 5e3, -7.0, 1.0, 1.0;
    const Eigen::Vector3d lr(0.1, 0.01, 0.0);
    adam_step(state, params, grads, lr);
    CHECK(params(0, 0) == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(params(0, 1) == doctest::Approx(0.1).epsilon(1e-4));
    CHECK(params(1, 0) == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(params(1, 1) == doctest::Approx(0.01).epsilon(1e-6));
    // Zero-rate rows are untouched, moments and counters included.
    CHECK(params.row(2).isZero(0.0));
    CHECK(state.m.row(2).isZero(0.0));
    CHECK(state.row_steps[2] == 0);
    CHECK(state.row_steps[0] == 1);
}

TEST_CASE("adam under a constant gradient moves by lr per step")
{
    AdamState state(1, 1);
    Eigen::MatrixXd params = Eigen::MatrixXd::Zero(1, 1);
    const Eigen::MatrixXd grads = Eigen::MatrixXd::Constant(1, 1, -0.3);
    const Eigen::VectorXd lr = Eigen::VectorXd::Constant(1, 0.05);
    double before = 0.0;
    for (int i = 0; i < 2000; ++i) {
        before = params(0, 0);
        adam_step(state, params, grads, lr);
    }
    CHECK(params(0, 0) - before == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("adam rejects non-finite gradients before updating")
{
    AdamState state(2, 1);
    Eigen::MatrixXd params = Eigen::MatrixXd::Ones(2, 1);
    Eigen::MatrixXd grads(2, 1);
    grads << 1.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam_step(state, params, grads, Eigen::Vector2d(0.1, 0.1)), NonFiniteGradient);
    CHECK(params.isOnes(0.0));
    CHECK(state.row_steps.isZero());
    // An inactive row may hold anything.
    adam_step(state, params, grads, Eigen::Vector2d(0.1, 0.0));
    CHECK(params(1, 0) == 1.0);
}

TEST_CASE("active rank schedule")
{
    FitConfig cfg;
    cfg.phase1_steps = 1000;
    cfg.rank_period = 1000;
    CHECK(active_rank(0, cfg) == 0);
    CHECK(active_rank(999, cfg) == 0);
    CHECK(active_rank(1999, cfg) == 0);
    CHECK(active_rank(2000, cfg) == 1);
    CHECK(active_rank(1000 + 9 * 1000 + 5000, cfg) == 9);
    cfg.max_rank = 4;
    CHECK(active_rank(100000, cfg) == 4);
    cfg.kernel = {KernelFamily::GaussianGL};
    CHECK(active_rank(100000, cfg) == 0);
}

TEST_CASE("config validation")
{
    FitConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.phase1_steps = cfg.total_steps + 1;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.rank_period = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.max_rank = 10;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.splat_count = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.lambda_ssim = 1.5;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("initialisation")
{
    const Image target = make_triangle_target(64, 48);
    FitConfig cfg = small_config(KernelFamily::GaussianHermite);
    cfg.splat_count = 12;
    const auto splats = initialize_splats(target, cfg);
    REQUIRE(splats.size() == 12);
    for (const Splat2D& s : splats) {
        CHECK(s.mu.x() >= 0.0);
        CHECK(s.mu.x() <= 64.0);
        CHECK(s.mu.y() >= 0.0);
        CHECK(s.mu.y() <= 48.0);
        CHECK(s.opacity == 0.5);
        CHECK(s.gh == GHParams::gaussian());
        const int px = static_cast<int>(s.mu.x());
        const int py = static_cast<int>(s.mu.y());
        CHECK(s.color.transpose() == target.pixel(px, py).matrix());
    }
    CHECK(initialize_splats(target, cfg) == splats);
}

TEST_CASE("flat colour is fitted by one splat")
{
    const Image target(16, 16, {0.8, 0.5, 0.2});
    FitConfig cfg;
    cfg.kernel = {KernelFamily::Gaussian};
    cfg.splat_count = 1;
    cfg.total_steps = 3000;
    cfg.phase1_steps = 3000;
    cfg.lambda_ssim = 0.0;
    const FitResult r = fit_image(target, cfg);
    CHECK(l1_loss(r.final_render, target) <= 1e-3);
    const std::size_t n = r.trace.size();
    CHECK(median_loss(r.trace, n - n / 20, n) <= median_loss(r.trace, 0, n / 20));
}

TEST_CASE("fits are deterministic")
{
    const Image target = make_triangle_target(40, 40);
    const FitConfig cfg = small_config(KernelFamily::GaussianHermite);
    const FitResult a = fit_image(target, cfg);
    const FitResult b = fit_image(target, cfg);
    CHECK(a.trace == b.trace);
    CHECK(a.splats == b.splats);
    CHECK((a.final_render.rgb() == b.final_render.rgb()).all());
}

TEST_CASE("warm-up matches the gaussian-gl kernel")
{
    const Image target = make_triangle_target(40, 40);
    const FitResult gh = fit_image(target, small_config(KernelFamily::GaussianHermite));
    const FitResult gl = fit_image(target, small_config(KernelFamily::GaussianGL));
    for (int step = 0; step < 20; ++step) {
        CHECK(gh.trace[step] == gl.trace[step]);
    }
    CHECK(gh.trace.back().loss != gl.trace.back().loss);
}

TEST_CASE("coefficients above the active rank never move")
{
    const Image target = make_triangle_target(40, 40);
    FitConfig cfg = small_config(KernelFamily::GaussianHermite);
    // Steps 20..59 reach rank 2 at most.
    std::vector<int> ranks;
    const FitResult r = fit_image(target, cfg, [&](const MetricsRow& row) { ranks.push_back(row.active_rank); });
    CHECK(ranks.front() == 0);
    CHECK(ranks.back() == 2);
    for (const Splat2D& s : r.splats) {
        CHECK(s.gh.active_rank == 2);
        CHECK(s.gh.c.tail(7).isZero(0.0));
        CHECK(s.gh.d.tail(7).isZero(0.0));
        CHECK(s.gh.c.head(3) != GHParams::gaussian().c.head(3));
    }

    cfg.total_steps = 20;
    const FitResult frozen = fit_image(target, cfg);
    for (const Splat2D& s : frozen.splats) {
        CHECK(s.gh == GHParams::gaussian());
    }
}

TEST_CASE("non-finite loss aborts with the trace")
{
    Image target = make_triangle_target(32, 32);
    target.pixel(3, 4)[1] = std::numeric_limits<double>::quiet_NaN();
    FitConfig cfg = small_config(KernelFamily::Gaussian);
    try {
        fit_image(target, cfg);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        REQUIRE(e.trace.size() == 1);
        CHECK(std::isnan(e.trace[0].loss));
    }
}

TEST_CASE("alpha targets are composited over the background")
{
    Image target(2, 1, {0.8, 0.4, 0.0});
    target.alpha() = Eigen::ArrayXd(2);
    *target.alpha() << 1.0, 0.25;
    const Image out = composite_target(target, {0.0, 0.0, 1.0});
    CHECK(out.pixel(0, 0).matrix() == Eigen::RowVector3d(0.8, 0.4, 0.0));
    CHECK(out.pixel(1, 0).matrix().isApprox(Eigen::RowVector3d(0.2, 0.1, 0.75), 1e-15));

    FitConfig cfg = small_config(KernelFamily::Gaussian);
    cfg.splat_count = 1;
    cfg.background_policy = BackgroundPolicy::RandomPerStep;
    const FitResult a = fit_image(target, cfg);
    const FitResult b = fit_image(target, cfg);
    CHECK(a.trace == b.trace);
}
