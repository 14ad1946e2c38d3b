// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "ghsplat/hermite.hpp"

namespace ghs {

template <typename Scalar>
using Coeffs = Eigen::Matrix<Scalar, kNumCoeffs, 1>;

/// Per-axis Hermite coefficients of a Gaussian-Hermite kernel. Coefficients
/// above `active_rank` are kept at exactly zero.
template <typename Scalar>
struct BasicGHParams {
    Coeffs<Scalar> c = Coeffs<Scalar>::Unit(0);
    Coeffs<Scalar> d = Coeffs<Scalar>::Unit(0);
    int active_rank = 0;

    /// c = d = (1, 0, ..., 0): the plain Gaussian.
    static BasicGHParams gaussian() { return {}; }

    /// Raises or lowers the active rank; entries above the new rank are zeroed.
    void set_active_rank(int rank)
    {
        active_rank = HermiteRank(rank).value();
        for (int n = active_rank + 1; n < kNumCoeffs; ++n) {
            c[n] = Scalar(0);
            d[n] = Scalar(0);
        }
    }

    bool operator==(const BasicGHParams&) const = default;
};

using GHParams = BasicGHParams<double>;

enum class KernelFamily { Gaussian, GaussianGL, GES, GaussianHermite };

inline constexpr double kMinBeta = 1.0;
inline constexpr double kMaxBeta = 8.0;

struct KernelKind {
    KernelFamily family = KernelFamily::Gaussian;
    double beta = 2.0; ///< GES shape, clamped to [1, 8]

    static KernelKind ges(double beta) { return {KernelFamily::GES, std::clamp(beta, kMinBeta, kMaxBeta)}; }

    bool uses_gl() const
    {
        return family == KernelFamily::GaussianGL || family == KernelFamily::GaussianHermite;
    }

    bool operator==(const KernelKind&) const = default;
};

std::string_view to_string(KernelFamily family);

/// Accepts the CLI spellings: gaussian, gaussian-gl, ges, gh.
KernelFamily parse_kernel_family(std::string_view name);

struct GLConfig {
    double sigma = 5.0;
};

/// Largest double below one; GL output never reaches 1.
inline constexpr double kGLMax = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

template <typename Scalar>
inline Scalar gaussian_kernel(Scalar u, Scalar v)
{
    using std::exp;
    return exp(-(u * u + v * v) / Scalar(2));
}

/// exp(-(u^2+v^2)/2) (sum_n c_n He_n(u)) (sum_m d_m He_m(v)). May be negative.
template <typename Scalar>
inline Scalar gh_kernel(Scalar u, Scalar v, const BasicGHParams<Scalar>& p)
{
    const int rank = p.active_rank;
    const Scalar pu = p.c.head(rank + 1).dot(hermite_upto(u, rank).head(rank + 1));
    const Scalar qv = p.d.head(rank + 1).dot(hermite_upto(v, rank).head(rank + 1));
    return gaussian_kernel(u, v) * pu * qv;
}

/// 1 - exp(-sigma t^2), even in t, in [0, 1).
template <typename Scalar>
inline Scalar gl_activation(Scalar t, const GLConfig& cfg)
{
    using std::expm1;
    using std::min;
    return min(Scalar(-expm1(-Scalar(cfg.sigma) * t * t)), Scalar(kGLMax));
}

template <typename Scalar>
inline Scalar gl_activation_derivative(Scalar t, const GLConfig& cfg)
{
    using std::exp;
    const Scalar sigma(cfg.sigma);
    return Scalar(2) * sigma * t * exp(-sigma * t * t);
}

/// exp(-r^beta / 2), r = |(u, v)|. Evaluated as (r^2)^(beta/2) so beta = 2 is
/// the Gaussian to the last bit.
template <typename Scalar>
inline Scalar ges_kernel(Scalar u, Scalar v, Scalar beta)
{
    using std::exp;
    using std::pow;
    const Scalar r2 = u * u + v * v;
    return exp(-pow(r2, beta / Scalar(2)) / Scalar(2));
}

/// Opacity-weighted response of one splat at local coordinates (u, v):
///   Gaussian        opacity * gaussian
///   GaussianGL      opacity * GL(gaussian)
///   GES             opacity * ges
///   GaussianHermite opacity * GL(gh)
double splat_response(double u, double v, const KernelKind& kind, const GHParams& p, double opacity,
                      const GLConfig& cfg);

struct ResponseGrad {
    double value = 0.0;
    double du = 0.0;
    double dv = 0.0;
    double dopacity = 0.0;
    double dbeta = 0.0;              ///< GES only
    Coeffs<double> dc = Coeffs<double>::Zero(); ///< zero above active_rank
    Coeffs<double> dd = Coeffs<double>::Zero();
};

ResponseGrad splat_response_grad(double u, double v, const KernelKind& kind, const GHParams& p, double opacity,
                                 const GLConfig& cfg);

} // namespace ghs
