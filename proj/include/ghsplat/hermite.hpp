// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "ghsplat/errors.hpp"

namespace ghs {

/// Highest Hermite index carried by a splat kernel.
inline constexpr int kMaxRank = 9;
inline constexpr int kNumCoeffs = kMaxRank + 1;

/// A Hermite index in [0, kMaxRank].
class HermiteRank {
public:
    constexpr HermiteRank() = default;
    explicit HermiteRank(int value) : value_(value)
    {
        if (value < 0 || value > kMaxRank) {
            throw DomainError("Hermite rank " + std::to_string(value) + " outside [0, 9]");
        }
    }

    constexpr int value() const { return value_; }
    constexpr operator int() const { return value_; }

private:
    int value_ = 0;
};

/// H_0(x)..H_9(x) at one point.
template <typename Scalar>
using BasisValues = Eigen::Matrix<Scalar, kNumCoeffs, 1>;

namespace detail {

template <typename Scalar>
inline void require_finite(Scalar x)
{
    using std::isfinite;
    if (!isfinite(x)) {
        throw DomainError("Hermite evaluation at a non-finite point");
    }
}

} // namespace detail

/// Probabilists' Hermite polynomials He_0..He_rank at x via the three-term
/// recurrence He_{n+1} = x He_n - n He_{n-1}. Entries above `rank` are zero.
/// No finiteness check; this is the hot-path variant.
template <typename Scalar>
inline BasisValues<Scalar> hermite_upto(Scalar x, int rank)
{
    BasisValues<Scalar> h = BasisValues<Scalar>::Zero();
    h[0] = Scalar(1);
    if (rank >= 1) {
        h[1] = x;
    }
    for (int n = 1; n < rank; ++n) {
        h[n + 1] = x * h[n] - Scalar(n) * h[n - 1];
    }
    return h;
}

/// H'_n = n H_{n-1}, given the values from hermite_upto.
template <typename Scalar>
inline BasisValues<Scalar> hermite_derivative_from(const BasisValues<Scalar>& h, int rank)
{
    BasisValues<Scalar> dh = BasisValues<Scalar>::Zero();
    for (int n = 1; n <= rank; ++n) {
        dh[n] = Scalar(n) * h[n - 1];
    }
    return dh;
}

template <typename Scalar>
inline BasisValues<Scalar> hermite_eval_all(Scalar x)
{
    detail::require_finite(x);
    return hermite_upto(x, kMaxRank);
}

template <typename Scalar>
inline BasisValues<Scalar> hermite_derivative_all(Scalar x)
{
    detail::require_finite(x);
    return hermite_derivative_from(hermite_upto(x, kMaxRank), kMaxRank);
}

/// 1D Gaussian-Hermite basis function exp(-x^2/2) He_n(x).
template <typename Scalar>
inline Scalar gh_basis_eval(HermiteRank n, Scalar x)
{
    using std::exp;
    detail::require_finite(x);
    return exp(-x * x / Scalar(2)) * hermite_upto(x, n.value())[n.value()];
}

/// Integral of He_m He_n exp(-x^2/2) over [-12, 12], composite Simpson with
/// 4096 intervals. The exact value is n! sqrt(2 pi) on the diagonal and zero
/// elsewhere.
double orthogonality_integral(HermiteRank m, HermiteRank n);

/// All 10x10 orthogonality integrals.
Eigen::Matrix<double, kNumCoeffs, kNumCoeffs> orthogonality_matrix();

} // namespace ghs
