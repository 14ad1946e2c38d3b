// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include "ghsplat/hermite.hpp"

namespace ghs {

namespace {

constexpr double kLimit = 12.0;
constexpr int kIntervals = 4096;

// Composite Simpson weights over [-kLimit, kLimit], times the Gaussian weight.
template <typename Visit>
void for_each_node(Visit&& visit)
{
    const double h = 2.0 * kLimit / kIntervals;
    for (int i = 0; i <= kIntervals; ++i) {
        const double x = -kLimit + h * i;
        const double simpson = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        visit(x, simpson * h / 3.0 * std::exp(-0.5 * x * x));
    }
}

} // namespace

double orthogonality_integral(HermiteRank m, HermiteRank n)
{
    const int top = std::max(m.value(), n.value());
    double sum = 0.0;
    for_each_node([&](double x, double w) {
        const BasisValues<double> h = hermite_upto(x, top);
        sum += w * h[m.value()] * h[n.value()];
    });
    return sum;
}

Eigen::Matrix<double, kNumCoeffs, kNumCoeffs> orthogonality_matrix()
{
    Eigen::Matrix<double, kNumCoeffs, kNumCoeffs> gram = Eigen::Matrix<double, kNumCoeffs, kNumCoeffs>::Zero();
    for_each_node([&](double x, double w) {
        const BasisValues<double> h = hermite_upto(x, kMaxRank);
        gram.noalias() += w * h * h.transpose();
    });
    return gram;
}

} // namespace ghs
