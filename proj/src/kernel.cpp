// Copyright Contributors to the ghsplat project
// SPDX-License-Identifier: Apache-2.0

#include "ghsplat/kernel.hpp"

namespace ghs {

std::string_view to_string(KernelFamily family)
{
    switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::GaussianGL: return "gaussian-gl";
    case KernelFamily::GES: return "ges";
    case KernelFamily::GaussianHermite: return "gh";
    }
    return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name)
{
    if (name == "gaussian") return KernelFamily::Gaussian;
    if (name == "gaussian-gl") return KernelFamily::GaussianGL;
    if (name == "ges") return KernelFamily::GES;
    if (name == "gh") return KernelFamily::GaussianHermite;
    throw DomainError("unknown kernel '" + std::string(name) + "' (expected gaussian, gaussian-gl, ges or gh)");
}

double splat_response(double u, double v, const KernelKind& kind, const GHParams& p, double opacity,
                      const GLConfig& cfg)
{
    switch (kind.family) {
    case KernelFamily::Gaussian: return opacity * gaussian_kernel(u, v);
    case KernelFamily::GaussianGL: return opacity * gl_activation(gaussian_kernel(u, v), cfg);
    case KernelFamily::GES: return opacity * ges_kernel(u, v, kind.beta);
    case KernelFamily::GaussianHermite: return opacity * gl_activation(gh_kernel(u, v, p), cfg);
    }
    return 0.0;
}

ResponseGrad splat_response_grad(double u, double v, const KernelKind& kind, const GHParams& p, double opacity,
                                 const GLConfig& cfg)
{
    ResponseGrad g;
    switch (kind.family) {
    case KernelFamily::Gaussian: {
        const double k = gaussian_kernel(u, v);
        g.value = opacity * k;
        g.dopacity = k;
        g.du = -u * g.value;
        g.dv = -v * g.value;
        break;
    }
    case KernelFamily::GaussianGL: {
        const double t = gaussian_kernel(u, v);
        const double act = gl_activation(t, cfg);
        const double dact = opacity * gl_activation_derivative(t, cfg);
        g.value = opacity * act;
        g.dopacity = act;
        // Same operation order as the rank-0 Gaussian-Hermite branch.
        g.du = dact * t * (-u);
        g.dv = dact * t * (-v);
        break;
    }
    case KernelFamily::GES: {
        const double r2 = u * u + v * v;
        const double half_beta = kind.beta / 2.0;
        const double q = std::pow(r2, half_beta);
        const double k = std::exp(-q / 2.0);
        g.value = opacity * k;
        g.dopacity = k;
        if (r2 > 0.0) {
            // q = (r^2)^(beta/2): dq/du = beta u (r^2)^(beta/2 - 1)
            const double dq_dr2 = half_beta * q / r2;
            g.du = -0.5 * g.value * dq_dr2 * 2.0 * u;
            g.dv = -0.5 * g.value * dq_dr2 * 2.0 * v;
            g.dbeta = -0.5 * g.value * 0.5 * q * std::log(r2);
        }
        break;
    }
    case KernelFamily::GaussianHermite: {
        const int rank = p.active_rank;
        const BasisValues<double> hu = hermite_upto(u, rank);
        const BasisValues<double> hv = hermite_upto(v, rank);
        const double pu = p.c.head(rank + 1).dot(hu.head(rank + 1));
        const double qv = p.d.head(rank + 1).dot(hv.head(rank + 1));
        const double dpu = p.c.head(rank + 1).dot(hermite_derivative_from(hu, rank).head(rank + 1));
        const double dqv = p.d.head(rank + 1).dot(hermite_derivative_from(hv, rank).head(rank + 1));
        const double gauss = gaussian_kernel(u, v);
        const double t = gauss * pu * qv;
        const double act = gl_activation(t, cfg);
        const double dact = opacity * gl_activation_derivative(t, cfg);
        g.value = opacity * act;
        g.dopacity = act;
        g.du = dact * gauss * (dpu - u * pu) * qv;
        g.dv = dact * gauss * pu * (dqv - v * qv);
        g.dc.head(rank + 1) = (dact * gauss * qv) * hu.head(rank + 1);
        g.dd.head(rank + 1) = (dact * gauss * pu) * hv.head(rank + 1);
        break;
    }
    }
    return g;
}

} // namespace ghs
