#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>

#include "mlelab/family.hpp"

namespace mlelab {

using Vec3 = std::array<double, 3>;

/// Population-level constants behind the smooth bracket maps: e_u = E U_1,
/// e_rstar = E R*_1, sigma_tilde the asymptotic standard deviation, and
/// epsilon the radius of a centered ball on which the maps are smooth with
/// margin (found by halving).
struct DeltaContext {
    double theta0;
    double delta;
    double e_u;
    double e_rstar;
    double sigma_tilde;
    double epsilon;
};

DeltaContext make_delta_context(const Family& fam, double theta0, double delta,
                                const QuadratureSpec& spec = {});

/// The open set on which the bracket maps are given by their smooth formula:
/// x2 + e_u > 0 and (x2 + e_u)^2 > 2 |x1| |x3 + e_rstar|.
bool in_domain(const DeltaContext& ctx, const Vec3& x);

/// f_{+-}(x) = 2 x1 / (x2 + e_u + sqrt((x2 + e_u)^2 -+ 2 |x1| |x3 + e_rstar|)),
/// extended by 0 off the domain.  sign must be +1 or -1.  Evaluated at the
/// centered sample means (z_bar, u_bar - e_u, rstar_bar - e_rstar) these
/// reproduce the quadratic bracket endpoints exactly.
double f_pm(const DeltaContext& ctx, int sign, const Vec3& x);

/// Shared linearization x1 / e_u of both bracket maps at the origin.
double linear_part(const DeltaContext& ctx, const Vec3& x);

/// sqrt(n) * deviation / sigma_tilde.
double standardize(const DeltaContext& ctx, std::size_t n, double deviation);

/// Estimate of the supremum over the ball of the given radius of the second
/// derivative along rays through the origin, |d^2/dt^2 f((1+t) x)| / |x|^2.
/// Probes `directions` ray directions (signs in dimension 1, a Fibonacci
/// sphere in dimension 3) at `radii` log-spaced radii spanning three decades
/// below the given radius, with one Richardson extrapolation per probe.
double estimate_m_star(const std::function<double(std::span<const double>)>& f,
                       int dim, double radius, int directions = 64,
                       int radii = 24);

}  // namespace mlelab
