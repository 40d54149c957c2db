#pragma once

// Random test data: Haar points of SU(2) and K0, and U(2,1) elements near e.

#include <cmath>
#include <random>

#include "group.hpp"

namespace champ {

using rng_t = std::mt19937_64;

inline double uniform(rng_t& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Haar-distributed point of the SU(2) section.
inline kcoset random_kcoset(rng_t& rng)
{
    std::normal_distribution<double> n;
    double v[4];
    double s = 0;
    do {
        s = 0;
        for (double& x : v) {
            x = n(rng);
            s += x * x;
        }
    } while (s < 1e-12);
    s = std::sqrt(s);
    return {cplx(v[0] / s, v[1] / s), cplx(v[2] / s, v[3] / s)};
}

inline cmat3 random_k0(rng_t& rng)
{
    return make_m(uniform(rng, -pi, pi), uniform(rng, -pi, pi)) * make_k(random_kcoset(rng));
}

/// exp(X) for X in the Lie algebra with |X| uniform in [0, max_dist]. Since
/// max_dist < pi the principal log returns X, so d(g, e) = |X| exactly.
inline cmat3 random_group(rng_t& rng, double max_dist = 2.0)
{
    std::normal_distribution<double> n;
    cmat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m(i, j) = cplx(n(rng), n(rng));
    const cmat3 jj = antidiag_J();
    cmat3 x = 0.5 * (m - jj * m.adjoint() * jj);
    x *= uniform(rng, 0.0, max_dist) / x.norm();
    return mat_exp(x);
}

/// Unit vector in R^3, uniform on the sphere.
inline std::array<double, 3> random_direction(rng_t& rng)
{
    std::normal_distribution<double> n;
    std::array<double, 3> v;
    double s = 0;
    do {
        s = 0;
        for (double& x : v) {
            x = n(rng);
            s += x * x;
        }
    } while (s < 1e-12);
    s = std::sqrt(s);
    for (double& x : v)
        x /= s;
    return v;
}

} // namespace champ
