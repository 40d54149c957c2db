#pragma once

// Siegel domain model of the complex hyperbolic plane.

#include <array>
#include <cmath>
#include <mutex>

#include "group.hpp"
#include "quadrature.hpp"

namespace champ {

struct siegel_point {
    cplx z1{-1.0, 0.0};
    cplx z2{0.0, 0.0};

    bool valid() const { return 2.0 * z1.real() + std::norm(z2) < 0; }
    cvec3 lift() const { return cvec3(z1, z2, 1.0); }
};

inline const siegel_point origin{};

/// <z,w> = z1 conj(w3) + z2 conj(w2) + z3 conj(w1)
inline cplx hform(const cvec3& z, const cvec3& w)
{
    return z[0] * std::conj(w[2]) + z[1] * std::conj(w[1]) + z[2] * std::conj(w[0]);
}

inline siegel_point act(const cmat3& g, const siegel_point& p)
{
    const cvec3 w = g * p.lift();
    if (std::abs(w[2]) < 1e-13)
        throw error(errc::boundary_degeneracy, "third coordinate vanishes");
    return {w[0] / w[2], w[1] / w[2]};
}

/// Bergman distance, normalized so that t -> a(t).o has unit speed.
/// |<z,w>|^2 - <z,z><w,w> is expanded in u = z - w so no term cancels.
inline double bergman_dist(const siegel_point& p, const siegel_point& q)
{
    const cvec3 z = p.lift(), w = q.lift();
    const cvec3 u = z - w;
    const double a = hform(z, z).real(), b = hform(w, w).real();
    const double num = std::norm(hform(z, u)) - a * std::norm(u[1]);
    return 2.0 * std::asinh(std::sqrt(num / (a * b)));
}

inline double cartan_radius(const cmat3& g)
{
    return bergman_dist(origin, act(g, origin));
}

/// sinh^2(A/2) for A = dist_A(z, tau, t).
inline double dist_A_sinh2(cplx z, double tau, double t)
{
    const double r2 = std::norm(z);
    const double sh = std::sinh(0.5 * t);
    return sh * sh + 0.25 * std::exp(-t) * (r2 * r2 + 2 * r2 + tau * tau) + 0.5 * r2;
}

inline double dist_A(cplx z, double tau, double t)
{
    return 2.0 * std::asinh(std::sqrt(dist_A_sinh2(z, tau, t)));
}

/// n-th t-derivative of dist_A, n in 1..4.
inline double dist_A_dt(cplx z, double tau, double t, int order)
{
    if (order < 1 || order > 4)
        throw error(errc::domain_violation, "dist_A_dt order must be in 1..4");
    const double s2 = dist_A_sinh2(z, tau, t);
    const double A = 2.0 * std::asinh(std::sqrt(s2));
    if (!(A > 1e-8))
        throw error(errc::cone_point, "dist_A_dt at the cone point");
    const double r2 = std::norm(z);
    const double qh = 0.5 * std::exp(-t) * (r2 * r2 + 2 * r2 + tau * tau);
    const double u = 1.0 + 2.0 * s2;
    const double f1 = std::sinh(t) - qh, f2 = std::cosh(t) + qh;
    const double f3 = f1, f4 = f2;
    const double d = (2.0 * s2) * (u + 1.0); // u^2 - 1
    const double sd = std::sqrt(d);
    const double g1 = 1.0 / sd;
    const double g2 = -u / (d * sd);
    const double g3 = (2 * u * u + 1) / (d * d * sd);
    const double g4 = -(6 * u * u * u + 9 * u) / (d * d * d * sd);
    switch (order) {
    case 1: return g1 * f1;
    case 2: return g2 * f1 * f1 + g1 * f2;
    case 3: return g3 * f1 * f1 * f1 + 3 * g2 * f1 * f2 + g1 * f3;
    default:
        return g4 * f1 * f1 * f1 * f1 + 6 * g3 * f1 * f1 * f2 + g2 * (3 * f2 * f2 + 4 * f1 * f3) + g1 * f4;
    }
}

struct heisenberg_point {
    cplx z;
    double tau;
};

/// (n(z1,tau1)a(t1))^{-1} n(z2,tau2) a(t2) = n(z,tau) a(t2 - t1)
inline heisenberg_point relative_coords(cplx z1, double tau1, double t1, cplx z2, double tau2, double t2)
{
    (void)t2;
    const double e = std::exp(-0.5 * t1);
    return {e * (z2 - z1), e * e * (tau2 - tau1 + 2.0 * (z1 * std::conj(z2)).imag())};
}

inline double haar_weight(double t)
{
    return 4.0 * std::exp(-2.0 * t);
}

namespace detail {

/// Volume integral of a radial profile f(A) supported in A <= R, in Iwasawa coordinates.
template <class F>
double iwasawa_volume_integral(F&& f, double R, int n)
{
    const double chR = std::cosh(R);
    auto over_t = [&](double t) {
        const double tmax2 = 2.0 * std::exp(t) * (chR - std::cosh(t));
        if (tmax2 <= 0)
            return 0.0;
        const double taumax = std::sqrt(tmax2);
        auto over_tau = [&](double tau) {
            // solve e^{-t}/2 x^2 + (e^{-t}+1) x + (cosh t + e^{-t} tau^2/2 - cosh R) = 0, x = rho^2
            const double a = 0.5 * std::exp(-t), b = std::exp(-t) + 1.0;
            const double c = std::cosh(t) + a * tau * tau - chR;
            if (c >= 0)
                return 0.0;
            const double x = -2.0 * c / (b + std::sqrt(b * b - 4 * a * c));
            const double rmax = std::sqrt(x);
            auto over_rho = [&](double rho) { return 2.0 * pi * rho * f(dist_A(rho, tau, t)); };
            return integrate_gl(over_rho, 0.0, rmax, n);
        };
        return haar_weight(t) * integrate_gl(over_tau, -taumax, taumax, n);
    };
    return integrate_gl(over_t, -R, R, n);
}

template <class F>
double polar_profile_integral(F&& f, double R, int n)
{
    auto g = [&](double t) {
        const double sh = std::sinh(0.5 * t);
        return f(t) * sh * sh * std::sinh(t);
    };
    return integrate_gl(g, 0.0, R, n, 4);
}

} // namespace detail

/// Smooth bump exp(1 - 1/(1 - (A/R)^2)) with value 1 at the center.
inline double radial_bump(double A, double R)
{
    const double x = A / R;
    if (x * x >= 1.0)
        return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

/// The constant c in dVol = c sinh^2(t/2) sinh(t) dt dk, found by comparing
/// Iwasawa and polar integrals of a bump.
inline double polar_constant()
{
    static const double c = [] {
        auto f = [](double A) { return radial_bump(A, 1.0); };
        return detail::iwasawa_volume_integral(f, 1.0, 64) / detail::polar_profile_integral(f, 1.0, 64);
    }();
    return c;
}

inline double polar_density(double t)
{
    const double sh = std::sinh(0.5 * t);
    return polar_constant() * sh * sh * std::sinh(t);
}

struct tube_spec {
    cmat3 center = cmat3::Identity();
    double lambda = 1.0;
};

inline bool in_cylinder(cplx z, double tau, double lambda)
{
    const double r = 1.0 / std::sqrt(lambda);
    return std::abs(z) < r && std::abs(tau) < r;
}

/// Closed tube {n(z,tau)a(t).o : |z|, |tau| <= lambda^{-1/2}, |t| <= 1/2} moved by the center.
inline bool in_tube(const siegel_point& p, const tube_spec& spec)
{
    if (!(spec.lambda >= 1.0))
        throw error(errc::domain_violation, "tube lambda must be >= 1");
    const siegel_point q = act(u21_inverse(spec.center), p);
    const cplx z = -std::conj(q.z2) / sqrt2;
    const double tau = q.z1.imag();
    const double t = std::log(-q.z1.real() - 0.5 * std::norm(q.z2));
    // a few ulps of slack so points constructed on the boundary count as inside
    const double r = (1.0 + 1e-12) / std::sqrt(spec.lambda);
    return std::abs(z) <= r && std::abs(tau) <= r && std::abs(t) <= 0.5 + 1e-12;
}

} // namespace champ
