#pragma once

// Gauss-Legendre rules and small integration helpers.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"

namespace champ {

struct gl_rule {
    std::vector<double> x, w; // on [-1, 1]
};

namespace detail {

inline gl_rule make_gl(int n)
{
    gl_rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1 - x * x) * dp * dp);
    }
    return r;
}

} // namespace detail

/// Cached n-point Gauss-Legendre rule.
inline const gl_rule& gauss_legendre(int n)
{
    static std::mutex mu;
    static std::map<int, std::unique_ptr<gl_rule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot)
        slot = std::make_unique<gl_rule>(detail::make_gl(n));
    return *slot;
}

/// Composite Gauss-Legendre with `panels` equal panels of n points.
template <class F>
auto integrate_gl(F&& f, double a, double b, int n, int panels = 1)
{
    const gl_rule& r = gauss_legendre(n);
    const double h = (b - a) / panels;
    using R = decltype(f(a));
    R sum{};
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h, half = 0.5 * h, mid = lo + half;
        R part{};
        for (int i = 0; i < n; ++i)
            part += r.w[i] * f(mid + half * r.x[i]);
        sum += part * half;
    }
    return sum;
}

/// Adaptive Gauss-Kronrod (15 points) with at most 2^max_depth subdivisions.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, double rel_tol, unsigned max_depth = 12)
{
    using R = decltype(f(a));
    double err = 0, l1 = 0;
    R v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol, &err, &l1);
    if (err > std::max(rel_tol * l1, 1e-15) * 10)
        throw error(errc::quadrature_not_converged, "adaptive Gauss-Kronrod hit the subdivision cap");
    return v;
}

} // namespace champ
