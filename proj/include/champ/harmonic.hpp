#pragma once

// Spherical functions, spherical transforms, the Plancherel density and the
// Paley-Wiener kernels k_lambda with their radial cutoffs.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <ostream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "geometry.hpp"
#include "quadrature.hpp"

namespace champ {

// ---------------------------------------------------------------------------
// radial ODE backend

/// phi_s(a(t)) on [0, tmax] from u'' + (coth(t/2) + coth t) u' + (1+s^2) u = 0,
/// stored at the adaptive steps and interpolated by quintic Hermite.
class phi_table {
public:
    phi_table(double s, double tmax, double tol = 1e-13) : s_(s), tmax_(std::max(tmax, 0.0))
    {
        if (!std::isfinite(s) || !std::isfinite(tmax))
            throw error(errc::non_finite, "phi_table");
        const double k = 1.0 + s * s;
        a_ = -k / 8.0;
        b_ = k * (2.0 + s * s) / 192.0;
        t0_ = std::min(1e-3, 1e-2 / std::sqrt(k));
        if (tmax_ <= t0_)
            return;
        using state = std::array<double, 2>;
        namespace ode = boost::numeric::odeint;
        state y{series(t0_), series_d(t0_)};
        auto rhs = [k](const state& y, state& dy, double t) {
            dy[0] = y[1];
            dy[1] = -(1.0 / std::tanh(0.5 * t) + 1.0 / std::tanh(t)) * y[1] - k * y[0];
        };
        auto obs = [this](const state& y, double t) {
            t_.push_back(t);
            u_.push_back(y[0]);
            du_.push_back(y[1]);
        };
        const double h0 = std::min(1e-3, 0.1 / std::sqrt(k));
        ode::integrate_adaptive(ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<state>()), rhs, y, t0_,
                                tmax_, h0, obs);
        if (t_.back() < tmax_ - 1e-12)
            throw error(errc::quadrature_not_converged, "radial ODE stopped early");
    }

    double s() const { return s_; }
    double tmax() const { return tmax_; }

    double operator()(double t) const
    {
        t = std::abs(t);
        if (t <= t0_ || t_.empty())
            return series(t);
        if (t > tmax_ * (1 + 1e-12))
            throw error(errc::domain_violation, "phi_table evaluated beyond its range");
        std::size_t i = std::upper_bound(t_.begin(), t_.end(), t) - t_.begin();
        i = std::clamp<std::size_t>(i, 1, t_.size() - 1);
        return hermite(i - 1, t);
    }

private:
    double series(double t) const { return 1.0 + a_ * t * t + b_ * t * t * t * t; }
    double series_d(double t) const { return 2.0 * a_ * t + 4.0 * b_ * t * t * t; }
    double second(std::size_t i) const
    {
        const double t = t_[i];
        return -(1.0 / std::tanh(0.5 * t) + 1.0 / std::tanh(t)) * du_[i] - (1.0 + s_ * s_) * u_[i];
    }

    double hermite(std::size_t i, double t) const
    {
        const double h = t_[i + 1] - t_[i];
        const double x = (t - t_[i]) / h;
        const double p0 = u_[i], p1 = u_[i + 1];
        const double m0 = du_[i] * h, m1 = du_[i + 1] * h;
        const double c0 = second(i) * h * h, c1 = second(i + 1) * h * h;
        const double x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x;
        const double h00 = 1 - 10 * x3 + 15 * x4 - 6 * x5;
        const double h10 = x - 6 * x3 + 8 * x4 - 3 * x5;
        const double h20 = 0.5 * x2 - 1.5 * x3 + 1.5 * x4 - 0.5 * x5;
        const double h01 = 10 * x3 - 15 * x4 + 6 * x5;
        const double h11 = -4 * x3 + 7 * x4 - 3 * x5;
        const double h21 = 0.5 * x3 - x4 + 0.5 * x5;
        return h00 * p0 + h10 * m0 + h20 * c0 + h01 * p1 + h11 * m1 + h21 * c1;
    }

    double s_, tmax_;
    double a_ = 0, b_ = 0, t0_ = 0;
    std::vector<double> t_, u_, du_;
};

// ---------------------------------------------------------------------------
// K-integral backend

struct kquad_result {
    double value;
    int order;
};

/// int over M\K0 of exp((1+is) A(k a(t))). Only alpha enters; alpha is uniform
/// on the unit disk. |alpha|^2 gets Gauss-Legendre, the phase a periodic
/// trapezoid clustered at arg(alpha) = 0 where |w| is smallest.
inline double phi_kquad_fixed(double s, double t, int n)
{
    const gl_rule& r = gauss_legendre(n);
    const double et = std::exp(t);
    const cplx e(1.0, s);
    const double cl = 0.8;
    const int m = 2 * n;
    double sum = 0;
    for (int j = 0; j < m; ++j) {
        const double u = 2 * pi * j / m;
        const double ph = u - cl * std::sin(u), jac = 1 - cl * std::cos(u);
        const cplx eph = std::polar(1.0, ph);
        double inner = 0;
        for (int i = 0; i < n; ++i) {
            const double x = 0.5 * (r.x[i] + 1.0);
            const cplx alpha = std::sqrt(x) * eph;
            const cplx w = 0.5 * (alpha * (1.0 - et) + 1.0 + et);
            const double A = t - std::log(std::norm(w));
            inner += r.w[i] * std::exp(e * A).real();
        }
        sum += 0.5 * inner * jac;
    }
    return sum / m;
}

inline kquad_result phi_kquad(double s, double t, double tol = 1e-9, int max_order = 512)
{
    double prev = phi_kquad_fixed(s, t, 16);
    for (int n = 32; n <= max_order; n *= 2) {
        const double cur = phi_kquad_fixed(s, t, n);
        if (std::abs(cur - prev) <= tol)
            return {cur, n};
        prev = cur;
    }
    throw error(errc::quadrature_not_converged, "K-quadrature escalation exhausted");
}

enum class phi_backend { KQuadrature, RadialODE };

inline double spherical_phi(double s, double t, phi_backend backend)
{
    if (!(std::abs(t) <= 6.0))
        throw error(errc::domain_violation, "spherical_phi needs |t| <= 6");
    if (backend == phi_backend::KQuadrature)
        return phi_kquad(s, std::abs(t)).value;
    return phi_table(s, std::abs(t))(t);
}

// ---------------------------------------------------------------------------
// transforms

struct radial_function {
    std::function<double(double)> f; // t -> value, even
    double support_radius = 0;

    double operator()(double t) const
    {
        t = std::abs(t);
        return t > support_radius ? 0.0 : f(t);
    }

    void write_csv(std::ostream& os, int n = 1001) const
    {
        os << "t,value\n";
        os.precision(17);
        for (int i = 0; i < n; ++i) {
            const double t = support_radius * i / (n - 1);
            os << t << ',' << (*this)(t) << '\n';
        }
    }
};

/// Composite Gauss-Legendre in t with panels short against the oscillation of phi_s.
inline int oscillation_panels(double length, double s)
{
    return std::max(4, int(std::ceil(length * (std::abs(s) + 4.0) / 2.0)));
}

/// f^(s) = int f(t) phi_{-s}(a(t)) dVol in polar coordinates.
inline double hc_transform(const radial_function& f, double s, const phi_table* table = nullptr)
{
    const double R = f.support_radius;
    if (R <= 0)
        return 0.0;
    std::unique_ptr<phi_table> own;
    if (!table || table->tmax() < R || std::abs(std::abs(table->s()) - std::abs(s)) > 0) {
        own = std::make_unique<phi_table>(s, R);
        table = own.get();
    }
    auto g = [&](double t) { return f(t) * (*table)(t) * polar_density(t); };
    return integrate_gl(g, 0.0, R, 12, oscillation_panels(R, s));
}

/// f on the ball d(x,o) <= R, as a function of the Iwasawa coordinates of x = n(z,tau)a(t).o
using iwasawa_function = std::function<double(cplx z, double tau, double t)>;

namespace detail {

inline cplx helgason_fixed(const iwasawa_function& f, double R, double s, const kcoset& kc, int n)
{
    const double chR = std::cosh(R);
    const int m = n; // trapezoid in arg z
    const cplx e(1.0, -s);
    auto over_t = [&](double t) -> cplx {
        const double tmax2 = 2.0 * std::exp(t) * (chR - std::cosh(t));
        if (tmax2 <= 0)
            return 0.0;
        const double taumax = std::sqrt(tmax2);
        auto over_tau = [&](double tau) -> cplx {
            const double a = 0.5 * std::exp(-t), b = std::exp(-t) + 1.0;
            const double c = std::cosh(t) + a * tau * tau - chR;
            if (c >= 0)
                return 0.0;
            const double rmax = std::sqrt(-2.0 * c / (b + std::sqrt(b * b - 4 * a * c)));
            auto over_rho = [&](double rho) -> cplx {
                cplx acc = 0.0;
                for (int j = 0; j < m; ++j) {
                    const cplx z = std::polar(rho, 2 * pi * j / m);
                    const double v = f(z, tau, t);
                    if (v != 0.0)
                        acc += v * std::exp(e * explicit_A(kc, z, tau, t));
                }
                return acc * (2 * pi * rho / m);
            };
            return integrate_gl(over_rho, 0.0, rmax, n);
        };
        return haar_weight(t) * integrate_gl(over_tau, -taumax, taumax, n);
    };
    return integrate_gl(over_t, -R, R, n);
}

} // namespace detail

/// f^(s, k) = int f(x) exp((1 - is) A(k x)) dVol(x) over Iwasawa coordinates;
/// the order doubles until two consecutive values agree to tol relative.
inline cplx helgason_transform(const iwasawa_function& f, double R, double s, const kcoset& kc,
                               double tol = 1e-8, int max_order = 96)
{
    if (!(R > 0 && R <= 3))
        throw error(errc::domain_violation, "helgason_transform needs support radius in (0, 3]");
    cplx prev = detail::helgason_fixed(f, R, s, kc, 16);
    for (int n = 24; n <= max_order; n = n * 3 / 2) {
        const cplx cur = detail::helgason_fixed(f, R, s, kc, n);
        if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur)))
            return cur;
        prev = cur;
    }
    throw error(errc::quadrature_not_converged, "helgason_transform escalation exhausted");
}

/// dnu/ds = C s^3 coth(pi s) up to the constant C fixed by inversion.
inline double plancherel_shape(double s)
{
    s = std::abs(s);
    if (s < 1e-8)
        return s * s / pi;
    return s * s * s / std::tanh(pi * s);
}

namespace detail {

/// C from f(o) = int_0^inf f^(s) C s^3 coth(pi s) ds with a Gaussian radial f.
inline double calibrate_plancherel(double sigma)
{
    radial_function f{[sigma](double t) { return std::exp(-(t / sigma) * (t / sigma)); }, 7.0 * sigma};
    const double smax = 14.0 / sigma;
    auto integrand = [&](double s) { return hc_transform(f, s) * plancherel_shape(s); };
    return 1.0 / integrate_gl(integrand, 0.0, smax, 10, int(std::ceil(smax / 2.0)));
}

} // namespace detail

inline double plancherel_constant()
{
    static const double c = detail::calibrate_plancherel(0.5);
    return c;
}

inline double plancherel_density(double s)
{
    if (!(s >= 0))
        throw error(errc::domain_violation, "plancherel_density needs s >= 0");
    return plancherel_constant() * plancherel_shape(s);
}

// ---------------------------------------------------------------------------
// Paley-Wiener kernels

struct paley_wiener_spec {
    double c = 0.09;
    int exponent = 4;

    void validate() const
    {
        if (!(c > 0) || exponent < 4 || exponent % 2)
            throw error(errc::domain_violation, "Paley-Wiener spec needs c > 0 and an even exponent >= 4");
    }
    /// h(s) = (sin(cs)/(cs))^exponent
    double h(double s) const
    {
        const double x = c * s;
        const double v = std::abs(x) < 1e-6 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
        return std::pow(v, exponent);
    }
    /// Radius of the Fourier support of h.
    double support() const { return exponent * c; }
    double h0(double lambda, double s) const { return h(s - lambda) + h(-s - lambda); }
    double h_lambda(double lambda, double s) const
    {
        const double v = h0(lambda, s);
        return v * v;
    }
};

/// Inverse spherical transform int_0^inf H(s) phi_s(a(t)) dnu(s) on a uniform
/// t grid of [0, R], for H concentrated near s = lambda.
inline std::vector<double> inverse_hc_table(const std::function<double(double)>& H, double lambda, double R,
                                            int nt, double s_tail = 300.0)
{
    const double smax = lambda + s_tail;
    const double width = 5.0;
    const int panels = int(std::ceil(smax / width));
    const gl_rule& r = gauss_legendre(10);
    std::vector<double> out(nt, 0.0);
    for (int p = 0; p < panels; ++p) {
        const double lo = p * width, half = 0.5 * width, mid = lo + half;
        for (int i = 0; i < 10; ++i) {
            const double s = mid + half * r.x[i];
            const double wgt = half * r.w[i] * H(s) * plancherel_density(s);
            if (wgt == 0.0)
                continue;
            phi_table ph(s, R, 1e-12);
            for (int j = 0; j < nt; ++j)
                out[j] += wgt * ph(R * j / (nt - 1));
        }
    }
    return out;
}

/// Six-point Lagrange interpolation on a uniform table over [0, R].
inline double uniform_interp(const std::vector<double>& y, double R, double t)
{
    const int n = int(y.size());
    const double h = R / (n - 1);
    const double x = t / h;
    int i0 = std::clamp(int(std::floor(x)) - 2, 0, n - 6);
    double v = 0;
    for (int i = i0; i < i0 + 6; ++i) {
        double l = 1;
        for (int j = i0; j < i0 + 6; ++j)
            if (j != i)
                l *= (x - j) / double(i - j);
        v += l * y[i];
    }
    return v;
}

struct klambda_kernel {
    double lambda;
    paley_wiener_spec spec;
    radial_function k; // k_lambda(a(t))
    double measured_support;
};

/// k_lambda with spherical transform (h0_lambda)^2, built by spectral inversion.
inline klambda_kernel build_klambda(double lambda, const paley_wiener_spec& spec = {}, int nt = 4001)
{
    spec.validate();
    if (!(lambda >= 10))
        throw error(errc::domain_violation, "build_klambda needs lambda >= 10");
    const double R = 2.0 * spec.support();
    const double Rt = 1.25 * R;
    auto H = [&](double s) { return spec.h_lambda(lambda, s); };
    auto table = std::make_shared<std::vector<double>>(inverse_hc_table(H, lambda, Rt, nt));
    // support check: beyond R the kernel must vanish to quadrature noise
    const double peak = std::abs((*table)[0]);
    double measured = 0;
    for (int j = 0; j < nt; ++j)
        if (std::abs((*table)[j]) > 1e-7 * peak)
            measured = Rt * j / (nt - 1);
    if (measured > 1.05 * R)
        throw error(errc::support_overflow, "k_lambda support exceeds the Paley-Wiener radius");
    radial_function k{[table, Rt](double t) { return uniform_interp(*table, Rt, t); }, R};
    return {lambda, spec, k, measured};
}

// ---------------------------------------------------------------------------
// radial cutoffs

/// Smooth step: 1 for x <= 0, 0 for x >= 1.
inline double smooth_step(double x)
{
    if (x <= 0)
        return 1.0;
    if (x >= 1)
        return 0.0;
    const double a = std::exp(-1.0 / (1.0 - x)), b = std::exp(-1.0 / x);
    return a / (a + b);
}

/// b0: even, 1 on [-1,1], 0 outside [-2,2].
inline double cutoff_b0(double t)
{
    return smooth_step(std::abs(t) - 1.0);
}

inline double cutoff_scale(double beta, double eps0)
{
    return std::pow(beta, -0.5 + eps0);
}

inline double cutoff_b(int i, double beta, double eps0, double t)
{
    if (!(beta >= 4) || !(eps0 > 0 && eps0 < 0.125))
        throw error(errc::domain_violation, "cutoff_b needs beta >= 4 and 0 < eps0 < 1/8");
    const double b0 = cutoff_b0(t);
    const double b1 = cutoff_b0(t / cutoff_scale(beta, eps0));
    switch (i) {
    case 0: return b0;
    case 1: return b1;
    case 2: return b0 - b1;
    }
    throw error(errc::domain_violation, "cutoff index must be 0, 1 or 2");
}

/// hc transform of b1 k_lambda.
inline double k1_hat(const klambda_kernel& kl, double s, double beta, double eps0)
{
    const double R = std::min(kl.k.support_radius, 2.0 * cutoff_scale(beta, eps0));
    radial_function f{[&](double t) { return cutoff_b(1, beta, eps0, t) * kl.k(t); }, R};
    return hc_transform(f, s);
}

} // namespace champ
