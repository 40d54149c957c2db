#pragma once

// Oscillatory integrals: the 1-d estimates, J, J2, I and its split, the phase
// certificate and log-log decay fits.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <boost/random/sobol.hpp>

#include "harmonic.hpp"

namespace champ {

// ---------------------------------------------------------------------------
// truncated Taylor series, used for derivative tables

template <int N>
struct jet {
    std::array<double, N + 1> c{};

    static jet variable(double x)
    {
        jet j;
        j.c[0] = x;
        if (N >= 1)
            j.c[1] = 1;
        return j;
    }
    static jet constant(double x)
    {
        jet j;
        j.c[0] = x;
        return j;
    }
    double derivative(int k) const
    {
        double f = 1;
        for (int i = 2; i <= k; ++i)
            f *= i;
        return c[k] * f;
    }
};

template <int N>
jet<N> operator+(jet<N> a, const jet<N>& b)
{
    for (int i = 0; i <= N; ++i)
        a.c[i] += b.c[i];
    return a;
}

template <int N>
jet<N> operator-(jet<N> a, const jet<N>& b)
{
    for (int i = 0; i <= N; ++i)
        a.c[i] -= b.c[i];
    return a;
}

template <int N>
jet<N> operator*(double s, jet<N> a)
{
    for (auto& x : a.c)
        x *= s;
    return a;
}

template <int N>
jet<N> operator*(const jet<N>& a, const jet<N>& b)
{
    jet<N> r;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; i + j <= N; ++j)
            r.c[i + j] += a.c[i] * b.c[j];
    return r;
}

template <int N>
jet<N> operator/(const jet<N>& a, const jet<N>& b)
{
    jet<N> r;
    for (int k = 0; k <= N; ++k) {
        double v = a.c[k];
        for (int j = 1; j <= k; ++j)
            v -= b.c[j] * r.c[k - j];
        r.c[k] = v / b.c[0];
    }
    return r;
}

template <int N>
jet<N> exp(const jet<N>& a)
{
    jet<N> r;
    r.c[0] = std::exp(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        double v = 0;
        for (int j = 1; j <= k; ++j)
            v += j * a.c[j] * r.c[k - j];
        r.c[k] = v / k;
    }
    return r;
}

// ---------------------------------------------------------------------------
// cutoff chi0 in C_c^infty([-1,1])

/// chi0(t) = scale * exp(-a t^2 / (1 - t^2)). Larger a trades the size of the
/// derivatives for faster decay of the Fourier transform at moderate frequency.
struct cutoff_chi {
    double a = 6.0;
    double scale = 1.0;
    std::array<double, 9> deriv_bound{}; // max |chi0^(n)| on a grid, n = 0..8

    cutoff_chi() : cutoff_chi(6.0, 1.0) {}
    cutoff_chi(double a_, double scale_) : a(a_), scale(scale_)
    {
        const int n = 4001;
        for (int i = 1; i < n - 1; ++i) {
            const double t = -1.0 + 2.0 * i / (n - 1);
            const jet<8> j = eval_jet(t);
            for (int k = 0; k <= 8; ++k)
                deriv_bound[k] = std::max(deriv_bound[k], std::abs(j.derivative(k)));
        }
    }

    static cutoff_chi zero() { return cutoff_chi(6.0, 0.0); }

    double operator()(double t) const
    {
        if (std::abs(t) >= 1.0 || scale == 0.0)
            return 0.0;
        return scale * std::exp(-a * t * t / (1.0 - t * t));
    }

    jet<8> eval_jet(double t) const
    {
        using J = jet<8>;
        const J x = J::variable(t);
        const J e = (-a) * (x * x) / (J::constant(1.0) - x * x);
        return scale * exp(e);
    }

    double integral() const
    {
        return integrate_gl([this](double t) { return (*this)(t); }, -1.0, 1.0, 20, 16);
    }
};

// ---------------------------------------------------------------------------
// one-dimensional integrals

/// int chi0(t') exp(i s' t' - i s A(k n(z,tau) a(t+t'))) dt'
inline cplx int1d_A(const cutoff_chi& chi, double s, double s_prime, const cmat3& k, cplx z, double tau, double t,
                    double rel_tol = 1e-8)
{
    if (chi.scale == 0.0)
        return 0.0;
    const kcoset c = split_k(k).c;
    auto f = [&](double tp) -> cplx {
        const double v = chi(tp);
        if (v == 0.0)
            return 0.0;
        return v * std::polar(1.0, s_prime * tp - s * explicit_A(c, z, tau, t + tp));
    };
    return integrate_adaptive(f, -1.0, 1.0, rel_tol);
}

/// int chi0(t') exp(i s' t') phi_s(n(z,tau) a(t+t')) dt'
inline cplx int1d_phi(const cutoff_chi& chi, double s, double s_prime, cplx z, double tau, double t,
                      const phi_table* table = nullptr, double rel_tol = 1e-8)
{
    if (chi.scale == 0.0)
        return 0.0;
    std::unique_ptr<phi_table> own;
    const double rmax = std::max(dist_A(z, tau, std::abs(t) + 1.0), dist_A(z, tau, -std::abs(t) - 1.0)) + 1e-9;
    if (!table || table->tmax() < rmax) {
        own = std::make_unique<phi_table>(s, rmax + 0.1);
        table = own.get();
    }
    auto f = [&](double tp) -> cplx {
        const double v = chi(tp);
        if (v == 0.0)
            return 0.0;
        return v * std::polar(1.0, s_prime * tp) * (*table)(dist_A(z, tau, t + tp));
    };
    return integrate_adaptive(f, -1.0, 1.0, rel_tol);
}

// ---------------------------------------------------------------------------
// J(s, s1, s2, g; chi0)

struct j_options {
    int nodes = 16;        // Gauss-Legendre points per panel
    double panel_rate = 1; // panels per unit of s over [-1,1]
};

/// Tensor Gauss-Legendre over [-1,1]^2 of
/// chi0(t1) chi0(t2) exp(-i s1 t1 + i s2 t2) phi_s(a(-t1) g a(t2)).
inline cplx integral_J(double s, double s1, double s2, const cmat3& g, const cutoff_chi& chi,
                       const j_options& opt = {}, const phi_table* table = nullptr)
{
    if (chi.scale == 0.0)
        return 0.0;
    if (dist(cmat3::Identity(), g) > 1.5 + 1e-12)
        throw error(errc::domain_violation, "integral_J needs d(g,e) <= 1.5");
    const double rmax = cartan_radius(g) + 2.0;
    std::unique_ptr<phi_table> own;
    if (!table || table->tmax() < rmax) {
        own = std::make_unique<phi_table>(s, rmax + 0.1);
        table = own.get();
    }
    const int panels = std::max(4, int(std::ceil(opt.panel_rate * (std::abs(s) + std::max(std::abs(s1), std::abs(s2))) / 4.0)));
    const gl_rule& r = gauss_legendre(opt.nodes);
    std::vector<double> x, w;
    const double h = 2.0 / panels;
    for (int p = 0; p < panels; ++p)
        for (int i = 0; i < opt.nodes; ++i) {
            x.push_back(-1.0 + h * (p + 0.5 * (r.x[i] + 1.0)));
            w.push_back(0.5 * h * r.w[i]);
        }
    const std::size_t n = x.size();
    // points a(t1).o and g a(t2).o
    std::vector<siegel_point> p1(n), p2(n);
    std::vector<double> c1(n), c2(n);
    for (std::size_t i = 0; i < n; ++i) {
        p1[i] = act(make_a(x[i]), origin);
        p2[i] = act(g * make_a(x[i]), origin);
        c1[i] = w[i] * chi(x[i]);
        c2[i] = w[i] * chi(x[i]);
    }
    cplx sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (c1[i] == 0.0)
            continue;
        cplx row = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (c2[j] == 0.0)
                continue;
            const double R = bergman_dist(p1[i], p2[j]);
            row += c2[j] * std::polar(1.0, s2 * x[j]) * (*table)(R);
        }
        sum += c1[i] * std::polar(1.0, -s1 * x[i]) * row;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// windowed profiles on the cylinder

enum class band { InBand, OutOfBand };

/// Separable phi(z,tau,t) = u(z,tau) v(t). u is a product bump supported in the
/// closed cylinder |z|, |tau| <= lambda^{-1/2}; v is a Gaussian-windowed sinc
/// with pass band [f_lo, f_hi] (and its mirror).
struct windowed_profile {
    double lambda = 40, beta = 16;
    band flag = band::OutOfBand;
    double f_lo = 0, f_hi = 0, window = 2.0;
    double u_norm = 1, v_norm = 1;
    double amplitude = 1; // 0 gives the zero profile

    static windowed_profile make(double lambda, double beta, band flag, double window = 2.0, double margin = 4.0)
    {
        windowed_profile p;
        p.lambda = lambda;
        p.beta = beta;
        p.flag = flag;
        p.window = window;
        if (flag == band::InBand) {
            p.f_lo = lambda - beta + margin;
            p.f_hi = lambda + beta - margin;
        } else {
            p.f_lo = 0.0;
            p.f_hi = std::max(1.0, lambda - beta - margin);
        }
        p.normalize();
        return p;
    }

    double rho() const { return 1.0 / std::sqrt(lambda); }

    static double bump1(double x)
    {
        return std::abs(x) >= 1 ? 0.0 : std::exp(-1.0 / (1.0 - x * x));
    }

    double u(cplx z, double tau) const
    {
        const double r = rho();
        return u_norm * bump1(std::abs(z) / r) * bump1(tau / r);
    }

    double v(double t) const
    {
        const double g = std::exp(-0.5 * t * t / (window * window));
        double k;
        if (std::abs(t) < 1e-8)
            k = (f_hi - f_lo) / pi;
        else
            k = (std::sin(f_hi * t) - std::sin(f_lo * t)) / (pi * t);
        return v_norm * g * k;
    }

    double operator()(cplx z, double tau, double t) const { return amplitude * u(z, tau) * v(t); }

    double v_extent() const { return 9.0 * window; }

    void normalize()
    {
        u_norm = v_norm = 1;
        const double r = rho();
        // int |u|^2 dz dtau = 2 pi r^2 int_0^1 b(x)^2 x dx * r int_{-1}^1 b(y)^2 dy
        auto b2 = [](double x) { return bump1(x) * bump1(x); };
        const double radial = integrate_gl([&](double x) { return b2(x) * x; }, 0.0, 1.0, 20, 8);
        const double lin = integrate_gl(b2, -1.0, 1.0, 20, 8);
        u_norm = 1.0 / std::sqrt(2 * pi * r * r * radial * r * lin);
        const double L = v_extent();
        const double vv = integrate_gl([&](double t) { return v(t) * v(t); }, -L, L, 16,
                                       int(std::ceil(L * (f_hi + 1.0))));
        v_norm = 1.0 / std::sqrt(vv);
    }

    /// Fraction of ||v||^2 whose Fourier transform lies in the forbidden band:
    /// +-[lambda-beta, lambda+beta] for OutOfBand, its complement for InBand.
    double band_leakage() const
    {
        const double L = v_extent();
        const int panels = int(std::ceil(L * (f_hi + lambda + beta + 10.0) / 3.0));
        auto vhat = [&](double w) {
            return integrate_gl([&](double t) { return v(t) * std::cos(w * t); }, 0.0, L, 16, panels) * 2.0;
        };
        const double lo = lambda - beta, hi = lambda + beta;
        // ||v||^2 = (1/pi) int_0^inf |vhat|^2 dw for even v
        auto dens = [&](double w) {
            const double a = vhat(w);
            return a * a / pi;
        };
        const double wmax = hi + f_hi + 20.0;
        const int np = int(std::ceil(wmax));
        if (flag == band::OutOfBand)
            return integrate_gl(dens, lo, hi, 12, int(std::ceil(hi - lo)));
        return integrate_gl(dens, 0.0, lo, 12, int(std::ceil(lo))) + integrate_gl(dens, hi, wmax, 12, np);
    }
};

/// Cutoff b in t for the pairing integrals: smooth, supported in (-1, 1).
inline double pairing_cutoff(double t)
{
    return std::abs(t) >= 1 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - t * t));
}

// ---------------------------------------------------------------------------
// pairing integrals over two copies of the cylinder

struct pairing_estimate {
    double value = 0;
    double std_err = 0; // QMC standard error, or the refinement difference for the tensor rule
    std::size_t evaluations = 0;
};

struct pairing_options {
    int t_nodes = 16;     // Gauss-Legendre points per t panel
    int t_panels = 8;     // panels over (-1, 1)
    int disk_nodes = 32;  // radial nodes of the (z, tau) autocorrelation grid
    int qmc_log2 = 12;    // points per randomized Sobol replica (general g)
    int replicas = 8;     // independent random shifts
    unsigned seed = 1;
    double target_se = 0; // > 0: keep refining until the error is below this
    int max_log2 = 17;
};

namespace detail {

inline std::vector<std::pair<double, double>> gl_nodes(double a, double b, int n, int panels)
{
    const gl_rule& r = gauss_legendre(n);
    std::vector<std::pair<double, double>> out;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
        for (int i = 0; i < n; ++i)
            out.emplace_back(a + h * (p + 0.5 * (r.x[i] + 1.0)), 0.5 * h * r.w[i]);
    return out;
}

/// bp(t) = b(t) v(t) with the t factor of the profile.
inline std::vector<std::pair<double, double>> weighted_t_nodes(const windowed_profile& phi, int n, int panels)
{
    auto nodes = gl_nodes(-1.0, 1.0, n, panels);
    for (auto& [t, w] : nodes)
        w *= pairing_cutoff(t) * phi.v(t) * phi.amplitude;
    return nodes;
}

/// One tensor-rule evaluation of the g = e pairing for separable profiles.
///
/// With x2 = x1 y and y = n(z,tau) a(t2 - t1), the (z1, tau1) integral only
/// sees the bump autocorrelation U(e^{t1/2} z, e^{t1} tau), which depends on
/// |z| and tau. Rescaling (z, tau) by the t1-dependent cylinder size turns
/// U into a fixed table.
inline std::vector<double> separable_pairing_once(const std::vector<std::function<double(double)>>& kernels,
                                                  double support, const windowed_profile& phi, int t_nodes,
                                                  int t_panels, int disk_nodes)
{
    const std::size_t nk = kernels.size();
    const double rho = phi.rho();
    auto b = [](double x) { return windowed_profile::bump1(x); };
    // 1-d autocorrelation of the tau bump, tabulated on [0, 2] (it is even)
    const int nb = 64 * disk_nodes + 1;
    std::vector<double> btab(nb);
    {
        const auto eta = gl_nodes(-1.0, 1.0, 2 * disk_nodes, 2);
        for (int i = 0; i < nb; ++i) {
            const double c = 2.0 * i / (nb - 1);
            double s = 0;
            for (auto& [x, w] : eta)
                s += w * b(x) * b(x + c);
            btab[i] = s;
        }
    }
    auto B = [&](double c) {
        c = std::abs(c);
        return c >= 2.0 ? 0.0 : uniform_interp(btab, 2.0, c);
    };
    // table of U~(omega, varsigma) on Gauss nodes; omega = |z| / rho in [0, 2]
    const double smax = 2.0 + 4.0 * rho;
    const auto om = gl_nodes(0.0, 2.0, disk_nodes, 1);
    const auto sg = gl_nodes(-smax, smax, 2 * disk_nodes, 1);
    const auto rr = gl_nodes(0.0, 1.0, disk_nodes, 1);
    const int nth = 4 * disk_nodes;
    struct cell {
        double omega, varsigma, weight;
    };
    std::vector<cell> cells;
    for (auto& [o, wo] : om)
        for (auto& [sv, ws] : sg) {
            double u = 0;
            for (auto& [r, wr] : rr) {
                const double br = b(r);
                if (br == 0.0)
                    continue;
                double ang = 0;
                for (int k = 0; k < nth; ++k) {
                    const double th = 2.0 * pi * (k + 0.5) / nth;
                    const double c = std::cos(th), s = std::sin(th);
                    const double m = std::hypot(r * c + o, r * s);
                    if (m >= 1.0)
                        continue;
                    ang += b(m) * B(sv - 2.0 * rho * o * r * s);
                }
                u += wr * r * br * ang * (2.0 * pi / nth);
            }
            if (u != 0.0)
                cells.push_back({o, sv, wo * ws * o * u});
        }
    const double norm2 = phi.u_norm * phi.u_norm;
    const auto tn = weighted_t_nodes(phi, t_nodes, t_panels);
    std::vector<double> out(nk, 0.0);
    std::vector<double> acc(nk);
    for (auto& [t1, w1] : tn) {
        if (w1 == 0.0)
            continue;
        const double e1 = std::exp(-0.5 * t1), e2 = e1 * e1;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (const cell& c : cells) {
            const double r = e1 * rho * c.omega, tau = e2 * rho * c.varsigma;
            for (auto& [t2, w2] : tn) {
                if (w2 == 0.0)
                    continue;
                const double R = dist_A(r, tau, t2 - t1);
                if (R > support)
                    continue;
                const double w = c.weight * w2 * haar_weight(t2 - t1);
                for (std::size_t kk = 0; kk < nk; ++kk)
                    acc[kk] += w * kernels[kk](R);
            }
        }
        // Haar weight of x1, Jacobian 2 pi rho^6 e^{-2 t1} of the rescaling
        const double f = w1 * haar_weight(t1) * 2.0 * pi * std::pow(rho, 6) * e2 * e2 * norm2;
        for (std::size_t kk = 0; kk < nk; ++kk)
            out[kk] += f * acc[kk];
    }
    return out;
}

} // namespace detail

/// g = e pairing for separable profiles by a deterministic tensor rule. The
/// error is the difference to a rule with 1.5x the nodes in every direction.
inline std::vector<pairing_estimate> separable_pairing(const std::vector<std::function<double(double)>>& kernels,
                                                       double support, const windowed_profile& phi,
                                                       const pairing_options& opt = {})
{
    const std::size_t nk = kernels.size();
    if (phi.amplitude == 0.0)
        return std::vector<pairing_estimate>(nk);
    int tp = opt.t_panels, dn = opt.disk_nodes;
    for (int round = 0;; ++round) {
        const auto lo = detail::separable_pairing_once(kernels, support, phi, opt.t_nodes, tp, dn);
        const auto hi = detail::separable_pairing_once(kernels, support, phi, opt.t_nodes, tp * 3 / 2, dn * 3 / 2);
        std::vector<pairing_estimate> est(nk);
        bool ok = true;
        for (std::size_t k = 0; k < nk; ++k) {
            est[k] = {hi[k], std::abs(hi[k] - lo[k]), 0};
            ok = ok && est[k].std_err <= opt.target_se;
        }
        if (opt.target_se <= 0 || ok)
            return est;
        if (round >= 3)
            throw error(errc::budget_exceeded, "pairing integral did not reach the target error");
        tp *= 2;
        dn = dn * 3 / 2;
    }
}

/// General g: tensor Gauss-Legendre in (t1, t2) times randomized Sobol points
/// in the six cylinder variables.
inline std::vector<pairing_estimate> qmc_pairing(const std::vector<std::function<double(double)>>& kernels,
                                                 double support, const windowed_profile& phi, const cmat3& g,
                                                 const pairing_options& opt = {})
{
    const std::size_t nk = kernels.size();
    if (phi.amplitude == 0.0)
        return std::vector<pairing_estimate>(nk);
    const auto tn = detail::weighted_t_nodes(phi, opt.t_nodes, opt.t_panels);
    std::vector<double> tx, tw;
    for (auto& [t, w] : tn)
        if (w != 0.0) {
            tx.push_back(t);
            tw.push_back(w * haar_weight(t));
        }
    const std::size_t nt = tx.size();
    std::vector<cmat3> a_t(nt), a_tinv(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        a_t[i] = make_a(tx[i]);
        a_tinv[i] = make_a(-tx[i]);
    }
    const double rho = phi.rho();
    const double box = std::pow(2 * rho, 6);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto run = [&](int log2n) {
        std::vector<std::vector<double>> rep(nk, std::vector<double>(opt.replicas, 0.0));
        const std::size_t npts = std::size_t(1) << log2n;
        std::vector<double> acc(nk), row(nk);
        std::size_t evals = 0;
        for (int rp = 0; rp < opt.replicas; ++rp) {
            std::array<double, 6> shift;
            for (auto& s : shift)
                s = unif(rng);
            boost::random::sobol eng(6);
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t q = 0; q < npts; ++q) {
                std::array<double, 6> u;
                for (int d = 0; d < 6; ++d) {
                    const double x = std::ldexp(double(eng()), -64) + shift[d];
                    u[d] = (x - std::floor(x)) * 2.0 - 1.0;
                }
                const cplx z1(rho * u[0], rho * u[1]), z2(rho * u[3], rho * u[4]);
                const double tau1 = rho * u[2], tau2 = rho * u[5];
                const double amp = phi.u(z1, tau1) * phi.u(z2, tau2);
                if (amp == 0.0)
                    continue;
                const cmat3 mid = make_n(-z1, -tau1) * g * make_n(z2, tau2);
                for (std::size_t i = 0; i < nt; ++i) {
                    std::fill(row.begin(), row.end(), 0.0);
                    const cmat3 left = a_tinv[i] * mid;
                    for (std::size_t j = 0; j < nt; ++j) {
                        ++evals;
                        const double R = cartan_radius(left * a_t[j]);
                        if (R > support)
                            continue;
                        for (std::size_t k = 0; k < nk; ++k)
                            row[k] += tw[j] * kernels[k](R);
                    }
                    for (std::size_t k = 0; k < nk; ++k)
                        acc[k] += amp * tw[i] * row[k];
                }
            }
            for (std::size_t k = 0; k < nk; ++k)
                rep[k][rp] = acc[k] * box / double(npts);
        }
        std::vector<pairing_estimate> out(nk);
        for (std::size_t k = 0; k < nk; ++k) {
            const double mean = std::accumulate(rep[k].begin(), rep[k].end(), 0.0) / opt.replicas;
            double var = 0;
            for (double x : rep[k])
                var += (x - mean) * (x - mean);
            var /= std::max(1, opt.replicas - 1);
            out[k] = {mean, std::sqrt(var / opt.replicas), evals};
        }
        return out;
    };

    int lg = opt.qmc_log2;
    auto est = run(lg);
    while (opt.target_se > 0) {
        bool ok = true;
        for (auto& e : est)
            ok = ok && e.std_err <= opt.target_se;
        if (ok)
            break;
        if (lg >= opt.max_log2)
            throw error(errc::budget_exceeded, "pairing integral did not reach the target error");
        est = run(++lg);
    }
    return est;
}

/// Largest d(g, e) for which I(lambda, phi, g) can be nonzero: kernel support
/// plus twice the radius of the tube carrying b phi.
inline double pairing_reach(double kernel_support, const windowed_profile& phi)
{
    const double r = phi.rho();
    return kernel_support + 2.0 * dist_A(r, r, 1.0);
}

/// I(lambda, phi, g) with kernel k_lambda.
inline pairing_estimate integral_I(const klambda_kernel& kl, const windowed_profile& phi, const cmat3& g,
                                   const pairing_options& opt = {})
{
    std::vector<std::function<double(double)>> ks{[&](double R) { return kl.k(R); }};
    const double S = kl.k.support_radius;
    if (cartan_radius(g) > pairing_reach(S, phi))
        return {0.0, 0.0, 0};
    if ((g - cmat3::Identity()).norm() == 0.0)
        return separable_pairing(ks, S, phi, opt)[0];
    return qmc_pairing(ks, S, phi, g, opt)[0];
}

struct split_result {
    pairing_estimate I, I1, I2;
};

/// I = I1 + I2 with kernels b1 k_lambda and b2 k_lambda, on shared nodes.
inline split_result split_I(const klambda_kernel& kl, double beta, double eps0, const windowed_profile& phi,
                            const pairing_options& opt = {})
{
    std::vector<std::function<double(double)>> ks{
        [&](double R) { return kl.k(R); },
        [&](double R) { return cutoff_b(1, beta, eps0, R) * kl.k(R); },
        [&](double R) { return cutoff_b(2, beta, eps0, R) * kl.k(R); }};
    auto e = separable_pairing(ks, kl.k.support_radius, phi, opt);
    return {e[0], e[1], e[2]};
}

/// J2(phi, s): the g = e pairing with kernel b2 phi_s.
inline pairing_estimate integral_J2(const windowed_profile& phi, double s, double lambda, double beta, double eps0,
                                    const pairing_options& opt = {})
{
    if (!(std::abs(s - lambda) <= 0.5 * beta))
        throw error(errc::domain_violation, "integral_J2 needs |s - lambda| <= beta/2");
    const double R = 2.0;
    phi_table table(s, R + 0.1);
    std::vector<std::function<double(double)>> ks{
        [&](double x) { return cutoff_b(2, beta, eps0, x) * table(x); }};
    return separable_pairing(ks, R, phi, opt)[0];
}

// ---------------------------------------------------------------------------
// phase certificate

struct cert_box {
    double xy = 0.2, tau = 0.2, t = 0.5;
};

/// Gradient in (x, y, tau, t) of A(k n(x+iy, tau) a(t)) - rho t via a_derivatives.
inline std::array<double, 4> phase_gradient(const cmat3& k, double rho, cplx z, double tau, double t)
{
    const a_partials d = a_derivatives(k * make_n(z, tau) * make_a(t));
    const double e1 = std::exp(-0.5 * t), e2 = std::exp(-t);
    // n(z + h, tau) = n(z, tau) n(h, 2 Im(z conj h)), then conjugate n(h, .) past a(t)
    return {e1 * d.dx + 2.0 * z.imag() * e2 * d.dtau, e1 * d.dy - 2.0 * z.real() * e2 * d.dtau, e2 * d.dtau,
            d.dt - rho};
}

inline double phase_gradient_certificate(const cmat3& k, double rho, const cert_box& box = {}, int n = 16)
{
    if (!(std::abs(rho) <= 2.0 / 3.0))
        throw error(errc::domain_violation, "phase certificate needs |rho| <= 2/3");
    double best = std::numeric_limits<double>::infinity();
    auto node = [n](double half, int i) { return n == 1 ? 0.0 : -half + 2.0 * half * i / (n - 1); };
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    const auto g = phase_gradient(k, rho, cplx(node(box.xy, a), node(box.xy, b)), node(box.tau, c),
                                                  node(box.t, d));
                    best = std::min(best, std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]));
                }
    return best;
}

// ---------------------------------------------------------------------------
// decay fits

struct decay_report {
    std::vector<std::pair<double, double>> grid; // (s, |value|)
    std::vector<double> std_err;
    double fitted_slope = 0;
    bool slope_defined = true;
    bool threshold_pass = true;
};

/// Least-squares slope of log|value| against log s.
inline decay_report fit_decay(const std::vector<std::pair<double, double>>& pts, double max_slope = 0,
                              bool check = false)
{
    if (pts.size() < 5)
        throw error(errc::domain_violation, "fit_decay needs at least five points");
    decay_report rep;
    rep.grid = pts;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!(pts[i].first > pts[i - 1].first))
            throw error(errc::domain_violation, "fit_decay grid must be strictly increasing");
    bool all_small = true;
    for (auto& p : pts)
        all_small = all_small && p.second < 1e-14;
    if (all_small) {
        rep.slope_defined = false;
        rep.threshold_pass = true;
        return rep;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(pts.size());
    for (auto& p : pts) {
        if (!(p.second > 0))
            throw error(errc::degenerate_fit, "fit_decay needs positive values");
        const double x = std::log(p.first), y = std::log(p.second);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    rep.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.threshold_pass = !check || rep.fitted_slope <= max_slope;
    return rep;
}

/// Max of |f| over [s, s + width] on a fine grid: the local envelope of an oscillating sample.
template <class F>
double window_max(F&& f, double s, double width, int n = 64)
{
    double m = 0;
    for (int i = 0; i <= n; ++i)
        m = std::max(m, std::abs(f(s + width * i / n)));
    return m;
}

} // namespace champ
