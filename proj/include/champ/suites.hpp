#pragma once

// Verification suites. Each suite runs the checks of one acceptance
// criterion and returns a report; a module error inside a check becomes a
// failed record and the suite carries on.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/sobol.hpp>

#include "config.hpp"
#include "geometry.hpp"
#include "group.hpp"
#include "harmonic.hpp"
#include "hecke.hpp"
#include "oscillatory.hpp"
#include "report.hpp"
#include "sampling.hpp"

namespace champ {

/// Wall-clock budget per suite in seconds, checked by the acceptance run.
inline double suite_runtime_limit(suite_id s)
{
    switch (s) {
    case suite_id::group: return 30;
    case suite_id::derivative: return 60;
    case suite_id::geometry: return 60;
    case suite_id::spherical: return 300;
    case suite_id::transforms: return 600;
    case suite_id::decay_J: return 900;
    case suite_id::decay_I: return 900;
    case suite_id::split_I: return 1200;
    case suite_id::hecke: return 120;
    case suite_id::phase: return 120;
    }
    return 0;
}

namespace detail {

inline int resolve_threads(int threads)
{
    if (threads > 0)
        return threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// f(0..n-1) on a pool of workers; results keep index order, so the outcome
/// does not depend on the thread count. The first failing index rethrows.
template <class F>
auto parallel_map(std::size_t n, int threads, F&& f) -> std::vector<decltype(f(std::size_t{}))>
{
    using R = decltype(f(std::size_t{}));
    std::vector<R> out(n);
    std::vector<std::exception_ptr> err(n);
    const std::size_t w = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
    auto work = [&](std::size_t id) {
        for (std::size_t i = id; i < n; i += w) {
            try {
                out[i] = f(i);
            } catch (...) {
                err[i] = std::current_exception();
            }
        }
    };
    if (w <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t id = 0; id < w; ++id)
            pool.emplace_back(work, id);
        for (auto& t : pool)
            t.join();
    }
    for (auto& e : err)
        if (e)
            std::rethrow_exception(e);
    return out;
}

/// Runs body; on an exception records a failed check under name.
template <class F>
void guarded(suite_report& r, const std::string& name, F&& body)
{
    try {
        body();
    } catch (const std::exception& e) {
        r.fail(name, e.what());
    }
}

inline std::string tag(const std::string& base, const std::string& key, double v)
{
    std::ostringstream os;
    os << base << '[' << key << '=' << v << ']';
    return os.str();
}

inline std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline double max_abs_diff(const cmat3& a, const cmat3& b)
{
    return (a - b).norm();
}

/// g = k(exp(r X~1)) with d(g, MA) = target, by bisection in r.
inline cmat3 element_at_MA_distance(double target)
{
    auto g = [](double r) { return make_k(exp_ktilde({r, 0.0, 0.0})); };
    double lo = 0, hi = 1.05;
    if (dist_to_subgroup(g(hi), subgroup::MA) < target)
        throw error(errc::domain_violation, "requested distance to MA out of reach");
    for (int it = 0; it < 50; ++it) {
        const double m = 0.5 * (lo + hi);
        (dist_to_subgroup(g(m), subgroup::MA) < target ? lo : hi) = m;
    }
    return g(hi);
}

/// k(exp(r X~i)) with d(k, M) = target.
inline cmat3 element_at_M_distance(int axis, double target)
{
    auto g = [axis](double r) {
        std::array<double, 3> v{0, 0, 0};
        v[axis] = r;
        return make_k(exp_ktilde(v));
    };
    double lo = 0, hi = 1.5;
    if (dist_to_subgroup(g(hi), subgroup::M) < target)
        throw error(errc::domain_violation, "requested distance to M out of reach");
    for (int it = 0; it < 50; ++it) {
        const double m = 0.5 * (lo + hi);
        (dist_to_subgroup(g(m), subgroup::M) < target ? lo : hi) = m;
    }
    return g(hi);
}

inline pairing_options pairing_opts(const experiment_config& cfg)
{
    pairing_options o;
    o.t_nodes = cfg.orders.t_nodes;
    o.t_panels = cfg.orders.t_panels;
    o.disk_nodes = cfg.orders.disk_nodes;
    o.seed = cfg.seed;
    return o;
}

/// Points spread over [0,1)^d.
inline std::vector<std::vector<double>> sobol_points(int d, std::size_t n)
{
    boost::random::sobol eng(d);
    std::vector<std::vector<double>> out(n, std::vector<double>(d));
    for (auto& p : out)
        for (auto& x : p)
            x = std::ldexp(double(eng()), -64);
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// group: Iwasawa round trip, Phi action law, A splitting, explicit A

inline suite_report suite_group(const experiment_config& cfg, int threads)
{
    suite_report r;
    struct sample {
        cmat3 g, h, y, k;
        cplx z;
        double tau, t;
    };
    rng_t rng(cfg.seed);
    std::vector<sample> in(cfg.samples);
    for (auto& s : in) {
        s.g = random_group(rng, 2.0);
        s.h = random_group(rng, 2.0);
        s.y = random_group(rng, 2.0);
        s.k = random_k0(rng);
        s.z = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
        s.tau = uniform(rng, -1, 1);
        s.t = uniform(rng, -1, 1);
    }
    struct residuals {
        double roundtrip, action, split, explicit_a;
    };
    auto run = [&](const std::string& name, auto&& body) { detail::guarded(r, name, body); };
    std::vector<residuals> res;
    run("group_samples", [&] {
        res = detail::parallel_map(in.size(), threads, [&](std::size_t i) {
            const sample& s = in[i];
            residuals o;
            const iwasawa_coords c = iwasawa(s.g);
            o.roundtrip = detail::max_abs_diff(make_n(c.z, c.tau) * make_a(c.t) * c.k, s.g);
            o.action = detail::max_abs_diff(phi_action(s.g * s.h, s.k), phi_action(s.h, phi_action(s.g, s.k)));
            const cmat3 yinv = u21_inverse(s.y);
            const cmat3 ky = phi_action(yinv, s.k);
            o.split = std::abs(a_proj(s.k * yinv * s.h) - (a_proj(ky * s.h) - a_proj(ky * s.y)));
            const kcoset kc = split_k(c.k).c;
            o.explicit_a = std::abs(a_proj(s.g * make_n(s.z, s.tau) * make_a(s.t)) -
                                    (c.t + explicit_A(kc, s.z, s.tau, s.t)));
            return o;
        });
    });
    if (res.size() != in.size())
        return r;
    auto worst = [&](double residuals::*m) {
        double w = 0;
        for (auto& x : res)
            w = std::max(w, x.*m);
        return w;
    };
    const std::string n = std::to_string(in.size()) + " samples, d(g,e) <= 2";
    r.check("iwasawa_roundtrip_max", worst(&residuals::roundtrip), "<=", cfg.threshold("roundtrip_tol"), n);
    r.check("phi_action_law_max", worst(&residuals::action), "<=", cfg.threshold("action_law_tol"), n);
    r.check("a_splitting_max", worst(&residuals::split), "<=", cfg.threshold("splitting_tol"), n);
    r.check("explicit_A_max", worst(&residuals::explicit_a), "<=", cfg.threshold("explicit_A_tol"),
            n + "; A(g n a) against t0 + explicit formula");
    return r;
}

// ---------------------------------------------------------------------------
// derivative: partials of A, gradient along K, positivity of xi

inline suite_report suite_derivative(const experiment_config& cfg, int threads)
{
    suite_report r;
    const double h = 1e-5;
    rng_t rng(cfg.seed);
    struct sample {
        cmat3 g;
        std::array<double, 3> rv;
        cplx z;
        double tau, t;
    };
    std::vector<sample> in(cfg.samples);
    for (auto& s : in) {
        s.g = random_group(rng, 2.0);
        const auto d = random_direction(rng);
        const double rr = uniform(rng, 0.0, uniformization_delta);
        s.rv = {rr * d[0], rr * d[1], rr * d[2]};
        s.z = cplx(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5));
        s.tau = uniform(rng, -0.5, 0.5);
        s.t = uniform(rng, -0.5, 0.5);
    }
    struct out_t {
        double partials, grad, closed_fd, closed_exact;
    };
    auto A_along = [](const std::array<double, 3>& rv, cplx z, double tau, double t) {
        return a_proj(make_k(exp_ktilde(rv)) * make_n(z, tau) * make_a(t));
    };
    auto fd_grad = [&](std::array<double, 3> rv, cplx z, double tau, double t) {
        std::array<double, 3> g;
        for (int i = 0; i < 3; ++i) {
            auto p = rv, m = rv;
            p[i] += h;
            m[i] -= h;
            g[i] = (A_along(p, z, tau, t) - A_along(m, z, tau, t)) / (2 * h);
        }
        return g;
    };
    std::vector<out_t> res;
    detail::guarded(r, "derivative_samples", [&] {
        res = detail::parallel_map(in.size(), threads, [&](std::size_t i) {
            const sample& s = in[i];
            out_t o{};
            const a_partials d = a_derivatives(s.g);
            const double fd[4] = {
                (a_proj(s.g * make_a(h)) - a_proj(s.g * make_a(-h))) / (2 * h),
                (a_proj(s.g * make_n(h, 0)) - a_proj(s.g * make_n(-h, 0))) / (2 * h),
                (a_proj(s.g * make_n(cplx(0, h), 0)) - a_proj(s.g * make_n(cplx(0, -h), 0))) / (2 * h),
                (a_proj(s.g * make_n(0, h)) - a_proj(s.g * make_n(0, -h))) / (2 * h)};
            const double an[4] = {d.dt, d.dx, d.dy, d.dtau};
            for (int j = 0; j < 4; ++j)
                o.partials = std::max(o.partials, std::abs(fd[j] - an[j]));
            const auto ga = grad_K_A(s.rv, s.z, s.tau, s.t);
            const auto gf = fd_grad(s.rv, s.z, s.tau, s.t);
            for (int j = 0; j < 3; ++j)
                o.grad = std::max(o.grad, std::abs(ga[j] - gf[j]));
            const std::array<double, 3> closed{2 * s.z.imag(), -2 * s.z.real(), s.tau};
            const auto g0 = fd_grad({0, 0, 0}, s.z, s.tau, s.t);
            const auto a0 = grad_K_A({0, 0, 0}, s.z, s.tau, s.t);
            for (int j = 0; j < 3; ++j) {
                o.closed_fd = std::max(o.closed_fd, std::abs(g0[j] - closed[j]));
                o.closed_exact = std::max(o.closed_exact, std::abs(a0[j] - closed[j]));
            }
            return o;
        });
    });
    if (res.size() == in.size()) {
        auto worst = [&](double out_t::*m) {
            double w = 0;
            for (auto& x : res)
                w = std::max(w, x.*m);
            return w;
        };
        const std::string n = std::to_string(in.size()) + " samples, central differences h=1e-5";
        const double tol = cfg.threshold("fd_tol");
        r.check("a_partials_fd_max", worst(&out_t::partials), "<=", tol, n);
        r.check("grad_K_A_fd_max", worst(&out_t::grad), "<=", tol, n + ", |r| <= delta");
        r.check("grad_r0_closed_form_fd_max", worst(&out_t::closed_fd), "<=", tol, n);
        r.check("grad_r0_closed_form_max", worst(&out_t::closed_exact), "<=", cfg.threshold("closed_form_tol"),
                "analytic gradient at r=0 against (2 Im z, -2 Re z, tau)");
    }
    // xi on 20 r values x 20 directions x 400 points of (z, tau, t)
    detail::guarded(r, "xi_sigma_measured", [&] {
        const double dl = uniformization_delta;
        std::vector<double> rs;
        for (int i = 0; i < 20; ++i)
            rs.push_back(dl * (-1.0 + (2.0 * i + 1.0) / 20.0));
        std::vector<std::array<double, 3>> dirs;
        const double golden = pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < 20; ++i) {
            const double y = 1.0 - (i + 0.5) * 2.0 / 20.0, rad = std::sqrt(1 - y * y);
            dirs.push_back({rad * std::cos(golden * i), y, rad * std::sin(golden * i)});
        }
        const auto pts = detail::sobol_points(4, 400);
        auto mins = detail::parallel_map(rs.size(), threads, [&](std::size_t i) {
            double m = std::numeric_limits<double>::infinity();
            for (auto& d : dirs)
                for (auto& p : pts)
                    m = std::min(m, uniformization_xi(rs[i], d, cplx(p[0] - 0.5, p[1] - 0.5), p[2] - 0.5, p[3] - 0.5));
            return m;
        });
        r.check("xi_sigma_measured", *std::min_element(mins.begin(), mins.end()), ">", cfg.threshold("sigma_min"),
                "min of xi over a 20^4 grid, |r| <= delta, |z|,|tau|,|t| <= 0.5");
    });
    return r;
}

// ---------------------------------------------------------------------------
// geometry: two paths to the distance, the t-derivative of the distance

inline suite_report suite_geometry(const experiment_config& cfg, int threads)
{
    suite_report r;
    rng_t rng(cfg.seed);
    struct sample {
        cplx z;
        double tau, t;
    };
    std::vector<sample> in(cfg.samples);
    for (auto& s : in)
        s = {cplx(uniform(rng, -1.5, 1.5), uniform(rng, -1.5, 1.5)), uniform(rng, -1.5, 1.5), uniform(rng, -1.5, 1.5)};
    detail::guarded(r, "dist_A_two_path_max", [&] {
        auto d = detail::parallel_map(in.size(), threads, [&](std::size_t i) {
            const sample& s = in[i];
            return std::abs(dist_A(s.z, s.tau, s.t) - cartan_radius(make_n(s.z, s.tau) * make_a(s.t)));
        });
        r.check("dist_A_two_path_max", *std::max_element(d.begin(), d.end()), "<=", cfg.threshold("two_path_tol"),
                std::to_string(in.size()) + " samples, |z|,|tau|,|t| <= 1.5");
    });
    data_table tab{"dist_A_dt", {"lambda", "beta", "order", "K"}, {}};
    double K1 = 0;
    bool ok = true;
    for (double lam : cfg.lambda_grid)
        for (double beta : cfg.betas()) {
            detail::guarded(r, detail::tag("dist_A_dt_K", "lambda", lam), [&] {
                const double rho = 1.0 / std::sqrt(lam);
                const double t0 = cutoff_scale(beta, cfg.eps0);
                const int m = 7;
                std::vector<sample> grid;
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b)
                        for (int c = 0; c < m; ++c)
                            for (double sg : {-1.0, 1.0}) {
                                const double x = rho * (-1 + 2.0 * a / (m - 1)), y = rho * (-1 + 2.0 * b / (m - 1));
                                grid.push_back({cplx(x, y), rho * (-1 + 2.0 * c / (m - 1)), sg * t0});
                            }
                for (int order = 1; order <= 4; ++order) {
                    const double scale = order == 1 ? std::pow(beta, 1 - 2 * cfg.eps0) / lam
                                                    : std::pow(1.0 / t0, order + 1) / lam;
                    double K = 0;
                    for (auto& p : grid) {
                        const double v = dist_A_dt(p.z, p.tau, p.t, order);
                        const double target = order == 1 ? (p.t > 0 ? 1.0 : -1.0) : 0.0;
                        K = std::max(K, std::abs(v - target) / scale);
                    }
                    tab.rows.push_back({lam, beta, double(order), K});
                    if (order == 1)
                        K1 = std::max(K1, K);
                }
            });
            ok = ok && !r.find(detail::tag("dist_A_dt_K", "lambda", lam));
        }
    r.tables.push_back(tab);
    if (ok)
        r.check("dist_A_dt_K_max", K1, "<=", cfg.threshold("K_max"),
                "single K over the (lambda, beta) grid for |A' - sgn t| <= K beta^{1-2 eps0}/lambda");
    return r;
}

// ---------------------------------------------------------------------------
// spherical: normalization, backends, decay, Plancherel density and inversion

inline suite_report suite_spherical(const experiment_config& cfg, int threads)
{
    suite_report r;
    detail::guarded(r, "phi_at_origin_max", [&] {
        double m = 0;
        for (double s : cfg.s_grid)
            for (auto b : {phi_backend::KQuadrature, phi_backend::RadialODE})
                m = std::max(m, std::abs(spherical_phi(s, 0.0, b) - 1.0));
        r.check("phi_at_origin_max", m, "<=", cfg.threshold("phi0_tol"));
    });
    detail::guarded(r, "backend_agreement_max", [&] {
        std::vector<std::pair<double, double>> pts;
        for (double s : cfg.s_grid)
            if (s <= 50)
                for (double t = 0.25; t <= 3.0 + 1e-12; t += 0.25)
                    pts.push_back({s, t});
        auto d = detail::parallel_map(pts.size(), threads, [&](std::size_t i) {
            const auto [s, t] = pts[i];
            return std::abs(spherical_phi(s, t, phi_backend::KQuadrature) - spherical_phi(s, t, phi_backend::RadialODE));
        });
        r.check("backend_agreement_max", *std::max_element(d.begin(), d.end()), "<=", cfg.threshold("backend_tol"),
                "s in s_grid with s <= 50, t in [0.25, 3]");
    });
    detail::guarded(r, "phi_decay_slope", [&] {
        // envelope of |phi_s(a(1))| over one oscillation period, s t in [10, 300]
        const double t = 1.0, width = 2 * pi / t;
        std::vector<double> ss;
        for (int i = 0; i < 12; ++i)
            ss.push_back(10.0 * std::pow(30.0, i / 11.0));
        auto env = detail::parallel_map(ss.size(), threads, [&](std::size_t i) {
            auto f = [&](double s) { return phi_table(s, t)(t); };
            const double lo = std::max(10.0, ss[i] - 0.5 * width);
            return window_max(f, lo, width, 96);
        });
        std::vector<std::pair<double, double>> pts;
        data_table tab{"phi_envelope", {"st", "envelope"}, {}};
        for (std::size_t i = 0; i < ss.size(); ++i) {
            pts.push_back({ss[i] * t, env[i]});
            tab.rows.push_back({ss[i] * t, env[i]});
        }
        r.tables.push_back(tab);
        const decay_report d = fit_decay(pts);
        const double target = cfg.threshold("slope_target"), hw = cfg.threshold("slope_halfwidth");
        r.check("phi_decay_slope_deviation", std::abs(d.fitted_slope - target), "<=", hw,
                "fitted slope " + detail::num(d.fitted_slope));
    });
    detail::guarded(r, "plancherel_band_ratio", [&] {
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        for (double s = 10; s <= 100; s += 1) {
            const double v = plancherel_density(s) / (s * s * s);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        r.info("plancherel_constant", plancherel_constant());
        r.check("plancherel_band_ratio", hi / lo, "<=", cfg.threshold("plancherel_band"),
                "max/min of nu(s)/s^3 on [10, 100]");
    });
    detail::guarded(r, "inversion_residual_max", [&] {
        const std::vector<double> radii{1.0, 1.5, 2.0};
        auto res = detail::parallel_map(radii.size(), threads, [&](std::size_t i) {
            const double R = radii[i];
            radial_function f{[R](double t) { return radial_bump(t, R); }, R};
            const double smax = 300.0;
            auto g = [&](double s) { return hc_transform(f, s) * plancherel_density(s); };
            const double back = integrate_gl(g, 0.0, smax, 10, int(smax / 2));
            return std::abs(back - f(0.0)) / std::abs(f(0.0));
        });
        r.check("inversion_residual_max", *std::max_element(res.begin(), res.end()), "<=",
                cfg.threshold("inversion_tol"), "three bumps of radius 1, 1.5, 2");
    });
    return r;
}

// ---------------------------------------------------------------------------
// transforms: k_lambda round trip, envelope, k1 hat

inline suite_report suite_transforms(const experiment_config& cfg, int threads)
{
    suite_report r;
    const double lam = cfg.lambda_grid.front();
    klambda_kernel kl;
    try {
        kl = build_klambda(lam);
    } catch (const std::exception& e) {
        r.fail("build_klambda", e.what());
        return r;
    }
    r.info("k_lambda_measured_support", kl.measured_support);
    detail::guarded(r, "hc_roundtrip_rel_max", [&] {
        double m = 0;
        for (double s : {lam - 1, lam, lam + 1}) {
            const double want = kl.spec.h_lambda(lam, s);
            m = std::max(m, std::abs(hc_transform(kl.k, s) - want) / want);
        }
        r.check("hc_roundtrip_rel_max", m, "<=", cfg.threshold("hc_rel_tol"), "s = lambda - 1, lambda, lambda + 1");
    });
    detail::guarded(r, "k_envelope_K", [&] {
        double K = 0;
        const int n = 2000;
        for (int i = 0; i <= n; ++i) {
            const double t = 1.0 / lam + (1.0 - 1.0 / lam) * i / n;
            K = std::max(K, std::abs(kl.k(t)) / (lam * lam * lam * std::pow(1 + lam * t, -1.5)));
        }
        r.info("k_envelope_K", K, "max over t in [1/lambda, 1] of |k(t)| / (lambda^3 (1 + lambda t)^{-3/2})");
        r.flag("k_envelope_K_finite", std::isfinite(K) && K > 0);
    });
    const auto betas = cfg.betas();
    data_table tab{"k1_hat", {"beta", "abs_k1_at_lambda", "abs_k1_at_quarter", "ratio", "K"}, {}};
    detail::guarded(r, "k1_hat", [&] {
        auto vals = detail::parallel_map(betas.size(), threads, [&](std::size_t i) {
            return std::array<double, 2>{std::abs(k1_hat(kl, lam, betas[i], cfg.eps0)),
                                         std::abs(k1_hat(kl, lam / 4, betas[i], cfg.eps0))};
        });
        double K = 0;
        for (std::size_t i = 0; i < betas.size(); ++i) {
            const double ratio = vals[i][1] / vals[i][0];
            const double Kb = vals[i][0] / std::pow(betas[i], -0.5 + cfg.eps0);
            K = std::max(K, Kb);
            tab.rows.push_back({betas[i], vals[i][0], vals[i][1], ratio, Kb});
            if (i == 0)
                r.check(detail::tag("k1_low_ratio", "beta", betas[i]), ratio, "<=", cfg.threshold("low_ratio"),
                        "|k1(lambda/4)| / |k1(lambda)|");
            else
                r.info(detail::tag("k1_low_ratio", "beta", betas[i]), ratio);
        }
        r.check("k1_K_beta", K, "<=", cfg.threshold("K_max"), "one K with |k1(lambda)| <= K beta^{-1/2+eps0}");
    });
    r.tables.push_back(tab);
    return r;
}

// ---------------------------------------------------------------------------
// decay_J

inline suite_report suite_decay_J(const experiment_config& cfg, int threads)
{
    suite_report r;
    const double beta = cfg.beta, eps0 = cfg.eps0;
    const double B0 = 2.0;
    const cutoff_chi chi(6.0, 1.0);
    j_options lo_opt, hi_opt;
    lo_opt.nodes = cfg.orders.j_nodes;
    hi_opt.nodes = cfg.orders.j_nodes * 3 / 2;
    struct row {
        double s, dist, J, err;
    };
    std::vector<row> rows;
    cmat3 g_last;
    detail::guarded(r, "decay_J_grid", [&] {
        rows = detail::parallel_map(cfg.s_grid.size(), threads, [&](std::size_t i) {
            const double s = cfg.s_grid[i];
            const double target = B0 * std::pow(s, -0.5 + eps0) * std::sqrt(beta);
            const cmat3 g = detail::element_at_MA_distance(target);
            const phi_table tab(s, cartan_radius(g) + 2.2);
            const cplx a = integral_J(s, s, s, g, chi, lo_opt, &tab);
            const cplx b = integral_J(s, s, s, g, chi, hi_opt, &tab);
            return row{s, dist_to_subgroup(g, subgroup::MA), std::abs(b), std::abs(a - b)};
        });
        g_last = detail::element_at_MA_distance(B0 * std::pow(cfg.s_grid.back(), -0.5 + eps0) * std::sqrt(beta));
    });
    if (rows.size() != cfg.s_grid.size())
        return r;
    data_table tab{"decay_J", {"s", "s1", "s2", "dist_to_MA", "abs_J", "std_err"}, {}};
    std::vector<std::pair<double, double>> pts;
    for (auto& x : rows) {
        tab.rows.push_back({x.s, x.s, x.s, x.dist, x.J, x.err});
        pts.push_back({x.s, x.J});
    }
    detail::guarded(r, "decay_J_fitted_slope", [&] {
        const decay_report d = fit_decay(pts, cfg.threshold("slope_max"), true);
        if (!d.slope_defined)
            r.flag("decay_J_fitted_slope", true, "all values below 1e-14, slope undefined");
        else
            r.check("decay_J_fitted_slope", d.fitted_slope, "<=", cfg.threshold("slope_max"),
                    "s1 = s2 = s, d(g,MA) = 2 s^{-1/2+eps0} beta^{1/2}");
    });
    const row& last = rows.back();
    r.check(detail::tag("abs_J", "s", last.s), last.J, "<=", cfg.threshold("J_last_max"),
            "quadrature error estimate " + detail::num(last.err));
    detail::guarded(r, "control_ratio", [&] {
        const double s = last.s;
        const phi_table t(s, 3.0);
        const double c = std::abs(integral_J(s, s, s, cmat3::Identity(), chi, hi_opt, &t));
        r.info(detail::tag("abs_J_control_g_e", "s", s), c);
        r.check("control_ratio", c / last.J, ">=", cfg.threshold("control_ratio"), "g = e in MA against the hypothesis point");
    });
    detail::guarded(r, "off_diagonal_worst", [&] {
        const double s = last.s;
        const phi_table t(s, cartan_radius(g_last) + 2.2);
        std::vector<std::pair<double, double>> pairs;
        for (double d1 : {-3 * beta, 0.0, 3 * beta})
            for (double d2 : {-3 * beta, 0.0, 3 * beta})
                if (d1 != 0.0 || d2 != 0.0)
                    pairs.push_back({s + d1, s + d2});
        auto v = detail::parallel_map(pairs.size(), threads, [&](std::size_t i) {
            return std::abs(integral_J(s, pairs[i].first, pairs[i].second, g_last, chi, lo_opt, &t));
        });
        double w = 0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            tab.rows.push_back({s, pairs[i].first, pairs[i].second, last.dist, v[i], std::nan("")});
            w = std::max(w, v[i]);
        }
        r.info("off_diagonal_worst_abs_J", w, "s1, s2 in {s - 3 beta, s, s + 3 beta}; not asserted");
    });
    r.tables.push_back(tab);
    return r;
}

// ---------------------------------------------------------------------------
// decay_I: the one-dimensional integrals and J2

inline suite_report suite_decay_I(const experiment_config& cfg, int threads)
{
    suite_report r;
    const cutoff_chi chi(6.0, 1.0);
    const double s = cfg.s_grid.back();
    const auto betas = cfg.betas();
    const double beta1 = betas.front(), beta2 = betas.back();
    const double thr = std::pow(s, -0.5 + cfg.eps0) * std::sqrt(beta1);
    std::vector<double> sp;
    for (double x = s - 3 * beta1; x <= s + 3 * beta1 + 1e-9; x += 1.0)
        sp.push_back(x);
    detail::guarded(r, "int1d_A_M_oracle", [&] {
        const cmat3 m = make_m(0.7, -1.1);
        const double v = std::abs(int1d_A(chi, s, s, m, cplx(0.2, -0.1), 0.3, 0.1));
        r.check("int1d_A_M_oracle", std::abs(v - std::abs(chi.integral())), "<=", 1e-10, "k in M, s' = s");
    });
    detail::guarded(r, "int1d_A_hypothesis_max", [&] {
        data_table tab{"int1d_A", {"axis", "s", "s_prime", "abs_value"}, {}};
        double worst = 0, where = 0;
        for (int axis = 0; axis < 3; ++axis) {
            const cmat3 k = detail::element_at_M_distance(axis, thr);
            auto v = detail::parallel_map(sp.size(), threads, [&](std::size_t i) {
                return std::abs(int1d_A(chi, s, sp[i], k, 0.0, 0.0, 0.0));
            });
            for (std::size_t i = 0; i < sp.size(); ++i) {
                tab.rows.push_back({double(axis), s, sp[i], v[i]});
                if (v[i] > worst) {
                    worst = v[i];
                    where = sp[i];
                }
            }
            r.info(detail::tag("stationary_frequency", "axis", axis), s * a_derivatives(k).dt,
                   "s dA/dt at z = tau = t = 0");
        }
        r.tables.push_back(tab);
        r.check("int1d_A_hypothesis_max", worst, "<=", cfg.threshold("int1d_A_max"),
                "d(k,M) = s^{-1/2+eps0} beta^{1/2}, |s'-s| <= 3 beta, worst at s' = " + detail::num(where));
    });
    detail::guarded(r, "int1d_phi_hypothesis_max", [&] {
        const phi_table tab(s, 4.0);
        double worst = 0;
        for (double ang : {0.0, 1.0, 2.0})
            for (double t : {-0.3, 0.0, 0.3}) {
                auto v = detail::parallel_map(sp.size(), threads, [&](std::size_t i) {
                    return std::abs(int1d_phi(chi, s, sp[i], std::polar(2 * thr, ang), 0.0, t, &tab));
                });
                worst = std::max(worst, *std::max_element(v.begin(), v.end()));
            }
        r.check("int1d_phi_hypothesis_max", worst, "<=", cfg.threshold("int1d_phi_max"), "|z| at twice the threshold");
        r.info("int1d_phi_control_over_int_chi", std::abs(int1d_phi(chi, s, s, 0.0, 0.0, 0.0, &tab)) / chi.integral(),
               "z = tau = 0, hypothesis violated");
    });
    const double lam = cfg.lambda_grid.front();
    detail::guarded(r, "J2_out_of_band_max", [&] {
        const pairing_options opt = detail::pairing_opts(cfg);
        const auto out = windowed_profile::make(lam, beta2, band::OutOfBand);
        const auto in = windowed_profile::make(lam, beta2, band::InBand);
        const std::vector<double> ss{lam - beta2 / 2, lam, lam + beta2 / 2};
        auto vo = detail::parallel_map(ss.size(), threads, [&](std::size_t i) {
            return std::abs(integral_J2(out, ss[i], lam, beta2, cfg.eps0, opt).value);
        });
        const double ci = std::abs(integral_J2(in, lam, lam, beta2, cfg.eps0, opt).value);
        const double wo = *std::max_element(vo.begin(), vo.end());
        r.check("J2_out_of_band_max", wo, "<=", cfg.threshold("J2_max"), "s in {lambda - beta/2, lambda, lambda + beta/2}");
        r.check("J2_in_band_control_ratio", ci / vo[1], ">=", cfg.threshold("J2_control_ratio"),
                "in-band over out-of-band at s = lambda, unit-norm profiles");
    });
    return r;
}

// ---------------------------------------------------------------------------
// split_I

inline suite_report suite_split_I(const experiment_config& cfg, int threads)
{
    (void)threads; // the pairing rule is sequential; the work is one table per beta
    suite_report r;
    const double lam = cfg.lambda_grid.front();
    klambda_kernel kl;
    try {
        kl = build_klambda(lam);
    } catch (const std::exception& e) {
        r.fail("build_klambda", e.what());
        return r;
    }
    const pairing_options opt = detail::pairing_opts(cfg);
    auto betas = cfg.betas();
    if (std::find(betas.begin(), betas.end(), cfg.beta) == betas.end()) {
        betas.push_back(cfg.beta);
        std::sort(betas.begin(), betas.end());
    }
    data_table tab{"split_I", {"beta", "I", "I_err", "I1", "I1_err", "I2", "I2_err", "leakage"}, {}};
    double K = 0;
    bool all = true;
    for (double beta : betas) {
        const std::string key = detail::tag("split", "beta", beta);
        detail::guarded(r, key, [&] {
            const auto phi = windowed_profile::make(lam, beta, band::OutOfBand);
            const double leak = phi.band_leakage();
            const split_result s = split_I(kl, beta, cfg.eps0, phi, opt);
            tab.rows.push_back({beta, s.I.value, s.I.std_err, s.I1.value, s.I1.std_err, s.I2.value, s.I2.std_err, leak});
            const double err = s.I.std_err + s.I1.std_err + s.I2.std_err;
            r.check(detail::tag("additivity_residual", "beta", beta), std::abs(s.I.value - s.I1.value - s.I2.value),
                    "<=", cfg.threshold("additivity_sigmas") * err + 1e-14,
                    "threshold is the multiple of the summed error bars");
            r.check(detail::tag("I_lower_bound", "beta", beta), s.I.value + 3 * s.I.std_err, ">=", 0.0,
                    "I(lambda, phi, e) >= -(numerical error)");
            r.check(detail::tag("profile_leakage", "beta", beta), leak, "<=", 1e-6);
            K = std::max(K, std::abs(s.I1.value) / std::pow(beta, -0.5 + cfg.eps0));
            if (beta == cfg.beta) {
                r.check(detail::tag("abs_I2", "beta", beta), std::abs(s.I2.value), "<=", cfg.threshold("I2_max"),
                        "out-of-band profile, error estimate " + detail::num(s.I2.std_err));
                r.check(detail::tag("I2_err_fraction", "beta", beta), s.I2.std_err / cfg.threshold("I2_max"), "<=",
                        cfg.threshold("se_fraction"));
            } else {
                r.info(detail::tag("abs_I2", "beta", beta), std::abs(s.I2.value));
            }
        });
        all = all && !r.find(key);
    }
    r.tables.push_back(tab);
    if (all)
        r.check("I1_K_beta", K, "<=", cfg.threshold("K_max"), "one K with |I1| <= K beta^{-1/2+eps0}");
    detail::guarded(r, "vanishing_beyond_support", [&] {
        const auto phi = windowed_profile::make(lam, cfg.beta, band::OutOfBand);
        const cmat3 g = make_a(3.0);
        const double reach = pairing_reach(kl.k.support_radius, phi);
        r.info("pairing_reach", reach, "kernel support plus twice the tube radius");
        r.check("I_at_a3", std::abs(integral_I(kl, phi, g, opt).value), "==", 0.0, "d(g,e) = 3 beyond the reach");
    });
    return r;
}

// ---------------------------------------------------------------------------
// hecke

inline std::string to_string(const rational& x)
{
    std::ostringstream os;
    os << x;
    return os.str();
}

inline suite_report suite_hecke(const experiment_config& cfg, int threads)
{
    (void)threads;
    suite_report r;
    data_table tab{"tt_star", {"q", "branch", "a1", "a2", "a3", "alpha", "scaled", "family"}, {}};
    for (int q : cfg.q_list) {
        const std::string qs = "[q=" + std::to_string(q) + "]";
        const auto P = [q](int a, int b, int c, rational k = 1) { return hecke_element::basis(q, {a, b, c}, k); };
        detail::guarded(r, "amplifier_identity" + qs, [&] {
            const rational deg = rational(q * q + q + 1);
            r.flag("amplifier_identity" + qs,
                   convolve(P(1, 0, 0), P(1, 1, 0)) == P(2, 1, 0) + P(1, 1, 1, deg));
        });
        detail::guarded(r, "coset_counts" + qs, [&] {
            const double want = q * q + q + 1;
            const double n1 = coset_reps(q, {1, 0, 0}).reps.size(), n2 = coset_reps(q, {1, 1, 0}).reps.size();
            r.check("coset_count_100" + qs, n1, "==", want);
            r.check("coset_count_110" + qs, n2, "==", want);
            bool deg = true;
            for (signature s : {signature{2, 1, 0}, signature{1, 1, 1}, signature{2, 0, 0}, signature{2, 2, 0},
                                signature{2, 1, 1}})
                deg = deg && rational(coset_reps(q, s).reps.size()) == hecke_degree(q, s);
            r.flag("coset_counts_match_degree" + qs, deg);
        });
        detail::guarded(r, "algebra_identities" + qs, [&] {
            const auto a = P(1, 0, 0), b = P(1, 1, 0), c = P(2, 1, 0);
            r.flag("commutativity" + qs, convolve(a, b) == convolve(b, a) && convolve(a, c) == convolve(c, a));
            r.flag("associativity" + qs, convolve(convolve(a, b), a) == convolve(a, convolve(b, a)));
            r.flag("adjoint_of_product" + qs, adjoint(convolve(a, c)) == convolve(adjoint(c), adjoint(a)));
            // adjoint of Phi(1,0,0) by inverting the representatives
            bool inv = true;
            for (const pmat& x : coset_reps(q, {1, 0, 0}).reps)
                inv = inv && smith_signature(pmat_inverse(x, q), q) == signature{0, 0, -1};
            r.flag("adjoint_by_inversion" + qs, inv && adjoint(a) == P(0, 0, -1));
        });
        const std::vector<std::pair<std::string, std::array<double, 2>>> branches{{"a", {0.5, 0.0}},
                                                                                   {"b", {0.1, 0.5}}};
        for (auto& [name, eig] : branches) {
            const std::string key = "[q=" + std::to_string(q) + ",branch=" + name + "]";
            detail::guarded(r, "tt_star" + key, [&] {
                const tt_star_report t = tt_star_expansion(q, eig[0], eig[1]);
                r.flag("tt_star_support_in_families" + key, t.all_in_families);
                for (auto& term : t.terms)
                    tab.rows.push_back({double(q), name == "a" ? 0.0 : 1.0, double(term.sig.a1), double(term.sig.a2),
                                        double(term.sig.a3), term.alpha.convert_to<double>(),
                                        term.scaled.convert_to<double>(), double(term.family)});
                const double mx = t.max_scaled.convert_to<double>();
                r.info("tt_star_max_scaled" + key, mx, "exact " + to_string(t.max_scaled));
                r.flag("tt_star_max_scaled_finite" + key, std::isfinite(mx));
            });
        }
    }
    r.tables.push_back(tab);
    return r;
}

// ---------------------------------------------------------------------------
// phase certificates

inline suite_report suite_phase(const experiment_config& cfg, int threads)
{
    suite_report r;
    rng_t rng(cfg.seed);
    std::vector<std::pair<cmat3, double>> in(cfg.samples);
    for (auto& x : in)
        x = {random_k0(rng), uniform(rng, -2.0 / 3.0, 2.0 / 3.0)};
    detail::guarded(r, "phase_certificate_min", [&] {
        auto v = detail::parallel_map(in.size(), threads, [&](std::size_t i) {
            return phase_gradient_certificate(in[i].first, in[i].second, cert_box{}, cfg.orders.cert_grid);
        });
        data_table tab{"phase_certificates", {"rho", "certificate"}, {}};
        for (std::size_t i = 0; i < in.size(); ++i)
            tab.rows.push_back({in[i].second, v[i]});
        r.tables.push_back(tab);
        r.check("phase_certificate_min", *std::min_element(v.begin(), v.end()), ">", cfg.threshold("cert_min"),
                std::to_string(in.size()) + " random (k, rho), |rho| <= 2/3");
    });
    return r;
}

// ---------------------------------------------------------------------------

inline suite_report run_suite(const experiment_config& cfg, int threads = 1)
{
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    suite_report r;
    switch (cfg.suite) {
    case suite_id::group: r = suite_group(cfg, threads); break;
    case suite_id::derivative: r = suite_derivative(cfg, threads); break;
    case suite_id::geometry: r = suite_geometry(cfg, threads); break;
    case suite_id::spherical: r = suite_spherical(cfg, threads); break;
    case suite_id::transforms: r = suite_transforms(cfg, threads); break;
    case suite_id::decay_J: r = suite_decay_J(cfg, threads); break;
    case suite_id::decay_I: r = suite_decay_I(cfg, threads); break;
    case suite_id::split_I: r = suite_split_I(cfg, threads); break;
    case suite_id::hecke: r = suite_hecke(cfg, threads); break;
    case suite_id::phase: r = suite_phase(cfg, threads); break;
    }
    r.suite = suite_name(cfg.suite);
    r.overridden = cfg.overridden();
    r.timestamp = detail::utc_timestamp();
    r.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace champ
