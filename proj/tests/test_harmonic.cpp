#include <cmath>

#include <champ/harmonic.hpp>
#include <champ/oscillatory.hpp>
#include <champ/sampling.hpp>

#include "test_util.hpp"

using namespace champ;

namespace {

const klambda_kernel& k40()
{
    static const klambda_kernel k = build_klambda(40);
    return k;
}

radial_function bump(double R)
{
    return {[R](double t) { return radial_bump(t, R); }, R};
}

} // namespace

TEST(Harmonic, PhiAtOrigin)
{
    for (double s : {0.0, 1.0, 17.5, 120.0}) {
        EXPECT_NEAR(spherical_phi(s, 0.0, phi_backend::KQuadrature), 1.0, 1e-10);
        EXPECT_NEAR(spherical_phi(s, 0.0, phi_backend::RadialODE), 1.0, 1e-10);
    }
}

TEST(Harmonic, PhiIsEvenInS)
{
    for (double s : {1.0, 5.0, 20.0})
        for (double t : {0.5, 1.0, 2.0}) {
            for (auto b : {phi_backend::KQuadrature, phi_backend::RadialODE})
                EXPECT_NEAR(spherical_phi(s, t, b), spherical_phi(-s, t, b), 1e-8);
        }
}

TEST(Harmonic, BackendsAgree)
{
    double worst = 0;
    for (double s : {0.5, 3.0, 10.0, 25.0, 50.0})
        for (double t : {0.05, 0.4, 1.0, 1.7, 3.0})
            worst = std::max(worst, std::abs(spherical_phi(s, t, phi_backend::KQuadrature) -
                                             spherical_phi(s, t, phi_backend::RadialODE)));
    EXPECT_LE(worst, 1e-6);
}

TEST(Harmonic, PhiIsBoundedByOne)
{
    for (double s : {0.0, 2.0, 30.0}) {
        phi_table ph(s, 6.0);
        for (int i = 0; i <= 600; ++i)
            EXPECT_LE(std::abs(ph(0.01 * i)), 1.0 + 1e-12);
    }
    EXPECT_CHAMP_ERROR(spherical_phi(1.0, 6.5, phi_backend::RadialODE), errc::domain_violation);
}

TEST(Harmonic, KQuadratureSolvesTheRadialEquation)
{
    // u'' + (coth(t/2) + coth t) u' + (1 + s^2) u = 0 applied to K-integral samples
    const double h = 5e-4;
    for (double s : {1.0, 5.0})
        for (double t : {0.5, 1.0, 2.0}) {
            auto u = [&](double x) { return phi_kquad_fixed(s, x, 256); };
            const double u0 = u(t), up = u(t + h), um = u(t - h);
            const double d1 = (up - um) / (2 * h), d2 = (up - 2 * u0 + um) / (h * h);
            const double res = d2 + (1 / std::tanh(0.5 * t) + 1 / std::tanh(t)) * d1 + (1 + s * s) * u0;
            EXPECT_LE(std::abs(res), 1e-4) << "s = " << s << ", t = " << t;
        }
}

TEST(Harmonic, PhiDecaySlope)
{
    // envelope of |phi_s(a(1))| over one period in s, on a log grid of s in [20, 300]
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 9; ++i) {
        const double s = 20 * std::pow(15.0, i / 8.0);
        pts.emplace_back(s, window_max([](double x) { return phi_table(x, 1.1)(1.0); }, s, 2 * pi, 48));
    }
    EXPECT_NEAR(fit_decay(pts).fitted_slope, -1.5, 0.15);
}

TEST(Harmonic, HCTransformBasics)
{
    radial_function zero{[](double) { return 0.0; }, 1.0};
    EXPECT_EQ(hc_transform(zero, 3.0), 0.0);
    EXPECT_EQ(hc_transform(radial_function{}, 3.0), 0.0);
    const radial_function f = bump(1.2);
    for (double s : {0.7, 4.0, 25.0})
        EXPECT_NEAR(hc_transform(f, s), hc_transform(f, -s), 1e-8 * std::abs(hc_transform(f, 0.0)));
}

TEST(Harmonic, HCTransformOfKLambda)
{
    const auto& kl = k40();
    for (double s : {39.0, 40.0, 41.0}) {
        const double want = kl.spec.h_lambda(40, s);
        EXPECT_NEAR(hc_transform(kl.k, s), want, 1e-3 * want) << "s = " << s;
    }
    EXPECT_NEAR(hc_transform(kl.k, 40.0), 1.0, 1e-3);
}

TEST(Harmonic, KLambdaSupportAndEnvelope)
{
    const auto& kl = k40();
    EXPECT_LE(kl.measured_support, 1.05 * 2 * kl.spec.support());
    EXPECT_EQ(kl.k(kl.k.support_radius + 0.01), 0.0);
    // |k(a(t))| <= K lambda^3 (1 + lambda t)^{-3/2} on [1/lambda, 1]
    double K = 0;
    for (int i = 0; i <= 400; ++i) {
        const double t = 1.0 / 40 + (1 - 1.0 / 40) * i / 400.0;
        K = std::max(K, std::abs(kl.k(t)) / (std::pow(40.0, 3) * std::pow(1 + 40 * t, -1.5)));
    }
    EXPECT_TRUE(std::isfinite(K));
    EXPECT_GT(K, 0);
    RecordProperty("K", std::to_string(K));
    EXPECT_CHAMP_ERROR(build_klambda(5.0), errc::domain_violation);
}

TEST(Harmonic, HLambdaIsNonnegative)
{
    const paley_wiener_spec spec;
    EXPECT_EQ(spec.h(0.0), 1.0);
    for (int i = 0; i <= 2000; ++i) {
        const double s = -100 + 0.1 * i;
        EXPECT_GE(spec.h_lambda(40, s), 0.0);
        EXPECT_GE(spec.h(s), 0.0);
    }
    EXPECT_NEAR(spec.h_lambda(40, 40), std::pow(1 + spec.h(-80), 2), 1e-15);
    EXPECT_CHAMP_ERROR((paley_wiener_spec{0.1, 3}.validate()), errc::domain_violation);
}

TEST(Harmonic, PlancherelDensity)
{
    EXPECT_TRUE(std::isfinite(plancherel_density(0.0)));
    EXPECT_GE(plancherel_density(0.0), 0.0);
    double lo = 1e300, hi = 0;
    for (int i = 0; i <= 90; ++i) {
        const double s = 10 + i;
        const double r = plancherel_density(s) / (s * s * s);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LE(hi / lo, 4.0);
    EXPECT_CHAMP_ERROR(plancherel_density(-1.0), errc::domain_violation);
}

TEST(Harmonic, PlancherelInversion)
{
    for (double R : {1.0, 1.5, 2.0}) {
        const radial_function f = bump(R);
        const double smax = 300;
        auto g = [&](double s) { return hc_transform(f, s) * plancherel_density(s); };
        const double back = integrate_gl(g, 0.0, smax, 10, 150);
        EXPECT_NEAR(back, f(0.0), 1e-3 * f(0.0)) << "R = " << R;
    }
}

TEST(Harmonic, HelgasonZeroAndDomain)
{
    iwasawa_function zero = [](cplx, double, double) { return 0.0; };
    EXPECT_EQ(helgason_transform(zero, 1.0, 5.0, {}), cplx(0.0));
    EXPECT_CHAMP_ERROR(helgason_transform(zero, 3.5, 5.0, {}), errc::domain_violation);
}

TEST(Harmonic, HelgasonOfRadialFunctionIsHCTransform)
{
    const double R = 1.0;
    iwasawa_function f = [R](cplx z, double tau, double t) { return radial_bump(dist_A(z, tau, t), R); };
    rng_t rng(1);
    for (double s : {0.0, 3.0, 8.0}) {
        const double hc = hc_transform(bump(R), s);
        for (int i = 0; i < 3; ++i) {
            const cplx v = helgason_transform(f, R, s, random_kcoset(rng));
            EXPECT_NEAR(v.real(), hc, 1e-6 * (1 + std::abs(hc))) << "s = " << s;
            EXPECT_NEAR(v.imag(), 0.0, 1e-6);
        }
    }
}

TEST(Harmonic, HelgasonConvolutionWithRadialFunction)
{
    // f = g1(d(x, x0)) with x0 = a(r0).o and g radial; f x g = (g1 x g)(d(x, x0)) whose
    // radial profile is tabulated directly from
    //   (g1 x g)(r) = int_{M\K0} int_0^inf g1(u) g(d(a(r).o, k a(u).o)) dVol
    const double r0 = 0.5, R1 = 0.5, R2 = 0.5, s = 4.0;
    auto g1 = [R1](double u) { return radial_bump(u, R1); };
    auto g = [R2](double u) { return radial_bump(u, R2); };
    const int nr = 161;
    const double Rc = R1 + R2;
    std::vector<double> table(nr);
    const gl_rule& gr = gauss_legendre(24);
    for (int j = 0; j < nr; ++j) {
        const double r = Rc * j / (nr - 1);
        auto over_u = [&](double u) {
            // alpha uniform on the unit disk parametrizes M\K0 here
            double acc = 0;
            const int m = 48;
            for (int a = 0; a < m; ++a) {
                const double ph = 2 * pi * (a + 0.5) / m;
                for (int i = 0; i < 24; ++i) {
                    const double x = 0.5 * (gr.x[i] + 1.0);
                    const cplx alpha = std::polar(std::sqrt(x), ph);
                    const kcoset kc{alpha, std::sqrt(std::max(0.0, 1 - x))};
                    const double d = cartan_radius(make_a(-r) * make_k(kc) * make_a(u));
                    acc += 0.5 * gr.w[i] * g(d);
                }
            }
            return g1(u) * acc / m * polar_density(u);
        };
        table[j] = integrate_gl(over_u, 0.0, R1, 24, 2);
    }
    const cmat3 shift = make_a(-r0);
    iwasawa_function f = [&](cplx z, double tau, double t) {
        return g1(cartan_radius(shift * make_n(z, tau) * make_a(t)));
    };
    iwasawa_function fg = [&](cplx z, double tau, double t) {
        const double d = cartan_radius(shift * make_n(z, tau) * make_a(t));
        return d >= Rc ? 0.0 : uniform_interp(table, Rc, d);
    };
    const double ghat = hc_transform(bump(R2), s);
    for (const kcoset& kc : {kcoset{}, kcoset{cplx(0.6, 0.0), cplx(0.0, 0.8)}}) {
        // the off-center bump resolves slowly on the ball grid; 1e-6 absolute is ample for the 1e-4 check
        const cplx lhs = helgason_transform(fg, r0 + Rc, s, kc, 1e-6);
        const cplx rhs = helgason_transform(f, r0 + R1, s, kc, 1e-6) * ghat;
        EXPECT_LE(std::abs(lhs - rhs), 1e-4 * std::abs(rhs)) << lhs << " vs " << rhs;
    }
}

TEST(Harmonic, CutoffPartition)
{
    const double beta = 16, eps0 = 0.1;
    const double t0 = std::pow(beta, -0.5 + eps0);
    EXPECT_EQ(cutoff_b(1, beta, eps0, 0.0), 1.0);
    EXPECT_EQ(cutoff_b(1, beta, eps0, t0), 1.0);
    EXPECT_EQ(cutoff_b(1, beta, eps0, 3 * t0), 0.0);
    EXPECT_EQ(cutoff_b(1, beta, eps0, -2 * t0), 0.0);
    for (int i = -400; i <= 400; ++i) {
        const double t = 0.006 * i;
        const double b0 = cutoff_b(0, beta, eps0, t), b1 = cutoff_b(1, beta, eps0, t), b2 = cutoff_b(2, beta, eps0, t);
        EXPECT_EQ(b0 - b1 - b2, 0.0);
        EXPECT_EQ(b1, cutoff_b(1, beta, eps0, -t));
        EXPECT_GE(b2, 0.0);
    }
    EXPECT_EQ(cutoff_b(0, beta, eps0, 2.0), 0.0);
    EXPECT_CHAMP_ERROR(cutoff_b(1, 2.0, eps0, 0.0), errc::domain_violation);
    EXPECT_CHAMP_ERROR(cutoff_b(1, beta, 0.2, 0.0), errc::domain_violation);
}

TEST(Harmonic, CutoffDerivativesFollowTheScale)
{
    // finite differences of b1 of order n stay below C (beta^{1/2-eps0})^n
    const double eps0 = 0.1;
    for (double beta : {8.0, 32.0}) {
        const double sc = std::pow(beta, 0.5 - eps0), h = 1e-3 / sc;
        std::array<double, 5> m{};
        for (int i = 0; i <= 2000; ++i) {
            const double t = 2.5 / sc * i / 2000.0;
            auto b = [&](double x) { return cutoff_b(1, beta, eps0, x); };
            const double d1 = (b(t + h) - b(t - h)) / (2 * h);
            const double d2 = (b(t + h) - 2 * b(t) + b(t - h)) / (h * h);
            m[1] = std::max(m[1], std::abs(d1) / sc);
            m[2] = std::max(m[2], std::abs(d2) / (sc * sc));
        }
        EXPECT_LE(m[1], 5.0) << beta;
        EXPECT_LE(m[2], 50.0) << beta;
    }
}

TEST(Harmonic, K1HatRegimes)
{
    const auto& kl = k40();
    const double eps0 = 0.1;
    const double peak = std::abs(k1_hat(kl, 40, 8, eps0));
    EXPECT_LE(std::abs(k1_hat(kl, 10, 8, eps0)), 1e-4 * peak);
    double K = 0;
    for (double beta : {8.0, 16.0, 32.0}) {
        const double v = k1_hat(kl, 40, beta, eps0);
        K = std::max(K, std::abs(v) / std::pow(beta, -0.5 + eps0));
        EXPECT_NEAR(v, k1_hat(kl, -40, beta, eps0), 1e-8 * std::abs(v));
    }
    EXPECT_TRUE(std::isfinite(K));
    EXPECT_LE(K, 10.0);
}

TEST(Harmonic, RadialFunctionCsv)
{
    std::ostringstream os;
    bump(1.0).write_csv(os, 3);
    EXPECT_EQ(os.str().substr(0, 8), "t,value\n");
    EXPECT_NE(os.str().find("\n0.5,"), std::string::npos);
}
