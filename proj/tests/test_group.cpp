#include <cmath>

#include <champ/group.hpp>
#include <champ/sampling.hpp>

#include "test_util.hpp"

using namespace champ;

namespace {

double form_residual(const cmat3& g)
{
    return group_element{g, form_tag::J_antidiag}.residual();
}

cmat3 random_nak(rng_t& rng, double box)
{
    return make_n(cplx(uniform(rng, -box, box), uniform(rng, -box, box)), uniform(rng, -box, box)) *
           make_a(uniform(rng, -box, box)) * random_k0(rng);
}

} // namespace

TEST(Group, MakeA)
{
    EXPECT_EQ(make_a(0.0), cmat3::Identity());
    const cmat3 a = make_a(2.0);
    EXPECT_NEAR(a(0, 0).real(), std::exp(1.0), 1e-15);
    EXPECT_NEAR(a(1, 1).real(), 1.0, 0);
    EXPECT_NEAR(a(2, 2).real(), std::exp(-1.0), 1e-16);
    rng_t rng(1);
    for (int i = 0; i < 50; ++i) {
        const double t1 = uniform(rng, -3, 3), t2 = uniform(rng, -3, 3);
        EXPECT_LE(max_abs(make_a(t1) * make_a(t2) - make_a(t1 + t2)), 1e-12);
    }
}

TEST(Group, MakeN)
{
    EXPECT_EQ(make_n(0.0, 0.0), cmat3::Identity());
    const cmat3 want = make_mat({1, sqrt2, cplx(-1.0, 0.5), 0, 1, -sqrt2, 0, 0, 1});
    EXPECT_LE(max_abs(make_n(1.0, 0.5) - want), 1e-15);
}

TEST(Group, HeisenbergGroupLaw)
{
    rng_t rng(2);
    for (int i = 0; i < 100; ++i) {
        const cplx z1(uniform(rng, -2, 2), uniform(rng, -2, 2)), z2(uniform(rng, -2, 2), uniform(rng, -2, 2));
        const double t1 = uniform(rng, -2, 2), t2 = uniform(rng, -2, 2);
        const cmat3 lhs = make_n(z1, t1) * make_n(z2, t2);
        // corner entry: -|z1|^2 - 2 z1 conj(z2) - |z2|^2 + i(t1 + t2) = -|z1 + z2|^2 + i(t1 + t2 - 2 Im(z1 conj z2))
        const cmat3 rhs = make_n(z1 + z2, t1 + t2 - 2.0 * (z1 * std::conj(z2)).imag());
        EXPECT_LE(max_abs(lhs - rhs), 1e-12);
    }
}

TEST(Group, MakeKExamples)
{
    EXPECT_LE(max_abs(make_k({1.0, 0.0}) - cmat3::Identity()), 0);
    const cmat3 want = make_mat({0, 0, -1, 0, -1, 0, -1, 0, 0});
    EXPECT_LE(max_abs(make_k({-1.0, 0.0}) - want), 0);
    EXPECT_CHAMP_ERROR(make_k({1.0, 0.1}), errc::norm_violation);
}

TEST(Group, MakeKIsAHomomorphism)
{
    rng_t rng(3);
    for (int i = 0; i < 100; ++i) {
        const kcoset x = random_kcoset(rng), y = random_kcoset(rng);
        // 2x2 SU(2) product [[a, b], [-b*, a*]] computed here by hand
        Eigen::Matrix2cd X, Y;
        X << x.alpha, x.beta, -std::conj(x.beta), std::conj(x.alpha);
        Y << y.alpha, y.beta, -std::conj(y.beta), std::conj(y.alpha);
        const Eigen::Matrix2cd P = X * Y;
        const kcoset xy{P(0, 0), P(0, 1)};
        EXPECT_LE(max_abs(make_k(x) * make_k(y) - make_k(xy)), 1e-12);
        const cmat3 k = make_k(x);
        EXPECT_LE(form_residual(k), 1e-10);
        EXPECT_LE((k.adjoint() * k - cmat3::Identity()).norm(), 1e-10);
    }
}

TEST(Group, Cayley)
{
    EXPECT_LE(max_abs(cayley({cmat3::Identity()}).mat - cmat3::Identity()), 1e-15);
    rng_t rng(4);
    for (int i = 0; i < 100; ++i) {
        const group_element g{random_group(rng)};
        const group_element c = cayley(g);
        EXPECT_EQ(c.form, form_tag::J1_diag);
        EXPECT_LE(c.residual(), 1e-10);
        EXPECT_LE(max_abs(cayley(c).mat - g.mat), 1e-14 * (1 + max_abs(g.mat)));

        const cmat3 k1 = cayley({random_k0(rng)}).mat;
        for (auto [r, col] : {std::pair{0, 2}, {1, 2}, {2, 0}, {2, 1}})
            EXPECT_LE(std::abs(k1(r, col)), 1e-10);
    }
}

TEST(Group, ConstructorsPreserveTheForm)
{
    rng_t rng(5);
    for (int i = 0; i < 100; ++i) {
        EXPECT_LE(form_residual(make_a(uniform(rng, -3, 3))), 1e-10);
        EXPECT_LE(form_residual(make_n(cplx(uniform(rng, -2, 2), uniform(rng, -2, 2)), uniform(rng, -2, 2))),
                  1e-10);
        EXPECT_LE(form_residual(make_m(uniform(rng, -3, 3), uniform(rng, -3, 3))), 1e-10);
        EXPECT_LE(form_residual(random_k0(rng)), 1e-10);
    }
}

TEST(Group, IwasawaExamples)
{
    const cplx z(0.3, 0.1);
    const auto c = iwasawa(make_n(z, -0.2) * make_a(0.5));
    EXPECT_LE(std::abs(c.z - z), 1e-14);
    EXPECT_NEAR(c.tau, -0.2, 1e-14);
    EXPECT_NEAR(c.t, 0.5, 1e-14);
    EXPECT_LE(max_abs(c.k - cmat3::Identity()), 1e-14);

    rng_t rng(6);
    for (int i = 0; i < 20; ++i) {
        const cmat3 k = random_k0(rng);
        const auto ck = iwasawa(k);
        EXPECT_LE(std::abs(ck.z), 1e-14);
        EXPECT_LE(std::abs(ck.tau), 1e-14);
        EXPECT_LE(std::abs(ck.t), 1e-14);
        EXPECT_LE(max_abs(ck.k - k), 1e-14);
    }
}

TEST(Group, IwasawaRoundTrip)
{
    rng_t rng(7);
    double worst = 0, worst_k = 0;
    for (int i = 0; i < 10000; ++i) {
        const cmat3 g = random_nak(rng, 2.0);
        const auto c = iwasawa(g);
        worst = std::max(worst, (make_n(c.z, c.tau) * make_a(c.t) * c.k - g).norm());
        worst_k = std::max({worst_k, form_residual(c.k), (c.k.adjoint() * c.k - cmat3::Identity()).norm()});
    }
    EXPECT_LE(worst, 1e-9);
    EXPECT_LE(worst_k, 1e-8);
}

TEST(Group, IwasawaBoundaryDegeneracy)
{
    // third row orthogonal to the lift of o
    const cmat3 g = make_mat({1, 0, 0, 0, 1, 0, 1, 0, 1});
    EXPECT_CHAMP_ERROR(iwasawa(g), errc::boundary_degeneracy);
}

TEST(Group, AProjectionIsAdditiveUnderNA)
{
    rng_t rng(8);
    for (int i = 0; i < 200; ++i) {
        const cmat3 g = random_group(rng);
        const double t0 = uniform(rng, -2, 2);
        const cmat3 n = make_n(cplx(uniform(rng, -1, 1), uniform(rng, -1, 1)), uniform(rng, -1, 1));
        EXPECT_NEAR(iwasawa(n * make_a(t0) * g).t, t0 + iwasawa(g).t, 1e-10);
    }
}

TEST(Group, AProjectionExamples)
{
    EXPECT_NEAR(a_proj(make_a(0.7)), 0.7, 1e-15);

    const cplx alpha = 0.6, beta(0.0, 0.8), z = 0.2;
    const double tau = 0.1, t = 0.3;
    const cplx w = (alpha - 1.0) / 2.0 * cplx(-std::exp(t) - std::norm(z), tau) - beta * std::conj(z) +
                   (alpha + 1.0) / 2.0;
    const double want = t - std::log(std::norm(w));
    EXPECT_NEAR(a_proj(make_k({alpha, beta}) * make_n(z, tau) * make_a(t)), want, 1e-13);
    EXPECT_NEAR(explicit_A({alpha, beta}, z, tau, t), want, 1e-13);

    const cmat3 w0 = weyl_w0();
    EXPECT_NEAR(a_proj(w0), 0.0, 1e-15);
    EXPECT_LE(max_abs(kappa(w0) - w0), 1e-15);
}

TEST(Group, ExplicitAMatchesDecomposition)
{
    rng_t rng(9);
    for (int i = 0; i < 1000; ++i) {
        const kcoset c = random_kcoset(rng);
        const cplx z(uniform(rng, -1, 1), uniform(rng, -1, 1));
        const double tau = uniform(rng, -1, 1), t = uniform(rng, -2, 2);
        EXPECT_NEAR(explicit_A(c, z, tau, t), iwasawa(make_k(c) * make_n(z, tau) * make_a(t)).t, 1e-10);
    }
}

TEST(Group, WeylElementInvertsA)
{
    const cmat3 w0 = weyl_w0();
    for (double t : {-1.3, 0.2, 2.5})
        EXPECT_LE(max_abs(w0 * make_a(t) * w0.inverse() - make_a(-t)), 1e-14);
}

TEST(Group, PhiActionLaw)
{
    rng_t rng(10);
    const cmat3 k0 = random_k0(rng);
    EXPECT_LE(max_abs(phi_action(cmat3::Identity(), k0) - k0), 1e-14);
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        const cmat3 g = random_group(rng), h = random_group(rng), k = random_k0(rng);
        worst = std::max(worst, max_abs(phi_action(g * h, k) - phi_action(h, phi_action(g, k))));
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(Group, ASplittingIdentity)
{
    rng_t rng(11);
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        const cmat3 k = random_k0(rng), y = random_group(rng), z = random_group(rng);
        const cmat3 yinv = u21_inverse(y);
        const cmat3 ky = phi_action(yinv, k);
        worst = std::max(worst, std::abs(a_proj(k * yinv * z) - (a_proj(ky * z) - a_proj(ky * y))));
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(Group, ADerivativesAtIdentity)
{
    const a_partials d = a_derivatives(cmat3::Identity());
    EXPECT_NEAR(d.dt, 1.0, 1e-15);
    EXPECT_NEAR(d.dx, 0.0, 1e-15);
    EXPECT_NEAR(d.dy, 0.0, 1e-15);
    EXPECT_NEAR(d.dtau, 0.0, 1e-15);
}

TEST(Group, ADerivativeInTIsReAlpha)
{
    // kappa(n a k) = k, so the t-derivative reads Re(alpha) of k
    const cmat3 g = make_n(cplx(0.3, -0.2), 0.4) * make_a(0.7) * make_k({0.6, cplx(0.0, 0.8)});
    EXPECT_NEAR(a_derivatives(g).dt, 0.6, 1e-13);
}

TEST(Group, ADerivativesMatchFiniteDifferences)
{
    rng_t rng(12);
    const double h = 1e-5;
    for (int i = 0; i < 200; ++i) {
        const cmat3 g = random_nak(rng, 1.0);
        const a_partials d = a_derivatives(g);
        auto fd = [&](auto path) { return (a_proj(g * path(h)) - a_proj(g * path(-h))) / (2 * h); };
        EXPECT_NEAR(d.dt, fd([](double s) { return make_a(s); }), 1e-6);
        EXPECT_NEAR(d.dx, fd([](double s) { return make_n(s, 0.0); }), 1e-6);
        EXPECT_NEAR(d.dy, fd([](double s) { return make_n(cplx(0.0, s), 0.0); }), 1e-6);
        EXPECT_NEAR(d.dtau, fd([](double s) { return make_n(0.0, s); }), 1e-6);
    }
}

TEST(Group, UniformizationXi)
{
    const std::array<double, 3> x3{0, 0, 1};
    // 1 - Re(alpha(r)) = 1 - cos r along X~3 at the origin
    EXPECT_NEAR(uniformization_xi(1e-3, x3, 0.0, 0.0, 0.0), 0.5, 1e-6);
    EXPECT_NEAR(uniformization_xi(0.1, x3, 0.0, 0.0, 0.0), (1 - std::cos(0.1)) / 0.01, 1e-12);

    rng_t rng(13);
    for (int i = 0; i < 50; ++i) {
        const auto x = random_direction(rng);
        const cplx z(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5));
        const double tau = uniform(rng, -0.5, 0.5), t = uniform(rng, -0.5, 0.5);
        const double a = uniformization_xi(1e-3, x, z, tau, t), b = uniformization_xi(1e-4, x, z, tau, t);
        EXPECT_LE(std::abs(a - b), 1e-3 * std::abs(b));
    }
    EXPECT_CHAMP_ERROR(uniformization_xi(0.2, x3, 0.0, 0.0, 0.0), errc::domain_violation);
    EXPECT_CHAMP_ERROR(uniformization_xi(0.0, x3, 0.0, 0.0, 0.0), errc::domain_violation);
}

TEST(Group, UniformizationXiIsPositiveOnAGrid)
{
    const std::array<std::array<double, 3>, 6> dirs{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {0, 1, -1}, {1, -1, 1}}};
    double sigma = std::numeric_limits<double>::infinity();
    for (double r : {-0.15, -0.05, 0.01, 0.08, 0.15})
        for (const auto& x : dirs)
            for (double re : {-0.5, -0.25, 0.0, 0.25, 0.5})
                for (double im : {-0.5, 0.0, 0.5})
                    for (double tau : {-0.5, 0.0, 0.5})
                        for (double t : {-0.5, -0.25, 0.0, 0.25, 0.5})
                            sigma = std::min(sigma, uniformization_xi(r, x, cplx(re, im), tau, t));
    EXPECT_GT(sigma, 0.0);
}

TEST(Group, GradKAAtOrigin)
{
    const cplx z(0.25, -0.4);
    const auto g = grad_K_A({0, 0, 0}, z, 0.3, 0.2);
    EXPECT_NEAR(g[0], 2 * z.imag(), 1e-8);
    EXPECT_NEAR(g[1], -2 * z.real(), 1e-8);
    EXPECT_NEAR(g[2], 0.3, 1e-8);

    const auto h = grad_K_A({0, 0, 0}, cplx(0.0, 0.3), 0.4, 0.0);
    EXPECT_NEAR(h[0] * h[0] + h[1] * h[1] + h[2] * h[2], 0.52, 1e-12);
}

TEST(Group, GradKAMatchesFiniteDifferences)
{
    rng_t rng(14);
    const double h = 1e-5;
    for (int i = 0; i < 200; ++i) {
        std::array<double, 3> rv;
        for (double& v : rv)
            v = uniform(rng, -0.1, 0.1);
        const cplx z(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5));
        const double tau = uniform(rng, -0.5, 0.5), t = uniform(rng, -0.5, 0.5);
        const auto g = grad_K_A(rv, z, tau, t);
        const auto b = ktilde_basis();
        for (int j = 0; j < 3; ++j) {
            auto A = [&](double s) {
                cmat3 x = rv[0] * b[0] + rv[1] * b[1] + rv[2] * b[2] + s * b[j];
                return a_proj(mat_exp(x) * make_n(z, tau) * make_a(t));
            };
            EXPECT_NEAR(g[j], (A(h) - A(-h)) / (2 * h), 1e-6);
        }
    }
}

TEST(Group, UniformBoundednessAwayFromM)
{
    rng_t rng(15);
    std::vector<std::pair<cmat3, double>> ks;
    for (int i = 0; i < 300; ++i) {
        const cmat3 k = random_k0(rng);
        ks.emplace_back(k, dist_to_subgroup(k, subgroup::M));
    }
    for (double delta0 : {0.1, 0.2, 0.4}) {
        double sigma = std::numeric_limits<double>::infinity();
        int used = 0;
        for (auto& [k, d] : ks) {
            if (d < delta0)
                continue;
            ++used;
            for (double x : {-0.5, 0.0, 0.5})
                for (double y : {-0.5, 0.0, 0.5})
                    for (double tau : {-0.5, 0.0, 0.5})
                        for (double t : {-0.5, 0.0, 0.5})
                            sigma = std::min(sigma, 1.0 - a_derivatives(k * make_n(cplx(x, y), tau) * make_a(t)).dt);
        }
        ASSERT_GT(used, 10);
        EXPECT_GT(sigma, 0.0) << "delta0 = " << delta0;
        RecordProperty("sigma_" + std::to_string(delta0), std::to_string(sigma));
    }
}
