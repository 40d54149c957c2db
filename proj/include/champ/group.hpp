#pragma once

// Structure of U(2,1): the subgroups N, A, K0, M, the Cayley transform,
// Iwasawa coordinates and the derivatives of the Iwasawa projection A.

#include <array>
#include <cmath>

#include "lie.hpp"

namespace champ {

enum class form_tag { J_antidiag, J1_diag };

inline cmat3 form_matrix(form_tag f)
{
    if (f == form_tag::J_antidiag)
        return antidiag_J();
    cmat3 j = cmat3::Identity();
    j(2, 2) = -1.0;
    return j;
}

struct group_element {
    cmat3 mat = cmat3::Identity();
    form_tag form = form_tag::J_antidiag;

    // || g^* J g - J ||
    double residual() const
    {
        const cmat3 j = form_matrix(form);
        return (mat.adjoint() * j * mat - j).norm();
    }
    double unitary_residual() const { return (mat.adjoint() * mat - cmat3::Identity()).norm(); }
};

inline group_element cayley(const group_element& g)
{
    const cmat3 c = cayley_matrix();
    return {c * g.mat * c, g.form == form_tag::J_antidiag ? form_tag::J1_diag : form_tag::J_antidiag};
}

inline cmat3 make_a(double t)
{
    if (!std::isfinite(t))
        throw error(errc::non_finite, "make_a");
    cmat3 a = cmat3::Zero();
    a(0, 0) = std::exp(0.5 * t);
    a(1, 1) = 1.0;
    a(2, 2) = std::exp(-0.5 * t);
    return a;
}

inline cmat3 make_n(cplx z, double tau)
{
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || !std::isfinite(tau))
        throw error(errc::non_finite, "make_n");
    cmat3 n = cmat3::Identity();
    n(0, 1) = sqrt2 * z;
    n(0, 2) = cplx(-std::norm(z), tau);
    n(1, 2) = -sqrt2 * std::conj(z);
    return n;
}

/// H = diag(1/2, 0, -1/2), so a(t) = exp(tH).
inline cmat3 generator_H()
{
    cmat3 h = cmat3::Zero();
    h(0, 0) = 0.5;
    h(2, 2) = -0.5;
    return h;
}

inline cmat3 make_m(double theta, double psi)
{
    return subgroup_element(subgroup::M, std::array<double, 2>{theta, psi});
}

/// Coordinates (alpha, beta) of M\K0 through the SU(2) section.
struct kcoset {
    cplx alpha{1.0, 0.0};
    cplx beta{0.0, 0.0};

    double norm_defect() const { return std::abs(std::norm(alpha) + std::norm(beta) - 1.0); }
};

inline cmat3 make_k(const kcoset& c)
{
    if (c.norm_defect() > 1e-8)
        throw error(errc::norm_violation, "|alpha|^2 + |beta|^2 != 1");
    const cplx a = c.alpha, b = c.beta;
    const double r = 1.0 / sqrt2;
    return make_mat({(a + 1.0) / 2.0, b * r, (a - 1.0) / 2.0,
                     -std::conj(b) * r, std::conj(a), -std::conj(b) * r,
                     (a - 1.0) / 2.0, b * r, (a + 1.0) / 2.0});
}

/// SU(2) product of the sections: [[a, b], [-b*, a*]].
inline kcoset su2_mul(const kcoset& x, const kcoset& y)
{
    return {x.alpha * y.alpha - x.beta * std::conj(y.beta),
            x.alpha * y.beta + x.beta * std::conj(y.alpha)};
}

inline cmat3 weyl_w0()
{
    return make_k({cplx(-1.0, 0.0), 0.0});
}

/// The basis X~1, X~2, X~3 of the complement of m in k0.
inline std::array<cmat3, 3> ktilde_basis()
{
    const double r = 1.0 / sqrt2;
    const cplx i = I_unit;
    return {make_mat({0, i * r, 0, i * r, 0, i * r, 0, i * r, 0}),
            make_mat({0, -r, 0, r, 0, r, 0, -r, 0}),
            make_mat({0.5 * i, 0, 0.5 * i, 0, -i, 0, 0.5 * i, 0, 0.5 * i})};
}

/// exp(r1 X~1 + r2 X~2 + r3 X~3) as a point of the SU(2) section.
inline kcoset exp_ktilde(const std::array<double, 3>& rv)
{
    const double r = std::sqrt(rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2]);
    const double s = r < 1e-8 ? 1.0 - r * r / 6.0 : std::sin(r) / r;
    return {cplx(std::cos(r), s * rv[2]), s * cplx(-rv[1], rv[0])};
}

struct iwasawa_coords {
    cplx z;
    double tau = 0;
    double t = 0;
    cmat3 k = cmat3::Identity();
};

/// g = n(z,tau) a(t) k, read off from the Siegel point g.o.
inline iwasawa_coords iwasawa(const cmat3& g)
{
    require_finite(g, "iwasawa");
    const cvec3 w = g * cvec3(-1.0, 0.0, 1.0);
    if (std::abs(w[2]) < 1e-13)
        throw error(errc::boundary_degeneracy, "g.o at infinity");
    const cplx z1 = w[0] / w[2], z2 = w[1] / w[2];
    iwasawa_coords c;
    c.z = -std::conj(z2) / sqrt2;
    c.tau = z1.imag();
    const double et = -z1.real() - 0.5 * std::norm(z2);
    if (!(et > 0))
        throw error(errc::boundary_degeneracy, "g.o outside the Siegel domain");
    c.t = std::log(et);
    c.k = make_a(-c.t) * make_n(-c.z, -c.tau) * g;
    return c;
}

inline double a_proj(const cmat3& g)
{
    require_finite(g, "a_proj");
    const cvec3 w = g * cvec3(-1.0, 0.0, 1.0);
    if (std::abs(w[2]) < 1e-13)
        throw error(errc::boundary_degeneracy, "g.o at infinity");
    // e^{A} = -<w,w> / (2|w3|^2)
    const double form = 2.0 * (w[0] * std::conj(w[2])).real() + std::norm(w[1]);
    return std::log(-0.5 * form / std::norm(w[2]));
}

inline cmat3 kappa(const cmat3& g)
{
    return iwasawa(g).k;
}

inline cmat3 phi_action(const cmat3& g, const cmat3& k)
{
    return kappa(k * g);
}

/// k = m(theta, psi) k(alpha, beta) for k in K0; the split is unique.
struct k_split {
    double theta = 0, psi = 0;
    kcoset c;
};

inline k_split split_k(const cmat3& k)
{
    const cmat3 c = cayley_matrix();
    const cmat3 k1 = c * k * c;
    const cplx h = k1(2, 2);
    const cplx det = k1(0, 0) * k1(1, 1) - k1(0, 1) * k1(1, 0);
    const cplx epsi = std::conj(h) * det;
    k_split out;
    out.theta = std::arg(h);
    out.psi = std::arg(epsi);
    out.c.alpha = std::conj(h) * k1(0, 0);
    out.c.beta = std::conj(h) * k1(0, 1);
    return out;
}

/// A(k(alpha,beta) n(z,tau) a(t)).
inline double explicit_A(const kcoset& c, cplx z, double tau, double t)
{
    const cplx p(-std::exp(t) - std::norm(z), tau);
    const cplx w = (c.alpha - 1.0) / 2.0 * p - c.beta * std::conj(z) + (c.alpha + 1.0) / 2.0;
    return t - std::log(std::norm(w));
}

struct a_partials {
    double dt, dx, dy, dtau;
};

/// Derivatives of A(g a(t)), A(g n(x,0)), A(g n(iy,0)), A(g n(0,tau)) at 0.
inline a_partials a_derivatives(const cmat3& g)
{
    const k_split s = split_k(iwasawa(g).k);
    return {s.c.alpha.real(), 2.0 * s.c.beta.real(), 2.0 * s.c.beta.imag(), s.c.alpha.imag()};
}

inline constexpr double uniformization_delta = 0.15;

/// xi with 1 - dA/dt (exp(rX) n(z,tau) a(t)) = r^2 xi.
inline double uniformization_xi(double r, const std::array<double, 3>& x, cplx z, double tau, double t)
{
    if (!(std::abs(r) <= uniformization_delta) || r == 0.0)
        throw error(errc::domain_violation, "uniformization_xi needs 0 < |r| <= delta");
    const double nx = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const std::array<double, 3> rv{r * x[0] / nx, r * x[1] / nx, r * x[2] / nx};
    const cmat3 g = make_k(exp_ktilde(rv)) * make_n(z, tau) * make_a(t);
    const kcoset c = split_k(iwasawa(g).k).c;
    // 1 - Re(alpha) written without cancellation
    return 0.5 * (std::norm(1.0 - c.alpha) + std::norm(c.beta)) / (r * r);
}

/// Gradient in (r1,r2,r3) of A(exp(r1 X~1 + r2 X~2 + r3 X~3) n(z,tau) a(t)).
inline std::array<double, 3> grad_K_A(const std::array<double, 3>& rv, cplx z, double tau, double t)
{
    const double r2 = rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2];
    const double r = std::sqrt(r2);
    double s, q;
    if (r < 1e-3) {
        s = 1.0 - r2 / 6.0 + r2 * r2 / 120.0;
        q = -1.0 / 3.0 + r2 / 30.0 - r2 * r2 / 840.0;
    } else {
        s = std::sin(r) / r;
        q = (r * std::cos(r) - std::sin(r)) / (r2 * r);
    }
    const cplx alpha(std::cos(r), s * rv[2]);
    const cplx beta = s * cplx(-rv[1], rv[0]);
    const cplx p(-std::exp(t) - std::norm(z), tau);
    const cplx w = alpha * (p + 1.0) / 2.0 + (1.0 - p) / 2.0 - beta * std::conj(z);
    std::array<double, 3> g{};
    for (int i = 0; i < 3; ++i) {
        const cplx da = -s * rv[i] + I_unit * rv[2] * q * rv[i] + (i == 2 ? I_unit * s : 0.0);
        const cplx db = q * rv[i] * cplx(-rv[1], rv[0]) + s * (i == 0 ? I_unit : (i == 1 ? cplx(-1.0) : 0.0));
        const cplx dw = da * (p + 1.0) / 2.0 - db * std::conj(z);
        g[i] = -2.0 * (dw / w).real();
    }
    return g;
}

} // namespace champ
