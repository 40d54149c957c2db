#pragma once

// Dense 3x3 complex matrices, exp/log and the chart distance on U(2,1).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "error.hpp"

namespace champ {

using cplx = std::complex<double>;
using cmat3 = Eigen::Matrix3cd;
using cvec3 = Eigen::Vector3cd;

inline constexpr cplx I_unit{0.0, 1.0};
inline constexpr double sqrt2 = std::numbers::sqrt2;
inline constexpr double pi = std::numbers::pi;

struct matrix_tolerance {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;

    matrix_tolerance() = default;
    matrix_tolerance(double a, double r) : abs_tol(a), rel_tol(r)
    {
        if (!(a > 0) || !(r > 0))
            throw error(errc::domain_violation, "tolerances must be positive");
    }
    bool close(const cmat3& a, const cmat3& b) const
    {
        return (a - b).norm() <= abs_tol + rel_tol * std::max(a.norm(), b.norm());
    }
};

inline cmat3 make_mat(std::initializer_list<cplx> rowmajor)
{
    cmat3 m;
    auto it = rowmajor.begin();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m(i, j) = *it++;
    return m;
}

inline bool all_finite(const cmat3& a)
{
    for (int i = 0; i < 9; ++i)
        if (!std::isfinite(a.data()[i].real()) || !std::isfinite(a.data()[i].imag()))
            return false;
    return true;
}

inline void require_finite(const cmat3& a, const char* where)
{
    if (!all_finite(a))
        throw error(errc::non_finite, where);
}

inline cmat3 mat_mul(const cmat3& a, const cmat3& b)
{
    return a * b;
}

inline double frobenius(const cmat3& a)
{
    return a.norm();
}

/// J with ones on the antidiagonal.
inline cmat3 antidiag_J()
{
    cmat3 j = cmat3::Zero();
    j(0, 2) = j(1, 1) = j(2, 0) = 1.0;
    return j;
}

/// C = C^{-1}; conjugation by C takes the antidiagonal form to diag(1,1,-1).
inline cmat3 cayley_matrix()
{
    const double r = 1.0 / sqrt2;
    return make_mat({r, 0, r, 0, 1, 0, r, 0, -r});
}

inline bool strictly_upper(const cmat3& x)
{
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j)
            if (x(i, j) != 0.0)
                return false;
    return true;
}

inline cmat3 mat_exp(const cmat3& x)
{
    require_finite(x, "mat_exp");
    if (strictly_upper(x)) {
        cmat3 x2 = x * x;
        return cmat3::Identity() + x + 0.5 * x2;
    }
    return x.exp();
}

inline cmat3 mat_log(const cmat3& m)
{
    require_finite(m, "mat_log");
    Eigen::ComplexEigenSolver<cmat3> es(m, false);
    const double scale = std::max(m.norm(), 1e-300);
    for (int i = 0; i < 3; ++i) {
        cplx ev = es.eigenvalues()(i);
        if (std::abs(ev) <= 1e-14 * scale)
            throw error(errc::singular_input, "mat_log of a singular matrix");
        if (ev.real() < 0 && std::abs(ev.imag()) <= 1e-12 * std::abs(ev))
            throw error(errc::branch_cut, "eigenvalue on the negative real axis");
    }
    cmat3 l = m.log();
    require_finite(l, "mat_log result");
    return l;
}

/// Inverse of an element of U(2,1) in antidiagonal form: J g^* J.
inline cmat3 u21_inverse(const cmat3& g)
{
    const cmat3 j = antidiag_J();
    return j * g.adjoint() * j;
}

inline double dist(const cmat3& g, const cmat3& h)
{
    return mat_log(g.inverse() * h).norm();
}

enum class subgroup { M, MA, T0 };

inline const char* subgroup_name(subgroup s)
{
    switch (s) {
    case subgroup::M: return "M";
    case subgroup::MA: return "MA";
    case subgroup::T0: return "T0";
    }
    return "?";
}

inline int subgroup_dim(subgroup s)
{
    return s == subgroup::M ? 2 : 3;
}

/// M: diag(e^{i p0}, e^{i p1}, e^{i p0}); MA adds a(p2); T0 is C diag(e^{i p}) C.
template <class Vec>
cmat3 subgroup_element(subgroup s, const Vec& p)
{
    cmat3 m = cmat3::Zero();
    switch (s) {
    case subgroup::M:
        m(0, 0) = m(2, 2) = std::polar(1.0, double(p[0]));
        m(1, 1) = std::polar(1.0, double(p[1]));
        break;
    case subgroup::MA:
        m(0, 0) = std::polar(std::exp(0.5 * p[2]), double(p[0]));
        m(1, 1) = std::polar(1.0, double(p[1]));
        m(2, 2) = std::polar(std::exp(-0.5 * p[2]), double(p[0]));
        break;
    case subgroup::T0: {
        for (int i = 0; i < 3; ++i)
            m(i, i) = std::polar(1.0, double(p[i]));
        const cmat3 c = cayley_matrix();
        m = c * m * c;
        break;
    }
    }
    return m;
}

namespace detail {

struct subgroup_residual {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    cmat3 ginv;
    subgroup s;

    int inputs() const { return subgroup_dim(s); }
    int values() const { return 18; }

    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const
    {
        f.resize(18);
        cmat3 l;
        try {
            l = mat_log(ginv * subgroup_element(s, p));
        } catch (const error&) {
            f.setConstant(1e3);
            return 0;
        }
        for (int i = 0; i < 9; ++i) {
            f[2 * i] = l.data()[i].real();
            f[2 * i + 1] = l.data()[i].imag();
        }
        return 0;
    }
};

} // namespace detail

/// min over the subgroup S of dist(g, m): coarse grid on a cheap proxy, then
/// Levenberg-Marquardt on the log residual from the best few grid points.
inline double dist_to_subgroup(const cmat3& g, subgroup s)
{
    require_finite(g, "dist_to_subgroup");
    const int n = 16, d = subgroup_dim(s);
    const cmat3 ginv = g.inverse();
    auto node = [&](int axis, int i) {
        if (s == subgroup::MA && axis == 2)
            return -3.0 + 6.0 * i / (n - 1);
        return 2 * pi * i / n;
    };
    std::vector<std::pair<double, Eigen::VectorXd>> starts;
    int total = 1;
    for (int k = 0; k < d; ++k)
        total *= n;
    for (int idx = 0; idx < total; ++idx) {
        Eigen::VectorXd p(d);
        int r = idx;
        for (int k = 0; k < d; ++k) {
            p[k] = node(k, r % n);
            r /= n;
        }
        double proxy = (ginv * subgroup_element(s, p) - cmat3::Identity()).norm();
        starts.emplace_back(proxy, p);
    }
    const std::size_t keep = 4;
    std::partial_sort(starts.begin(), starts.begin() + keep, starts.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < keep; ++i) {
        detail::subgroup_residual fun{ginv, s};
        Eigen::NumericalDiff<detail::subgroup_residual, Eigen::Central> nd(fun);
        Eigen::LevenbergMarquardt<decltype(nd)> lm(nd);
        lm.parameters.xtol = 1e-14;
        lm.parameters.ftol = 1e-16;
        lm.parameters.maxfev = 2000;
        Eigen::VectorXd p = starts[i].second;
        lm.minimize(p);
        try {
            best = std::min(best, mat_log(ginv * subgroup_element(s, p)).norm());
        } catch (const error&) {
        }
    }
    if (!std::isfinite(best))
        throw error(errc::branch_cut, "no chart point found near the subgroup");
    return best;
}

} // namespace champ
