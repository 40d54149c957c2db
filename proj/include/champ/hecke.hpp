#pragma once

// Spherical Hecke algebra of GL(3) over a p-adic field, computed exactly:
// double cosets K diag(p^a1, p^a2, p^a3) K, their left coset representatives,
// convolution by pair counting, adjoints and the amplifier T T^*.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "error.hpp"

namespace champ {

using rational = boost::multiprecision::cpp_rational;
using bigint = boost::multiprecision::cpp_int;

struct signature {
    int a1 = 0, a2 = 0, a3 = 0;

    signature() = default;
    signature(int x, int y, int z) : a1(x), a2(y), a3(z)
    {
        if (!(a1 >= a2 && a2 >= a3))
            throw error(errc::domain_violation, "signature needs a1 >= a2 >= a3");
    }
    signature shifted(int k) const { return {a1 + k, a2 + k, a3 + k}; }
    /// Central normalization a3 = 0.
    signature normalized() const { return shifted(-a3); }
    int sum() const { return a1 + a2 + a3; }
    int spread() const { return a1 - a3; }
    auto operator<=>(const signature&) const = default;
    std::string str() const
    {
        return "(" + std::to_string(a1) + "," + std::to_string(a2) + "," + std::to_string(a3) + ")";
    }
};

/// p^exponent * n with an integer matrix n.
struct pmat {
    std::array<std::array<long long, 3>, 3> n{};
    int exponent = 0;
};

namespace detail {

using i128 = __int128;

inline int valuation(i128 x, int p)
{
    if (x == 0)
        return std::numeric_limits<int>::max();
    int v = 0;
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

inline bool is_prime(int p)
{
    if (p < 2)
        return false;
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0)
            return false;
    return true;
}

inline long long ipow(int p, int e)
{
    long long r = 1;
    for (int i = 0; i < e; ++i)
        r *= p;
    return r;
}

} // namespace detail

/// Valuations of the elementary divisors of an integer matrix, descending.
/// d1, d1+d2, d1+d2+d3 are the valuations of the gcds of the 1x1, 2x2 and 3x3 minors.
inline signature smith_signature(const std::array<std::array<long long, 3>, 3>& m, int p)
{
    using detail::i128;
    using detail::valuation;
    const int inf = std::numeric_limits<int>::max();
    int v1 = inf, v2 = inf;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            v1 = std::min(v1, valuation(m[i][j], p));
    for (int r0 = 0; r0 < 3; ++r0)
        for (int r1 = r0 + 1; r1 < 3; ++r1)
            for (int c0 = 0; c0 < 3; ++c0)
                for (int c1 = c0 + 1; c1 < 3; ++c1) {
                    const i128 minor = i128(m[r0][c0]) * m[r1][c1] - i128(m[r0][c1]) * m[r1][c0];
                    v2 = std::min(v2, valuation(minor, p));
                }
    const i128 det = i128(m[0][0]) * (i128(m[1][1]) * m[2][2] - i128(m[1][2]) * m[2][1]) -
                     i128(m[0][1]) * (i128(m[1][0]) * m[2][2] - i128(m[1][2]) * m[2][0]) +
                     i128(m[0][2]) * (i128(m[1][0]) * m[2][1] - i128(m[1][1]) * m[2][0]);
    if (det == 0)
        throw error(errc::singular_input, "smith_signature of a singular matrix");
    const int v3 = valuation(det, p);
    return {v3 - v2, v2 - v1, v1};
}

inline signature smith_signature(const pmat& m, int p)
{
    return smith_signature(m.n, p).shifted(m.exponent);
}

/// Rational entries whose denominators are powers of p.
inline signature smith_signature(const std::array<std::array<rational, 3>, 3>& m, int p)
{
    int k = 0;
    for (auto& row : m)
        for (auto& x : row) {
            bigint d = boost::multiprecision::denominator(x);
            int e = 0;
            while (d % p == 0) {
                d /= p;
                ++e;
            }
            if (d != 1)
                throw error(errc::domain_violation, "denominator is not a power of p");
            k = std::max(k, e);
        }
    pmat out;
    out.exponent = -k;
    const bigint scale = bigint(detail::ipow(p, k));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const rational v = m[i][j] * rational(scale);
            const bigint num = boost::multiprecision::numerator(v);
            if (boost::multiprecision::abs(num) > bigint(std::numeric_limits<long long>::max() / 4))
                throw error(errc::budget_exceeded, "matrix entries too large");
            out.n[i][j] = num.convert_to<long long>();
        }
    return smith_signature(out, p);
}

inline pmat pmat_mul(const pmat& a, const pmat& b)
{
    pmat c;
    c.exponent = a.exponent + b.exponent;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            detail::i128 s = 0;
            for (int k = 0; k < 3; ++k)
                s += detail::i128(a.n[i][k]) * b.n[k][j];
            if (s > std::numeric_limits<long long>::max() || s < std::numeric_limits<long long>::min())
                throw error(errc::budget_exceeded, "matrix entries too large");
            c.n[i][j] = (long long)s;
        }
    return c;
}

/// m^{-1} = adj(m) / det(m) for det(m) = +-p^k, kept in the p^exponent form.
inline pmat pmat_inverse(const pmat& m, int p)
{
    const auto& a = m.n;
    std::array<std::array<long long, 3>, 3> adj{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            adj[i][j] = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
        }
    long long det = 0;
    for (int k = 0; k < 3; ++k)
        det += a[0][k] * adj[k][0];
    if (det == 0)
        throw error(errc::singular_input, "pmat_inverse of a singular matrix");
    const long long sign = det < 0 ? -1 : 1;
    long long d = det * sign;
    int e = 0;
    while (d % p == 0) {
        d /= p;
        ++e;
    }
    if (d != 1)
        throw error(errc::domain_violation, "determinant is not a unit times a power of p");
    pmat out;
    out.exponent = -m.exponent - e;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.n[i][j] = sign * adj[i][j];
    return out;
}

// ---------------------------------------------------------------------------
// coset tables

struct coset_table {
    int q = 2;
    signature sig;
    std::vector<pmat> reps;
};

namespace detail {

/// Upper-triangular HNF representatives with diagonal p^e and row i reduced mod p^{e_i}.
inline std::vector<pmat> hnf_with_diagonal(int p, int e1, int e2, int e3)
{
    std::vector<pmat> out;
    const long long m1 = ipow(p, e1), m2 = ipow(p, e2);
    for (long long b12 = 0; b12 < m1; ++b12)
        for (long long b13 = 0; b13 < m1; ++b13)
            for (long long b23 = 0; b23 < m2; ++b23) {
                pmat x;
                x.n = {{{ipow(p, e1), b12, b13}, {0, ipow(p, e2), b23}, {0, 0, ipow(p, e3)}}};
                out.push_back(x);
            }
    return out;
}

} // namespace detail

inline constexpr int hecke_max_spread = 4;

inline void check_prime(int q)
{
    if (!detail::is_prime(q) || q > 5)
        throw error(errc::domain_violation, "q must be a prime in {2, 3, 5}");
}

/// Left coset representatives x_i with K diag(p^a) K = union of x_i K.
inline coset_table coset_reps(int q, const signature& sig)
{
    check_prime(q);
    if (sig.spread() > hecke_max_spread)
        throw error(errc::budget_exceeded, "coset_reps limited to a1 - a3 <= 4");
    const signature base = sig.normalized();
    coset_table t{q, sig, {}};
    const int total = base.sum();
    for (int e1 = 0; e1 <= base.a1; ++e1)
        for (int e2 = 0; e2 <= base.a1; ++e2) {
            const int e3 = total - e1 - e2;
            if (e3 < 0 || e3 > base.a1)
                continue;
            for (pmat& x : detail::hnf_with_diagonal(q, e1, e2, e3))
                if (smith_signature(x, q) == base) {
                    x.exponent = sig.a3;
                    t.reps.push_back(x);
                }
        }
    return t;
}

/// Cached table, keyed by (q, normalized signature); shifted on the way out.
inline const coset_table& coset_reps_cached(int q, const signature& sig)
{
    static std::mutex mu;
    static std::map<std::pair<int, signature>, std::unique_ptr<coset_table>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{q, sig}];
    if (!slot)
        slot = std::make_unique<coset_table>(coset_reps(q, sig));
    return *slot;
}

/// Number of left cosets in K diag(p^a) K: q^{2(a1-a3)} times the ratio of
/// Poincare polynomials of S3 and the stabilizer of a, at 1/q.
inline rational hecke_degree(int q, const signature& sig)
{
    const rational t = rational(1) / q;
    rational r = 1;
    const bool e12 = sig.a1 == sig.a2, e23 = sig.a2 == sig.a3;
    if (!e12 && !e23)
        r = (1 + t) * (1 + t + t * t);
    else if (!(e12 && e23))
        r = 1 + t + t * t;
    return r * rational(detail::ipow(q, 2 * sig.spread()));
}

// ---------------------------------------------------------------------------
// Hecke elements

struct hecke_element {
    int q = 2;
    std::map<signature, rational> terms;

    static hecke_element basis(int q, const signature& s, const rational& c = 1)
    {
        hecke_element h{q, {}};
        if (c != 0)
            h.terms[s] = c;
        return h;
    }
    static hecke_element identity(int q) { return basis(q, {0, 0, 0}); }

    rational coefficient(const signature& s) const
    {
        auto it = terms.find(s);
        return it == terms.end() ? rational(0) : it->second;
    }
    void add(const signature& s, const rational& c)
    {
        if (c == 0)
            return;
        rational& v = terms[s];
        v += c;
        if (v == 0)
            terms.erase(s);
    }
    bool operator==(const hecke_element&) const = default;

    // hidden friends, so Eigen products never see these overloads
    friend hecke_element operator+(hecke_element a, const hecke_element& b)
    {
        if (a.q != b.q)
            throw error(errc::domain_violation, "Hecke elements at different places");
        for (auto& [s, c] : b.terms)
            a.add(s, c);
        return a;
    }
    friend hecke_element operator*(const rational& c, hecke_element a)
    {
        if (c == 0)
            a.terms.clear();
        for (auto& [s, v] : a.terms)
            v *= c;
        return a;
    }
};


inline constexpr std::size_t hecke_pair_budget = 1000000;

/// Phi(A) * Phi(B) for normalized A, B: pair counts divided by the degrees.
inline const std::map<signature, rational>& basis_product(int q, const signature& A, const signature& B)
{
    static std::mutex mu;
    static std::map<std::tuple<int, signature, signature>, std::map<signature, rational>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({q, A, B});
        if (it != cache.end())
            return it->second;
    }
    const auto& X = coset_reps_cached(q, A).reps;
    const auto& Y = coset_reps_cached(q, B).reps;
    if (X.size() * Y.size() > hecke_pair_budget)
        throw error(errc::budget_exceeded, "convolution exceeds the pair budget");
    std::map<signature, std::size_t> counts;
    for (const pmat& x : X)
        for (const pmat& y : Y)
            ++counts[smith_signature(pmat_mul(x, y), q)];
    std::map<signature, rational> out;
    for (auto& [s, n] : counts)
        out[s] = rational(n) / rational(hecke_degree(q, s));
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(std::make_tuple(q, A, B), std::move(out)).first->second;
}

inline hecke_element convolve(const hecke_element& h1, const hecke_element& h2)
{
    if (h1.q != h2.q)
        throw error(errc::domain_violation, "Hecke elements at different places");
    hecke_element out{h1.q, {}};
    for (auto& [s1, c1] : h1.terms)
        for (auto& [s2, c2] : h2.terms) {
            const int k = s1.a3 + s2.a3;
            for (auto& [s, c] : basis_product(h1.q, s1.normalized(), s2.normalized()))
                out.add(s.shifted(k), c1 * c2 * c);
        }
    return out;
}

/// f^*(g) = conj(f(g^{-1})); coefficients are real.
inline hecke_element adjoint(const hecke_element& h)
{
    hecke_element out{h.q, {}};
    for (auto& [s, c] : h.terms)
        out.add(signature(-s.a3, -s.a2, -s.a1), c);
    return out;
}

// ---------------------------------------------------------------------------
// amplifier

/// T = Phi(1,0,0)/(a q) if |a| >= 1/2, else Phi(2,1,0)/(b q^2). The eigenvalues
/// are converted to rationals exactly.
inline hecke_element amplifier_T(int q, double a_eig, double b_eig)
{
    check_prime(q);
    if (!std::isfinite(a_eig) || !std::isfinite(b_eig))
        throw error(errc::non_finite, "amplifier eigenvalues");
    if (std::abs(a_eig) < 0.5 && std::abs(b_eig) < 0.5)
        throw error(errc::eigenvalue_pair_invalid, "|a| and |b| cannot both be below 1/2");
    if (std::abs(a_eig) >= 0.5)
        return hecke_element::basis(q, {1, 0, 0}, rational(1) / (rational(a_eig) * q));
    return hecke_element::basis(q, {2, 1, 0}, rational(1) / (rational(b_eig) * q * q));
}

/// Which of the three (range, trace) families a signature belongs to, 0 if none.
inline int amplifier_family(const signature& s)
{
    auto in = [&](int lo, int hi) {
        return s.a1 >= lo && s.a1 <= hi && s.a2 >= lo && s.a2 <= hi && s.a3 >= lo && s.a3 <= hi;
    };
    if (in(-1, 2) && s.sum() == 2)
        return 1;
    if (in(-2, 2) && s.sum() == 0)
        return 2;
    if (in(-2, 1) && s.sum() == -2)
        return 3;
    return 0;
}

struct tt_star_report {
    hecke_element expansion;
    struct term {
        signature sig;
        rational alpha;
        rational scaled; // |alpha| q^{a1 - a3}
        int family;
    };
    std::vector<term> terms;
    rational max_scaled;
    bool all_in_families = true;
};

inline tt_star_report tt_star_expansion(int q, double a_eig, double b_eig)
{
    const hecke_element T = amplifier_T(q, a_eig, b_eig);
    tt_star_report r;
    r.expansion = convolve(T, adjoint(T));
    for (auto& [s, c] : r.expansion.terms) {
        const rational sc = boost::multiprecision::abs(c) * rational(detail::ipow(q, s.spread()));
        const int fam = amplifier_family(s);
        r.terms.push_back({s, c, sc, fam});
        r.max_scaled = std::max(r.max_scaled, sc);
        r.all_in_families = r.all_in_families && fam != 0;
    }
    return r;
}

// ---------------------------------------------------------------------------
// serialization: {q, terms: [{sig: [a1,a2,a3], num, den}]}, num and den as
// decimal strings so large coefficients survive

inline nlohmann::json to_json(const hecke_element& h)
{
    nlohmann::json terms = nlohmann::json::array();
    for (auto& [s, c] : h.terms)
        terms.push_back({{"sig", {s.a1, s.a2, s.a3}},
                         {"num", boost::multiprecision::numerator(c).str()},
                         {"den", boost::multiprecision::denominator(c).str()}});
    return {{"q", h.q}, {"terms", terms}};
}

inline hecke_element hecke_from_json(const nlohmann::json& j)
{
    try {
        hecke_element h{j.at("q").get<int>(), {}};
        check_prime(h.q);
        for (auto& t : j.at("terms")) {
            const auto a = t.at("sig").get<std::array<int, 3>>();
            auto big = [](const nlohmann::json& x) {
                return x.is_string() ? bigint(x.get<std::string>()) : bigint(x.get<long long>());
            };
            const bigint den = big(t.at("den"));
            if (den == 0)
                throw error(errc::config_invalid, "hecke term with zero denominator");
            h.add(signature(a[0], a[1], a[2]), rational(big(t.at("num")), den));
        }
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::config_invalid, std::string("hecke element: ") + e.what());
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const error*>(&e))
            throw;
        throw error(errc::config_invalid, std::string("hecke element: ") + e.what());
    }
}

} // namespace champ
