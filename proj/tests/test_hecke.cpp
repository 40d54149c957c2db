#include <random>
#include <set>

#include <champ/hecke.hpp>

#include "test_util.hpp"

using namespace champ;

namespace {

using imat = std::array<std::array<long long, 3>, 3>;

hecke_element phi(int q, int a1, int a2, int a3, const rational& c = 1)
{
    return hecke_element::basis(q, {a1, a2, a3}, c);
}

// Subspaces of F_p^3 by brute force: spans of all triples of vectors, as bitmasks
// over the p^3 points. Returns the count per dimension.
std::array<int, 4> subspace_counts(int p)
{
    const int n = p * p * p;
    auto vec = [p](int i) { return std::array<int, 3>{i % p, (i / p) % p, i / (p * p)}; };
    auto idx = [p](const std::array<int, 3>& v) { return v[0] + p * v[1] + p * p * v[2]; };
    std::set<std::vector<bool>> seen;
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b)
            for (int c = b; c < n; ++c) {
                std::vector<bool> mask(n, false);
                const auto va = vec(a), vb = vec(b), vc = vec(c);
                for (int x = 0; x < p; ++x)
                    for (int y = 0; y < p; ++y)
                        for (int z = 0; z < p; ++z) {
                            std::array<int, 3> w;
                            for (int k = 0; k < 3; ++k)
                                w[k] = (x * va[k] + y * vb[k] + z * vc[k]) % p;
                            mask[idx(w)] = true;
                        }
                seen.insert(mask);
            }
    std::array<int, 4> out{};
    for (auto& m : seen) {
        const int size = int(std::count(m.begin(), m.end(), true));
        int d = 0;
        for (int s = 1; s < size; s *= p)
            ++d;
        ++out[d];
    }
    return out;
}

bool same_coset(const pmat& x, const pmat& y, int p)
{
    return smith_signature(pmat_mul(pmat_inverse(x, p), y), p) == signature(0, 0, 0);
}

// small random elements; with spread_two the basis includes Phi(2,1,0)
hecke_element random_element(std::mt19937_64& rng, int q, bool spread_two = true)
{
    static const std::vector<signature> sigs{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {0, 0, -1}, {2, 1, 0}};
    hecke_element h{q, {}};
    std::uniform_int_distribution<int> pick(0, int(sigs.size()) - (spread_two ? 1 : 2)), num(-3, 3), den(1, 4);
    const int terms = 1 + int(rng() % 2);
    for (int i = 0; i < terms; ++i)
        h.add(sigs[pick(rng)], rational(num(rng), den(rng)));
    return h;
}

} // namespace

TEST(Hecke, CosetCounts)
{
    EXPECT_EQ(coset_reps(2, {0, 0, 0}).reps.size(), 1u);
    EXPECT_EQ(coset_reps(2, {1, 0, 0}).reps.size(), 7u);
    EXPECT_EQ(coset_reps(3, {1, 1, 0}).reps.size(), 13u);
    for (int q : {2, 3, 5})
        for (auto s : {signature(1, 0, 0), signature(1, 1, 0)})
            EXPECT_EQ(coset_reps(q, s).reps.size(), std::size_t(q * q + q + 1));
    EXPECT_CHAMP_ERROR(coset_reps(2, {5, 0, 0}), errc::budget_exceeded);
    EXPECT_CHAMP_ERROR(coset_reps(4, {1, 0, 0}), errc::domain_violation);
}

TEST(Hecke, CosetCountsMatchSublatticeEnumeration)
{
    // lattices L with pZ^3 <= L <= Z^3 of index p^n are the codimension-n subspaces of F_p^3;
    // those are exactly the cosets of signatures with entries in {0,1} summing to n
    for (int p : {2, 3}) {
        const auto sub = subspace_counts(p);
        const std::array<signature, 4> by_n{signature(0, 0, 0), signature(1, 0, 0), signature(1, 1, 0),
                                            signature(1, 1, 1)};
        for (int n = 0; n <= 3; ++n)
            EXPECT_EQ(int(coset_reps(p, by_n[n]).reps.size()), sub[3 - n]) << "p = " << p << ", n = " << n;
    }
}

TEST(Hecke, CosetRepsArePairwiseInequivalent)
{
    for (int q : {2, 3})
        for (auto s : {signature(1, 0, 0), signature(2, 1, 0), signature(2, 0, 0)}) {
            const auto t = coset_reps(q, s);
            EXPECT_EQ(rational(t.reps.size()), hecke_degree(q, s));
            for (std::size_t i = 0; i < t.reps.size(); ++i) {
                EXPECT_EQ(smith_signature(t.reps[i], q), s);
                for (std::size_t j = i + 1; j < t.reps.size(); ++j)
                    EXPECT_FALSE(same_coset(t.reps[i], t.reps[j], q));
            }
        }
}

TEST(Hecke, SmithSignature)
{
    for (int p : {2, 3, 5}) {
        const long long p2 = p * p;
        EXPECT_EQ(smith_signature(imat{{{p2, 0, 0}, {0, p, 0}, {0, 0, 1}}}, p), signature(2, 1, 0));
    }
    EXPECT_EQ(smith_signature(imat{{{2, 1, 0}, {1, 1, 0}, {0, 0, 1}}}, 3), signature(0, 0, 0));
    EXPECT_EQ(smith_signature(imat{{{0, 1, 0}, {1, 0, 0}, {0, 0, -1}}}, 2), signature(0, 0, 0));
    EXPECT_CHAMP_ERROR(smith_signature(imat{{{1, 2, 3}, {2, 4, 6}, {0, 0, 1}}}, 2), errc::singular_input);

    std::array<std::array<rational, 3>, 3> m{};
    m[0][0] = rational(1, 2);
    m[1][1] = 1;
    m[2][2] = 4;
    EXPECT_EQ(smith_signature(m, 2), signature(2, 0, -1));
}

TEST(Hecke, ProductSupport)
{
    for (int q : {2, 3}) {
        const auto X = coset_reps(q, {1, 0, 0}).reps, Y = coset_reps(q, {1, 1, 0}).reps;
        std::set<signature> seen;
        for (auto& x : X)
            for (auto& y : Y)
                seen.insert(smith_signature(pmat_mul(x, y), q));
        EXPECT_EQ(seen, (std::set<signature>{{2, 1, 0}, {1, 1, 1}}));
    }
}

TEST(Hecke, IdentityElement)
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
        const auto h = random_element(rng, 2);
        EXPECT_EQ(convolve(hecke_element::identity(2), h), h);
        EXPECT_EQ(convolve(h, hecke_element::identity(2)), h);
    }
}

TEST(Hecke, AmplifierIdentity)
{
    for (int q : {2, 3, 5}) {
        const auto lhs = convolve(phi(q, 1, 0, 0), phi(q, 1, 1, 0));
        const auto rhs = phi(q, 2, 1, 0) + phi(q, 1, 1, 1, q * q + q + 1);
        EXPECT_EQ(lhs, rhs) << "q = " << q;
    }
}

TEST(Hecke, Commutativity)
{
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        const int q = i % 2 ? 3 : 2;
        const auto a = random_element(rng, q), b = random_element(rng, q);
        EXPECT_EQ(convolve(a, b), convolve(b, a));
    }
}

TEST(Hecke, Associativity)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        const auto a = random_element(rng, 2, false), b = random_element(rng, 2, false), c = random_element(rng, 2, false);
        EXPECT_EQ(convolve(convolve(a, b), c), convolve(a, convolve(b, c)));
    }
}

TEST(Hecke, Adjoint)
{
    EXPECT_EQ(adjoint(hecke_element::identity(3)), hecke_element::identity(3));
    EXPECT_EQ(adjoint(phi(2, 1, 0, 0)), phi(2, 0, 0, -1));
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
        const auto a = random_element(rng, 2), b = random_element(rng, 2);
        EXPECT_EQ(adjoint(adjoint(a)), a);
        EXPECT_EQ(adjoint(convolve(a, b)), convolve(adjoint(b), adjoint(a)));
    }
}

TEST(Hecke, AdjointByInvertingReps)
{
    // the inverses of the reps of K(1,0,0)K all lie in K(0,0,-1)K
    for (auto& x : coset_reps(2, {1, 0, 0}).reps)
        EXPECT_EQ(smith_signature(pmat_inverse(x, 2), 2), signature(0, 0, -1));
}

TEST(Hecke, DegreeOfIdentityCoefficient)
{
    // (Phi Phi^*)(e) counts the cosets of Phi
    for (int q : {2, 3, 5}) {
        const auto e = convolve(phi(q, 1, 0, 0), adjoint(phi(q, 1, 0, 0)));
        EXPECT_EQ(e.coefficient({0, 0, 0}), rational(q * q + q + 1));
    }
}

TEST(Hecke, AmplifierSelection)
{
    EXPECT_EQ(amplifier_T(2, 1.0, 0.1), phi(2, 1, 0, 0, rational(1, 2)));
    EXPECT_EQ(amplifier_T(3, 0.1, 1.0), phi(3, 2, 1, 0, rational(1, 9)));
    EXPECT_EQ(amplifier_T(2, -0.5, 0.0), phi(2, 1, 0, 0, rational(-1, 1)));
    EXPECT_CHAMP_ERROR(amplifier_T(2, 0.4, 0.4), errc::eigenvalue_pair_invalid);
}

TEST(Hecke, TTStarSupport)
{
    for (int q : {2, 3})
        for (auto [a, b] : {std::pair{0.5, 0.0}, {1.0, 0.2}, {0.1, 0.5}, {0.3, -1.0}}) {
            const auto r = tt_star_expansion(q, a, b);
            EXPECT_TRUE(r.all_in_families) << "q = " << q << ", a = " << a << ", b = " << b;
            EXPECT_FALSE(r.terms.empty());
            for (auto& t : r.terms)
                EXPECT_NE(t.family, 0) << t.sig.str();
        }
}

TEST(Hecke, TTStarConstantAtWorstCase)
{
    // |a| = 1/2, q = 2: T = Phi(1,0,0)/(aq) = Phi(1,0,0), so T T^* has identity coefficient
    // q^2 + q + 1 = 7, and that term's scaled size |alpha| q^0 is the maximum
    const auto r = tt_star_expansion(2, 0.5, 0.0);
    EXPECT_EQ(r.expansion.coefficient({0, 0, 0}), rational(7));
    EXPECT_EQ(r.max_scaled, rational(7));
    const auto rb = tt_star_expansion(2, 0.1, 0.5);
    EXPECT_EQ(rb.max_scaled, rational(21, 2));
}

TEST(Hecke, JsonRoundTrip)
{
    const auto h = phi(3, 2, 1, 0, rational(1, 9)) + phi(3, 1, 1, 1, rational(-13, 4));
    const auto j = to_json(h);
    EXPECT_EQ(j["q"], 3);
    EXPECT_EQ(j["terms"].size(), 2u);
    EXPECT_EQ(hecke_from_json(j), h);
    EXPECT_EQ(hecke_from_json(nlohmann::json::parse(j.dump())), h);
    EXPECT_CHAMP_ERROR(hecke_from_json(nlohmann::json{{"q", 3}}), errc::config_invalid);
    EXPECT_CHAMP_ERROR(hecke_from_json(nlohmann::json::parse(R"({"q":3,"terms":[{"sig":[0,1,2],"num":"1","den":"1"}]})")),
                       errc::domain_violation);
}

TEST(Hecke, DifferentPlacesDoNotMix)
{
    EXPECT_CHAMP_ERROR(convolve(phi(2, 1, 0, 0), phi(3, 1, 0, 0)), errc::domain_violation);
}
