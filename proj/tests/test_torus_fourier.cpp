#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include <schatlab/torus_fourier.hpp>

using namespace schatlab;

namespace {

std::vector<complex> random_coefficients(std::size_t count, std::uint32_t seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> d;
    std::vector<complex> c(count);
    for (auto& v : c)
        v = {d(rng), d(rng)};
    return c;
}

} // namespace

TEST(BuildLattice, ZeroCutoffIsOrigin)
{
    const auto L = build_lattice(1, 0);
    ASSERT_EQ(L.size(), 1u);
    EXPECT_EQ(L[0][0], 0);
    EXPECT_EQ(L.eigenvalue(0), 0);
}

TEST(BuildLattice, OneDimensionalEnumeration)
{
    const auto L = build_lattice(1, 2);
    ASSERT_EQ(L.size(), 5u);
    const long eig[] = {4, 1, 0, 1, 4};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(L[i][0], int(i) - 2);
        EXPECT_EQ(L.eigenvalue(i), eig[i]);
    }
}

TEST(BuildLattice, TwoDimensional)
{
    const auto L = build_lattice(2, 1);
    ASSERT_EQ(L.size(), 9u);
    const auto pos = L.position({1, 1});
    ASSERT_TRUE(pos);
    EXPECT_EQ(L.eigenvalue(*pos), 2);
}

TEST(BuildLattice, RejectsBadArguments)
{
    EXPECT_THROW(build_lattice(3, 1), std::invalid_argument);
    EXPECT_THROW(build_lattice(0, 1), std::invalid_argument);
    EXPECT_THROW(build_lattice(1, -1), std::invalid_argument);
}

TEST(BuildLattice, InvariantsHoldForSeveralSizes)
{
    for (int n : {1, 2})
        for (int N : {0, 1, 3, 7}) {
            const auto L = build_lattice(n, N);
            const std::size_t side = std::size_t(2 * N + 1);
            ASSERT_EQ(L.size(), n == 1 ? side : side * side);
            std::set<Frequency> seen(L.indices().begin(), L.indices().end());
            EXPECT_EQ(seen.size(), L.size()) << "duplicates";
            EXPECT_TRUE(std::is_sorted(L.indices().begin(), L.indices().end()));
            for (std::size_t i = 0; i < L.size(); ++i) {
                const auto& k = L[i];
                EXPECT_EQ(L.eigenvalue(i), long(k[0]) * k[0] + long(k[1]) * k[1]);
                EXPECT_EQ(L[L.mirror(i)], negate(k));
                EXPECT_EQ(L.position(k), i);
            }
        }
}

TEST(BuildLattice, ShellMultiplicitiesOnCircle)
{
    const auto L = build_lattice(1, 20);
    std::map<long, int> count;
    for (std::size_t i = 0; i < L.size(); ++i)
        ++count[L.eigenvalue(i)];
    for (const auto& [lambda, d] : count)
        EXPECT_EQ(d, lambda == 0 ? 1 : 2) << "lambda = " << lambda;
}

TEST(Forward, ConstantFunction)
{
    const auto L = build_lattice(1, 3);
    const auto f = GridFunction::sample(1, 7, [](double) { return complex{1.0}; });
    const auto c = forward(f, L);
    for (std::size_t i = 0; i < L.size(); ++i)
        EXPECT_NEAR(std::abs(c[i] - (L[i][0] == 0 ? 1.0 : 0.0)), 0.0, 1e-14);
}

TEST(Forward, SingleCharacter)
{
    const auto L = build_lattice(1, 3);
    const auto f = GridFunction::sample(1, 9, [](double x) { return std::polar(1.0, x); });
    const auto c = forward(f, L);
    for (std::size_t i = 0; i < L.size(); ++i)
        EXPECT_NEAR(std::abs(c[i] - (L[i][0] == 1 ? 1.0 : 0.0)), 0.0, 1e-14);
}

TEST(Forward, CosineSplitsIntoTwoCharacters)
{
    const auto L = build_lattice(1, 4);
    const auto f = GridFunction::sample(1, 9, [](double x) { return complex{2.0 * std::cos(x)}; });
    const auto c = forward(f, L);
    for (std::size_t i = 0; i < L.size(); ++i)
        EXPECT_NEAR(std::abs(c[i] - (std::abs(L[i][0]) == 1 ? 1.0 : 0.0)), 0.0, 1e-14);
}

TEST(Forward, TwoDimensionalCharacter)
{
    const auto L = build_lattice(2, 2);
    const auto f = GridFunction::sample(2, 5, [](double x, double y) { return std::polar(1.0, 2 * x - y); });
    const auto c = forward(f, L);
    for (std::size_t i = 0; i < L.size(); ++i) {
        const bool hit = L[i] == Frequency{2, -1};
        EXPECT_NEAR(std::abs(c[i] - (hit ? 1.0 : 0.0)), 0.0, 1e-13);
    }
}

TEST(Forward, RejectsAliasingResolution)
{
    const auto L = build_lattice(1, 4);
    GridFunction f(1, 8);
    EXPECT_THROW(forward(f, L), std::invalid_argument);
}

TEST(Forward, RejectsDimensionMismatch)
{
    GridFunction f(2, 9);
    EXPECT_THROW(forward(f, build_lattice(1, 2)), std::invalid_argument);
}

TEST(Inverse, DeltaAtZeroIsConstant)
{
    const auto L = build_lattice(1, 3);
    std::vector<complex> c(L.size());
    c[*L.position({0, 0})] = 1.0;
    for (const auto& v : inverse(c, L).samples)
        EXPECT_NEAR(std::abs(v - 1.0), 0.0, 1e-15);
}

TEST(Inverse, CosineSamples)
{
    const auto L = build_lattice(1, 5);
    std::vector<complex> c(L.size());
    c[*L.position({1, 0})] = 1.0;
    c[*L.position({-1, 0})] = 1.0;
    const auto f = inverse(c, L, 32);
    double worst = 0;
    for (int g = 0; g < 32; ++g)
        worst = std::max(worst, std::abs(f.at(g) - 2.0 * std::cos(f.node(g))));
    EXPECT_LT(worst, 1e-12);
}

TEST(Inverse, RoundTripIsIdentity)
{
    for (int n : {1, 2}) {
        const auto L = build_lattice(n, 6);
        const auto c = random_coefficients(L.size(), 11u + n);
        for (int G : {13, 17, 32}) {
            const auto back = forward(inverse(c, L, G), L);
            double worst = 0, scale = 0;
            for (std::size_t i = 0; i < c.size(); ++i) {
                worst = std::max(worst, std::abs(back[i] - c[i]));
                scale = std::max(scale, std::abs(c[i]));
            }
            EXPECT_LT(worst, 1e-12 * scale) << "n=" << n << " G=" << G;
        }
    }
}

TEST(Inverse, RejectsSizeMismatch)
{
    std::vector<complex> c(4);
    EXPECT_THROW(inverse(c, build_lattice(1, 2)), std::invalid_argument);
}

TEST(Plancherel, ConstantFunction)
{
    const auto f = GridFunction::sample(1, 5, [](double) { return complex{1.0}; });
    const auto r = plancherel_check(f, build_lattice(1, 2));
    EXPECT_NEAR(r.lhs, 1.0, 1e-14);
    EXPECT_NEAR(r.rhs, 1.0, 1e-14);
}

TEST(Plancherel, TwoCharacters)
{
    const auto f = GridFunction::sample(1, 11, [](double x) { return std::polar(1.0, x) + std::polar(1.0, 2 * x); });
    const auto r = plancherel_check(f, build_lattice(1, 5));
    EXPECT_NEAR(r.lhs, 2.0, 1e-13);
    EXPECT_NEAR(r.rhs, 2.0, 1e-13);
}

TEST(Plancherel, RandomBandLimitedFunctions)
{
    for (int n : {1, 2})
        for (std::uint32_t seed = 0; seed < 10; ++seed) {
            const auto L = build_lattice(n, 5);
            const auto f = inverse(random_coefficients(L.size(), seed), L, 16);
            const auto r = plancherel_check(f, L);
            EXPECT_LE(std::abs(r.lhs - r.rhs), 1e-10 * (1 + r.lhs));
        }
}

TEST(Forward, ConjugationReflectsFrequencies)
{
    const auto L = build_lattice(2, 4);
    auto f = inverse(random_coefficients(L.size(), 5), L, 12);
    auto g = f;
    for (auto& v : g.samples)
        v = std::conj(v);
    const auto cf = forward(f, L);
    const auto cg = forward(g, L);
    for (std::size_t i = 0; i < L.size(); ++i)
        EXPECT_NEAR(std::abs(cg[i] - std::conj(cf[L.mirror(i)])), 0.0, 1e-12);
}
