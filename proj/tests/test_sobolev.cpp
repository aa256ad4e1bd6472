#include <random>

#include <gtest/gtest.h>

#include <schatlab/sobolev.hpp>

using namespace schatlab;

namespace {

KernelSpec three_term_table()
{
    return KernelSpec::conv_table({{{0, 0}, 1.0}, {{1, 0}, 0.5}, {{-1, 0}, 0.5}});
}

CoefficientMatrix single_mode(Frequency k, Frequency l, int N = 3)
{
    CoefficientMatrix C(build_lattice(1, N));
    C.set(k, l, 1.0);
    return C;
}

CoefficientMatrix random_matrix(int n, int N, std::uint32_t seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> d;
    CoefficientMatrix C(build_lattice(n, N));
    for (Eigen::Index i = 0; i < C.entries.rows(); ++i)
        for (Eigen::Index j = 0; j < C.entries.cols(); ++j)
            C.entries(i, j) = {d(rng), d(rng)};
    return C;
}

} // namespace

TEST(SobolevOrder, RejectsNegativeOrders)
{
    EXPECT_THROW(SobolevOrder(-0.1, 0), std::invalid_argument);
    EXPECT_THROW(SobolevOrder(0, -1), std::invalid_argument);
    EXPECT_DOUBLE_EQ(SobolevOrder(0.5, 1.25).total(), 1.75);
}

TEST(MixedNorm, SingleMode)
{
    EXPECT_DOUBLE_EQ(mixed_norm(single_mode({1, 0}, {1, 0}), {1, 1}), 2.0);
}

TEST(MixedNorm, ZeroOrderIsFrobenius)
{
    const auto C = random_matrix(1, 4, 1);
    EXPECT_NEAR(mixed_norm(C, {0, 0}), C.entries.norm(), 1e-12 * C.entries.norm());
}

TEST(MixedNorm, ThreeTermConvolution)
{
    EXPECT_NEAR(mixed_norm(coefficients(three_term_table(), 2), {0, 1}), std::sqrt(2.0), 1e-15);
}

TEST(IsotropicNorm, Examples)
{
    EXPECT_NEAR(isotropic_norm(single_mode({1, 0}, {1, 0}), 1.0), std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(isotropic_norm(single_mode({2, 0}, {1, 0}), 2.0), 6.0, 1e-14);
    const auto C = random_matrix(2, 2, 4);
    EXPECT_DOUBLE_EQ(isotropic_norm(C, 0.0), mixed_norm(C, {0, 0}));
    EXPECT_THROW(isotropic_norm(C, -1.0), std::invalid_argument);
}

TEST(InclusionWeights, DirectArithmetic)
{
    const auto w = inclusion_weight_check(1, 1, {2, 3});
    EXPECT_DOUBLE_EQ(w.lo, 9.0);
    EXPECT_DOUBLE_EQ(w.mid, 32.0);
    EXPECT_DOUBLE_EQ(w.hi, 243.0);
    const auto z = inclusion_weight_check(3.5, 7, {0, 0});
    EXPECT_EQ(z.lo, 1.0);
    EXPECT_EQ(z.mid, 1.0);
    EXPECT_EQ(z.hi, 1.0);
    EXPECT_THROW(inclusion_weight_check(-1, 0, {1, 1}), std::invalid_argument);
}

TEST(InclusionWeights, ChainHoldsOnGrid)
{
    for (double a = 0; a <= 10; a += 0.5)
        for (double b = 0; b <= 10; b += 0.5)
            for (double m1 = 0; m1 <= 4; m1 += 0.5)
                for (double m2 = 0; m2 <= 4; m2 += 0.5) {
                    const auto w = inclusion_weight_check(a, b, {m1, m2});
                    ASSERT_TRUE(w.ordered()) << a << ' ' << b << ' ' << m1 << ' ' << m2;
                }
}

TEST(EllipticEquivalence, ZeroOrder)
{
    const auto r = elliptic_equivalence_check(random_matrix(1, 3, 2), 0.0);
    EXPECT_EQ(r.min_ratio, 1.0);
    EXPECT_EQ(r.max_ratio, 1.0);
    EXPECT_DOUBLE_EQ(r.norm_first, r.norm_second);
}

TEST(EllipticEquivalence, OriginModeHasUnitWeights)
{
    const auto r = elliptic_equivalence_check(single_mode({0, 0}, {0, 0}, 0), 2.5);
    EXPECT_EQ(r.norm_first, 1.0);
    EXPECT_EQ(r.norm_second, 1.0);
}

TEST(EllipticEquivalence, RatiosBoundedIndependentOfCutoff)
{
    for (double mu : {0.5, 1.0, 2.0, 3.0}) {
        double lo = 1e300, hi = 0;
        for (int N : {4, 16, 64}) {
            const auto r = elliptic_equivalence_check(CoefficientMatrix(build_lattice(1, N)), mu);
            EXPECT_GE(r.min_ratio, std::pow(0.7, mu));
            EXPECT_LE(r.max_ratio, std::pow(1.5, mu));
            lo = std::min(lo, r.min_ratio);
            hi = std::max(hi, r.max_ratio);
        }
        // (1+t)^2/(1+t^2) <= 2, so the bound is 2^{mu/2} for every N
        EXPECT_LE(hi, std::pow(2.0, mu / 2) + 1e-12);
        EXPECT_GE(lo, 1.0);
    }
    EXPECT_THROW(elliptic_equivalence_check(single_mode({0, 0}, {0, 0}), -1), std::invalid_argument);
}

TEST(MixedNorm, MonotoneInOrders)
{
    const auto C = random_matrix(1, 4, 7);
    double prev = 0;
    for (double m = 0; m <= 3; m += 0.25) {
        const double v = mixed_norm(C, {m, 0.5 * m});
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(MixedNorm, SandwichBetweenIsotropicNorms)
{
    for (std::uint32_t seed = 0; seed < 20; ++seed) {
        const auto C = random_matrix(1 + seed % 2, 3, seed);
        const SobolevOrder ord(0.3 * (seed % 5), 0.2 * (seed % 7));
        const double mid = mixed_norm(C, ord);
        EXPECT_LE(isotropic_norm(C, std::min(ord.mu1, ord.mu2)), mid * (1 + 1e-14));
        EXPECT_LE(mid, isotropic_norm(C, ord.total()) * (1 + 1e-14));
    }
}

TEST(MixedNorm, ConvolutionDependsOnTotalOrderOnly)
{
    const auto C = coefficients(KernelSpec::conv_power(2.5), 20);
    const double ref = mixed_norm(C, {1.0, 1.0});
    for (double m1 : {0.0, 0.4, 1.3, 2.0})
        EXPECT_NEAR(mixed_norm(C, {m1, 2.0 - m1}), ref, 1e-13 * ref);
    // explicit formula sum (1+k^2)^{mu1+mu2} |kappa^(k)|^2
    double expect = 0;
    for (int k = -20; k <= 20; ++k)
        expect += std::pow(1.0 + k * k, 2.0) * std::pow(1.0 + std::abs(k), -5.0);
    EXPECT_NEAR(ref, std::sqrt(expect), 1e-13 * ref);
}

TEST(MixedNormPartialSums, MatchDenseComputation)
{
    const double cut[] = {2, 5, 9};
    for (const auto& spec : {KernelSpec::conv_power(1.5), KernelSpec::product_random(1.2, 1.8, 4),
                             KernelSpec::conv_power(1.5, 2), KernelSpec::product_random(1.2, 1.8, 4, 2),
                             KernelSpec::mode_sum({{{1, 0}, {3, 0}, 2.0}, {{7, 0}, {0, 0}, 1.0}}),
                             KernelSpec::diag_corrupt(three_term_table(), 9.0)}) {
        const SobolevOrder ord(0.7, 0.4);
        const auto sums = mixed_norm_sq_partial_sums(spec, ord, cut);
        for (std::size_t i = 0; i < 3; ++i) {
            const double dense = std::pow(mixed_norm(coefficients(spec, int(cut[i])), ord), 2);
            EXPECT_NEAR(sums[i], dense, 1e-12 * dense) << spec.name() << " N=" << cut[i];
        }
    }
}

TEST(IsotropicNormAt, MatchesDenseComputation)
{
    for (const auto& spec : {KernelSpec::conv_power(1.5), KernelSpec::product_random(1.2, 1.8, 4),
                             KernelSpec::mode_sum({{{1, 0}, {3, 0}, 2.0}})}) {
        const double dense = std::pow(isotropic_norm(coefficients(spec, 6), 0.8), 2);
        EXPECT_NEAR(isotropic_norm_sq_at(spec, 0.8, 6), dense, 1e-12 * dense);
    }
    EXPECT_THROW(isotropic_norm_sq_at(KernelSpec::rank_one(), -0.5, 3), std::invalid_argument);
}

TEST(MixedNormClassify, ConvolutionThreshold)
{
    // (1+k^2)^mu (1+|k|)^{-2a} is summable iff mu < a - 1/2
    const auto spec = KernelSpec::conv_power(2.0);
    EXPECT_EQ(mixed_norm_classify(spec, {0.6, 0.7}).verdict, Convergence::convergent);
    EXPECT_EQ(mixed_norm_classify(spec, {0.8, 0.8}).verdict, Convergence::divergent);
    EXPECT_NE(mixed_norm_classify(spec, {0.75, 0.75}).verdict, Convergence::convergent);
}

TEST(MixedNormClassify, ProductKernelSeparates)
{
    // x side (1+|k|)^{-2a}(1+k^2)^{mu1}: finite iff mu1 < a - 1/2, likewise in y
    const auto spec = KernelSpec::product_random(2.0, 1.0, 3);
    EXPECT_EQ(mixed_norm_classify(spec, {1.0, 0.3}).verdict, Convergence::convergent);
    EXPECT_EQ(mixed_norm_classify(spec, {1.0, 0.7}).verdict, Convergence::divergent);
    EXPECT_EQ(mixed_norm_classify(spec, {1.7, 0.0}).verdict, Convergence::divergent);
}

TEST(MixedNormClassify, FiniteModeSumAlwaysFinite)
{
    const auto spec = KernelSpec::mode_sum({{{3, 0}, {-2, 0}, 1.0}});
    EXPECT_EQ(mixed_norm_classify(spec, {5, 5}).verdict, Convergence::convergent);
}

TEST(DecayKernel, PartialSumsMatchDirectSummation)
{
    const double cut[] = {3, 8};
    const auto l1 = decay_kernel_l1_partial_sums(0.9, cut);
    const auto h = decay_kernel_sobolev_sq_partial_sums(0.9, 1.3, cut);
    for (std::size_t i = 0; i < 2; ++i) {
        const int N = int(cut[i]);
        double a = 0, b = 0;
        for (int k = -N; k <= N; ++k)
            for (int l = -N; l <= N; ++l) {
                const double w = 1.0 + k * k + l * l;
                a += std::pow(w, -0.9);
                b += std::pow(w, 1.3) * std::pow(w, -1.8);
            }
        EXPECT_NEAR(l1[i], a, 1e-12 * a);
        EXPECT_NEAR(h[i], b, 1e-12 * b);
    }
}

TEST(DecayKernel, SummabilityThreshold)
{
    EXPECT_EQ(decay_kernel_l1_classify(1.2).verdict, Convergence::convergent);
    EXPECT_EQ(decay_kernel_l1_classify(0.8).verdict, Convergence::divergent);
    EXPECT_NE(decay_kernel_l1_classify(1.0).verdict, Convergence::convergent);
    EXPECT_THROW(decay_kernel_sobolev_classify(1.0, -1.0), std::invalid_argument);
}
