#include <numbers>

#include <gtest/gtest.h>

#include "schatlab/commands.hpp"

using namespace schatlab;
using namespace schatlab::cli;

namespace {

CommonOptions repro() { return {7, true}; }

KernelOptions table_kernel(std::optional<double> corrupt = {})
{
    KernelOptions k;
    k.kind = "conv-table";
    k.table = "0:1,1:0.5,-1:0.5";
    k.corrupt = corrupt;
    return k;
}

double re(const json& z) { return z.at("re").get<double>(); }
double im(const json& z) { return z.at("im").get<double>(); }

} // namespace

TEST(ParseSymbolTable, OneAndTwoDimensional)
{
    const auto a = parse_symbol_table("0:1,-3:0.5@0.25", 1);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[1].k, (Frequency{-3, 0}));
    EXPECT_EQ(a[1].value, (complex{0.5, 0.25}));
    const auto b = parse_symbol_table("1/-2:2", 2);
    EXPECT_EQ(b[0].k, (Frequency{1, -2}));
    EXPECT_EQ(b[0].value, complex{2.0});
}

TEST(ParseSymbolTable, MalformedInput)
{
    EXPECT_THROW(parse_symbol_table("", 1), usage_error);
    EXPECT_THROW(parse_symbol_table("1", 1), usage_error);
    EXPECT_THROW(parse_symbol_table("1/2:3", 1), usage_error);
    EXPECT_THROW(parse_symbol_table("x:3", 1), usage_error);
    EXPECT_THROW(parse_symbol_table("1:2@3@4", 1), usage_error);
    EXPECT_THROW(parse_symbol_table("0.5:1", 1), usage_error);
}

TEST(MakeKernel, FamiliesAndValidation)
{
    KernelOptions k;
    EXPECT_EQ(make_kernel(k, 0).name(), KernelSpec::rank_one().name());
    k.kind = "conv-power";
    k.a = 0.3;
    EXPECT_THROW(make_kernel(k, 0), usage_error);
    k.a = 2;
    k.n = 3;
    EXPECT_THROW(make_kernel(k, 0), usage_error);
    k.n = 2;
    EXPECT_EQ(make_kernel(k, 0).dim, 2);
    k.kind = "carleman";
    EXPECT_THROW(make_kernel(k, 0), usage_error);
    k.kind = "mode-sum";
    EXPECT_THROW(make_kernel(k, 0), usage_error);
    k.kind = "nonsense";
    EXPECT_THROW(make_kernel(k, 0), usage_error);
    EXPECT_TRUE(make_kernel(table_kernel(99.0), 0).as<family::DiagCorrupt>());
}

TEST(MakeKernel, SeedSelectsProductKernel)
{
    KernelOptions k;
    k.kind = "product-random";
    const auto a = coefficients(make_kernel(k, 1), 3);
    const auto b = coefficients(make_kernel(k, 1), 3);
    const auto c = coefficients(make_kernel(k, 2), 3);
    EXPECT_EQ(a.entries, b.entries);
    EXPECT_NE(a.entries, c.entries);
}

TEST(Envelope, SchemaAndProvenance)
{
    const auto r = envelope("x", {5, true});
    EXPECT_EQ(r.at("schema"), 1);
    EXPECT_EQ(r.at("command"), "x");
    EXPECT_EQ(r.at("provenance").at("seed"), 5);
    EXPECT_EQ(r.at("provenance").at("version"), version);
    EXPECT_FALSE(r.at("provenance").contains("timestamp"));
    EXPECT_TRUE(envelope("x", {5, false}).at("provenance").contains("timestamp"));
}

TEST(GeometricLimit, ExactForGeometricIncrements)
{
    ConvergenceEvidence ev;
    ev.partial_sums = {1, 1.5, 1.75, 1.875};
    ev.ratios = {0.5, 0.5};
    ev.cutoffs = {1, 2, 3, 4};
    ev.verdict = Convergence::convergent;
    const auto lim = geometric_limit_estimate(ev);
    ASSERT_TRUE(lim);
    EXPECT_DOUBLE_EQ(*lim, 2.0);
    ev.verdict = Convergence::divergent;
    EXPECT_FALSE(geometric_limit_estimate(ev));
}

TEST(Trace, RankOne)
{
    TraceOptions o;
    const auto r = run_trace(o, repro()).report;
    EXPECT_TRUE(r.at("defined").get<bool>());
    EXPECT_NEAR(re(r.at("eigensum")), 1.0, 1e-14);
    EXPECT_NEAR(re(r.at("naive_quadrature")), 1.0, 1e-14);
    EXPECT_NEAR(re(r.at("averaged")), 1.0, 1e-14);
}

TEST(Trace, DiagonalCorruptionExposesNaiveQuadrature)
{
    TraceOptions o;
    o.kernel = table_kernel(99.0);
    const auto res = run_trace(o, repro());
    const auto& r = res.report;
    EXPECT_NEAR(re(r.at("eigensum")), 2.0, 1e-12);
    EXPECT_NEAR(re(r.at("naive_quadrature")), 99.0, 1e-12);
    EXPECT_NEAR(re(r.at("averaged")), 2.0, 1e-9);
    EXPECT_NEAR(im(r.at("averaged")), 0.0, 1e-9);
    ASSERT_FALSE(res.plot.empty());
    EXPECT_EQ(res.plot.front().first, 0.0);
    EXPECT_LT(res.plot.back().second, 1e-9);
}

TEST(Trace, ConvPowerAgreement)
{
    TraceOptions o;
    o.kernel.kind = "conv-power";
    o.kernel.a = 1.2;
    const auto r = run_trace(o, repro()).report;
    const int N = r.at("input").at("cutoff").get<int>();
    double oracle = 1.0;
    for (int k = 1; k <= N; ++k)
        oracle += 2.0 * std::pow(1.0 + k, -1.2);
    EXPECT_NEAR(re(r.at("eigensum")), oracle, 1e-9);
    EXPECT_LT(r.at("averaged_minus_eigensum").get<double>(), 1e-4);
}

TEST(Trace, NotDefinedOutsideTraceClass)
{
    TraceOptions o;
    o.kernel.kind = "conv-power";
    o.kernel.a = 0.8;
    const auto r = run_trace(o, repro()).report;
    EXPECT_FALSE(r.at("defined").get<bool>());
    EXPECT_EQ(r.at("note"), "trace not defined");
    EXPECT_FALSE(r.contains("eigensum"));
}

TEST(Trace, RejectsTorus2AndBadLevels)
{
    TraceOptions o;
    o.kernel.n = 2;
    EXPECT_THROW(run_trace(o, repro()), usage_error);
    o.kernel.n = 1;
    o.jmax = 30;
    EXPECT_THROW(run_trace(o, repro()), usage_error);
}

TEST(Analyze, ConvPowerReport)
{
    AnalyzeOptions o;
    o.kernel.kind = "conv-power";
    o.kernel.a = 2.0;
    o.mu1 = 0.3;
    o.mu2 = 0.4;
    o.cutoff = 256;
    const auto res = run_analyze(o, repro());
    const auto& r = res.report;
    EXPECT_EQ(r.at("schema"), 1);
    // mixed norm^2 of a convolution kernel: sum (1+k^2)^{mu1+mu2} (1+|k|)^{-4}
    double expect = 0;
    for (int k = -256; k <= 256; ++k)
        expect += std::pow(1.0 + k * k, 0.7) * std::pow(1.0 + std::abs(k), -4.0);
    EXPECT_NEAR(r.at("sobolev").at("mixed_norm").get<double>(), std::sqrt(expect), 1e-12 * std::sqrt(expect));
    EXPECT_EQ(r.at("sobolev").at("mixed_norm_finiteness").at("verdict"), "convergent");
    EXPECT_NEAR(r.at("prediction").at("threshold").get<double>(), 2.0 / 2.4, 1e-15);
    EXPECT_TRUE(r.at("prediction").at("trace_class_by_order").get<bool>());
    for (const auto& v : r.at("verdicts")) {
        EXPECT_EQ(v.at("predicted"), "guaranteed");
        EXPECT_EQ(v.at("observed"), "convergent");
        EXPECT_TRUE(v.at("consistent").get<bool>());
    }
    EXPECT_EQ(r.at("spectrum").at("source"), "symbol");
    EXPECT_NEAR(r.at("spectrum").at("tail_exponent").at("beta").get<double>(), 2.0, 0.05);
    EXPECT_TRUE(r.at("traces").at("defined").get<bool>());
    double trace = 1.0;
    for (int k = 1; k <= 256; ++k)
        trace += 2.0 / ((1.0 + k) * (1.0 + k));
    EXPECT_NEAR(re(r.at("traces").at("eigensum")), trace, 1e-12);
    EXPECT_NEAR(re(r.at("traces").at("averaged")), trace, 1e-6);
    EXPECT_EQ(res.plot.size(), 513u);
    EXPECT_EQ(res.plot.front().second, 1.0);
}

TEST(Analyze, TraceNotDefinedForSlowDecay)
{
    AnalyzeOptions o;
    o.kernel.kind = "conv-power";
    o.kernel.a = 0.8;
    o.cutoff = 128;
    const auto r = run_analyze(o, repro()).report;
    EXPECT_FALSE(r.at("traces").at("defined").get<bool>());
    EXPECT_EQ(r.at("traces").at("note"), "trace not defined");
    EXPECT_EQ(r.at("traces").at("trace_class_observed"), "divergent");
}

TEST(Analyze, ProductKernelOnTorus2)
{
    AnalyzeOptions o;
    o.kernel.kind = "product-random";
    o.kernel.n = 2;
    o.kernel.a = 2.5;
    o.kernel.b = 2.5;
    o.cutoff = 8;
    o.mu1 = 0.5;
    o.mu2 = 0.5;
    const auto r = run_analyze(o, repro()).report;
    EXPECT_EQ(r.at("spectrum").at("source"), "svd");
    EXPECT_EQ(r.at("input").at("spectral_cutoff"), 8);
    EXPECT_EQ(r.at("spectrum").at("count"), 289);
    EXPECT_NEAR(r.at("prediction").at("threshold").get<double>(), 1.0, 1e-15);
    EXPECT_EQ(r.at("traces").at("averaged"), "not computed: dyadic averaging is implemented on T^1 only");
}

TEST(Analyze, CarlemanNote)
{
    AnalyzeOptions o;
    o.kernel.kind = "carleman";
    o.cutoff = 256;
    const auto r = run_analyze(o, repro()).report;
    bool found = false;
    for (const auto& n : r.at("notes"))
        found = found || n.get<std::string>().find("not proven") != std::string::npos;
    EXPECT_TRUE(found);
}

TEST(Analyze, UsageErrors)
{
    AnalyzeOptions o;
    o.ps = {0.0};
    EXPECT_THROW(run_analyze(o, repro()), usage_error);
    o.ps = {1.0};
    o.mu1 = -1;
    EXPECT_THROW(run_analyze(o, repro()), usage_error);
    o.mu1 = 0;
    o.cutoff = -2;
    EXPECT_THROW(run_analyze(o, repro()), usage_error);
}

TEST(Powers, PiCothPiAtHalfPower)
{
    PowersOptions o;
    o.alpha = 0.5;
    o.p = 2;
    o.cutoff = 200000;
    const auto r = run_powers(o, repro()).report;
    const double closed = std::numbers::pi / std::tanh(std::numbers::pi);
    EXPECT_EQ(r.at("classification").at("verdict"), "convergent");
    EXPECT_NEAR(r.at("partial_sum_at_cutoff").at("value").get<double>(), closed, 1e-5);
    EXPECT_NEAR(r.at("limit_estimate").get<double>(), closed, 1e-4);
    EXPECT_DOUBLE_EQ(r.at("q").get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(r.at("analytic_threshold_alpha").get<double>(), 0.25);
}

TEST(Powers, IdentityDiverges)
{
    PowersOptions o;
    o.alpha = 0;
    const auto r = run_powers(o, repro()).report;
    EXPECT_EQ(r.at("classification").at("verdict"), "divergent");
    EXPECT_FALSE(r.contains("limit_estimate"));
    o.model = "sphere";
    EXPECT_THROW(run_powers(o, repro()), usage_error);
}

TEST(Weyl, CountAndTrend)
{
    WeylOptions o;
    const auto r = run_weyl(o, repro()).report;
    EXPECT_EQ(r.at("count"), 21);
    o.n = 2;
    o.lambda = 1e4;
    const auto r2 = run_weyl(o, repro()).report;
    EXPECT_LE(r2.at("bound_constant").get<double>(), 8.0);
    EXPECT_LE(std::abs(r2.at("bound_trend_slope").get<double>()), 0.1);
}

TEST(Su2, VerdictsAndHypoellipticity)
{
    Su2Options o;
    o.alpha = 3;
    o.p = 2;
    o.c = 0.0;
    const auto r = run_su2(o, repro()).report;
    EXPECT_EQ(r.at("classification").at("verdict"), "convergent");
    EXPECT_FALSE(r.at("hypoellipticity").at("pass").get<bool>());
    EXPECT_EQ(r.at("hypoellipticity").at("witness").at("ell"), 1);
    EXPECT_EQ(r.at("hypoellipticity").at("witness").at("m"), 1);
    o.op = "hgamma";
    o.gamma = 1.0;
    EXPECT_THROW(run_su2(o, repro()), usage_error);
    o.gamma = 2.0;
    o.group = "u1";
    EXPECT_THROW(run_su2(o, repro()), usage_error);
}

TEST(Su2, KernelThresholds)
{
    Su2Options o;
    o.mu1 = 1;
    o.mu2 = 1;
    const auto r = run_su2(o, repro()).report;
    EXPECT_DOUBLE_EQ(r.at("kernel_thresholds").at("general").get<double>(), 1.2);
    EXPECT_DOUBLE_EQ(r.at("kernel_thresholds").at("refined").get<double>(), 1.0);
    EXPECT_EQ(r.at("kernel_thresholds").at("sharper"), "refined");
}

TEST(Carleman, DiagnosticsAtSmallScale)
{
    CarlemanOptions o;
    o.log_shift = 0.0;
    o.n_small = 100;
    o.n_large = 10000;
    o.sup_small = 100;
    o.sup_large = 1000;
    o.grid = 512;
    const auto r = run_carleman(o, repro()).report;
    EXPECT_NEAR(r.at("abs_c1").get<double>(), std::pow(std::log(2.0), -2.0), 1e-12);
    EXPECT_NE(r.at("note").get<std::string>().find("not proven"), std::string::npos);
    o.n_large = 50;
    EXPECT_THROW(run_carleman(o, repro()), usage_error);
}

TEST(Reproducibility, IdenticalReports)
{
    AnalyzeOptions o;
    o.kernel.kind = "product-random";
    o.cutoff = 32;
    const auto a = run_analyze(o, repro());
    const auto b = run_analyze(o, repro());
    EXPECT_EQ(a.report.dump(), b.report.dump());
    EXPECT_EQ(a.plot, b.plot);
}
