#pragma once

// Report assembly for the schatlab command-line front end. Each run_* takes
// parsed options and returns the JSON report plus optional plot rows; the
// executable only handles flags, files and exit codes.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include <schatlab/diag_avg.hpp>
#include <schatlab/kernels.hpp>
#include <schatlab/powers.hpp>
#include <schatlab/sobolev.hpp>
#include <schatlab/spectral.hpp>
#include <schatlab/su2.hpp>

namespace schatlab::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* version = "0.1.0";
inline constexpr int schema_version = 1;

/// Flag or value errors; mapped to exit code 2.
class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct CommonOptions {
    std::uint64_t seed = 0;
    bool reproducible = false;
};

struct CommandResult {
    json report;
    std::vector<std::pair<double, double>> plot; ///< headerless two-column CSV
};

// ---------------------------------------------------------------------------
// Kernel construction from flags

struct KernelOptions {
    std::string kind = "rank-one";
    int n = 1;
    double a = 2.0;
    double b = 2.0;
    std::string table;  ///< "k:v,k:v" (n = 1) or "k1/k2:v" (n = 2); v may be re@im
    std::string coeffs; ///< coefficient CSV for mode-sum
    std::optional<double> corrupt;
    double corrupt_im = 0.0;
    double p_demo = 1.0;
    double log_shift = 64.0;
};

namespace detail {

inline double parse_double(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw usage_error("bad number for " + what + ": '" + s + "'");
    }
    if (used != s.size())
        throw usage_error("bad number for " + what + ": '" + s + "'");
    return v;
}

inline int parse_int(const std::string& s, const std::string& what)
{
    const double v = parse_double(s, what);
    if (v != std::floor(v))
        throw usage_error("expected an integer for " + what + ": '" + s + "'");
    return int(v);
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace detail

/// Parses "0:1,1:0.5,-1:0.5" (n = 1) or "0/0:1,1/0:0.5@0.25" (n = 2).
inline std::vector<SymbolEntry> parse_symbol_table(const std::string& text, int n)
{
    if (text.empty())
        throw usage_error("conv-table needs --table");
    std::vector<SymbolEntry> out;
    for (const auto& item : detail::split(text, ',')) {
        const auto kv = detail::split(item, ':');
        if (kv.size() != 2)
            throw usage_error("bad table entry '" + item + "' (expected k:value)");
        SymbolEntry e;
        const auto ks = detail::split(kv[0], '/');
        if (int(ks.size()) != n)
            throw usage_error("table entry '" + item + "' has the wrong number of indices for n = " + std::to_string(n));
        for (int i = 0; i < n; ++i)
            e.k[std::size_t(i)] = detail::parse_int(ks[std::size_t(i)], "table index");
        const auto vs = detail::split(kv[1], '@');
        if (vs.size() > 2)
            throw usage_error("bad table value '" + kv[1] + "'");
        e.value = {detail::parse_double(vs[0], "table value"),
                   vs.size() == 2 ? detail::parse_double(vs[1], "table value") : 0.0};
        out.push_back(e);
    }
    return out;
}

inline KernelSpec make_kernel(const KernelOptions& o, std::uint64_t seed)
{
    if (o.n != 1 && o.n != 2)
        throw usage_error("--n must be 1 or 2");
    KernelSpec spec;
    if (o.kind == "rank-one")
        spec = KernelSpec::rank_one(o.n);
    else if (o.kind == "conv-power")
        spec = KernelSpec::conv_power(o.a, o.n);
    else if (o.kind == "conv-table")
        spec = KernelSpec::conv_table(parse_symbol_table(o.table, o.n), o.n);
    else if (o.kind == "product-random")
        spec = KernelSpec::product_random(o.a, o.b, seed, o.n);
    else if (o.kind == "carleman") {
        if (o.n != 1)
            throw usage_error("carleman is defined on T^1 only");
        spec = KernelSpec::carleman(o.p_demo, o.log_shift);
    } else if (o.kind == "mode-sum") {
        if (o.coeffs.empty())
            throw usage_error("mode-sum needs --coeffs PATH");
        const auto C = load_csv(o.coeffs);
        spec = KernelSpec::mode_sum(to_modes(C), C.lattice.dim());
    } else
        throw usage_error("unknown kernel '" + o.kind + "'");
    if (o.corrupt)
        spec = KernelSpec::diag_corrupt(std::move(spec), {*o.corrupt, o.corrupt_im});
    try {
        validate(spec);
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
    return spec;
}

inline json complex_json(complex z)
{
    return json{{"re", z.real()}, {"im", z.imag()}};
}

inline json kernel_json(const KernelSpec& spec)
{
    json j{{"family", spec.name()}, {"n", spec.dim}};
    if (const auto* f = spec.as<family::ConvPower>())
        j["a"] = f->a;
    else if (const auto* f = spec.as<family::ProductRandom>()) {
        j["a"] = f->a;
        j["b"] = f->b;
        j["seed"] = f->seed;
    } else if (const auto* f = spec.as<family::ConvTable>()) {
        json t = json::array();
        for (const auto& e : f->symbol) {
            json k = json::array();
            for (int i = 0; i < spec.dim; ++i)
                k.push_back(e.k[std::size_t(i)]);
            t.push_back({{"k", k}, {"value", complex_json(e.value)}});
        }
        j["symbol"] = t;
    } else if (const auto* f = spec.as<family::Carleman>()) {
        j["p_demo"] = f->p_demo;
        j["log_shift"] = f->log_shift;
    } else if (const auto* f = spec.as<family::ModeSum>()) {
        j["modes"] = f->modes.size();
    } else if (const auto* f = spec.as<family::DiagCorrupt>()) {
        j["base"] = kernel_json(*f->base);
        j["diagonal_value"] = complex_json(f->value);
    }
    return j;
}

inline json evidence_json(const ConvergenceEvidence& ev)
{
    return json{{"verdict", to_string(ev.verdict)},
                {"cutoffs", ev.cutoffs},
                {"partial_sums", ev.partial_sums},
                {"ratios", ev.ratios},
                {"growth_exponent", ev.growth_exponent}};
}

inline json classifier_json(const ClassifierConfig& cfg)
{
    return json{{"cutoffs", cfg.cutoffs()},
                {"convergent_ratio", cfg.convergent_ratio},
                {"divergent_ratio", cfg.divergent_ratio},
                {"window", cfg.window}};
}

inline std::string timestamp_utc()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json envelope(const std::string& command, const CommonOptions& common)
{
    json prov{{"version", version}, {"seed", common.seed}};
    if (!common.reproducible)
        prov["timestamp"] = timestamp_utc();
    return json{{"schema", schema_version}, {"command", command}, {"provenance", prov}};
}

inline const char* classifier_note =
    "convergence at infinite cutoff is classified from partial sums at geometric cutoffs; "
    "verdicts are calibrated for exponents at least 0.1 from a threshold, boundary cases may be inconclusive";

/// Limit estimate for a convergent series from the last increment ratio.
inline std::optional<double> geometric_limit_estimate(const ConvergenceEvidence& ev)
{
    if (ev.verdict != Convergence::convergent || ev.partial_sums.size() < 2 || ev.ratios.empty())
        return std::nullopt;
    const double r = ev.ratios.back();
    const double last = ev.partial_sums.back();
    const double inc = last - ev.partial_sums[ev.partial_sums.size() - 2];
    if (!(r >= 0 && r < 1))
        return last;
    return last + inc * r / (1.0 - r);
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
    KernelOptions kernel;
    std::optional<int> cutoff;
    double mu1 = 0.0;
    double mu2 = 0.0;
    std::vector<double> ps{1.0, 2.0};
    std::optional<int> spectral_cutoff;
    int jmax = 24;
};

inline int default_cutoff(int n) { return n == 1 ? 1024 : 24; }

/// Observed S_p membership of the kernel's operator.
inline Convergence observed_membership(const KernelSpec& spec, const SpectralSummary& summary, double p,
                                       const ClassifierConfig& cfg)
{
    if (spec.is_convolution())
        return convolution_schatten_classify(spec, p, cfg).verdict;
    if (spec.as<family::ModeSum>() ||
        (spec.as<family::DiagCorrupt>() && spec.as<family::DiagCorrupt>()->base->as<family::ModeSum>()))
        return Convergence::convergent; // finite rank
    if (summary.tail)
        return tail_membership(*summary.tail, p);
    return Convergence::inconclusive;
}

inline CommandResult run_analyze(const AnalyzeOptions& o, const CommonOptions& common)
{
    const KernelSpec spec = make_kernel(o.kernel, common.seed);
    const int n = spec.dim;
    const int N = o.cutoff.value_or(default_cutoff(n));
    if (N < 0)
        throw usage_error("--cutoff must be nonnegative");
    for (double p : o.ps)
        if (!(p > 0))
            throw usage_error("--p values must be positive");
    if (o.mu1 < 0 || o.mu2 < 0)
        throw usage_error("--mu1/--mu2 must be nonnegative");
    if (o.jmax < 0 || o.jmax > DyadicPartition::max_level)
        throw usage_error("--jmax must be in [0, 24]");
    const SobolevOrder ord(o.mu1, o.mu2);
    const auto cfg = default_classifier(n);

    const int spectral_N = spec.is_convolution() ? N : o.spectral_cutoff.value_or(std::min(N, n == 1 ? 256 : 12));

    CommandResult res;
    json& r = res.report;
    r = envelope("analyze", common);
    r["input"] = json{{"kernel", kernel_json(spec)},
                      {"n", n},
                      {"cutoff", N},
                      {"spectral_cutoff", spectral_N},
                      {"mu1", o.mu1},
                      {"mu2", o.mu2},
                      {"p", o.ps},
                      {"seed", common.seed},
                      {"jmax", o.jmax},
                      {"classifier", classifier_json(cfg)}};

    // Sobolev side
    const double c[] = {double(N)};
    const double mixed = std::sqrt(mixed_norm_sq_partial_sums(spec, ord, c).front());
    const auto finiteness = mixed_norm_classify(spec, ord, cfg);
    r["sobolev"] = json{{"mixed_norm", mixed},
                        {"isotropic_norm_min_order", std::sqrt(isotropic_norm_sq_at(spec, std::min(o.mu1, o.mu2), N))},
                        {"isotropic_norm_total_order", std::sqrt(isotropic_norm_sq_at(spec, o.mu1 + o.mu2, N))},
                        {"mixed_norm_finiteness", evidence_json(finiteness)}};
    const bool hypothesis = finiteness.verdict == Convergence::convergent;

    // Prediction
    const auto pred = predict_membership(n, o.mu1, o.mu2, o.ps, true);
    json pv = json::array();
    for (const auto& v : pred.verdicts)
        pv.push_back({{"p", v.p}, {"above_threshold", v.guaranteed}});
    r["prediction"] = json{{"threshold", pred.threshold},
                           {"hypothesis", to_string(finiteness.verdict)},
                           {"above_threshold", pv},
                           {"trace_class_by_order", *pred.trace_class}};

    // Spectrum
    const auto summary = spectral_summary(spec, spectral_N);
    json sv = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(16, summary.singular_values.size()); ++i)
        sv.push_back(summary.singular_values[i]);
    json sch = json::object();
    for (double p : o.ps)
        sch[json(p).dump()] = summary.schatten(p);
    json spectrum{{"source", summary.source},
                  {"cutoff", summary.cutoff},
                  {"count", summary.singular_values.size()},
                  {"leading_singular_values", sv},
                  {"schatten_partial_norms", sch},
                  {"schatten_2", summary.schatten(2.0)}};
    if (summary.tail)
        spectrum["tail_exponent"] = json{{"beta", summary.tail->beta}, {"halfwidth", summary.tail->halfwidth}};
    else
        spectrum["tail_exponent"] = nullptr;
    r["spectrum"] = spectrum;
    for (std::size_t i = 0; i < summary.singular_values.size(); ++i)
        res.plot.emplace_back(double(i + 1), summary.singular_values[i]);

    // Verdicts
    json verdicts = json::array();
    for (const auto& v : pred.verdicts) {
        const bool guaranteed = v.guaranteed && hypothesis;
        const auto observed = observed_membership(spec, summary, v.p, cfg);
        verdicts.push_back({{"p", v.p},
                            {"predicted", guaranteed ? "guaranteed" : "not-covered"},
                            {"observed", to_string(observed)},
                            {"consistent", !(guaranteed && observed == Convergence::divergent)}});
    }
    r["verdicts"] = verdicts;

    // Traces
    const auto trace_observed = observed_membership(spec, summary, 1.0, cfg);
    const bool trace_defined =
        trace_observed == Convergence::convergent || (hypothesis && pred.trace_class.value_or(false));
    json traces{{"trace_class_observed", to_string(trace_observed)}, {"defined", trace_defined}};
    if (trace_defined) {
        const int G = 2 * spectral_N + 1;
        traces["cutoff"] = spectral_N;
        traces["grid"] = G;
        traces["eigensum"] = complex_json(summary.trace_eigensum);
        traces["quadrature"] = complex_json(trace_quadrature(spec, G, spectral_N));
        if (n == 1)
            traces["averaged"] = complex_json(trace_averaged(spec, o.jmax, G, spectral_N));
        else
            traces["averaged"] = "not computed: dyadic averaging is implemented on T^1 only";
    } else {
        traces["note"] = "trace not defined";
    }
    r["traces"] = traces;

    json notes = json::array({classifier_note,
                              "the membership theorem is sufficient, not necessary: observed membership may be "
                              "stronger than predicted"});
    if (spec.as<family::Carleman>())
        notes.push_back("Carleman-type kernel: continuity is evidenced numerically (bounded partial-sum sup norms), "
                        "not proven");
    r["notes"] = notes;
    return res;
}

// ---------------------------------------------------------------------------
// trace

struct TraceOptions {
    KernelOptions kernel;
    std::optional<int> cutoff;
    std::optional<int> grid;
    int jmax = 24;
};

inline CommandResult run_trace(const TraceOptions& o, const CommonOptions& common)
{
    const KernelSpec spec = make_kernel(o.kernel, common.seed);
    if (spec.dim != 1)
        throw usage_error("trace: dyadic averaging is implemented on T^1 only (use --n 1)");
    if (o.jmax < 0 || o.jmax > DyadicPartition::max_level)
        throw usage_error("--jmax must be in [0, 24]");
    const int N = o.cutoff.value_or(spec.is_convolution() ? default_cutoff(1) : 64);
    if (N < 0)
        throw usage_error("--cutoff must be nonnegative");
    const int G = o.grid.value_or(2 * N + 1);
    if (G < 1)
        throw usage_error("--grid must be positive");

    CommandResult res;
    json& r = res.report;
    r = envelope("trace", common);
    r["input"] = json{{"kernel", kernel_json(spec)}, {"cutoff", N}, {"grid", G}, {"jmax", o.jmax}, {"seed", common.seed}};

    const auto cfg = default_classifier(1);
    const auto summary = spectral_summary(spec, N);
    const auto trace_class = observed_membership(spec, summary, 1.0, cfg);
    r["trace_class"] = to_string(trace_class);
    if (trace_class != Convergence::convergent) {
        r["defined"] = false;
        r["note"] = "trace not defined";
        return res;
    }
    r["defined"] = true;
    const complex eig = summary.trace_eigensum;
    const complex naive = trace_quadrature(spec, G, N);
    const complex avg = trace_averaged(spec, o.jmax, G, N);
    r["eigensum"] = complex_json(eig);
    r["naive_quadrature"] = complex_json(naive);
    r["averaged"] = complex_json(avg);
    r["averaged_minus_eigensum"] = std::abs(avg - eig);
    r["naive_minus_eigensum"] = std::abs(naive - eig);
    for (int j = 0; j <= o.jmax; j += 4)
        res.plot.emplace_back(double(j), std::abs(trace_averaged(spec, j, G, N) - eig));
    return res;
}

// ---------------------------------------------------------------------------
// powers

struct PowersOptions {
    std::string model = "torus-laplacian";
    int n = 1;
    double alpha = 1.0;
    double p = 2.0;
    std::optional<long> cutoff;
};

inline EigenSequence make_sequence(const std::string& model, int n)
{
    if (n != 1 && n != 2)
        throw usage_error("--n must be 1 or 2");
    if (model == "torus-laplacian")
        return torus_laplacian_sequence(n);
    if (model == "torus-bilaplacian")
        return torus_bilaplacian_sequence(n);
    throw usage_error("unknown model '" + model + "'");
}

inline CommandResult run_powers(const PowersOptions& o, const CommonOptions& common)
{
    const auto seq = make_sequence(o.model, o.n);
    if (o.alpha < 0)
        throw usage_error("--alpha must be nonnegative");
    if (!(o.p > 0))
        throw usage_error("--p must be positive");
    const auto cfg = default_classifier(o.n);
    const auto res_ps = power_schatten(seq, o.alpha, o.p, cfg);

    CommandResult res;
    json& r = res.report;
    r = envelope("powers", common);
    r["input"] = json{{"model", seq.label}, {"n", seq.dim}, {"order", seq.order}, {"alpha", o.alpha}, {"p", o.p},
                      {"classifier", classifier_json(cfg)}};
    r["q"] = o.alpha * o.p;
    r["analytic_threshold_alpha"] = seq.dim / (o.p * seq.order);
    r["analytic_member"] = res_ps.analytic_member;
    r["classification"] = evidence_json(res_ps.evidence);
    r["partial_norms"] = res_ps.partial_norms;
    r["consistent"] = res_ps.consistent();
    if (const auto lim = geometric_limit_estimate(res_ps.evidence))
        r["limit_estimate"] = *lim;
    if (o.cutoff) {
        if (*o.cutoff < 0)
            throw usage_error("--cutoff must be nonnegative");
        r["partial_sum_at_cutoff"] = json{{"cutoff", *o.cutoff},
                                          {"value", power_partial_sum(seq, o.alpha * o.p, double(*o.cutoff))}};
    }
    r["note"] = classifier_note;
    for (std::size_t i = 0; i < res_ps.evidence.cutoffs.size(); ++i)
        res.plot.emplace_back(res_ps.evidence.cutoffs[i], res_ps.evidence.partial_sums[i]);
    return res;
}

// ---------------------------------------------------------------------------
// su2

struct Su2Options {
    std::string op = "sublaplacian";
    double gamma = 2.0;
    std::string z_sign = "minus";
    double alpha = 2.0;
    double p = 3.0;
    std::string group = "su2";
    double lmax = 512;
    double mu1 = 0.0;
    double mu2 = 0.0;
    std::optional<double> c;
};

inline CommandResult run_su2(const Su2Options& o, const CommonOptions& common)
{
    su2::ZSign sign;
    if (o.z_sign == "minus")
        sign = su2::ZSign::minus;
    else if (o.z_sign == "plus")
        sign = su2::ZSign::plus;
    else
        throw usage_error("--z-sign must be minus or plus");
    su2::InvariantSymbol op;
    if (o.op == "sublaplacian")
        op = su2::InvariantSymbol::sublaplacian();
    else if (o.op == "laplacian")
        op = su2::InvariantSymbol::laplacian();
    else if (o.op == "hgamma")
        op = su2::InvariantSymbol::hgamma(o.gamma, sign);
    else
        throw usage_error("unknown --op '" + o.op + "'");
    su2::Group g;
    if (o.group == "su2")
        g = su2::Group::su2;
    else if (o.group == "so3")
        g = su2::Group::so3;
    else
        throw usage_error("--group must be su2 or so3");

    su2::InvariantSchatten inv;
    try {
        inv = su2::invariant_power_schatten(op, o.alpha, o.p, g, o.lmax);
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
    const auto thr = su2::kernel_membership_threshold_group(3, o.mu1, o.mu2);

    CommandResult res;
    json& r = res.report;
    r = envelope("su2", common);
    json in{{"op", op.name()}, {"group", su2::to_string(g)}, {"alpha", o.alpha}, {"p", o.p}, {"lmax", o.lmax},
            {"mu1", o.mu1}, {"mu2", o.mu2}};
    if (op.kind == su2::InvariantSymbol::Kind::hgamma) {
        in["gamma"] = o.gamma;
        in["z_sign"] = o.z_sign;
    }
    r["input"] = in;
    r["alpha_p"] = o.alpha * o.p;
    r["analytic_threshold_alpha_p"] = op.analytic_threshold();
    r["analytic_member"] = inv.analytic_member;
    r["classification"] = evidence_json(inv.evidence);
    r["consistent"] = inv.consistent();
    r["kernel_thresholds"] = json{{"general", thr.general},
                                  {"refined", thr.refined},
                                  {"sharper", thr.refined_is_sharper() ? "refined" : "equal"},
                                  {"note", "prediction only: non-invariant kernels have no empirical spectrum here"}};
    if (o.c) {
        const auto h = su2::hypoellipticity_check(*o.c, 64);
        json hj{{"c", *o.c}, {"pass", h.pass}, {"scanned_to", h.scanned_to}};
        if (h.witness)
            hj["witness"] = json{{"ell", h.witness->first}, {"m", h.witness->second}};
        r["hypoellipticity"] = hj;
    }
    r["note"] = classifier_note;
    for (std::size_t i = 0; i < inv.evidence.cutoffs.size(); ++i)
        res.plot.emplace_back(inv.evidence.cutoffs[i], inv.evidence.partial_sums[i]);
    return res;
}

// ---------------------------------------------------------------------------
// weyl

struct WeylOptions {
    std::string model = "torus-laplacian";
    int n = 1;
    double lambda = 100;
};

/// Running max_j d_j/(1+lambda_j)^{n/nu} at Lambda = 2^i up to max_lambda,
/// with the log-log slope of that running max.
struct WeylTrend {
    std::vector<std::pair<double, double>> points;
    double slope = 0.0;
};

inline WeylTrend weyl_trend(const EigenSequence& seq, double max_lambda)
{
    WeylTrend t;
    const auto shells = seq.shells(max_lambda);
    const double expo = seq.dim / seq.order;
    double running = 0.0;
    std::size_t next = 0;
    std::vector<double> lx, ly;
    for (double L = 2.0; L <= max_lambda * (1 + 1e-12); L *= 2.0) {
        while (next < shells.size() && shells[next].lambda <= L) {
            running = std::max(running, double(shells[next].multiplicity) / std::pow(1.0 + shells[next].lambda, expo));
            ++next;
        }
        t.points.emplace_back(L, running);
        lx.push_back(std::log(L));
        ly.push_back(std::log(running));
    }
    if (lx.size() >= 2)
        t.slope = fit_line(lx, ly).slope;
    return t;
}

inline CommandResult run_weyl(const WeylOptions& o, const CommonOptions& common)
{
    const auto seq = make_sequence(o.model, o.n);
    if (!(o.lambda >= 0))
        throw usage_error("--lambda must be nonnegative");
    const auto w = weyl_check(seq, o.lambda);
    const auto trend = weyl_trend(seq, o.lambda);

    CommandResult res;
    json& r = res.report;
    r = envelope("weyl", common);
    r["input"] = json{{"model", seq.label}, {"n", seq.dim}, {"order", seq.order}, {"lambda", o.lambda}};
    r["count"] = w.count;
    r["bound_constant"] = w.bound_constant;
    r["bound_exponent"] = seq.dim / seq.order;
    r["bound_trend_slope"] = trend.slope;
    res.plot = trend.points;
    return res;
}

// ---------------------------------------------------------------------------
// carleman

struct CarlemanOptions {
    double log_shift = 64.0;
    double p = 1.0;
    long n_small = 1000;
    long n_large = 1000000;
    long sup_small = 10000;
    long sup_large = 100000;
    int grid = 4096;
};

struct CarlemanDiagnostics {
    complex c1{};
    double l2_small = 0.0;
    double l2_large = 0.0;
    double growth_exponent = 0.0; ///< log-log slope of sum |c_k| over [n_small, n_large]
    double sup_small = 0.0;
    double sup_large = 0.0;
    std::vector<std::pair<double, double>> l1_curve;
};

inline CarlemanDiagnostics carleman_diagnostics(const CarlemanOptions& o)
{
    if (o.n_small < 2 || o.n_large <= o.n_small)
        throw usage_error("need 2 <= --n-small < --n-large");
    if (o.sup_small < 1 || o.sup_large < o.sup_small)
        throw usage_error("need 1 <= --sup-small <= --sup-large");
    if (o.grid < 1)
        throw usage_error("--grid must be positive");
    const long top = std::max(o.n_large, o.sup_large);
    const auto c = carleman_coefficients(top, o.log_shift);
    CarlemanDiagnostics d;
    d.c1 = c.front();

    // log-spaced sample points, ten per decade
    std::vector<long> marks;
    const double decades = std::log10(double(o.n_large) / double(o.n_small));
    const int samples = std::max(2, int(std::lround(10 * decades)) + 1);
    for (int i = 0; i < samples; ++i) {
        const long m = std::lround(double(o.n_small) * std::pow(10.0, decades * i / (samples - 1)));
        if (marks.empty() || m > marks.back())
            marks.push_back(m);
    }
    CompensatedSum l1, l2;
    std::size_t next = 0;
    std::vector<double> lx, ly;
    for (long k = 1; k <= o.n_large; ++k) {
        const double a = std::abs(c[std::size_t(k - 1)]);
        l1.add(a);
        l2.add(a * a);
        if (k == o.n_small)
            d.l2_small = l2.value();
        if (next < marks.size() && k == marks[next]) {
            d.l1_curve.emplace_back(double(k), l1.value());
            lx.push_back(std::log(double(k)));
            ly.push_back(std::log(l1.value()));
            ++next;
        }
    }
    d.l2_large = l2.value();
    d.growth_exponent = fit_line(lx, ly).slope;
    d.sup_small = partial_sum_sup_on_grid(c, std::size_t(o.sup_small), o.grid);
    d.sup_large = partial_sum_sup_on_grid(c, std::size_t(o.sup_large), o.grid);
    return d;
}

inline CommandResult run_carleman(const CarlemanOptions& o, const CommonOptions& common)
{
    if (!(o.p > 0))
        throw usage_error("--p must be positive");
    const auto d = carleman_diagnostics(o);
    const auto spec = KernelSpec::carleman(o.p, o.log_shift);
    const auto cfg = default_classifier(1);

    CommandResult res;
    json& r = res.report;
    r = envelope("carleman", common);
    r["input"] = json{{"log_shift", o.log_shift}, {"p", o.p}, {"n_small", o.n_small}, {"n_large", o.n_large},
                      {"sup_small", o.sup_small}, {"sup_large", o.sup_large}, {"grid", o.grid}};
    r["coefficient_formula"] = "c_k = k^(-1/2) (A + log(k+1))^(-2) exp(i k log k), k >= 1";
    r["c1"] = complex_json(d.c1);
    r["abs_c1"] = std::abs(d.c1);
    r["l2_partial"] = json{{"small", d.l2_small}, {"large", d.l2_large}, {"change", d.l2_large - d.l2_small}};
    r["l1_growth_exponent"] = d.growth_exponent;
    r["sup_norms"] = json{{"small", d.sup_small}, {"large", d.sup_large}, {"ratio", d.sup_large / d.sup_small}};
    r["schatten_p_classification"] = evidence_json(convolution_schatten_classify(spec, o.p, cfg));
    r["note"] = "continuity of the kernel is evidenced numerically (bounded partial-sum sup norms), not proven";
    res.plot = d.l1_curve;
    return res;
}

} // namespace schatlab::cli
