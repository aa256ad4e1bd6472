#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "common.hpp"
#include "torus_fourier.hpp"

namespace schatlab {

// ---------------------------------------------------------------------------
// Geometric-cutoff convergence classifier

enum class Convergence { convergent, divergent, inconclusive };

inline std::string to_string(Convergence c)
{
    switch (c) {
    case Convergence::convergent: return "convergent";
    case Convergence::divergent: return "divergent";
    default: return "inconclusive";
    }
}

/// Partial sums are taken at cutoffs first * growth^i, i = 0..steps-1. The
/// verdict looks at the last `window` increment ratios D_i / D_{i-1}: all
/// <= convergent_ratio means convergent, all >= divergent_ratio divergent.
/// No finite computation decides convergence; this is calibrated to be right
/// for power-law tails whose exponent is at least 0.1 away from the boundary.
struct ClassifierConfig {
    double first_cutoff = 64;
    double growth = 4;
    int steps = 6;
    double convergent_ratio = 0.9;
    double divergent_ratio = 0.95;
    int window = 3;

    std::vector<double> cutoffs() const
    {
        std::vector<double> out(std::size_t(std::max(steps, 0)));
        double c = first_cutoff;
        for (auto& v : out) {
            v = std::floor(c + 0.5);
            c *= growth;
        }
        return out;
    }

    /// Same ladder, but ending exactly at `last`.
    static ClassifierConfig ending_at(double last, int steps = 5, double growth = 4)
    {
        ClassifierConfig cfg;
        cfg.steps = steps;
        cfg.growth = growth;
        cfg.first_cutoff = last / std::pow(growth, steps - 1);
        return cfg;
    }
};

/// Default ladders: 64..65536 on T^1, 16..4096 on T^2 (box sums are quadratic
/// in the cutoff there).
inline ClassifierConfig default_classifier(int dim)
{
    ClassifierConfig cfg;
    if (dim == 2) {
        cfg.first_cutoff = 16;
        cfg.steps = 5;
    }
    return cfg;
}

struct ConvergenceEvidence {
    Convergence verdict = Convergence::inconclusive;
    std::vector<double> cutoffs;
    std::vector<double> partial_sums;
    std::vector<double> ratios;   ///< D_i / D_{i-1}, i = 2..steps-1
    double growth_exponent = 0.0; ///< log-log slope of the partial sums
};

inline ConvergenceEvidence classify_partial_sums(std::span<const double> cutoffs, std::span<const double> sums,
                                                 const ClassifierConfig& cfg = {})
{
    if (cutoffs.size() != sums.size())
        throw std::invalid_argument("classify_partial_sums: size mismatch");
    if (sums.size() < 3)
        throw std::invalid_argument("classify_partial_sums: need at least three cutoffs");
    ConvergenceEvidence ev;
    ev.cutoffs.assign(cutoffs.begin(), cutoffs.end());
    ev.partial_sums.assign(sums.begin(), sums.end());

    double scale = 0.0;
    for (double s : sums) {
        if (!std::isfinite(s))
            throw numerical_error("classify_partial_sums: non-finite partial sum");
        scale = std::max(scale, std::abs(s));
    }
    const double tiny = 1e-14 * scale;
    std::vector<double> inc(sums.size() - 1);
    for (std::size_t i = 1; i < sums.size(); ++i)
        inc[i - 1] = std::abs(sums[i] - sums[i - 1]) <= tiny ? 0.0 : sums[i] - sums[i - 1];
    for (std::size_t i = 1; i < inc.size(); ++i) {
        if (inc[i - 1] == 0.0)
            ev.ratios.push_back(inc[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        else
            ev.ratios.push_back(inc[i] / inc[i - 1]);
    }

    const std::size_t window = std::min<std::size_t>(std::size_t(std::max(cfg.window, 1)), ev.ratios.size());
    bool all_small = true, all_large = true;
    for (std::size_t i = ev.ratios.size() - window; i < ev.ratios.size(); ++i) {
        all_small = all_small && ev.ratios[i] <= cfg.convergent_ratio;
        all_large = all_large && ev.ratios[i] >= cfg.divergent_ratio;
    }
    ev.verdict = all_small ? Convergence::convergent : all_large ? Convergence::divergent : Convergence::inconclusive;

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < sums.size(); ++i)
        if (sums[i] > 0 && cutoffs[i] > 0) {
            lx.push_back(std::log(cutoffs[i]));
            ly.push_back(std::log(sums[i]));
        }
    if (lx.size() >= 2)
        ev.growth_exponent = fit_line(lx, ly).slope;
    return ev;
}

/// Runs the classifier on F(N) evaluated at the configured cutoffs.
template <class PartialSum>
ConvergenceEvidence classify_series(PartialSum&& partial_sum, const ClassifierConfig& cfg = {})
{
    const auto cut = cfg.cutoffs();
    std::vector<double> sums;
    sums.reserve(cut.size());
    for (double N : cut)
        sums.push_back(partial_sum(N));
    return classify_partial_sums(cut, sums, cfg);
}

// ---------------------------------------------------------------------------
// Lattice box sums

namespace detail {

inline std::size_t bucket_of(long radius, std::span<const long> cut)
{
    return std::size_t(std::lower_bound(cut.begin(), cut.end(), radius) - cut.begin());
}

inline std::vector<long> integer_cutoffs(std::span<const double> cutoffs)
{
    std::vector<long> cut;
    for (double c : cutoffs) {
        if (c < 0)
            throw std::invalid_argument("lattice sums: negative cutoff");
        cut.push_back(long(std::floor(c)));
    }
    if (!std::is_sorted(cut.begin(), cut.end()))
        throw std::invalid_argument("lattice sums: cutoffs must be nondecreasing");
    return cut;
}

inline std::vector<double> accumulate_buckets(const std::vector<CompensatedSum>& buckets, std::size_t n)
{
    std::vector<double> out(n);
    CompensatedSum running;
    for (std::size_t i = 0; i < n; ++i) {
        running.add(buckets[i].value());
        out[i] = running.value();
    }
    return out;
}

} // namespace detail

/// sum_{|k|_inf <= N} g(k) for every N in `cutoffs` (one pass).
template <class Fn>
std::vector<double> box_partial_sums(int dim, std::span<const double> cutoffs, Fn&& g)
{
    const auto cut = detail::integer_cutoffs(cutoffs);
    if (cut.empty())
        return {};
    const long R = cut.back();
    std::vector<CompensatedSum> buckets(cut.size() + 1);
    if (dim == 1) {
        for (long k = -R; k <= R; ++k)
            buckets[detail::bucket_of(std::abs(k), cut)].add(g(Frequency{int(k), 0}));
    } else if (dim == 2) {
        for (long k1 = -R; k1 <= R; ++k1)
            for (long k2 = -R; k2 <= R; ++k2)
                buckets[detail::bucket_of(std::max(std::abs(k1), std::abs(k2)), cut)].add(
                    g(Frequency{int(k1), int(k2)}));
    } else {
        throw std::invalid_argument("box_partial_sums: unsupported dimension");
    }
    return detail::accumulate_buckets(buckets, cut.size());
}

/// As box_partial_sums for g depending only on |k|^2; sums one quadrant with
/// symmetry weights.
template <class Fn>
std::vector<double> radial_box_partial_sums(int dim, std::span<const double> cutoffs, Fn&& h)
{
    const auto cut = detail::integer_cutoffs(cutoffs);
    if (cut.empty())
        return {};
    const long R = cut.back();
    std::vector<CompensatedSum> buckets(cut.size() + 1);
    if (dim == 1) {
        for (long k = 0; k <= R; ++k)
            buckets[detail::bucket_of(k, cut)].add((k > 0 ? 2.0 : 1.0) * h(k * k));
    } else if (dim == 2) {
        // octant k2 <= k1; off-diagonal points also stand for their mirror
        for (long k1 = 0; k1 <= R; ++k1) {
            auto& bucket = buckets[detail::bucket_of(k1, cut)];
            const double w1 = k1 > 0 ? 2.0 : 1.0;
            for (long k2 = 0; k2 <= k1; ++k2) {
                const double w = w1 * (k2 > 0 ? 2.0 : 1.0) * (k2 < k1 ? 2.0 : 1.0);
                bucket.add(w * h(k1 * k1 + k2 * k2));
            }
        }
    } else {
        throw std::invalid_argument("radial_box_partial_sums: unsupported dimension");
    }
    return detail::accumulate_buckets(buckets, cut.size());
}

// ---------------------------------------------------------------------------
// Model eigenvalue sequences

enum class TorusModel { laplacian, bilaplacian };

struct Shell {
    double lambda = 0.0;
    long multiplicity = 0;
};

/// Eigenvalues of -Laplacian (|k|^2, order 2) or the bi-Laplacian (|k|^4,
/// order 4) on T^n, with multiplicities counted by exact lattice enumeration.
struct EigenSequence {
    std::string label;
    TorusModel model = TorusModel::laplacian;
    int dim = 1;
    double order = 2.0;

    double eigenvalue_of_norm2(long m) const
    {
        return model == TorusModel::laplacian ? double(m) : double(m) * double(m);
    }
    double eigenvalue(const Frequency& k) const { return eigenvalue_of_norm2(squared_norm(k)); }

    /// All shells with lambda <= max_lambda, increasing.
    std::vector<Shell> shells(double max_lambda) const
    {
        if (max_lambda < 0)
            return {};
        const double m_limit = model == TorusModel::laplacian ? max_lambda : std::sqrt(max_lambda);
        const long M = long(std::floor(m_limit + 1e-9));
        std::vector<long> count(std::size_t(M) + 1, 0);
        const long r = long(std::floor(std::sqrt(double(M)) + 1e-9)) + 1;
        if (dim == 1) {
            for (long k = -r; k <= r; ++k)
                if (k * k <= M)
                    ++count[std::size_t(k * k)];
        } else {
            for (long k1 = -r; k1 <= r; ++k1)
                for (long k2 = -r; k2 <= r; ++k2) {
                    const long m = k1 * k1 + k2 * k2;
                    if (m <= M)
                        ++count[std::size_t(m)];
                }
        }
        std::vector<Shell> out;
        for (long m = 0; m <= M; ++m)
            if (count[std::size_t(m)] > 0)
                out.push_back({eigenvalue_of_norm2(m), count[std::size_t(m)]});
        return out;
    }
};

inline EigenSequence torus_laplacian_sequence(int n)
{
    if (n != 1 && n != 2)
        throw std::invalid_argument("torus_laplacian_sequence: n must be 1 or 2");
    return {"torus-laplacian", TorusModel::laplacian, n, 2.0};
}

inline EigenSequence torus_bilaplacian_sequence(int n)
{
    if (n != 1 && n != 2)
        throw std::invalid_argument("torus_bilaplacian_sequence: n must be 1 or 2");
    return {"torus-bilaplacian", TorusModel::bilaplacian, n, 4.0};
}

struct WeylCheck {
    long count = 0;              ///< sum_{lambda_j <= Lambda} d_j
    double bound_constant = 0.0; ///< max_j d_j / (1 + lambda_j)^{n/nu}
};

inline WeylCheck weyl_check(const EigenSequence& seq, double max_lambda)
{
    WeylCheck out;
    const double expo = seq.dim / seq.order;
    for (const auto& s : seq.shells(max_lambda)) {
        out.count += s.multiplicity;
        out.bound_constant = std::max(out.bound_constant, double(s.multiplicity) / std::pow(1.0 + s.lambda, expo));
    }
    return out;
}

/// sum_{|k|_inf <= N} (1 + lambda_k)^{-q} at each cutoff.
inline std::vector<double> power_partial_sums(const EigenSequence& seq, double q, std::span<const double> cutoffs)
{
    return radial_box_partial_sums(seq.dim, cutoffs,
                                   [&](long m) { return std::pow(1.0 + seq.eigenvalue_of_norm2(m), -q); });
}

inline double power_partial_sum(const EigenSequence& seq, double q, double cutoff)
{
    const double c[] = {cutoff};
    return power_partial_sums(seq, q, c).front();
}

/// Classifies sum_j d_j (1 + lambda_j)^{-q}; converges iff q > n/nu.
inline ConvergenceEvidence summability_classify(const EigenSequence& seq, double q, const ClassifierConfig& cfg)
{
    const auto cut = cfg.cutoffs();
    return classify_partial_sums(cut, power_partial_sums(seq, q, cut), cfg);
}

inline ConvergenceEvidence summability_classify(const EigenSequence& seq, double q)
{
    return summability_classify(seq, q, default_classifier(seq.dim));
}

struct PowerSchatten {
    double alpha = 0.0;
    double p = 0.0;
    ConvergenceEvidence evidence;     ///< on sum d_j (1+lambda_j)^{-alpha p}
    std::vector<double> partial_norms; ///< (partial sum)^{1/p}
    bool analytic_member = false;     ///< alpha > n/(p nu)
    bool consistent() const
    {
        return evidence.verdict == Convergence::inconclusive ||
               (evidence.verdict == Convergence::convergent) == analytic_member;
    }
};

/// Membership of (I + E)^{-alpha} in S_p for a model operator E.
inline PowerSchatten power_schatten(const EigenSequence& seq, double alpha, double p, const ClassifierConfig& cfg)
{
    if (alpha < 0)
        throw std::invalid_argument("power_schatten: alpha must be nonnegative");
    if (!(p > 0))
        throw std::invalid_argument("power_schatten: p must be positive");
    PowerSchatten out;
    out.alpha = alpha;
    out.p = p;
    out.evidence = summability_classify(seq, alpha * p, cfg);
    for (double s : out.evidence.partial_sums)
        out.partial_norms.push_back(std::pow(s, 1.0 / p));
    out.analytic_member = alpha > seq.dim / (p * seq.order);
    return out;
}

inline PowerSchatten power_schatten(const EigenSequence& seq, double alpha, double p)
{
    return power_schatten(seq, alpha, p, default_classifier(seq.dim));
}

} // namespace schatlab
