#pragma once

#include <optional>
#include <vector>

#include <Eigen/SVD>

#include "kernels.hpp"
#include "powers.hpp"

namespace schatlab {

/// Matrix of T in the character basis: M[k,m] = H^[k,-m], since
/// (T e_m)(x) = sum_k H^[k,-m] e^{ik.x} under the normalised measure.
inline Eigen::MatrixXcd operator_matrix(const CoefficientMatrix& C)
{
    const auto& L = C.lattice;
    const auto n = Eigen::Index(L.size());
    Eigen::MatrixXcd M(n, n);
    for (Eigen::Index m = 0; m < n; ++m)
        M.col(m) = C.entries.col(Eigen::Index(L.mirror(std::size_t(m))));
    return M;
}

/// Relative cut below which singular values are reported as zero.
inline constexpr double singular_value_floor = 1e-13;

/// Singular values of M, nonincreasing.
inline std::vector<double> singular_values(const Eigen::MatrixXcd& M)
{
    if (M.size() == 0)
        return {};
    if (!M.allFinite())
        throw numerical_error("singular_values: matrix has non-finite entries");
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(M, Eigen::DecompositionOptions(0));
    if (svd.info() != Eigen::Success)
        throw numerical_error("singular_values: SVD did not converge");
    const Eigen::VectorXd& sv = svd.singularValues();
    std::vector<double> s(sv.data(), sv.data() + sv.size());
    std::sort(s.begin(), s.end(), std::greater<>());
    const double cut = s.empty() ? 0.0 : singular_value_floor * s.front();
    for (auto& v : s)
        if (v < cut)
            v = 0.0;
    return s;
}

/// (sum s_j^p)^{1/p}; p = infinity gives s_1.
inline double schatten_norm(std::span<const double> s, double p)
{
    if (!(p > 0))
        throw std::invalid_argument("schatten_norm: p must be positive");
    if (s.empty())
        return 0.0;
    if (std::isinf(p))
        return *std::max_element(s.begin(), s.end());
    double acc = 0.0;
    for (double v : s)
        acc += std::pow(v, p);
    return std::pow(acc, 1.0 / p);
}

struct PExponentVerdict {
    double p = 0.0;
    bool guaranteed = false; ///< p > r*
};

struct MembershipPrediction {
    int dim = 1;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double threshold = 2.0; ///< r* = 2n / (n + 2(mu1 + mu2))
    std::vector<PExponentVerdict> verdicts;
    std::optional<bool> trace_class; ///< mu1 + mu2 > n/2, when queried
};

/// Kernels in the mixed Sobolev space H^{mu1,mu2} on T^n give operators in
/// S_r for every r > 2n/(n + 2(mu1+mu2)), and are trace class once
/// mu1 + mu2 > n/2.
inline MembershipPrediction predict_membership(int n, double mu1, double mu2, std::span<const double> ps = {},
                                               bool trace_class_query = false)
{
    if (n != 1 && n != 2)
        throw std::invalid_argument("predict_membership: n must be 1 or 2");
    if (!(mu1 >= 0) || !(mu2 >= 0))
        throw std::invalid_argument("predict_membership: orders must be nonnegative");
    MembershipPrediction out;
    out.dim = n;
    out.mu1 = mu1;
    out.mu2 = mu2;
    out.threshold = 2.0 * n / (n + 2.0 * (mu1 + mu2));
    for (double p : ps)
        out.verdicts.push_back({p, p > out.threshold});
    if (trace_class_query)
        out.trace_class = (mu1 + mu2) > 0.5 * n;
    return out;
}

struct TailFit {
    double beta = 0.0;      ///< s_j ~ j^{-beta}
    double halfwidth = 0.0; ///< 2 standard errors
};

/// Least-squares slope of log s_j against log j over j in [J/4, J], J the
/// number of positive values (1-based j).
inline TailFit tail_exponent(std::span<const double> s)
{
    std::size_t J = 0;
    for (double v : s)
        if (v > 0)
            ++J;
        else
            break;
    if (J < 16)
        throw numerical_error("tail_exponent: need at least 16 positive singular values, got " + std::to_string(J));
    const std::size_t lo = std::max<std::size_t>(1, J / 4);
    std::vector<double> lx, ly;
    for (std::size_t j = lo; j <= J; ++j) {
        lx.push_back(std::log(double(j)));
        ly.push_back(std::log(s[j - 1]));
    }
    const auto fit = fit_line(lx, ly);
    return {-fit.slope, 2.0 * fit.slope_stderr};
}

/// Evidence about sum s_j^p from a fitted power-law tail.
inline Convergence tail_membership(const TailFit& fit, double p)
{
    if (p * (fit.beta - fit.halfwidth) > 1.0)
        return Convergence::convergent;
    if (p * (fit.beta + fit.halfwidth) < 1.0)
        return Convergence::divergent;
    return Convergence::inconclusive;
}

/// Sum of M[k,k].
inline complex trace_eigensum(const Eigen::MatrixXcd& M)
{
    if (M.rows() != M.cols())
        throw std::invalid_argument("trace_eigensum: matrix must be square");
    complex acc{};
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        acc += M(i, i);
    return acc;
}

/// (1/G^n) sum over the grid of K(x, x), the naive diagonal quadrature.
inline complex trace_quadrature(const KernelSpec& spec, int resolution, std::optional<int> series_cutoff = {})
{
    if (resolution < 1)
        throw std::invalid_argument("trace_quadrature: resolution must be positive");
    complex acc{};
    const int G = resolution;
    if (spec.is_convolution() && !spec.as<family::DiagCorrupt>())
        return diagonal_evaluate(spec, {0.0, 0.0}, series_cutoff); // K(x, x) = kappa(0) everywhere
    if (spec.as<family::ProductRandom>()) {
        // dense series: tabulate H once, then e(x)^T H e(x) per grid point
        const auto C = coefficients(spec, detail::require_cutoff(spec, series_cutoff));
        const auto& L = C.lattice;
        const std::size_t points = spec.dim == 1 ? std::size_t(G) : std::size_t(G) * G;
        std::vector<complex> values(points);
        parallel_for(points, [&](std::size_t g) {
            const Point x{two_pi * double(spec.dim == 1 ? g : g / G) / G, spec.dim == 1 ? 0.0 : two_pi * double(g % G) / G};
            Eigen::VectorXcd e(Eigen::Index(L.size()));
            for (std::size_t i = 0; i < L.size(); ++i)
                e(Eigen::Index(i)) = detail::character(L[i], x);
            values[g] = (e.transpose() * C.entries * e).value();
        });
        for (const auto& v : values)
            acc += v;
        return acc / double(points);
    }
    if (spec.dim == 1) {
        for (int g = 0; g < G; ++g)
            acc += diagonal_evaluate(spec, {two_pi * g / G, 0.0}, series_cutoff);
        return acc / double(G);
    }
    for (int g1 = 0; g1 < G; ++g1)
        for (int g2 = 0; g2 < G; ++g2)
            acc += diagonal_evaluate(spec, {two_pi * g1 / G, two_pi * g2 / G}, series_cutoff);
    return acc / (double(G) * G);
}

struct Lem11Pair {
    double nuclear = 0.0;       ///< ||M||_{S_1}
    double entrywise_l1 = 0.0;  ///< sum |M_ij|
    bool holds() const { return nuclear <= entrywise_l1 * (1.0 + 1e-12) + 1e-14; }
};

/// Finite instance of: summable matrix entries imply trace class.
inline Lem11Pair lem11_check(const Eigen::MatrixXcd& M)
{
    const auto s = singular_values(M);
    Lem11Pair out;
    out.nuclear = schatten_norm(s, 1.0);
    out.entrywise_l1 = M.cwiseAbs().sum();
    return out;
}

struct MultiplicationPair {
    double r = 0.0;   ///< 1/r = 1/p + 1/q
    double lhs = 0.0; ///< ||AB||_{S_r}
    double rhs = 0.0; ///< ||A||_{S_p} ||B||_{S_q}
    bool holds() const { return lhs <= rhs * (1.0 + 1e-12) + 1e-14; }
};

/// S_p S_q in S_r, checked on matrices.
inline MultiplicationPair multiplication_check(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, double p, double q)
{
    if (!(p > 0) || !(q > 0))
        throw std::invalid_argument("multiplication_check: p and q must be positive");
    if (A.cols() != B.rows())
        throw std::invalid_argument("multiplication_check: incompatible shapes");
    MultiplicationPair out;
    out.r = 1.0 / (1.0 / p + 1.0 / q);
    const Eigen::MatrixXcd AB = A * B;
    out.lhs = schatten_norm(singular_values(AB), out.r);
    out.rhs = schatten_norm(singular_values(A), p) * schatten_norm(singular_values(B), q);
    return out;
}

/// ||s||_q <= ||s||_p for 0 < p < q.
inline bool nesting_check(std::span<const double> s, double p, double q)
{
    if (!(p > 0) || !(q > p))
        throw std::invalid_argument("nesting_check: need 0 < p < q");
    return schatten_norm(s, q) <= schatten_norm(s, p) * (1.0 + 1e-12);
}

struct SymbolTracePair {
    double s1_norm = 0.0; ///< nuclear norm of diag(kappa^) by SVD
    double l1_sum = 0.0;  ///< sum |kappa^(k)|
};

/// An invariant operator is trace class iff its symbol is summable; on the
/// truncation the two quantities coincide.
inline SymbolTracePair invariant_s1_equals_symbol_l1(std::span<const complex> kappa_hat)
{
    const auto n = Eigen::Index(kappa_hat.size());
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n, n);
    SymbolTracePair out;
    for (Eigen::Index i = 0; i < n; ++i) {
        D(i, i) = kappa_hat[std::size_t(i)];
        out.l1_sum += std::abs(kappa_hat[std::size_t(i)]);
    }
    out.s1_norm = schatten_norm(singular_values(D), 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// Spectra of kernel families

/// |kappa^(k)| over the lattice of the given cutoff, nonincreasing. For
/// convolution kernels these are exactly the singular values.
inline std::vector<double> convolution_spectrum(const KernelSpec& spec, int cutoff)
{
    if (!spec.is_convolution())
        throw std::invalid_argument("convolution_spectrum: " + spec.name() + " is not a convolution kernel");
    const auto L = build_lattice(spec.dim, cutoff);
    std::vector<double> s;
    s.reserve(L.size());
    for (const auto& k : L.indices())
        s.push_back(std::abs(*symbol(spec, k)));
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
}

/// sum_{|k|_inf <= N} |kappa^(k)|^p at each cutoff.
inline std::vector<double> convolution_schatten_partial_sums(const KernelSpec& spec, double p,
                                                             std::span<const double> cutoffs)
{
    if (!spec.is_convolution())
        throw std::invalid_argument("convolution_schatten_partial_sums: not a convolution kernel");
    if (!(p > 0))
        throw std::invalid_argument("convolution_schatten_partial_sums: p must be positive");
    return box_partial_sums(spec.dim, cutoffs, [&](const Frequency& k) {
        const double a = std::abs(*symbol(spec, k));
        return a == 0.0 ? 0.0 : std::pow(a, p);
    });
}

/// Classifies sum s_j^p for a convolution kernel from exact symbol sums.
inline ConvergenceEvidence convolution_schatten_classify(const KernelSpec& spec, double p,
                                                         const ClassifierConfig& cfg)
{
    const auto cut = cfg.cutoffs();
    return classify_partial_sums(cut, convolution_schatten_partial_sums(spec, p, cut), cfg);
}

inline ConvergenceEvidence convolution_schatten_classify(const KernelSpec& spec, double p)
{
    return convolution_schatten_classify(spec, p, default_classifier(spec.dim));
}

struct SpectralSummary {
    int cutoff = 0;
    std::vector<double> singular_values;
    complex trace_eigensum{};
    std::optional<TailFit> tail;
    std::string source; ///< "symbol" or "svd"

    double schatten(double p) const { return schatten_norm(singular_values, p); }
};

/// Spectrum of the truncated operator. Convolution kernels use their symbol
/// directly; other families go through the SVD of the operator matrix.
inline SpectralSummary spectral_summary(const KernelSpec& spec, int cutoff)
{
    validate(spec);
    SpectralSummary out;
    out.cutoff = cutoff;
    if (spec.is_convolution()) {
        out.singular_values = convolution_spectrum(spec, cutoff);
        out.source = "symbol";
        const auto L = build_lattice(spec.dim, cutoff);
        for (const auto& k : L.indices())
            out.trace_eigensum += *symbol(spec, k);
    } else {
        const auto M = operator_matrix(coefficients(spec, cutoff));
        out.singular_values = singular_values(M);
        out.trace_eigensum = trace_eigensum(M);
        out.source = "svd";
    }
    try {
        out.tail = tail_exponent(out.singular_values);
    } catch (const numerical_error&) {
        out.tail.reset();
    }
    return out;
}

} // namespace schatlab
