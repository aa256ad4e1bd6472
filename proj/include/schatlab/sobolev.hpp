#pragma once

#include "kernels.hpp"
#include "powers.hpp"

namespace schatlab {

/// Regularity orders in x and y; weights use the Laplacian (order 2).
struct SobolevOrder {
    double mu1 = 0.0;
    double mu2 = 0.0;

    SobolevOrder() = default;
    SobolevOrder(double m1, double m2) : mu1(m1), mu2(m2)
    {
        if (!(m1 >= 0) || !(m2 >= 0))
            throw std::invalid_argument("SobolevOrder: orders must be nonnegative");
    }
    double total() const { return mu1 + mu2; }
};

inline double mixed_weight(double lambda_k, double lambda_l, const SobolevOrder& ord)
{
    return std::pow(1.0 + lambda_k, ord.mu1) * std::pow(1.0 + lambda_l, ord.mu2);
}

inline double isotropic_weight(double lambda_k, double lambda_l, double mu)
{
    return std::pow(1.0 + lambda_k + lambda_l, mu);
}

/// ( sum (1+|k|^2)^mu1 (1+|l|^2)^mu2 |H^[k,l]|^2 )^{1/2}.
inline double mixed_norm(const CoefficientMatrix& C, const SobolevOrder& ord)
{
    const auto& L = C.lattice;
    double acc = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i)
        for (std::size_t j = 0; j < L.size(); ++j) {
            const double a2 = std::norm(C.entries(Eigen::Index(i), Eigen::Index(j)));
            if (a2 != 0.0)
                acc += mixed_weight(double(L.eigenvalue(i)), double(L.eigenvalue(j)), ord) * a2;
        }
    return std::sqrt(acc);
}

/// ( sum (1+|k|^2+|l|^2)^mu |H^[k,l]|^2 )^{1/2}.
inline double isotropic_norm(const CoefficientMatrix& C, double mu)
{
    if (!(mu >= 0))
        throw std::invalid_argument("isotropic_norm: mu must be nonnegative");
    const auto& L = C.lattice;
    double acc = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i)
        for (std::size_t j = 0; j < L.size(); ++j) {
            const double a2 = std::norm(C.entries(Eigen::Index(i), Eigen::Index(j)));
            if (a2 != 0.0)
                acc += isotropic_weight(double(L.eigenvalue(i)), double(L.eigenvalue(j)), mu) * a2;
        }
    return std::sqrt(acc);
}

struct InclusionWeights {
    double lo = 0.0;  ///< (1+a+b)^{min(mu1,mu2)}
    double mid = 0.0; ///< (1+a)^mu1 (1+b)^mu2
    double hi = 0.0;  ///< (1+a+b)^{mu1+mu2}
    bool ordered() const { return lo <= mid && mid <= hi; }
};

/// Pointwise weights behind H^{mu1+mu2} in H^{mu1,mu2} in H^{min(mu1,mu2)}.
inline InclusionWeights inclusion_weight_check(double a, double b, const SobolevOrder& ord)
{
    if (!(a >= 0) || !(b >= 0))
        throw std::invalid_argument("inclusion_weight_check: eigenvalues must be nonnegative");
    return {std::pow(1.0 + a + b, std::min(ord.mu1, ord.mu2)), mixed_weight(a, b, ord),
            std::pow(1.0 + a + b, ord.total())};
}

struct EllipticRatioBounds {
    double min_ratio = 1.0;
    double max_ratio = 1.0;
    double norm_first = 0.0;  ///< isotropic norm with weights of (I - Laplacian)^2
    double norm_second = 0.0; ///< isotropic norm with weights of I + Laplacian^2
};

/// Compares the order-4 elliptic weights (1+t)^mu and (1+t^2)^{mu/2},
/// t = |k|^2 + |l|^2, over every index pair of the lattice.
inline EllipticRatioBounds elliptic_equivalence_check(const CoefficientMatrix& C, double mu)
{
    if (!(mu >= 0))
        throw std::invalid_argument("elliptic_equivalence_check: mu must be nonnegative");
    const auto& L = C.lattice;
    EllipticRatioBounds out;
    out.min_ratio = std::numeric_limits<double>::infinity();
    out.max_ratio = 0.0;
    double n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i)
        for (std::size_t j = 0; j < L.size(); ++j) {
            const double t = double(L.eigenvalue(i) + L.eigenvalue(j));
            const double w1 = std::pow(1.0 + t, mu);
            const double w2 = std::pow(1.0 + t * t, 0.5 * mu);
            const double r = w1 / w2;
            out.min_ratio = std::min(out.min_ratio, r);
            out.max_ratio = std::max(out.max_ratio, r);
            const double a2 = std::norm(C.entries(Eigen::Index(i), Eigen::Index(j)));
            n1 += w1 * a2;
            n2 += w2 * a2;
        }
    out.norm_first = std::sqrt(n1);
    out.norm_second = std::sqrt(n2);
    return out;
}

// ---------------------------------------------------------------------------
// Norm finiteness at infinite cutoff

/// Squared mixed norm at cutoffs, computed from the family's structure
/// (no dense matrix): diagonal for convolutions, a product of two 1-D sums
/// for product_random, the mode list for mode_sum.
inline std::vector<double> mixed_norm_sq_partial_sums(const KernelSpec& spec, const SobolevOrder& ord,
                                                      std::span<const double> cutoffs)
{
    validate(spec);
    if (const auto* dc = spec.as<family::DiagCorrupt>())
        return mixed_norm_sq_partial_sums(*dc->base, ord, cutoffs);

    if (spec.is_convolution()) {
        return box_partial_sums(spec.dim, cutoffs, [&](const Frequency& k) {
            const double a2 = std::norm(*symbol(spec, k));
            if (a2 == 0.0)
                return 0.0;
            const double lam = double(squared_norm(k));
            return mixed_weight(lam, lam, ord) * a2;
        });
    }
    if (const auto* f = spec.as<family::ProductRandom>()) {
        auto axis = [&](double decay, double mu) {
            return radial_box_partial_sums(spec.dim, cutoffs, [&](long m) {
                return std::pow(1.0 + double(m), mu) * std::pow(1.0 + std::sqrt(double(m)), -2.0 * decay);
            });
        };
        const auto xs = axis(f->a, ord.mu1);
        const auto ys = axis(f->b, ord.mu2);
        std::vector<double> out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            out[i] = xs[i] * ys[i];
        return out;
    }
    if (const auto* f = spec.as<family::ModeSum>()) {
        std::vector<double> out;
        for (double N : cutoffs) {
            double acc = 0.0;
            for (const auto& m : f->modes)
                if (max_norm(m.k) <= N && max_norm(m.l) <= N)
                    acc += mixed_weight(double(squared_norm(m.k)), double(squared_norm(m.l)), ord) * std::norm(m.value);
            out.push_back(acc);
        }
        return out;
    }
    throw std::invalid_argument("mixed_norm_sq_partial_sums: unsupported family");
}

/// Decides whether the mixed norm is finite by classifying its squared
/// partial sums over geometric cutoffs.
inline ConvergenceEvidence mixed_norm_classify(const KernelSpec& spec, const SobolevOrder& ord,
                                               const ClassifierConfig& cfg)
{
    const auto cut = cfg.cutoffs();
    return classify_partial_sums(cut, mixed_norm_sq_partial_sums(spec, ord, cut), cfg);
}

inline ConvergenceEvidence mixed_norm_classify(const KernelSpec& spec, const SobolevOrder& ord)
{
    return mixed_norm_classify(spec, ord, default_classifier(spec.dim));
}

/// Squared isotropic norm at one cutoff, from the family's structure.
inline double isotropic_norm_sq_at(const KernelSpec& spec, double mu, int cutoff)
{
    validate(spec);
    if (!(mu >= 0))
        throw std::invalid_argument("isotropic_norm_sq_at: mu must be nonnegative");
    if (const auto* dc = spec.as<family::DiagCorrupt>())
        return isotropic_norm_sq_at(*dc->base, mu, cutoff);
    const double c[] = {double(cutoff)};
    if (spec.is_convolution()) {
        return box_partial_sums(spec.dim, c, [&](const Frequency& k) {
            const double a2 = std::norm(*symbol(spec, k));
            const double lam = double(squared_norm(k));
            return a2 == 0.0 ? 0.0 : isotropic_weight(lam, lam, mu) * a2;
        }).front();
    }
    if (const auto* f = spec.as<family::ModeSum>()) {
        double acc = 0.0;
        for (const auto& m : f->modes)
            if (max_norm(m.k) <= cutoff && max_norm(m.l) <= cutoff)
                acc += isotropic_weight(double(squared_norm(m.k)), double(squared_norm(m.l)), mu) * std::norm(m.value);
        return acc;
    }
    const auto L = build_lattice(spec.dim, cutoff);
    CompensatedSum acc;
    for (const auto& k : L.indices())
        for (const auto& l : L.indices())
            acc.add(isotropic_weight(double(squared_norm(k)), double(squared_norm(l)), mu) *
                    std::norm(coefficient(spec, k, l)));
    return acc.value();
}

// ---------------------------------------------------------------------------
// Absolute summability of coefficients

/// Partial sums of sum_{k,l} |H^[k,l]| for H^[k,l] = (1 + k^2 + l^2)^{-s} on
/// T^1 x T^1, over boxes max(|k|,|l|) <= N.
inline std::vector<double> decay_kernel_l1_partial_sums(double s, std::span<const double> cutoffs)
{
    return radial_box_partial_sums(2, cutoffs, [&](long m) { return std::pow(1.0 + double(m), -s); });
}

/// Squared H^nu norm of the same kernel, weight (1 + k^2 + l^2)^nu.
inline std::vector<double> decay_kernel_sobolev_sq_partial_sums(double s, double nu, std::span<const double> cutoffs)
{
    return radial_box_partial_sums(2, cutoffs, [&](long m) { return std::pow(1.0 + double(m), nu - 2.0 * s); });
}

inline ConvergenceEvidence decay_kernel_l1_classify(double s, const ClassifierConfig& cfg = default_classifier(2))
{
    const auto cut = cfg.cutoffs();
    return classify_partial_sums(cut, decay_kernel_l1_partial_sums(s, cut), cfg);
}

inline ConvergenceEvidence decay_kernel_sobolev_classify(double s, double nu,
                                                         const ClassifierConfig& cfg = default_classifier(2))
{
    if (!(nu >= 0))
        throw std::invalid_argument("decay_kernel_sobolev_classify: nu must be nonnegative");
    const auto cut = cfg.cutoffs();
    return classify_partial_sums(cut, decay_kernel_sobolev_sq_partial_sums(s, nu, cut), cfg);
}

} // namespace schatlab
