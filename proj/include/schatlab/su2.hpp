#pragma once

#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "powers.hpp"

namespace schatlab::su2 {

enum class Group { su2, so3 };

inline std::string to_string(Group g) { return g == Group::su2 ? "su2" : "so3"; }

/// Representation class [t^ell]; ell is stored doubled so half-integers are
/// exact.
struct DualPoint {
    int two_ell = 0;

    static DualPoint from_ell(double ell)
    {
        const double t = 2.0 * ell;
        if (!(ell >= 0) || t != std::floor(t))
            throw std::invalid_argument("DualPoint: ell must be a nonnegative half-integer");
        return {int(t)};
    }

    double ell() const { return 0.5 * two_ell; }
    int dimension() const { return two_ell + 1; }
    double laplace_eig() const { return ell() * (ell() + 1.0); }
    bool integral() const { return two_ell % 2 == 0; }

    /// m = -ell, -ell+1, ..., ell.
    double m(int index) const { return -ell() + index; }
};

inline void require_member(Group g, DualPoint xi)
{
    if (xi.two_ell < 0)
        throw std::invalid_argument("su2: negative ell");
    if (g == Group::so3 && !xi.integral())
        throw std::invalid_argument("su2: SO(3) has integer ell only");
}

/// Sign of the iZ term: Z = iJ_z gives iZ = -J_z (minus, reproduces the
/// hypoellipticity set at gamma = 1); plus flips m -> -m.
enum class ZSign { minus, plus };

/// sigma(-L_sub)(ell, m) = ell(ell+1) - m^2, indexed by increasing m.
inline std::vector<double> sublaplacian_symbol(DualPoint xi)
{
    std::vector<double> out(std::size_t(xi.dimension()));
    for (int i = 0; i < xi.dimension(); ++i)
        out[std::size_t(i)] = xi.laplace_eig() - xi.m(i) * xi.m(i);
    return out;
}

inline std::vector<double> laplacian_symbol(DualPoint xi)
{
    return std::vector<double>(std::size_t(xi.dimension()), xi.laplace_eig());
}

/// sigma(H_gamma)(ell, m) = gamma (ell(ell+1) - m^2) -+ m for
/// H_gamma = iZ - gamma(X^2 + Y^2).
inline std::vector<double> hgamma_symbol(double gamma, DualPoint xi, ZSign sign = ZSign::minus)
{
    if (!(gamma > 0))
        throw std::invalid_argument("hgamma_symbol: gamma must be positive");
    auto out = sublaplacian_symbol(xi);
    const double s = sign == ZSign::minus ? -1.0 : 1.0;
    for (int i = 0; i < xi.dimension(); ++i)
        out[std::size_t(i)] = gamma * out[std::size_t(i)] + s * xi.m(i);
    return out;
}

/// Eigenvalues of -J_z + gamma (J_x^2 + J_y^2) in the spin-ell
/// representation, found numerically from ladder-operator matrices.
inline std::vector<double> hgamma_matrix_oracle(double gamma, DualPoint xi, ZSign sign = ZSign::minus)
{
    if (xi.two_ell > 100)
        throw std::invalid_argument("hgamma_matrix_oracle: ell must be <= 50");
    const int d = xi.dimension();
    const double ell = xi.ell();
    using Mat = Eigen::MatrixXcd;
    Mat Jz = Mat::Zero(d, d), Jp = Mat::Zero(d, d);
    // basis |ell, m>, m = ell, ell-1, ..., -ell
    for (int r = 0; r < d; ++r) {
        const double m = ell - r;
        Jz(r, r) = m;
        if (r > 0) // J+ |m> = sqrt(ell(ell+1) - m(m+1)) |m+1>
            Jp(r - 1, r) = std::sqrt(ell * (ell + 1.0) - m * (m + 1.0));
    }
    const Mat Jm = Jp.adjoint();
    const Mat Jx = 0.5 * (Jp + Jm);
    const Mat Jy = complex(0.0, -0.5) * (Jp - Jm);
    const double s = sign == ZSign::minus ? -1.0 : 1.0;
    const Mat H = s * Jz + gamma * (Jx * Jx + Jy * Jy);
    Eigen::SelfAdjointEigenSolver<Mat> solver(H, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw numerical_error("hgamma_matrix_oracle: diagonalisation failed");
    const Eigen::VectorXd& ev = solver.eigenvalues();
    std::vector<double> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end());
    return out;
}

/// Left-invariant operator given by a diagonal symbol.
struct InvariantSymbol {
    enum class Kind { laplacian, sublaplacian, hgamma };
    Kind kind = Kind::sublaplacian;
    double gamma = 1.0;
    ZSign sign = ZSign::minus;

    static InvariantSymbol laplacian() { return {Kind::laplacian}; }
    static InvariantSymbol sublaplacian() { return {Kind::sublaplacian}; }
    static InvariantSymbol hgamma(double g, ZSign s = ZSign::minus) { return {Kind::hgamma, g, s}; }

    std::vector<double> eigenvalues(DualPoint xi) const
    {
        switch (kind) {
        case Kind::laplacian: return laplacian_symbol(xi);
        case Kind::sublaplacian: return sublaplacian_symbol(xi);
        default: return hgamma_symbol(gamma, xi, sign);
        }
    }

    /// alpha p above which (I + A)^{-alpha/2} is in S_p: the Laplacian is
    /// elliptic (3 = dim), the sub-Laplacian and H_gamma lose one order.
    double analytic_threshold() const { return kind == Kind::laplacian ? 3.0 : 4.0; }

    std::string name() const
    {
        switch (kind) {
        case Kind::laplacian: return "laplacian";
        case Kind::sublaplacian: return "sublaplacian";
        default: return "hgamma";
        }
    }
};

/// sum over ell <= cutoff (in the group's dual) of
/// (2 ell + 1) sum_m |1 + sigma(ell, m)|^{-q}, for each cutoff.
inline std::vector<double> invariant_partial_sums(const InvariantSymbol& op, double q, Group g,
                                                  std::span<const double> cutoffs)
{
    if (cutoffs.empty())
        return {};
    if (!std::is_sorted(cutoffs.begin(), cutoffs.end()))
        throw std::invalid_argument("invariant_partial_sums: cutoffs must be nondecreasing");
    const int max_two_ell = int(std::floor(2.0 * cutoffs.back() + 1e-9));
    const int stride = g == Group::su2 ? 1 : 2;
    std::vector<int> shells;
    for (int t = 0; t <= max_two_ell; t += stride)
        shells.push_back(t);

    std::vector<double> shell_sum(shells.size());
    parallel_for(shells.size(), [&](std::size_t i) {
        const DualPoint xi{shells[i]};
        CompensatedSum acc;
        for (double s : op.eigenvalues(xi))
            acc.add(std::pow(std::abs(1.0 + s), -q));
        shell_sum[i] = xi.dimension() * acc.value();
    });

    std::vector<double> out;
    CompensatedSum running;
    std::size_t next = 0;
    for (double c : cutoffs) {
        const int limit = int(std::floor(2.0 * c + 1e-9));
        while (next < shells.size() && shells[next] <= limit)
            running.add(shell_sum[next++]);
        out.push_back(running.value());
    }
    return out;
}

struct InvariantSchatten {
    ConvergenceEvidence evidence;
    bool analytic_member = false; ///< alpha p > op.analytic_threshold()
    bool consistent() const
    {
        return evidence.verdict == Convergence::inconclusive ||
               (evidence.verdict == Convergence::convergent) == analytic_member;
    }
};

/// Membership of (I + A)^{-alpha/2} in S_p for a left-invariant A on SU(2) /
/// SO(3); for the sub-Laplacian and H_gamma the exact answer is alpha p > 4.
inline InvariantSchatten invariant_power_schatten(const InvariantSymbol& op, double alpha, double p, Group g,
                                                  double l_max = 512)
{
    if (alpha < 0)
        throw std::invalid_argument("invariant_power_schatten: alpha must be nonnegative");
    if (!(p > 0))
        throw std::invalid_argument("invariant_power_schatten: p must be positive");
    if (op.kind == InvariantSymbol::Kind::hgamma && !(op.gamma > 1))
        throw std::invalid_argument("invariant_power_schatten: H_gamma needs gamma > 1 for hypoellipticity of I + H_gamma");
    if (!(l_max >= 16))
        throw std::invalid_argument("invariant_power_schatten: l_max must be at least 16");
    // ladder ending at l_max with growth 4; the first cutoff stays >= 8 so
    // the ratios see the asymptotic regime
    const int steps = std::clamp(1 + int(std::floor(std::log(l_max / 8.0) / std::log(4.0) + 1e-9)), 3, 5);
    const auto cfg = ClassifierConfig::ending_at(l_max, steps);
    const auto cut = cfg.cutoffs();
    InvariantSchatten out;
    out.evidence = classify_partial_sums(cut, invariant_partial_sums(op, 0.5 * alpha * p, g, cut), cfg);
    out.analytic_member = alpha * p > op.analytic_threshold();
    return out;
}

struct GroupThresholds {
    double general = 2.0; ///< 2n / (n + mu1 + mu2)
    double refined = 2.0; ///< 4 / (2 + mu1 + mu2), SU(2) and SO(3)
    bool refined_is_sharper() const { return refined < general; }
    double sharper() const { return std::min(general, refined); }
};

/// Schatten thresholds for kernels with sub-Laplacian (or H_gamma)
/// regularity mu1 in x and mu2 in y.
inline GroupThresholds kernel_membership_threshold_group(int n, double mu1, double mu2)
{
    if (n != 3)
        throw std::invalid_argument("kernel_membership_threshold_group: SU(2)/SO(3) have n = 3");
    if (!(mu1 >= 0) || !(mu2 >= 0))
        throw std::invalid_argument("kernel_membership_threshold_group: orders must be nonnegative");
    return {2.0 * n / (n + mu1 + mu2), 4.0 / (2.0 + mu1 + mu2)};
}

struct Hypoellipticity {
    bool pass = true;
    std::optional<std::pair<int, int>> witness; ///< (ell, m) with c + ell(ell+1) - m(m+1) = 0
    int scanned_to = 0;
};

/// H_1 + cI is globally hypoelliptic iff c + ell(ell+1) - m(m+1) != 0 for all
/// ell >= 1, |m| <= ell. ell(ell+1) - m(m+1) = t(2ell+1-t) with t = ell - m is
/// an even integer, and at least 2ell when nonzero, so scanning to
/// ell >= |c|/2 settles every c.
inline Hypoellipticity hypoellipticity_check(double c, int l_max)
{
    if (l_max < 1)
        throw std::invalid_argument("hypoellipticity_check: l_max must be >= 1");
    Hypoellipticity out;
    int limit = l_max;
    if (c == std::floor(c) && std::abs(c) / 2.0 + 1 > l_max)
        limit = int(std::ceil(std::abs(c) / 2.0)) + 1;
    out.scanned_to = limit;
    // zero iff m(m+1) = c + ell(ell+1); of the two roots m and -1-m the
    // larger one is met first when m runs down from ell
    for (long ell = 1; ell <= limit; ++ell) {
        const double target = c + double(ell * (ell + 1));
        if (target < 0 || target != std::floor(target))
            continue;
        const auto disc = static_cast<long long>(1.0 + 4.0 * target);
        auto r = static_cast<long long>(std::llround(std::sqrt(double(disc))));
        while (r * r > disc)
            --r;
        while ((r + 1) * (r + 1) <= disc)
            ++r;
        if (r * r != disc || r % 2 == 0)
            continue;
        const long m = long((r - 1) / 2);
        if (m <= ell) {
            out.pass = false;
            out.witness = std::pair<int, int>{int(ell), int(m)};
            return out;
        }
    }
    return out;
}

} // namespace schatlab::su2
