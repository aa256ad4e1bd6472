#pragma once

#include <array>
#include <optional>

#include "kernels.hpp"

namespace schatlab {

/// Level-j dyadic partition of [0, 2*pi) into half-open arcs
/// [2*pi*i/2^j, 2*pi*(i+1)/2^j).
struct DyadicPartition {
    int level = 0;

    static constexpr int max_level = 24;

    explicit DyadicPartition(int j) : level(j)
    {
        if (j < 0 || j > max_level)
            throw std::invalid_argument("DyadicPartition: level must be in [0, 24]");
    }

    std::int64_t cells() const { return std::int64_t(1) << level; }
    double width() const { return two_pi / double(cells()); }

    std::int64_t index(double x) const
    {
        double t = std::fmod(x, two_pi);
        if (t < 0)
            t += two_pi;
        auto i = std::min(std::int64_t(std::floor(t / width())), cells() - 1);
        // snap to the edges as lower() computes them, so lower(i) lands in cell i
        if (i + 1 < cells() && lower(i + 1) <= t)
            ++i;
        else if (i > 0 && lower(i) > t)
            --i;
        return i;
    }
    double lower(std::int64_t i) const { return two_pi * double(i) / double(cells()); }
    double center(std::int64_t i) const { return lower(i) + 0.5 * width(); }
};

namespace detail {

inline double sinc(double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; }

/// Mean of e^{ikx} over an arc of width h centred at c.
inline complex character_cell_mean(int k, double c, double h)
{
    return std::polar(sinc(0.5 * k * h), k * c);
}

/// Gauss-Legendre nodes and weights on [-1, 1].
template <int Points>
struct GaussLegendre {
    std::array<double, Points> nodes{};
    std::array<double, Points> weights{};

    GaussLegendre()
    {
        for (int i = 0; i < (Points + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (Points + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int n = 2; n <= Points; ++n) {
                    const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
                    p0 = p1;
                    p1 = p2;
                }
                dp = Points * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16)
                    break;
            }
            nodes[i] = -x;
            nodes[Points - 1 - i] = x;
            weights[i] = weights[Points - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

inline const GaussLegendre<32>& gauss32()
{
    static const GaussLegendre<32> rule;
    return rule;
}

inline void require_torus1(const KernelSpec& spec)
{
    if (spec.dim != 1)
        throw std::invalid_argument("dyadic averaging is only implemented on T^1");
}

} // namespace detail

/// Mean of K over C_j(x) x C_j(y) from the kernel's character expansion
/// (series families truncated at `cutoff`). Diagonal corruption has measure
/// zero and is ignored.
inline complex average_kernel(const KernelSpec& spec, int j, double x, double y, std::optional<int> cutoff = {})
{
    detail::require_torus1(spec);
    if (const auto* dc = spec.as<family::DiagCorrupt>())
        return average_kernel(*dc->base, j, x, y, cutoff);
    if (spec.as<family::RankOne>())
        return 1.0;

    const DyadicPartition P(j);
    const double h = P.width();
    const double cx = P.center(P.index(x));
    const double cy = P.center(P.index(y));

    if (const auto* f = spec.as<family::ModeSum>()) {
        complex acc{};
        for (const auto& m : f->modes)
            acc += m.value * detail::character_cell_mean(m.k[0], cx, h) * detail::character_cell_mean(m.l[0], cy, h);
        return acc;
    }
    if (const auto* f = spec.as<family::ConvTable>()) {
        complex acc{};
        for (const auto& e : f->symbol)
            acc += e.value * detail::character_cell_mean(e.k[0], cx, h) * detail::character_cell_mean(-e.k[0], cy, h);
        return acc;
    }

    const int N = detail::require_cutoff(spec, cutoff);
    if (spec.is_convolution()) {
        complex acc{};
        for (int k = -N; k <= N; ++k) {
            const complex s = *symbol(spec, {k, 0});
            if (s != complex{})
                acc += s * detail::character_cell_mean(k, cx, h) * detail::character_cell_mean(-k, cy, h);
        }
        return acc;
    }
    std::vector<complex> mx(2 * N + 1), my(2 * N + 1);
    for (int k = -N; k <= N; ++k) {
        mx[std::size_t(k + N)] = detail::character_cell_mean(k, cx, h);
        my[std::size_t(k + N)] = detail::character_cell_mean(k, cy, h);
    }
    complex acc{};
    for (int k = -N; k <= N; ++k)
        for (int l = -N; l <= N; ++l)
            acc += coefficient(spec, {k, 0}, {l, 0}) * mx[std::size_t(k + N)] * my[std::size_t(l + N)];
    return acc;
}

/// Same cell mean by 32-point Gauss-Legendre quadrature per axis on
/// pointwise values.
inline complex average_kernel_quadrature(const KernelSpec& spec, int j, double x, double y,
                                         std::optional<int> cutoff = {})
{
    detail::require_torus1(spec);
    if (const auto* dc = spec.as<family::DiagCorrupt>())
        return average_kernel_quadrature(*dc->base, j, x, y, cutoff);
    const DyadicPartition P(j);
    const double h = P.width();
    const double cx = P.center(P.index(x));
    const double cy = P.center(P.index(y));
    const auto& rule = detail::gauss32();
    complex acc{};
    for (int a = 0; a < 32; ++a)
        for (int b = 0; b < 32; ++b) {
            const double xa = cx + 0.5 * h * rule.nodes[std::size_t(a)];
            const double yb = cy + 0.5 * h * rule.nodes[std::size_t(b)];
            acc += rule.weights[std::size_t(a)] * rule.weights[std::size_t(b)] * evaluate(spec, {xa, 0.0}, {yb, 0.0}, cutoff);
        }
    return acc / 4.0;
}

/// K~(x, x) approximated by the level-j_max cell average at each grid point.
inline GridFunction averaged_diagonal(const KernelSpec& spec, int j_max, int resolution, std::optional<int> cutoff = {})
{
    detail::require_torus1(spec);
    validate(spec);
    (void)DyadicPartition(j_max);
    if (!spec.is_closed_form() && !spec.as<family::RankOne>())
        detail::require_cutoff(spec, cutoff);
    GridFunction out(1, resolution);
    const auto* base = spec.as<family::DiagCorrupt>() ? spec.as<family::DiagCorrupt>()->base.get() : &spec;
    if (base->is_convolution()) {
        // x and y share a cell, so the cell mean of kappa(x - y) does not depend on x
        const complex v = average_kernel(spec, j_max, 0.0, 0.0, cutoff);
        std::fill(out.samples.begin(), out.samples.end(), v);
        return out;
    }
    if (base->is_closed_form()) {
        parallel_for(std::size_t(resolution), [&](std::size_t g) {
            const double x = out.node(int(g));
            out.samples[g] = average_kernel(spec, j_max, x, x, cutoff);
        });
        return out;
    }
    // dense series: tabulate the coefficients once, then m^T H m per point
    const auto C = coefficients(*base, *cutoff);
    const int N = *cutoff;
    const DyadicPartition P(j_max);
    parallel_for(std::size_t(resolution), [&](std::size_t g) {
        const double c = P.center(P.index(out.node(int(g))));
        Eigen::VectorXcd m(2 * N + 1);
        for (int k = -N; k <= N; ++k)
            m(k + N) = detail::character_cell_mean(k, c, P.width());
        out.samples[g] = (m.transpose() * C.entries * m).value();
    });
    return out;
}

/// Tr(T) = int K~(x, x) dx under the normalised measure, by grid quadrature
/// of the averaged diagonal.
inline complex trace_averaged(const KernelSpec& spec, int j_max, int resolution, std::optional<int> cutoff = {})
{
    const auto diag = averaged_diagonal(spec, j_max, resolution, cutoff);
    complex acc{};
    for (const auto& v : diag.samples)
        acc += v;
    return acc / double(resolution);
}

} // namespace schatlab
