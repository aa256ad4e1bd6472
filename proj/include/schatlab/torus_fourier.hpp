#pragma once

#include <array>
#include <optional>
#include <type_traits>
#include <stdexcept>
#include <vector>

#include "common.hpp"

namespace schatlab {

/// Integer frequency on T^1 or T^2. For n = 1 only the first component is used
/// and the second stays 0.
using Frequency = std::array<int, 2>;

inline Frequency negate(const Frequency& k) { return {-k[0], -k[1]}; }

inline long squared_norm(const Frequency& k)
{
    return long(k[0]) * k[0] + long(k[1]) * k[1];
}

inline int max_norm(const Frequency& k) { return std::max(std::abs(k[0]), std::abs(k[1])); }

/// Truncated set of Laplacian eigenfunctions e^{ik.x} on T^n: all k with
/// max-norm <= cutoff, in lexicographic order.
class FrequencyLattice {
public:
    FrequencyLattice() = default;

    FrequencyLattice(int dim, int cutoff) : dim_(dim), cutoff_(cutoff)
    {
        if (dim != 1 && dim != 2)
            throw std::invalid_argument("FrequencyLattice: unsupported dimension " +
                                        std::to_string(dim) + " (expected 1 or 2)");
        if (cutoff < 0)
            throw std::invalid_argument("FrequencyLattice: negative cutoff");
        const int side = 2 * cutoff + 1;
        indices_.clear();
        indices_.reserve(dim == 1 ? side : std::size_t(side) * side);
        if (dim == 1) {
            for (int k = -cutoff; k <= cutoff; ++k)
                indices_.push_back({k, 0});
        } else {
            for (int k1 = -cutoff; k1 <= cutoff; ++k1)
                for (int k2 = -cutoff; k2 <= cutoff; ++k2)
                    indices_.push_back({k1, k2});
        }
    }

    int dim() const noexcept { return dim_; }
    int cutoff() const noexcept { return cutoff_; }
    std::size_t size() const noexcept { return indices_.size(); }
    int side() const noexcept { return 2 * cutoff_ + 1; }

    const Frequency& operator[](std::size_t i) const { return indices_[i]; }
    const std::vector<Frequency>& indices() const noexcept { return indices_; }

    /// Laplacian eigenvalue |k|^2 of the i-th index.
    long eigenvalue(std::size_t i) const { return squared_norm(indices_[i]); }

    bool contains(const Frequency& k) const
    {
        if (dim_ == 1 && k[1] != 0)
            return false;
        return max_norm(k) <= cutoff_;
    }

    std::optional<std::size_t> position(const Frequency& k) const
    {
        if (!contains(k))
            return std::nullopt;
        if (dim_ == 1)
            return std::size_t(k[0] + cutoff_);
        return std::size_t(k[0] + cutoff_) * side() + std::size_t(k[1] + cutoff_);
    }

    /// Position of -k; the lexicographic order makes this a reflection.
    std::size_t mirror(std::size_t i) const noexcept { return size() - 1 - i; }

    friend bool operator==(const FrequencyLattice& a, const FrequencyLattice& b)
    {
        return a.dim_ == b.dim_ && a.cutoff_ == b.cutoff_;
    }

private:
    int dim_ = 1;
    int cutoff_ = 0;
    std::vector<Frequency> indices_{{0, 0}};
};

inline FrequencyLattice build_lattice(int dim, int cutoff) { return FrequencyLattice(dim, cutoff); }

/// Samples on the uniform grid x = 2*pi*i/G of [0, 2*pi)^n, row-major for
/// n = 2. Integrals use the normalised measure dx/(2*pi)^n.
struct GridFunction {
    int dim = 1;
    int resolution = 1;
    std::vector<complex> samples;

    GridFunction() = default;
    GridFunction(int dim_, int resolution_)
        : dim(dim_), resolution(resolution_),
          samples(dim_ == 1 ? std::size_t(resolution_) : std::size_t(resolution_) * resolution_)
    {
        if (dim_ != 1 && dim_ != 2)
            throw std::invalid_argument("GridFunction: unsupported dimension");
        if (resolution_ < 1)
            throw std::invalid_argument("GridFunction: resolution must be positive");
    }

    double node(int i) const { return two_pi * i / resolution; }

    complex& at(int i, int j = 0) { return samples[std::size_t(i) * (dim == 2 ? resolution : 1) + j]; }
    const complex& at(int i, int j = 0) const
    {
        return samples[std::size_t(i) * (dim == 2 ? resolution : 1) + j];
    }

    /// Fills samples from f(x) (n = 1) or f(x1, x2) (n = 2).
    template <class Fn>
    static GridFunction sample(int dim, int resolution, Fn&& f)
    {
        GridFunction g(dim, resolution);
        constexpr bool unary = std::is_invocable_v<Fn&, double>;
        constexpr bool binary = std::is_invocable_v<Fn&, double, double>;
        static_assert(unary || binary, "GridFunction::sample: f must take one or two doubles");
        if ((dim == 1 && !unary) || (dim == 2 && !binary))
            throw std::invalid_argument("GridFunction::sample: arity of f does not match the dimension");
        for (int i = 0; i < resolution; ++i) {
            if constexpr (unary) {
                g.at(i) = f(g.node(i));
            } else {
                for (int j = 0; j < resolution; ++j)
                    g.at(i, j) = f(g.node(i), g.node(j));
            }
        }
        return g;
    }
};

namespace detail {

/// e^{sign*2*pi*i*m/G} for m in [0, G); exact periodic reduction of k*g.
inline std::vector<complex> twiddles(int resolution, int sign)
{
    std::vector<complex> w(resolution);
    for (int m = 0; m < resolution; ++m)
        w[m] = std::polar(1.0, sign * two_pi * m / resolution);
    return w;
}

inline int wrap(long v, int modulus)
{
    const long r = v % modulus;
    return int(r < 0 ? r + modulus : r);
}

} // namespace detail

/// Fourier coefficients f^(k) = int f(x) e^{-ik.x} dx/(2*pi)^n by the
/// trapezoidal sum, exact for band-limited f.
inline std::vector<complex> forward(const GridFunction& f, const FrequencyLattice& lattice)
{
    if (f.dim != lattice.dim())
        throw std::invalid_argument("forward: grid and lattice dimensions differ");
    const int G = f.resolution;
    if (G < lattice.side())
        throw std::invalid_argument("forward: resolution " + std::to_string(G) +
                                    " aliases cutoff " + std::to_string(lattice.cutoff()) +
                                    " (need >= 2N+1)");
    const auto w = detail::twiddles(G, -1);
    const int N = lattice.cutoff();
    std::vector<complex> out(lattice.size());

    if (f.dim == 1) {
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            const int k = lattice[i][0];
            complex acc{};
            for (int g = 0; g < G; ++g)
                acc += f.at(g) * w[detail::wrap(long(k) * g, G)];
            out[i] = acc / double(G);
        }
        return out;
    }

    // separable: transform the second axis first, then the first
    const int side = lattice.side();
    std::vector<complex> partial(std::size_t(G) * side);
    for (int g1 = 0; g1 < G; ++g1)
        for (int k2 = -N; k2 <= N; ++k2) {
            complex acc{};
            for (int g2 = 0; g2 < G; ++g2)
                acc += f.at(g1, g2) * w[detail::wrap(long(k2) * g2, G)];
            partial[std::size_t(g1) * side + (k2 + N)] = acc;
        }
    const double scale = 1.0 / (double(G) * G);
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const auto& k = lattice[i];
        complex acc{};
        for (int g1 = 0; g1 < G; ++g1)
            acc += partial[std::size_t(g1) * side + (k[1] + N)] * w[detail::wrap(long(k[0]) * g1, G)];
        out[i] = acc * scale;
    }
    return out;
}

/// Evaluates sum_k c_k e^{ik.x} on the uniform grid of the given resolution.
inline GridFunction inverse(std::span<const complex> coeffs, const FrequencyLattice& lattice, int resolution)
{
    if (coeffs.size() != lattice.size())
        throw std::invalid_argument("inverse: coefficient count does not match lattice");
    const int G = resolution;
    GridFunction f(lattice.dim(), G);
    const auto w = detail::twiddles(G, +1);
    const int N = lattice.cutoff();

    if (lattice.dim() == 1) {
        for (int g = 0; g < G; ++g) {
            complex acc{};
            for (std::size_t i = 0; i < lattice.size(); ++i)
                acc += coeffs[i] * w[detail::wrap(long(lattice[i][0]) * g, G)];
            f.at(g) = acc;
        }
        return f;
    }

    const int side = lattice.side();
    std::vector<complex> partial(std::size_t(side) * G);  // (k1, g2)
    for (int k1 = -N; k1 <= N; ++k1)
        for (int g2 = 0; g2 < G; ++g2) {
            complex acc{};
            for (int k2 = -N; k2 <= N; ++k2)
                acc += coeffs[std::size_t(k1 + N) * side + (k2 + N)] * w[detail::wrap(long(k2) * g2, G)];
            partial[std::size_t(k1 + N) * G + g2] = acc;
        }
    for (int g1 = 0; g1 < G; ++g1)
        for (int g2 = 0; g2 < G; ++g2) {
            complex acc{};
            for (int k1 = -N; k1 <= N; ++k1)
                acc += partial[std::size_t(k1 + N) * G + g2] * w[detail::wrap(long(k1) * g1, G)];
            f.at(g1, g2) = acc;
        }
    return f;
}

inline GridFunction inverse(std::span<const complex> coeffs, const FrequencyLattice& lattice)
{
    return inverse(coeffs, lattice, lattice.side());
}

struct PlancherelPair {
    double lhs = 0.0;  ///< ||f||^2 by quadrature
    double rhs = 0.0;  ///< sum |f^(k)|^2
};

inline PlancherelPair plancherel_check(const GridFunction& f, const FrequencyLattice& lattice)
{
    PlancherelPair out;
    for (const auto& v : f.samples)
        out.lhs += std::norm(v);
    out.lhs /= double(f.samples.size());
    for (const auto& c : forward(f, lattice))
        out.rhs += std::norm(c);
    return out;
}

} // namespace schatlab
