#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "common.hpp"
#include "torus_fourier.hpp"

namespace schatlab {

struct KernelSpec;

/// One term value * e^{ik.x} e^{il.y} of a kernel expansion.
struct Mode {
    Frequency k{0, 0};
    Frequency l{0, 0};
    complex value{};
};

struct SymbolEntry {
    Frequency k{0, 0};
    complex value{};
};

namespace family {

/// Finite explicit expansion (smooth kernel).
struct ModeSum {
    std::vector<Mode> modes;
};

/// Convolution kernel with symbol (1+|k|)^{-a}.
struct ConvPower {
    double a = 1.0;
};

/// Convolution kernel with a finite symbol table.
struct ConvTable {
    std::vector<SymbolEntry> symbol;
};

/// H[k,l] = eps(seed,k,l) (1+|k|)^{-a} (1+|l|)^{-b}, eps = +-1.
struct ProductRandom {
    double a = 1.0;
    double b = 1.0;
    std::uint64_t seed = 0;
};

/// K = 1, i.e. the projection onto constants.
struct RankOne {};

/// Convolution with the Carleman-type symbol c_k (k >= 1), see carleman_coefficient.
struct Carleman {
    double p_demo = 1.0;
    double log_shift = 64.0;
};

/// Base kernel with its values on the diagonal x = y replaced.
struct DiagCorrupt {
    std::shared_ptr<const KernelSpec> base;
    complex value{};
};

} // namespace family

using KernelFamily = std::variant<family::ModeSum, family::ConvPower, family::ConvTable, family::ProductRandom,
                                  family::RankOne, family::Carleman, family::DiagCorrupt>;

struct KernelSpec {
    int dim = 1;
    KernelFamily family = family::RankOne{};

    static KernelSpec rank_one(int dim = 1) { return {dim, family::RankOne{}}; }
    static KernelSpec conv_power(double a, int dim = 1) { return {dim, family::ConvPower{a}}; }
    static KernelSpec conv_table(std::vector<SymbolEntry> symbol, int dim = 1)
    {
        return {dim, family::ConvTable{std::move(symbol)}};
    }
    static KernelSpec product_random(double a, double b, std::uint64_t seed, int dim = 1)
    {
        return {dim, family::ProductRandom{a, b, seed}};
    }
    static KernelSpec mode_sum(std::vector<Mode> modes, int dim = 1) { return {dim, family::ModeSum{std::move(modes)}}; }
    static KernelSpec carleman(double p_demo = 1.0, double log_shift = 64.0)
    {
        return {1, family::Carleman{p_demo, log_shift}};
    }
    static KernelSpec diag_corrupt(KernelSpec base, complex value)
    {
        const int d = base.dim;
        return {d, family::DiagCorrupt{std::make_shared<const KernelSpec>(std::move(base)), value}};
    }

    template <class F>
    const F* as() const noexcept
    {
        return std::get_if<F>(&family);
    }

    /// Kernel of the form kappa(x - y).
    bool is_convolution() const
    {
        if (as<family::ConvPower>() || as<family::ConvTable>() || as<family::Carleman>() || as<family::RankOne>())
            return true;
        if (const auto* dc = as<family::DiagCorrupt>())
            return dc->base->is_convolution();
        return false;
    }

    /// Evaluable pointwise without a series cutoff.
    bool is_closed_form() const
    {
        if (as<family::ModeSum>() || as<family::ConvTable>() || as<family::RankOne>())
            return true;
        if (const auto* dc = as<family::DiagCorrupt>())
            return dc->base->is_closed_form();
        return false;
    }

    std::string name() const
    {
        return std::visit(
            [](const auto& f) -> std::string {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, family::ModeSum>) return "mode-sum";
                else if constexpr (std::is_same_v<F, family::ConvPower>) return "conv-power";
                else if constexpr (std::is_same_v<F, family::ConvTable>) return "conv-table";
                else if constexpr (std::is_same_v<F, family::ProductRandom>) return "product-random";
                else if constexpr (std::is_same_v<F, family::RankOne>) return "rank-one";
                else if constexpr (std::is_same_v<F, family::Carleman>) return "carleman";
                else return "diag-corrupt";
            },
            family);
    }
};

inline double euclidean_norm(const Frequency& k) { return std::sqrt(double(squared_norm(k))); }

/// Throws std::invalid_argument for parameters outside a family's domain.
inline void validate(const KernelSpec& spec)
{
    if (spec.dim != 1 && spec.dim != 2)
        throw std::invalid_argument("kernel: unsupported dimension " + std::to_string(spec.dim));
    if (const auto* f = spec.as<family::ConvPower>()) {
        // (1+|k|)^{-a} is square summable on Z^n iff a > n/2
        if (!(f->a > 0.5 * spec.dim))
            throw std::invalid_argument("conv_power: need a > n/2 for a square-summable symbol, got a = " +
                                        std::to_string(f->a));
    } else if (const auto* f = spec.as<family::ProductRandom>()) {
        if (!(f->a > 0.5 * spec.dim) || !(f->b > 0.5 * spec.dim))
            throw std::invalid_argument("product_random: need a, b > n/2");
    } else if (const auto* f = spec.as<family::Carleman>()) {
        if (spec.dim != 1)
            throw std::invalid_argument("carleman: only defined on T^1");
        if (!(f->log_shift >= 0))
            throw std::invalid_argument("carleman: log_shift must be nonnegative");
    } else if (const auto* f = spec.as<family::DiagCorrupt>()) {
        if (!f->base)
            throw std::invalid_argument("diag_corrupt: missing base kernel");
        if (f->base->dim != spec.dim)
            throw std::invalid_argument("diag_corrupt: base dimension mismatch");
        validate(*f->base);
    }
}

// ---------------------------------------------------------------------------
// Carleman-type symbol

/// c_k = k^{-1/2} (A + log(k+1))^{-2} e^{ik log k} for k >= 1.
///
/// |c_k| is in l^2 but in no l^p, p < 2. The phase k log k makes the partial
/// sums of sum c_k e^{ikx} stationary at only one k per 2*pi window of x, so
/// with the squared-log damping the sup norms of partial sums stay bounded.
/// The shift A only rescales the slowly varying factor.
inline complex carleman_coefficient(long k, double log_shift = 64.0)
{
    const double kk = double(k);
    const double mag = 1.0 / (std::sqrt(kk) * std::pow(log_shift + std::log(kk + 1.0), 2));
    return std::polar(mag, kk * std::log(kk));
}

/// c_1..c_N.
inline std::vector<complex> carleman_coefficients(long N, double log_shift = 64.0)
{
    if (N < 1)
        throw std::invalid_argument("carleman_coefficients: need N >= 1");
    std::vector<complex> c(N);
    for (long k = 1; k <= N; ++k)
        c[k - 1] = carleman_coefficient(k, log_shift);
    return c;
}

/// max over the grid x_g = 2*pi*g/G of |sum_{k=1}^{N} c_k e^{ikx_g}|, where
/// c holds c_1, c_2, ... Coefficients are folded modulo G first, so the cost
/// is O(N + G^2) rather than O(N G).
inline double partial_sum_sup_on_grid(std::span<const complex> c, std::size_t N, int resolution)
{
    if (N > c.size())
        throw std::invalid_argument("partial_sum_sup_on_grid: N exceeds the coefficient count");
    if (resolution < 1)
        throw std::invalid_argument("partial_sum_sup_on_grid: resolution must be positive");
    const auto G = std::size_t(resolution);
    std::vector<complex> folded(G);
    for (std::size_t k = 1; k <= N; ++k)
        folded[k % G] += c[k - 1];
    std::vector<complex> w(G);
    for (std::size_t m = 0; m < G; ++m)
        w[m] = std::polar(1.0, two_pi * double(m) / double(G));
    double sup = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
        complex acc{};
        for (std::size_t r = 0; r < G; ++r)
            acc += folded[r] * w[(r * g) % G];
        sup = std::max(sup, std::abs(acc));
    }
    return sup;
}

// ---------------------------------------------------------------------------
// Pointwise coefficients

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Deterministic +-1 from (seed, k, l).
inline double random_sign(std::uint64_t seed, const Frequency& k, const Frequency& l)
{
    std::uint64_t h = detail::splitmix64(seed);
    for (int v : {k[0], k[1], l[0], l[1]})
        h = detail::splitmix64(h ^ std::uint64_t(std::int64_t(v)));
    return (h >> 63) ? -1.0 : 1.0;
}

/// Symbol kappa^(k) of a convolution kernel; nullopt for non-convolution
/// families.
inline std::optional<complex> symbol(const KernelSpec& spec, const Frequency& k)
{
    if (spec.as<family::RankOne>())
        return (k[0] == 0 && k[1] == 0) ? complex{1.0} : complex{};
    if (const auto* f = spec.as<family::ConvPower>())
        return complex{std::pow(1.0 + euclidean_norm(k), -f->a)};
    if (const auto* f = spec.as<family::ConvTable>()) {
        complex acc{};
        for (const auto& e : f->symbol)
            if (e.k == k)
                acc += e.value;
        return acc;
    }
    if (const auto* f = spec.as<family::Carleman>())
        return k[0] >= 1 ? carleman_coefficient(k[0], f->log_shift) : complex{};
    if (const auto* f = spec.as<family::DiagCorrupt>())
        return symbol(*f->base, k);
    return std::nullopt;
}

/// H^[k,l] with K(x,y) = sum H^[k,l] e^{ik.x} e^{il.y}.
inline complex coefficient(const KernelSpec& spec, const Frequency& k, const Frequency& l)
{
    if (spec.is_convolution()) {
        // kappa(x-y) = sum kappa^(k) e^{ikx} e^{-iky}
        if (k[0] + l[0] != 0 || k[1] + l[1] != 0)
            return {};
        return *symbol(spec, k);
    }
    if (const auto* f = spec.as<family::ProductRandom>())
        return random_sign(f->seed, k, l) * std::pow(1.0 + euclidean_norm(k), -f->a) *
               std::pow(1.0 + euclidean_norm(l), -f->b);
    if (const auto* f = spec.as<family::ModeSum>()) {
        complex acc{};
        for (const auto& m : f->modes)
            if (m.k == k && m.l == l)
                acc += m.value;
        return acc;
    }
    if (const auto* f = spec.as<family::DiagCorrupt>())
        return coefficient(*f->base, k, l);
    return {};
}

// ---------------------------------------------------------------------------
// Coefficient matrices

/// Truncated double Fourier coefficients; entries(i, j) = H^[k_i, l_j].
struct CoefficientMatrix {
    FrequencyLattice lattice;
    Eigen::MatrixXcd entries;
    /// Set when the family is known to give H^[k,l] = conj(H^[-k,-l]).
    std::optional<bool> hermitian;

    CoefficientMatrix() : entries(Eigen::MatrixXcd::Zero(1, 1)) {}
    explicit CoefficientMatrix(FrequencyLattice lat)
        : lattice(std::move(lat)), entries(Eigen::MatrixXcd::Zero(Eigen::Index(lattice.size()), Eigen::Index(lattice.size())))
    {
    }

    std::size_t size() const { return lattice.size(); }

    complex at(const Frequency& k, const Frequency& l) const
    {
        const auto i = lattice.position(k);
        const auto j = lattice.position(l);
        if (!i || !j)
            return {};
        return entries(Eigen::Index(*i), Eigen::Index(*j));
    }

    void set(const Frequency& k, const Frequency& l, complex v)
    {
        const auto i = lattice.position(k);
        const auto j = lattice.position(l);
        if (!i || !j)
            throw std::out_of_range("CoefficientMatrix::set: index outside lattice");
        entries(Eigen::Index(*i), Eigen::Index(*j)) = v;
    }

    std::size_t nonzeros() const
    {
        std::size_t n = 0;
        for (Eigen::Index j = 0; j < entries.cols(); ++j)
            for (Eigen::Index i = 0; i < entries.rows(); ++i)
                n += entries(i, j) != complex{} ? 1 : 0;
        return n;
    }
};

/// max |H^[k,l] - conj(H^[-k,-l])|.
inline double conjugate_symmetry_defect(const CoefficientMatrix& C)
{
    const auto& L = C.lattice;
    double worst = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i)
        for (std::size_t j = 0; j < L.size(); ++j)
            worst = std::max(worst, std::abs(C.entries(Eigen::Index(i), Eigen::Index(j)) -
                                             std::conj(C.entries(Eigen::Index(L.mirror(i)),
                                                                 Eigen::Index(L.mirror(j))))));
    return worst;
}

namespace detail {

inline bool symbol_is_hermitian(const family::ConvTable& t, int dim)
{
    for (const auto& e : t.symbol) {
        KernelSpec s{dim, t};
        const auto mirrored = symbol(s, negate(e.k));
        if (std::abs(*mirrored - std::conj(*symbol(s, e.k))) > 0)
            return false;
    }
    return true;
}

} // namespace detail

inline CoefficientMatrix coefficients(const KernelSpec& spec, int cutoff)
{
    validate(spec);
    if (const auto* dc = spec.as<family::DiagCorrupt>())
        return coefficients(*dc->base, cutoff);

    CoefficientMatrix C(build_lattice(spec.dim, cutoff));
    const auto& L = C.lattice;

    if (const auto* f = spec.as<family::ModeSum>()) {
        for (const auto& m : f->modes)
            if (L.contains(m.k) && L.contains(m.l))
                C.set(m.k, m.l, C.at(m.k, m.l) + m.value);
        return C;
    }
    if (spec.is_convolution()) {
        for (std::size_t i = 0; i < L.size(); ++i)
            C.entries(Eigen::Index(i), Eigen::Index(L.mirror(i))) = *symbol(spec, L[i]);
        if (spec.as<family::ConvPower>() || spec.as<family::RankOne>())
            C.hermitian = true;
        else if (const auto* t = spec.as<family::ConvTable>())
            C.hermitian = detail::symbol_is_hermitian(*t, spec.dim);
        return C;
    }
    for (std::size_t j = 0; j < L.size(); ++j)
        for (std::size_t i = 0; i < L.size(); ++i)
            C.entries(Eigen::Index(i), Eigen::Index(j)) = coefficient(spec, L[i], L[j]);
    return C;
}

// ---------------------------------------------------------------------------
// Pointwise evaluation

using Point = std::array<double, 2>;

namespace detail {

inline complex character(const Frequency& k, const Point& x)
{
    return std::polar(1.0, k[0] * x[0] + k[1] * x[1]);
}

inline int require_cutoff(const KernelSpec& spec, std::optional<int> cutoff)
{
    if (!cutoff)
        throw std::invalid_argument("evaluate: " + spec.name() + " needs a series cutoff");
    if (*cutoff < 0)
        throw std::invalid_argument("evaluate: negative series cutoff");
    return *cutoff;
}

} // namespace detail

/// K(x, y). Series families are truncated at max-norm <= cutoff.
inline complex evaluate(const KernelSpec& spec, const Point& x, const Point& y, std::optional<int> cutoff = {})
{
    if (spec.as<family::RankOne>())
        return 1.0;
    if (const auto* f = spec.as<family::DiagCorrupt>())
        return (x == y) ? f->value : evaluate(*f->base, x, y, cutoff);
    if (const auto* f = spec.as<family::ModeSum>()) {
        complex acc{};
        for (const auto& m : f->modes)
            acc += m.value * detail::character(m.k, x) * detail::character(m.l, y);
        return acc;
    }
    const Point d{x[0] - y[0], spec.dim == 2 ? x[1] - y[1] : 0.0};
    if (const auto* f = spec.as<family::ConvTable>()) {
        complex acc{};
        for (const auto& e : f->symbol)
            acc += e.value * detail::character(e.k, d);
        return acc;
    }

    const int N = detail::require_cutoff(spec, cutoff);
    const auto L = build_lattice(spec.dim, N);
    complex acc{};
    if (spec.is_convolution()) {
        for (const auto& k : L.indices())
            acc += *symbol(spec, k) * detail::character(k, d);
        return acc;
    }
    for (const auto& k : L.indices()) {
        const complex ek = detail::character(k, x);
        for (const auto& l : L.indices())
            acc += coefficient(spec, k, l) * ek * detail::character(l, y);
    }
    return acc;
}

/// K(x, x), including any diagonal corruption.
inline complex diagonal_evaluate(const KernelSpec& spec, const Point& x, std::optional<int> cutoff = {})
{
    if (const auto* f = spec.as<family::DiagCorrupt>())
        return f->value;
    return evaluate(spec, x, x, cutoff);
}

// ---------------------------------------------------------------------------
// CSV I/O: header "k1[,k2],l1[,l2],re,im", one row per nonzero entry in
// lexicographic (k, l) order, 17 significant digits.

inline void save_csv(const CoefficientMatrix& C, std::ostream& os)
{
    const int n = C.lattice.dim();
    os << (n == 1 ? "k1,l1,re,im\n" : "k1,k2,l1,l2,re,im\n");
    const auto& L = C.lattice;
    char buf[64];
    for (std::size_t i = 0; i < L.size(); ++i)
        for (std::size_t j = 0; j < L.size(); ++j) {
            const complex v = C.entries(Eigen::Index(i), Eigen::Index(j));
            if (v == complex{})
                continue;
            if (n == 1)
                os << L[i][0] << ',' << L[j][0];
            else
                os << L[i][0] << ',' << L[i][1] << ',' << L[j][0] << ',' << L[j][1];
            std::snprintf(buf, sizeof buf, ",%.17g", v.real());
            os << buf;
            std::snprintf(buf, sizeof buf, ",%.17g", v.imag());
            os << buf << '\n';
        }
}

inline void save_csv(const CoefficientMatrix& C, const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw io_error("save_csv: cannot open " + path);
    save_csv(C, os);
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_field(std::string_view s, std::size_t line_no)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw io_error("load_csv: line " + std::to_string(line_no) + ": bad field '" + std::string(s) + "'");
    return value;
}

} // namespace detail

/// Reads a coefficient CSV. Without an explicit cutoff the lattice is the
/// smallest one holding every row.
inline CoefficientMatrix load_csv(std::istream& is, std::optional<int> cutoff = {})
{
    std::string line;
    if (!std::getline(is, line))
        throw io_error("load_csv: empty input");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    int dim = 0;
    if (line == "k1,l1,re,im")
        dim = 1;
    else if (line == "k1,k2,l1,l2,re,im")
        dim = 2;
    else
        throw io_error("load_csv: unrecognised header '" + line + "'");

    std::vector<Mode> rows;
    std::size_t line_no = 1;
    int extent = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const auto f = detail::split_commas(line);
        if (f.size() != std::size_t(2 * dim + 2))
            throw io_error("load_csv: line " + std::to_string(line_no) + ": expected " +
                           std::to_string(2 * dim + 2) + " fields, got " + std::to_string(f.size()));
        Mode m;
        std::size_t c = 0;
        for (int a = 0; a < dim; ++a)
            m.k[a] = detail::parse_field<int>(f[c++], line_no);
        for (int a = 0; a < dim; ++a)
            m.l[a] = detail::parse_field<int>(f[c++], line_no);
        const double re = detail::parse_field<double>(f[c++], line_no);
        const double im = detail::parse_field<double>(f[c++], line_no);
        m.value = {re, im};
        extent = std::max({extent, max_norm(m.k), max_norm(m.l)});
        rows.push_back(m);
    }
    const int N = cutoff.value_or(extent);
    if (N < extent)
        throw io_error("load_csv: entries exceed the requested cutoff " + std::to_string(N));
    CoefficientMatrix C(build_lattice(dim, N));
    for (const auto& m : rows)
        C.set(m.k, m.l, m.value);
    return C;
}

inline CoefficientMatrix load_csv(const std::string& path, std::optional<int> cutoff = {})
{
    std::ifstream is(path);
    if (!is)
        throw io_error("load_csv: cannot open " + path);
    return load_csv(is, cutoff);
}

/// Nonzero entries as a mode list, so a loaded matrix can be analysed as a
/// mode_sum kernel.
inline std::vector<Mode> to_modes(const CoefficientMatrix& C)
{
    std::vector<Mode> modes;
    const auto& L = C.lattice;
    for (std::size_t i = 0; i < L.size(); ++i)
        for (std::size_t j = 0; j < L.size(); ++j) {
            const complex v = C.entries(Eigen::Index(i), Eigen::Index(j));
            if (v != complex{})
                modes.push_back({L[i], L[j], v});
        }
    return modes;
}

} // namespace schatlab
