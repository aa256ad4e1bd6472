#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <cstdlib>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace schatlab {

using complex = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Raised when a numerical routine cannot produce a trustworthy result
/// (SVD/eigensolver failure, non-finite input, too few samples for a fit).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Ordinary least-squares line y = slope*x + intercept.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw numerical_error("fit_line: need at least two paired samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0)
        throw numerical_error("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (fit.slope * x[i] + fit.intercept);
            rss += r * r;
        }
        fit.slope_stderr = std::sqrt(rss / double(n - 2) / sxx);
    }
    return fit;
}

/// Worker count, capped by SCHATLAB_THREADS when set.
inline unsigned thread_count()
{
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SCHATLAB_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1)
            hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

/// Calls fn(i) for i in [0, count) on up to thread_count() threads. Callers
/// write results into per-index slots, so reductions done afterwards in index
/// order stay deterministic.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(thread_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers)
                        fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace schatlab
