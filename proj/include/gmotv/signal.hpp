#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gmotv {

/// Finite real-valued 1D sample sequence. The signal domain is treated as
/// circular by every operator below, so convolution adjoints are exact.
class Signal {
public:
    Signal() = default;

    explicit Signal(std::vector<double> samples) : samples_(std::move(samples)) {
        if (samples_.empty())
            throw std::invalid_argument("Signal: empty sample sequence");
        for (double v : samples_)
            if (!std::isfinite(v))
                throw std::invalid_argument("Signal: non-finite sample");
    }

    static Signal zeros(std::size_t n) { return Signal(std::vector<double>(n, 0.0)); }
    static Signal constant(std::size_t n, double c) { return Signal(std::vector<double>(n, c)); }

    std::size_t size() const { return samples_.size(); }
    double operator[](std::size_t i) const { return samples_[i]; }
    double& operator[](std::size_t i) { return samples_[i]; }
    const std::vector<double>& samples() const { return samples_; }

private:
    std::vector<double> samples_;
};

inline void check_same_size(const Signal& a, const Signal& b, const char* who) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(who) + ": signal length mismatch");
}

inline double dot(const Signal& a, const Signal& b) {
    check_same_size(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Signal& a) { return std::sqrt(dot(a, a)); }

inline Signal operator+(const Signal& a, const Signal& b) {
    check_same_size(a, b, "operator+");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return Signal(std::move(out));
}

inline Signal operator-(const Signal& a, const Signal& b) {
    check_same_size(a, b, "operator-");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return Signal(std::move(out));
}

inline Signal operator*(double s, const Signal& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    return Signal(std::move(out));
}

/// Finite discrete filter with a declared origin: taps[origin] is the tap
/// aligned with the output position. convolve() evaluates
///   (g*k)(x) = sum_j taps[j] * g(x - (j - origin))   (circular indexing)
/// so the origin-0 first difference [1,-1] yields v(x) = g(x) - g(x-1).
class Kernel {
public:
    Kernel(std::vector<double> taps, std::ptrdiff_t origin)
        : taps_(std::move(taps)), origin_(origin) {
        if (taps_.empty()) throw std::invalid_argument("Kernel: empty tap list");
        bool any_nonzero = false;
        for (double t : taps_) {
            if (!std::isfinite(t)) throw std::invalid_argument("Kernel: non-finite tap");
            if (t != 0.0) any_nonzero = true;
        }
        if (!any_nonzero) throw std::invalid_argument("Kernel: all taps zero");
    }

    static Kernel delta() { return Kernel({1.0}, 0); }

    std::size_t size() const { return taps_.size(); }
    double operator[](std::size_t j) const { return taps_[j]; }
    std::ptrdiff_t origin() const { return origin_; }
    const std::vector<double>& taps() const { return taps_; }

    double energy() const {
        double s = 0.0;
        for (double t : taps_) s += t * t;
        return s;
    }

private:
    std::vector<double> taps_;
    std::ptrdiff_t origin_ = 0;
};

inline std::size_t wrap_index(std::ptrdiff_t i, std::size_t n) {
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n);
    std::ptrdiff_t r = i % m;
    if (r < 0) r += m;
    return static_cast<std::size_t>(r);
}

namespace detail {

/// out[x] += c * g[(x - shift) mod n], as two contiguous passes.
inline void circular_saxpy(double* out, const double* g, std::size_t n, double c,
                           std::ptrdiff_t shift) {
    const std::size_t d = wrap_index(shift, n);
    for (std::size_t x = d; x < n; ++x) out[x] += c * g[x - d];
    for (std::size_t x = 0; x < d; ++x) out[x] += c * g[x + n - d];
}

/// Circular convolution into a caller-provided buffer (overwritten).
inline void convolve_into(const double* g, std::size_t n, const Kernel& k, double* out) {
    for (std::size_t x = 0; x < n; ++x) out[x] = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j)
        circular_saxpy(out, g, n, k[j], static_cast<std::ptrdiff_t>(j) - k.origin());
}

/// Accumulating circular correlation: out[x] += (adjoint k applied to u)(x).
inline void adjoint_convolve_add(const double* u, std::size_t n, const Kernel& k, double* out) {
    for (std::size_t j = 0; j < k.size(); ++j)
        circular_saxpy(out, u, n, k[j], k.origin() - static_cast<std::ptrdiff_t>(j));
}

}  // namespace detail

/// Circular (periodic) convolution, origin-aligned.
inline Signal convolve(const Signal& g, const Kernel& k) {
    const std::size_t n = g.size();
    if (k.size() > n)
        throw std::invalid_argument("convolve: kernel longer than signal");
    std::vector<double> out(n);
    detail::convolve_into(g.samples().data(), n, k, out.data());
    return Signal(std::move(out));
}

/// Circular correlation, i.e. convolution with the time-reversed kernel;
/// the exact adjoint of convolve under the standard inner product.
inline Signal adjoint_convolve(const Signal& u, const Kernel& k) {
    const std::size_t n = u.size();
    if (k.size() > n)
        throw std::invalid_argument("adjoint_convolve: kernel longer than signal");
    std::vector<double> out(n, 0.0);
    detail::adjoint_convolve_add(u.samples().data(), n, k, out.data());
    return Signal(std::move(out));
}

/// shift(g, s)(x) = g(x - s), circular.
inline Signal circular_shift(const Signal& g, std::ptrdiff_t s) {
    const std::size_t n = g.size();
    std::vector<double> out(n);
    for (std::size_t x = 0; x < n; ++x)
        out[x] = g[wrap_index(static_cast<std::ptrdiff_t>(x) - s, n)];
    return Signal(std::move(out));
}

}  // namespace gmotv
