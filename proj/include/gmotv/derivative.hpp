#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gmotv/signal.hpp"

namespace gmotv {

/// Discrete derivative filters for orders 1..4, origin at the first tap.
/// Order p has p+1 taps summing to zero, so constants are annihilated.
inline const std::vector<double>& derivative_taps(int order) {
    static const std::vector<double> taps[4] = {
        {1.0, -1.0},
        {1.0, -2.0, 1.0},
        {-1.0, 3.0, -3.0, 1.0},
        {1.0, -4.0, 6.0, -4.0, 1.0},
    };
    if (order < 1 || order > 4)
        throw std::invalid_argument("derivative_taps: order must be in [1,4]");
    return taps[order - 1];
}

inline Kernel derivative_filter(int order) { return Kernel(derivative_taps(order), 0); }

/// A bank of derivative filters; applying it to a signal produces one stack
/// row per filter. The usual bank holds orders 1..K; single-order banks
/// back the plain TVp baselines.
class DerivativeBank {
public:
    /// Orders 1..k.
    static DerivativeBank up_to(int k) {
        if (k < 1 || k > 4)
            throw std::invalid_argument("DerivativeBank: order must be in [1,4]");
        std::vector<Kernel> f;
        f.reserve(static_cast<std::size_t>(k));
        for (int p = 1; p <= k; ++p) f.push_back(derivative_filter(p));
        return DerivativeBank(std::move(f));
    }

    /// Just the order-p filter (one-row stacks).
    static DerivativeBank single(int p) {
        return DerivativeBank(std::vector<Kernel>{derivative_filter(p)});
    }

    int rows() const { return static_cast<int>(filters_.size()); }
    const Kernel& filter(int row) const { return filters_[static_cast<std::size_t>(row)]; }
    const std::vector<Kernel>& filters() const { return filters_; }

    std::size_t max_filter_length() const {
        std::size_t m = 0;
        for (const Kernel& k : filters_) m = std::max(m, k.size());
        return m;
    }

private:
    explicit DerivativeBank(std::vector<Kernel> filters) : filters_(std::move(filters)) {}
    std::vector<Kernel> filters_;
};

/// K x N matrix whose column x is the multi-order derivative vector at x.
class DerivativeStack {
public:
    DerivativeStack(int rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
        if (rows < 1) throw std::invalid_argument("DerivativeStack: rows must be >= 1");
        if (cols < 1) throw std::invalid_argument("DerivativeStack: cols must be >= 1");
    }

    int rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(int r, std::size_t x) { return data_[static_cast<std::size_t>(r) * cols_ + x]; }
    double operator()(int r, std::size_t x) const {
        return data_[static_cast<std::size_t>(r) * cols_ + x];
    }

    Signal row(int r) const {
        std::vector<double> out(cols_);
        for (std::size_t x = 0; x < cols_; ++x) out[x] = (*this)(r, x);
        return Signal(std::move(out));
    }

private:
    int rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline DerivativeStack derivative_stack(const Signal& g, const DerivativeBank& bank) {
    DerivativeStack out(bank.rows(), g.size());
    for (int r = 0; r < bank.rows(); ++r) {
        const Signal v = convolve(g, bank.filter(r));
        for (std::size_t x = 0; x < g.size(); ++x) out(r, x) = v[x];
    }
    return out;
}

/// Sum of per-row adjoint convolutions; the exact adjoint of derivative_stack.
inline Signal adjoint_derivative_stack(const DerivativeStack& u, const DerivativeBank& bank) {
    if (u.rows() != bank.rows())
        throw std::invalid_argument("adjoint_derivative_stack: stack/bank row mismatch");
    Signal out = Signal::zeros(u.cols());
    for (int r = 0; r < bank.rows(); ++r) {
        const Signal a = adjoint_convolve(u.row(r), bank.filter(r));
        for (std::size_t x = 0; x < u.cols(); ++x) out[x] += a[x];
    }
    return out;
}

}  // namespace gmotv
