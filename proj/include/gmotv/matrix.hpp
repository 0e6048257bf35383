#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmotv {

/// Dense square matrix of small order (the derivative-order coupling
/// matrices are at most 4x4). Row-major storage, value semantics.
class Matrix {
public:
    Matrix() = default;

    explicit Matrix(int order)
        : k_(order), a_(static_cast<std::size_t>(order) * order, 0.0) {
        if (order < 1) throw std::invalid_argument("Matrix: order must be >= 1");
    }

    static Matrix identity(int order) {
        Matrix m(order);
        for (int i = 0; i < order; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(const std::vector<double>& d) {
        Matrix m(static_cast<int>(d.size()));
        for (int i = 0; i < m.order(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
        return m;
    }

    int order() const { return k_; }

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * k_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * k_ + j]; }

    const std::vector<double>& data() const { return a_; }

private:
    int k_ = 0;
    std::vector<double> a_;
};

inline void check_same_order(const Matrix& a, const Matrix& b, const char* who) {
    if (a.order() != b.order())
        throw std::invalid_argument(std::string(who) + ": matrix order mismatch");
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
    check_same_order(a, b, "operator+");
    Matrix c(a.order());
    for (int i = 0; i < a.order(); ++i)
        for (int j = 0; j < a.order(); ++j) c(i, j) = a(i, j) + b(i, j);
    return c;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
    check_same_order(a, b, "operator-");
    Matrix c(a.order());
    for (int i = 0; i < a.order(); ++i)
        for (int j = 0; j < a.order(); ++j) c(i, j) = a(i, j) - b(i, j);
    return c;
}

inline Matrix operator*(double s, const Matrix& a) {
    Matrix c(a.order());
    for (int i = 0; i < a.order(); ++i)
        for (int j = 0; j < a.order(); ++j) c(i, j) = s * a(i, j);
    return c;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    check_same_order(a, b, "operator*");
    const int k = a.order();
    Matrix c(k);
    for (int i = 0; i < k; ++i)
        for (int l = 0; l < k; ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            for (int j = 0; j < k; ++j) c(i, j) += ail * b(l, j);
        }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix c(a.order());
    for (int i = 0; i < a.order(); ++i)
        for (int j = 0; j < a.order(); ++j) c(i, j) = a(j, i);
    return c;
}

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

inline double frobenius_inner(const Matrix& a, const Matrix& b) {
    check_same_order(a, b, "frobenius_inner");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

inline double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

/// Solve A X = B by Gaussian elimination with partial pivoting.
inline Matrix solve(Matrix a, Matrix b) {
    check_same_order(a, b, "solve");
    const int k = a.order();
    const double scale = std::max(max_abs(a), 1e-300);
    for (int col = 0; col < k; ++col) {
        int piv = col;
        for (int r = col + 1; r < k; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) <= 1e-14 * scale)
            throw std::runtime_error("solve: singular matrix");
        if (piv != col)
            for (int j = 0; j < k; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(b(piv, j), b(col, j));
            }
        const double inv = 1.0 / a(col, col);
        for (int r = col + 1; r < k; ++r) {
            const double f = a(r, col) * inv;
            if (f == 0.0) continue;
            for (int j = col; j < k; ++j) a(r, j) -= f * a(col, j);
            for (int j = 0; j < k; ++j) b(r, j) -= f * b(col, j);
        }
    }
    Matrix x(k);
    for (int col = k - 1; col >= 0; --col)
        for (int j = 0; j < k; ++j) {
            double s = b(col, j);
            for (int r = col + 1; r < k; ++r) s -= a(col, r) * x(r, j);
            x(col, j) = s / a(col, col);
        }
    return x;
}

inline double determinant(Matrix a) {
    const int k = a.order();
    double d = 1.0;
    for (int col = 0; col < k; ++col) {
        int piv = col;
        for (int r = col + 1; r < k; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (a(piv, col) == 0.0) return 0.0;
        if (piv != col) {
            d = -d;
            for (int j = 0; j < k; ++j) std::swap(a(piv, j), a(col, j));
        }
        d *= a(col, col);
        const double inv = 1.0 / a(col, col);
        for (int r = col + 1; r < k; ++r) {
            const double f = a(r, col) * inv;
            for (int j = col; j < k; ++j) a(r, j) -= f * a(col, j);
        }
    }
    return d;
}

struct SymmetricEig {
    Matrix vectors;              // columns are eigenvectors, A = U diag(d) U^T
    std::vector<double> values;  // sorted descending
};

/// Cyclic Jacobi diagonalization for small symmetric matrices.
/// Deterministic output: eigenvalues descending (ties keep original index
/// order), each eigenvector's first non-negligible component made positive.
inline SymmetricEig eig_sym(const Matrix& a_in) {
    const int k = a_in.order();
    const double amax = std::max(max_abs(a_in), 1.0);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (std::abs(a_in(i, j) - a_in(j, i)) > 1e-12 * amax)
                throw std::invalid_argument("eig_sym: matrix not symmetric");

    Matrix a = a_in;
    // enforce exact symmetry before rotating
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
    Matrix u = Matrix::identity(k);
    const double fro = std::max(frobenius_norm(a), 1e-300);

    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < k; ++p)
            for (int q = p + 1; q < k; ++q) off += 2.0 * a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-14 * fro) break;

        for (int p = 0; p < k; ++p)
            for (int q = p + 1; q < k; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int r = 0; r < k; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p), arq = a(r, q);
                        a(r, p) = arp - s * (arq + tau * arp);
                        a(p, r) = a(r, p);
                        a(r, q) = arq + s * (arp - tau * arq);
                        a(q, r) = a(r, q);
                    }
                    const double urp = u(r, p), urq = u(r, q);
                    u(r, p) = urp - s * (urq + tau * urp);
                    u(r, q) = urq + s * (urp - tau * urq);
                }
            }
    }

    std::vector<int> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int i, int j) { return a(i, i) > a(j, j); });

    SymmetricEig out;
    out.vectors = Matrix(k);
    out.values.resize(static_cast<std::size_t>(k));
    for (int col = 0; col < k; ++col) {
        const int src = idx[static_cast<std::size_t>(col)];
        out.values[static_cast<std::size_t>(col)] = a(src, src);
        double colmax = 0.0;
        for (int r = 0; r < k; ++r) colmax = std::max(colmax, std::abs(u(r, src)));
        double sign = 1.0;
        for (int r = 0; r < k; ++r)
            if (std::abs(u(r, src)) > 1e-12 * std::max(colmax, 1e-300)) {
                sign = u(r, src) > 0.0 ? 1.0 : -1.0;
                break;
            }
        for (int r = 0; r < k; ++r) out.vectors(r, col) = sign * u(r, src);
    }
    return out;
}

/// Spectral norm via the largest eigenvalue of M^T M.
inline double spectral_norm(const Matrix& m) {
    const Matrix mtm = transpose(m) * m;
    const SymmetricEig e = eig_sym(mtm);
    return std::sqrt(std::max(e.values.front(), 0.0));
}

}  // namespace gmotv
