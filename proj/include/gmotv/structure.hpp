#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "gmotv/matrix.hpp"

namespace gmotv {

/// Full-rank K x K matrix whose rows couple the derivative orders; S^T S is
/// the inverse covariance of the multivariate Laplacian derivative prior.
class StructureMatrix {
public:
    explicit StructureMatrix(Matrix m) : m_(std::move(m)) { validate(); }

    static StructureMatrix identity(int order) { return StructureMatrix(Matrix::identity(order)); }
    static StructureMatrix scalar(double s) {
        Matrix m(1);
        m(0, 0) = s;
        return StructureMatrix(m);
    }

    int order() const { return m_.order(); }
    const Matrix& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

private:
    void validate() const {
        for (double v : m_.data())
            if (!std::isfinite(v))
                throw std::invalid_argument("StructureMatrix: non-finite entry");
        // rank check: |det| against the Hadamard bound keeps it scale-free
        double hadamard = 1.0;
        for (int i = 0; i < m_.order(); ++i) {
            double r = 0.0;
            for (int j = 0; j < m_.order(); ++j) r += m_(i, j) * m_(i, j);
            hadamard *= std::sqrt(r);
        }
        if (std::abs(determinant(m_)) <= 1e-12 * hadamard)
            throw std::invalid_argument("StructureMatrix: rank-deficient matrix");
    }

    Matrix m_;
};

/// Plain-text serialization: order K on the first line, then K rows of K
/// entries in scientific notation (full double precision).
inline void write_structure(std::ostream& os, const StructureMatrix& s) {
    const int k = s.order();
    os << k << "\n";
    char buf[40];
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            std::snprintf(buf, sizeof(buf), "%.16e", s(i, j));
            os << buf << (j + 1 < k ? " " : "\n");
        }
    }
}

inline StructureMatrix read_structure(std::istream& is) {
    int k = 0;
    if (!(is >> k) || k < 1)
        throw std::runtime_error("read_structure: bad or missing order");
    Matrix m(k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (!(is >> m(i, j)))
                throw std::runtime_error("read_structure: truncated matrix data");
    return StructureMatrix(std::move(m));
}

}  // namespace gmotv
