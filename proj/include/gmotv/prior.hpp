#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gmotv/derivative.hpp"
#include "gmotv/matrix.hpp"
#include "gmotv/structure.hpp"

namespace gmotv {

/*
 * Multi-order total variation penalty and its structure-matrix fitting
 * objective. With v(x) the stacked derivatives of a signal and S the
 * structure matrix:
 *
 *   penalty      R(v,S)   = sum_x sqrt(eps + ||S v(x)||^2)
 *   kl objective R_F(v,S) = R(v,S) - 1/2 log|S S^T| + (lambda_f/2) ||S||_F^2
 *
 * R_F is the cross-entropy between the sample derivative density and the
 * multivariate Laplacian model, up to constants; the ridge term keeps it
 * bounded below when the derivatives are poorly distributed. The sqrt
 * smoothing floor eps keeps everything differentiable at v = 0.
 *
 *   grad_S R_F = S A - (S S^T)^{-1} S + lambda_f S,
 *   A          = sum_x v(x) v(x)^T / sqrt(eps + ||S v(x)||^2).
 *
 * The quadratic-over-sqrt surrogate (weights frozen at an anchor S_k)
 * majorizes R_F with tangency at S_k and has the same gradient shape with
 * A built from the anchor.
 */

struct PriorConfig {
    double lambda_f = 0.0;     // Frobenius ridge weight, >= 0
    double eps_smooth = 1e-10; // sqrt smoothing floor, > 0

    void validate() const {
        if (!(eps_smooth > 0.0)) throw std::invalid_argument("PriorConfig: eps_smooth must be > 0");
        if (lambda_f < 0.0) throw std::invalid_argument("PriorConfig: lambda_f must be >= 0");
    }
};

inline void check_stack_structure(const DerivativeStack& stack, const StructureMatrix& s,
                                  const char* who) {
    if (stack.rows() != s.order())
        throw std::invalid_argument(std::string(who) + ": stack order does not match S");
}

namespace detail {

// ||S v(x)||^2 for column x
inline double column_gram(const DerivativeStack& stack, const StructureMatrix& s, std::size_t x) {
    const int k = s.order();
    double out = 0.0;
    for (int i = 0; i < k; ++i) {
        double si = 0.0;
        for (int j = 0; j < k; ++j) si += s(i, j) * stack(j, x);
        out += si * si;
    }
    return out;
}

}  // namespace detail

inline double gmo_penalty(const DerivativeStack& stack, const StructureMatrix& s,
                          const PriorConfig& cfg) {
    cfg.validate();
    check_stack_structure(stack, s, "gmo_penalty");
    double acc = 0.0;
    for (std::size_t x = 0; x < stack.cols(); ++x)
        acc += std::sqrt(cfg.eps_smooth + detail::column_gram(stack, s, x));
    return acc;
}

/// log|S S^T| from the spectrum of S S^T (conditioning-friendly).
inline double log_det_gram(const StructureMatrix& s) {
    const Matrix g = s.matrix() * transpose(s.matrix());
    const SymmetricEig e = eig_sym(g);
    double acc = 0.0;
    for (double d : e.values) {
        if (!(d > 0.0)) throw std::runtime_error("log_det_gram: S S^T not positive definite");
        acc += std::log(d);
    }
    return acc;
}

inline double kl_objective(const DerivativeStack& stack, const StructureMatrix& s,
                           const PriorConfig& cfg) {
    const double fro = frobenius_norm(s.matrix());
    return gmo_penalty(stack, s, cfg) - 0.5 * log_det_gram(s) + 0.5 * cfg.lambda_f * fro * fro;
}

/// A = sum_x v v^T / sqrt(eps + ||S v||^2); symmetric positive semidefinite.
inline Matrix weighted_scatter(const DerivativeStack& stack, const StructureMatrix& s,
                               double eps_smooth) {
    check_stack_structure(stack, s, "weighted_scatter");
    if (!(eps_smooth > 0.0))
        throw std::invalid_argument("weighted_scatter: eps_smooth must be > 0");
    const int k = stack.rows();
    Matrix a(k);
    for (std::size_t x = 0; x < stack.cols(); ++x) {
        const double w = 1.0 / std::sqrt(eps_smooth + detail::column_gram(stack, s, x));
        for (int i = 0; i < k; ++i) {
            const double vi = stack(i, x);
            if (vi == 0.0) continue;
            for (int j = 0; j < k; ++j) a(i, j) += w * vi * stack(j, x);
        }
    }
    return a;
}

inline Matrix kl_gradient_from_scatter(const StructureMatrix& s, const Matrix& a, double lambda_f) {
    const Matrix& sm = s.matrix();
    const Matrix gram = sm * transpose(sm);
    return sm * a - solve(gram, sm) + lambda_f * sm;
}

inline Matrix kl_objective_grad(const DerivativeStack& stack, const StructureMatrix& s,
                                const PriorConfig& cfg) {
    cfg.validate();
    return kl_gradient_from_scatter(s, weighted_scatter(stack, s, cfg.eps_smooth), cfg.lambda_f);
}

/// Surrogate value with the per-sample weights frozen at `anchor`; equals
/// kl_objective at S = anchor and dominates it elsewhere.
inline double kl_surrogate(const DerivativeStack& stack, const StructureMatrix& s,
                           const StructureMatrix& anchor, const PriorConfig& cfg) {
    cfg.validate();
    check_stack_structure(stack, s, "kl_surrogate");
    check_stack_structure(stack, anchor, "kl_surrogate");
    double acc = 0.0;
    for (std::size_t x = 0; x < stack.cols(); ++x) {
        const double tk = detail::column_gram(stack, anchor, x);
        const double t = detail::column_gram(stack, s, x);
        // tangent majorizer of sqrt(eps + t) at t = tk
        acc += (t + 2.0 * cfg.eps_smooth + tk) / (2.0 * std::sqrt(cfg.eps_smooth + tk));
    }
    const double fro = frobenius_norm(s.matrix());
    return acc - 0.5 * log_det_gram(s) + 0.5 * cfg.lambda_f * fro * fro;
}

inline Matrix kl_surrogate_grad(const DerivativeStack& stack, const StructureMatrix& s,
                                const StructureMatrix& anchor, const PriorConfig& cfg) {
    cfg.validate();
    check_stack_structure(stack, s, "kl_surrogate_grad");
    return kl_gradient_from_scatter(s, weighted_scatter(stack, anchor, cfg.eps_smooth),
                                    cfg.lambda_f);
}

}  // namespace gmotv
