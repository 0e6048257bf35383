#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmotv/matrix.hpp"
#include "gmotv/prior.hpp"
#include "gmotv/structure.hpp"

namespace gmotv {

/*
 * Majorization-minimization estimation of the structure matrix from a
 * derivative stack. Each iteration freezes the scatter matrix A at the
 * current S, whose quadratic surrogate has the closed-form minimizer
 *
 *   S_next = (D + lambda_f I)^{-1/2} U^T,   A = U D U^T,
 *
 * and terminates when the true objective gradient is small. The rows of
 * every iterate are pairwise orthogonal by construction: S S^T equals the
 * diagonal (D + lambda_f I)^{-1}.
 */

struct MmKlConfig {
    double lambda_f = 0.0;
    double eps_grad = 1e-6;    // stop when spectral norm of grad <= eps_grad
    double eps_smooth = 1e-10;
    int max_iters = 500;

    void validate() const {
        if (!(eps_grad > 0.0)) throw std::invalid_argument("MmKlConfig: eps_grad must be > 0");
        if (max_iters < 1) throw std::invalid_argument("MmKlConfig: max_iters must be >= 1");
        if (!(eps_smooth > 0.0)) throw std::invalid_argument("MmKlConfig: eps_smooth must be > 0");
        if (lambda_f < 0.0) throw std::invalid_argument("MmKlConfig: lambda_f must be >= 0");
    }
};

struct MmKlResult {
    StructureMatrix structure;
    int iterations = 0;
    double final_grad_norm = 0.0;
    bool converged = false;
    std::vector<double> objective_trace;  // kl_objective at S0 and each iterate
};

class rank_deficiency_error : public std::runtime_error {
public:
    rank_deficiency_error(int index, double value)
        : std::runtime_error("mm_kl: scatter matrix is rank-deficient (eigenvalue " +
                             std::to_string(index) + " = " + std::to_string(value) +
                             "); derivatives are not well-distributed, use lambda_f > 0"),
          eigen_index(index),
          eigen_value(value) {}

    int eigen_index;
    double eigen_value;
};

inline MmKlResult mm_kl(const DerivativeStack& stack, const StructureMatrix& s0,
                        const MmKlConfig& cfg) {
    cfg.validate();
    check_stack_structure(stack, s0, "mm_kl");
    const int k = s0.order();
    const PriorConfig pcfg{cfg.lambda_f, cfg.eps_smooth};

    MmKlResult res{s0, 0, 0.0, false, {}};
    res.objective_trace.push_back(kl_objective(stack, s0, pcfg));

    Matrix a = weighted_scatter(stack, s0, cfg.eps_smooth);
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        const SymmetricEig eig = eig_sym(a);
        if (cfg.lambda_f == 0.0) {
            const double dmax = std::max(eig.values.front(), 0.0);
            for (int i = 0; i < k; ++i)
                if (!(eig.values[static_cast<std::size_t>(i)] > 1e-12 * std::max(dmax, 1e-300)))
                    throw rank_deficiency_error(i, eig.values[static_cast<std::size_t>(i)]);
        }

        Matrix next(k);
        for (int i = 0; i < k; ++i) {
            const double d = std::max(eig.values[static_cast<std::size_t>(i)], 0.0);
            const double scale = 1.0 / std::sqrt(d + cfg.lambda_f);
            for (int j = 0; j < k; ++j) next(i, j) = scale * eig.vectors(j, i);
        }
        res.structure = StructureMatrix(std::move(next));
        res.iterations = iter;

        a = weighted_scatter(stack, res.structure, cfg.eps_smooth);
        res.objective_trace.push_back(kl_objective(stack, res.structure, pcfg));
        res.final_grad_norm =
            spectral_norm(kl_gradient_from_scatter(res.structure, a, cfg.lambda_f));
        if (res.final_grad_norm <= cfg.eps_grad) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace gmotv
