#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gmotv/derivative.hpp"
#include "gmotv/prior.hpp"
#include "gmotv/signal.hpp"
#include "gmotv/structure.hpp"

namespace gmotv {

/*
 * Training-based restoration: minimize over g
 *
 *   J(g) = 1/2 sum_x (f - h*g)(x)^2 + lambda * sum_x sqrt(eps + ||S(Lg)(x)||^2)
 *
 * by majorization-minimization. Freezing the sqrt weights at an anchor
 * signal gbar gives a quadratic surrogate whose normal operator is
 *
 *   Q_[gbar] g = h(-x)*h*g + 2 lambda L^T{ w_[gbar] S^T S (Lg) },
 *   w_[gbar](x) = 1 / (2 sqrt(eps + ||S(L gbar)(x)||^2)),
 *
 * a symmetric positive (semi)definite linear operator. Each outer step
 * solves Q_[g_k] g = h(-x)*f by diagonally preconditioned conjugate
 * gradient started at g_k; the surrogate is tangent at g_k and dominates J,
 * so the outer cost sequence is non-increasing. Q_[g] g - h(-x)*f is the
 * exact gradient of J at g.
 */

struct DegradationModel {
    Kernel blur = Kernel::delta();  // delta for pure denoising
};

struct RestoreConfig {
    double lambda = 1.0;       // regularization weight, > 0
    double eps_q = 1e-6;       // inner CG residual tolerance
    double eps_m = 1e-6;       // outer gradient-norm tolerance
    double eps_smooth = 1e-10;
    int max_outer = 200;
    int max_cg = 0;            // <= 0 means 10 * N
    bool precondition = true;

    void validate() const {
        if (!(lambda > 0.0)) throw std::invalid_argument("RestoreConfig: lambda must be > 0");
        if (!(eps_q > 0.0)) throw std::invalid_argument("RestoreConfig: eps_q must be > 0");
        if (!(eps_m > 0.0)) throw std::invalid_argument("RestoreConfig: eps_m must be > 0");
        if (!(eps_smooth > 0.0))
            throw std::invalid_argument("RestoreConfig: eps_smooth must be > 0");
        if (max_outer < 1) throw std::invalid_argument("RestoreConfig: max_outer must be >= 1");
    }
};

struct RestoreTrace {
    std::vector<double> cost;       // J at g0 and after every outer step
    std::vector<double> grad_norm;  // outer gradient norms, one per check
    int total_cg_iterations = 0;
    int outer_iterations = 0;
    bool converged = false;
};

inline double restore_cost(const Signal& g, const Signal& f, const DegradationModel& model,
                           const StructureMatrix& s, const DerivativeBank& bank, double lambda,
                           double eps_smooth) {
    check_same_size(g, f, "restore_cost");
    const Signal hg = convolve(g, model.blur);
    double data = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) {
        const double r = f[x] - hg[x];
        data += r * r;
    }
    const PriorConfig cfg{0.0, eps_smooth};
    return 0.5 * data + lambda * gmo_penalty(derivative_stack(g, bank), s, cfg);
}

/// Quadratic surrogate of restore_cost anchored at g_bar: the sqrt terms are
/// replaced by their tangent majorizers, so the value equals restore_cost at
/// g = g_bar and dominates it elsewhere.
inline double restore_surrogate(const Signal& g, const Signal& g_bar, const Signal& f,
                                const DegradationModel& model, const StructureMatrix& s,
                                const DerivativeBank& bank, double lambda, double eps_smooth) {
    check_same_size(g, f, "restore_surrogate");
    check_same_size(g, g_bar, "restore_surrogate");
    const Signal hg = convolve(g, model.blur);
    double data = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) {
        const double r = f[x] - hg[x];
        data += r * r;
    }
    const DerivativeStack stack = derivative_stack(g, bank);
    const DerivativeStack anchor = derivative_stack(g_bar, bank);
    double reg = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) {
        const double tk = detail::column_gram(anchor, s, x);
        const double t = detail::column_gram(stack, s, x);
        reg += (t + 2.0 * eps_smooth + tk) / (2.0 * std::sqrt(eps_smooth + tk));
    }
    return 0.5 * data + lambda * reg;
}

/// Per-sample surrogate weights w(x) = 1 / (2 sqrt(eps + ||S(L gbar)(x)||^2)).
inline std::vector<double> irls_weights(const Signal& g_bar, const StructureMatrix& s,
                                        const DerivativeBank& bank, double eps_smooth) {
    if (s.order() != bank.rows())
        throw std::invalid_argument("irls_weights: S order does not match bank");
    const DerivativeStack stack = derivative_stack(g_bar, bank);
    std::vector<double> w(g_bar.size());
    for (std::size_t x = 0; x < g_bar.size(); ++x)
        w[x] = 1.0 / (2.0 * std::sqrt(eps_smooth + detail::column_gram(stack, s, x)));
    return w;
}

/// Composite filters p_i^T L: one kernel per structure row.
inline std::vector<Kernel> structure_row_filters(const StructureMatrix& s,
                                                 const DerivativeBank& bank) {
    const int k = bank.rows();
    if (s.order() != k)
        throw std::invalid_argument("structure_row_filters: S order does not match bank");
    const std::size_t len = bank.max_filter_length();
    std::vector<Kernel> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        std::vector<double> taps(len, 0.0);
        for (int p = 0; p < k; ++p) {
            const Kernel& fp = bank.filter(p);
            for (std::size_t j = 0; j < fp.size(); ++j) taps[j] += s(i, p) * fp[j];
        }
        out.emplace_back(std::move(taps), 0);  // bank filters share origin 0
    }
    return out;
}

namespace detail {

/// Matrix-free application of Q = H^T H + 2 lambda sum_i Lhat_i^T W Lhat_i,
/// with buffers reused across conjugate-gradient iterations.
struct NormalOpPlan {
    Kernel blur = Kernel::delta();
    std::vector<Kernel> row_filters;   // p_i^T L composites
    std::vector<double> coeff;         // 2 * lambda * w per sample
    mutable std::vector<double> buf;

    NormalOpPlan(const std::vector<double>& weights, const StructureMatrix& s,
                 const DegradationModel& model, double lambda, const DerivativeBank& bank)
        : blur(model.blur),
          row_filters(structure_row_filters(s, bank)),
          coeff(weights),
          buf(weights.size(), 0.0) {
        for (double& c : coeff) c *= 2.0 * lambda;
    }

    void apply(const double* g, double* out) const {
        const std::size_t n = coeff.size();
        convolve_into(g, n, blur, buf.data());
        for (std::size_t x = 0; x < n; ++x) out[x] = 0.0;
        adjoint_convolve_add(buf.data(), n, blur, out);
        for (const Kernel& l : row_filters) {
            convolve_into(g, n, l, buf.data());
            for (std::size_t x = 0; x < n; ++x) buf[x] *= coeff[x];
            adjoint_convolve_add(buf.data(), n, l, out);
        }
    }
};

}  // namespace detail

/// Apply the anchored normal operator with precomputed weights.
inline Signal apply_normal_op(const Signal& g, const std::vector<double>& weights,
                              const StructureMatrix& s, const DegradationModel& model,
                              double lambda, const DerivativeBank& bank) {
    if (weights.size() != g.size())
        throw std::invalid_argument("apply_normal_op: weight length mismatch");
    const detail::NormalOpPlan plan(weights, s, model, lambda, bank);
    Signal out = Signal::zeros(g.size());
    plan.apply(g.samples().data(), &out[0]);
    return out;
}

inline Signal apply_normal_op(const Signal& g, const Signal& g_bar, const StructureMatrix& s,
                              const DegradationModel& model, double lambda,
                              const DerivativeBank& bank, double eps_smooth) {
    return apply_normal_op(g, irls_weights(g_bar, s, bank, eps_smooth), s, model, lambda, bank);
}

/// Exact gradient of restore_cost at g (the operator anchored at g itself).
inline Signal restore_cost_grad(const Signal& g, const Signal& f, const DegradationModel& model,
                                const StructureMatrix& s, double lambda,
                                const DerivativeBank& bank, double eps_smooth) {
    check_same_size(g, f, "restore_cost_grad");
    return apply_normal_op(g, g, s, model, lambda, bank, eps_smooth) - adjoint_convolve(f, model.blur);
}

/// Diagonal of the anchored normal operator, used as a Jacobi preconditioner.
inline std::vector<double> normal_op_diagonal(const std::vector<double>& weights,
                                              const StructureMatrix& s,
                                              const DegradationModel& model, double lambda,
                                              const DerivativeBank& bank) {
    const std::size_t n = weights.size();
    const double data_term = model.blur.energy();
    std::vector<double> d(n, data_term);
    const std::vector<Kernel> rows = structure_row_filters(s, bank);
    for (const Kernel& l : rows) {
        for (std::size_t x = 0; x < n; ++x) {
            double acc = 0.0;
            for (std::size_t t = 0; t < l.size(); ++t)
                acc += l[t] * l[t] *
                       weights[wrap_index(static_cast<std::ptrdiff_t>(x) +
                                              (static_cast<std::ptrdiff_t>(t) - l.origin()),
                                          n)];
            d[x] += 2.0 * lambda * acc;
        }
    }
    return d;
}

inline std::vector<double> normal_op_diagonal(const Signal& g_bar, const StructureMatrix& s,
                                              const DegradationModel& model, double lambda,
                                              const DerivativeBank& bank, double eps_smooth) {
    return normal_op_diagonal(irls_weights(g_bar, s, bank, eps_smooth), s, model, lambda, bank);
}

struct PcgResult {
    Signal solution;
    int iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
};

/// Preconditioned conjugate gradient on Q_[gbar] g = b, started at gbar.
/// Terminates when the residual 2-norm (the surrogate gradient) drops
/// below eps_q.
inline PcgResult pcg_solve(const Signal& b, const Signal& g_bar, const StructureMatrix& s,
                           const DegradationModel& model, double lambda,
                           const DerivativeBank& bank, double eps_smooth, double eps_q,
                           int max_cg, bool precondition = true) {
    check_same_size(b, g_bar, "pcg_solve");
    const std::size_t n = b.size();
    if (max_cg <= 0) max_cg = 10 * static_cast<int>(n);

    const std::vector<double> w = irls_weights(g_bar, s, bank, eps_smooth);
    const detail::NormalOpPlan plan(w, s, model, lambda, bank);
    std::vector<double> diag;
    if (precondition) diag = normal_op_diagonal(w, s, model, lambda, bank);

    auto nrm = [n](const std::vector<double>& v) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += v[i] * v[i];
        return std::sqrt(acc);
    };
    auto inner = [n](const std::vector<double>& a, const std::vector<double>& c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += a[i] * c[i];
        return acc;
    };

    std::vector<double> x(g_bar.samples());
    std::vector<double> r(n), z(n), p(n), q(n);
    plan.apply(x.data(), r.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];

    PcgResult res;
    res.iterations = 0;
    res.residual_norm = nrm(r);
    if (res.residual_norm < eps_q) {
        res.solution = Signal(std::move(x));
        res.converged = true;
        return res;
    }
    if (precondition)
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    else
        z = r;
    p = z;
    double rho = inner(r, z);

    for (int it = 1; it <= max_cg; ++it) {
        plan.apply(p.data(), q.data());
        const double pq = inner(p, q);
        if (!(pq > 0.0)) break;  // operator numerically indefinite along p
        const double alpha = rho / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res.iterations = it;
        res.residual_norm = nrm(r);
        if (res.residual_norm < eps_q) {
            res.converged = true;
            break;
        }
        if (precondition)
            for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        else
            z = r;
        const double rho_next = inner(r, z);
        const double beta = rho_next / rho;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rho = rho_next;
    }
    res.solution = Signal(std::move(x));
    return res;
}

/// MM restoration loop. Outer iterations stop once the exact cost gradient
/// at the current iterate falls below eps_m, so a point that already
/// satisfies the tolerance is returned unchanged.
inline std::pair<Signal, RestoreTrace> mm_gmotv(const Signal& f, const DegradationModel& model,
                                                const StructureMatrix& s, const Signal& g0,
                                                const DerivativeBank& bank,
                                                const RestoreConfig& cfg) {
    cfg.validate();
    check_same_size(f, g0, "mm_gmotv");
    const Signal b = adjoint_convolve(f, model.blur);

    Signal g = g0;
    RestoreTrace trace;
    trace.cost.push_back(restore_cost(g, f, model, s, bank, cfg.lambda, cfg.eps_smooth));
    for (int outer = 0; outer < cfg.max_outer; ++outer) {
        const Signal d = restore_cost_grad(g, f, model, s, cfg.lambda, bank, cfg.eps_smooth);
        trace.grad_norm.push_back(norm(d));
        if (trace.grad_norm.back() < cfg.eps_m) {
            trace.converged = true;
            break;
        }
        const PcgResult inner = pcg_solve(b, g, s, model, cfg.lambda, bank, cfg.eps_smooth,
                                          cfg.eps_q, cfg.max_cg, cfg.precondition);
        trace.total_cg_iterations += inner.iterations;
        g = inner.solution;
        trace.outer_iterations = outer + 1;
        trace.cost.push_back(restore_cost(g, f, model, s, bank, cfg.lambda, cfg.eps_smooth));
    }
    return {std::move(g), std::move(trace)};
}

/// Warm start at the measured signal.
inline std::pair<Signal, RestoreTrace> mm_gmotv(const Signal& f, const DegradationModel& model,
                                                const StructureMatrix& s,
                                                const DerivativeBank& bank,
                                                const RestoreConfig& cfg) {
    return mm_gmotv(f, model, s, f, bank, cfg);
}

}  // namespace gmotv
