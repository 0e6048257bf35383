#pragma once

// Deterministic instance generators shared by the unit and acceptance suites.

#include <cstdint>
#include <vector>

#include "gmotv/derivative.hpp"
#include "gmotv/metrics.hpp"
#include "gmotv/signal.hpp"
#include "gmotv/structure.hpp"

namespace testsupport {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    double uniform() {  // [0,1)
        return static_cast<double>(gmotv::splitmix64(state_) >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double gauss() {
        // Box-Muller, one value per call is plenty for tests
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }
    std::uint64_t integer(std::uint64_t n) { return gmotv::splitmix64(state_) % n; }

private:
    std::uint64_t state_;
};

inline gmotv::Signal random_signal(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * rng.gauss();
    return gmotv::Signal(std::move(v));
}

inline gmotv::DerivativeStack random_stack(Rng& rng, int rows, std::size_t cols,
                                           double scale = 1.0) {
    gmotv::DerivativeStack s(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (std::size_t x = 0; x < cols; ++x) s(r, x) = scale * rng.gauss();
    return s;
}

/// Well-conditioned random structure matrix near the identity.
inline gmotv::StructureMatrix random_structure(Rng& rng, int k, double spread = 0.3) {
    gmotv::Matrix m = gmotv::Matrix::identity(k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m(i, j) += spread * rng.uniform(-1.0, 1.0);
    return gmotv::StructureMatrix(std::move(m));
}

/// Piecewise-constant signal with `jumps` level changes.
inline gmotv::Signal piecewise_constant(Rng& rng, std::size_t n, int jumps, double amplitude) {
    std::vector<double> v(n, 0.0);
    double level = amplitude * rng.uniform(-1.0, 1.0);
    std::vector<std::size_t> cuts;
    for (int j = 0; j < jumps; ++j) cuts.push_back(1 + rng.integer(n - 1));
    std::sort(cuts.begin(), cuts.end());
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (next < cuts.size() && i == cuts[next]) {
            level = amplitude * rng.uniform(-1.0, 1.0);
            ++next;
        }
        v[i] = level;
    }
    return gmotv::Signal(std::move(v));
}

/// Continuous piecewise-linear signal with `knots` random slope changes.
inline gmotv::Signal piecewise_linear(Rng& rng, std::size_t n, int knots, double slope_scale) {
    std::vector<double> v(n, 0.0);
    std::vector<std::size_t> cuts;
    for (int j = 0; j < knots; ++j) cuts.push_back(1 + rng.integer(n - 1));
    std::sort(cuts.begin(), cuts.end());
    double slope = slope_scale * rng.uniform(-1.0, 1.0);
    double value = 0.0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (next < cuts.size() && i == cuts[next]) {
            slope = slope_scale * rng.uniform(-1.0, 1.0);
            ++next;
        }
        value += slope;
        v[i] = value;
    }
    // remove the mean so segments are roughly centred
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(n);
    for (double& x : v) x -= m;
    return gmotv::Signal(std::move(v));
}

}  // namespace testsupport
