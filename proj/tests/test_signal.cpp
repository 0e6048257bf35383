#include <catch2/catch_amalgamated.hpp>

#include "gmotv/derivative.hpp"
#include "gmotv/signal.hpp"
#include "support/synthetic.hpp"

using namespace gmotv;
using testsupport::Rng;
using testsupport::random_signal;

namespace {

Signal sig(std::initializer_list<double> v) { return Signal(std::vector<double>(v)); }

// plain polynomial multiplication of tap sequences (non-circular)
std::vector<double> compose_taps(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

double stack_inner(const DerivativeStack& a, const DerivativeStack& b) {
    double s = 0.0;
    for (int r = 0; r < a.rows(); ++r)
        for (std::size_t x = 0; x < a.cols(); ++x) s += a(r, x) * b(r, x);
    return s;
}

}  // namespace

TEST_CASE("signal and kernel invariants are enforced") {
    REQUIRE_THROWS_AS(Signal(std::vector<double>{}), std::invalid_argument);
    REQUIRE_THROWS_AS(Signal({1.0, std::nan("")}), std::invalid_argument);
    REQUIRE_THROWS_AS(Kernel({0.0, 0.0}, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(Kernel({}, 0), std::invalid_argument);
    REQUIRE_NOTHROW(Kernel({1.0, -1.0}, 0));
}

TEST_CASE("convolve: identity, constant annihilation, hand-expanded difference") {
    const Signal g = sig({1, 2, 3, 4});
    const Signal id = convolve(g, Kernel::delta());
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(id[i] == g[i]);

    const Kernel diff({1.0, -1.0}, 0);
    const Signal z = convolve(Signal::constant(8, 3.25), diff);
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(z[i] == 0.0);

    const Signal v = convolve(sig({0, 0, 1, 0}), diff);
    REQUIRE(v[0] == 0.0);
    REQUIRE(v[1] == 0.0);
    REQUIRE(v[2] == 1.0);
    REQUIRE(v[3] == -1.0);

    REQUIRE_THROWS_AS(convolve(sig({1, 2}), Kernel({1, 0, 0, 1}, 0)), std::invalid_argument);
}

TEST_CASE("adjoint_convolve: identity, inner-product identity, hand-expanded case") {
    Rng rng(101);
    const Signal u = random_signal(rng, 12);
    const Signal au = adjoint_convolve(u, Kernel::delta());
    for (std::size_t i = 0; i < u.size(); ++i) REQUIRE(au[i] == u[i]);

    const Kernel k2({1.0, -2.0, 1.0}, 0);
    const Signal g = random_signal(rng, 16);
    const Signal u16 = random_signal(rng, 16);
    REQUIRE(std::abs(dot(convolve(g, k2), u16) - dot(g, adjoint_convolve(u16, k2))) < 1e-12);

    // k=[1,-1], origin 0, u = delta_0: <Ag, u> = g(0) - g(3), so the adjoint
    // image is [1,0,0,-1]
    const Signal e0 = sig({1, 0, 0, 0});
    const Signal a = adjoint_convolve(e0, Kernel({1.0, -1.0}, 0));
    REQUIRE(a[0] == 1.0);
    REQUIRE(a[1] == 0.0);
    REQUIRE(a[2] == 0.0);
    REQUIRE(a[3] == -1.0);
}

TEST_CASE("adjoint identity holds for random kernels and signals") {
    Rng rng(202);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 8 + rng.integer(24);
        const std::size_t taps = 1 + rng.integer(5);
        std::vector<double> t(taps);
        for (double& v : t) v = rng.uniform(-2.0, 2.0);
        t[rng.integer(taps)] += 1.0;  // ensure a nonzero tap
        const Kernel k(t, static_cast<std::ptrdiff_t>(rng.integer(taps)));
        const Signal g = random_signal(rng, n);
        const Signal u = random_signal(rng, n);
        const double lhs = dot(convolve(g, k), u);
        const double rhs = dot(g, adjoint_convolve(u, k));
        REQUIRE(std::abs(lhs - rhs) <= 1e-10 * norm(g) * norm(u) + 1e-14);
    }
}

TEST_CASE("circular shift equivariance is exact") {
    Rng rng(303);
    const Signal g = random_signal(rng, 17);
    const Kernel k({0.5, -1.25, 0.75}, 1);
    for (std::ptrdiff_t s : {1, 5, -3, 16}) {
        const Signal a = convolve(circular_shift(g, s), k);
        const Signal b = circular_shift(convolve(g, k), s);
        for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(a[i] == b[i]);
    }
}

TEST_CASE("derivative bank: declared taps, constants to exact zero") {
    REQUIRE_THROWS_AS(DerivativeBank::up_to(5), std::invalid_argument);
    REQUIRE_THROWS_AS(DerivativeBank::up_to(0), std::invalid_argument);
    REQUIRE(DerivativeBank::single(3).rows() == 1);

    const DerivativeBank bank = DerivativeBank::up_to(4);
    REQUIRE(bank.rows() == 4);
    for (int p = 1; p <= 4; ++p) {
        const Kernel& f = bank.filter(p - 1);
        REQUIRE(f.size() == static_cast<std::size_t>(p + 1));
        double sum = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) sum += f[j];
        REQUIRE(sum == 0.0);
    }

    const DerivativeStack z = derivative_stack(Signal::constant(10, -7.5), bank);
    for (int r = 0; r < 4; ++r)
        for (std::size_t x = 0; x < 10; ++x) REQUIRE(z(r, x) == 0.0);
}

TEST_CASE("derivative filters compose from first differences up to sign") {
    const auto d1 = derivative_taps(1);
    REQUIRE(compose_taps(d1, d1) == derivative_taps(2));
    const auto t3 = compose_taps(d1, derivative_taps(2));  // [1,-3,3,-1]
    const auto& want3 = derivative_taps(3);
    for (std::size_t i = 0; i < t3.size(); ++i) REQUIRE(t3[i] == -want3[i]);
    REQUIRE(compose_taps(derivative_taps(2), derivative_taps(2)) == derivative_taps(4));
}

TEST_CASE("derivative_stack: impulse rows match hand-expanded differences") {
    const Signal g = sig({0, 0, 1, 0, 0, 0, 0, 0});
    const DerivativeStack s = derivative_stack(g, DerivativeBank::up_to(2));
    const double row1[] = {0, 0, 1, -1, 0, 0, 0, 0};
    const double row2[] = {0, 0, 1, -2, 1, 0, 0, 0};
    for (std::size_t x = 0; x < 8; ++x) {
        REQUIRE(s(0, x) == row1[x]);
        REQUIRE(s(1, x) == row2[x]);
    }
}

TEST_CASE("derivative_stack: second difference annihilates affine interiors") {
    std::vector<double> v(16);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 + 0.25 * static_cast<double>(i);
    const DerivativeStack s = derivative_stack(Signal(v), DerivativeBank::up_to(2));
    for (std::size_t x = 2; x < v.size(); ++x) REQUIRE(s(1, x) == 0.0);
}

TEST_CASE("adjoint_derivative_stack: zero, single-row reduction, adjoint identity") {
    const DerivativeBank bank1 = DerivativeBank::up_to(1);
    const Signal zero = adjoint_derivative_stack(DerivativeStack(1, 6), bank1);
    for (std::size_t i = 0; i < 6; ++i) REQUIRE(zero[i] == 0.0);

    DerivativeStack u1(1, 8);
    u1(0, 0) = 1.0;
    const Signal got = adjoint_derivative_stack(u1, bank1);
    const Signal want = adjoint_convolve(u1.row(0), bank1.filter(0));
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(got[i] == want[i]);

    Rng rng(404);
    const DerivativeBank bank = DerivativeBank::up_to(4);
    const Signal g = random_signal(rng, 32);
    DerivativeStack u(4, 32);
    for (int r = 0; r < 4; ++r)
        for (std::size_t x = 0; x < 32; ++x) u(r, x) = rng.gauss();
    const double lhs = stack_inner(derivative_stack(g, bank), u);
    const double rhs = dot(g, adjoint_derivative_stack(u, bank));
    REQUIRE(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));

    DerivativeStack mismatch(2, 32);
    REQUIRE_THROWS_AS(adjoint_derivative_stack(mismatch, bank), std::invalid_argument);
}
