#include "doctest.h"

#include "degenctl/solver.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace degenctl;

namespace {

const double pi = std::numbers::pi;

ControlProblem heat_problem(const Grid& g, double T) {
    return {DiffusionProfile::constant(), Potential::zero(), {0.3, 0.7}, T,
            SpaceSlice::sample(g, [](double x) { return std::sin(pi * x); })};
}

ControlProblem degenerate_problem(const Grid& g, double T) {
    return {DiffusionProfile::power_law(0.4, 0.6, 2, 2), Potential::zero(), {0.3, 0.7}, T,
            SpaceSlice::sample(g, [](double x) { return std::sin(pi * x); })};
}

SpaceSlice random_slice(const Grid& g, std::uint64_t seed) {
    return SpaceSlice(oracle::random_vector(static_cast<std::size_t>(g.n), seed));
}

SpaceTimeField random_field(const Grid& g, std::uint64_t seed) {
    const auto v = oracle::random_vector(static_cast<std::size_t>((g.m + 1) * g.n), seed);
    SpaceTimeField f = SpaceTimeField::zeros(g);
    for (std::size_t k = 0; k < f.rows(); ++k)
        for (std::size_t j = 0; j < f.cols(); ++j) f(k, j) = v[k * f.cols() + j];
    return f;
}

double terminal_error(int n, int m, double T) {
    const Grid g = build_grid(n, m, T);
    const auto p = heat_problem(g, T);
    const auto u = solve_forward(p, SpaceTimeField::zeros(g), g);
    const double decay = std::exp(-pi * pi * T);
    auto err = u.slice(static_cast<std::size_t>(m));
    err -= decay * p.u0;
    return l2_norm(err, g);
}

}  // namespace

TEST_CASE("heat equation decays like exp(-pi^2 t)") {
    const Grid g = build_grid(199, 400, 0.1);
    const auto p = heat_problem(g, 0.1);
    const auto u = solve_forward(p, SpaceTimeField::zeros(g), g);
    const double peak = u(400, 99);  // x = 0.5
    CHECK(std::abs(peak - 0.37273) < 2e-3);
}

TEST_CASE("zero data gives the zero trajectory") {
    const Grid g = build_grid(31, 20, 0.5);
    auto p = degenerate_problem(g, 0.5);
    p.u0 = SpaceSlice::zeros(g);
    const auto u = solve_forward(p, SpaceTimeField::zeros(g), g);
    for (double v : u.data()) CHECK(v == 0.0);
    const auto v = solve_adjoint(p, SpaceSlice::zeros(g), SpaceTimeField::zeros(g), g);
    for (double x : v.data()) CHECK(x == 0.0);
}

TEST_CASE("adjoint is the time-reversed heat decay") {
    const Grid g = build_grid(199, 400, 0.1);
    const auto p = heat_problem(g, 0.1);
    const auto v = solve_adjoint(p, p.u0, SpaceTimeField::zeros(g), g);
    auto err = v.slice(0);
    err -= std::exp(-pi * pi * 0.1) * p.u0;
    double max_err = 0.0;
    for (double e : err.values()) max_err = std::max(max_err, std::abs(e));
    CHECK(max_err < 2e-3);
}

TEST_CASE("one implicit step agrees with dense Gaussian elimination") {
    const Grid g = build_grid(12, 5, 0.3);
    ControlProblem p = degenerate_problem(g, 0.3);
    p.c = Potential::sin_cos(3.0);
    const DiscreteOperator op(p, g);
    const auto rhs = oracle::random_vector(12, 99);
    for (int level : {1, 3, 5}) {
        // assemble I + dt(-D_a + C) from the profile directly
        std::vector<std::vector<double>> M(12, std::vector<double>(12, 0.0));
        const double r = g.dt / (g.h * g.h);
        for (int i = 0; i < 12; ++i) {
            const double xl = g.x(i) + 0.5 * g.h;
            const double xr = g.x(i + 1) + 0.5 * g.h;
            M[i][i] = 1.0 + r * (p.profile(xl) + p.profile(xr)) +
                      g.dt * 3.0 * std::sin(2 * pi * g.x(i + 1)) * std::cos(2 * pi * g.t(level) / 0.3);
            if (i > 0) M[i][i - 1] = -r * p.profile(xl);
            if (i < 11) M[i][i + 1] = -r * p.profile(xr);
        }
        const auto expected = oracle::dense_solve(M, rhs);
        std::vector<double> got = rhs;
        op.solve_step(level, got);
        for (int i = 0; i < 12; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("singular step matrix is reported with its time level") {
    const Grid g = build_grid(9, 4, 1.0);
    ControlProblem p = heat_problem(g, 1.0);
    // dt * c = -1 on a zero-diffusion row would vanish; make the diagonal cancel exactly.
    p.profile = DiffusionProfile::power_law(0.05, 0.95, 2, 2);
    p.c = Potential::constant(-4.0);  // 1 + 0.25 * (-4) = 0
    try {
        solve_forward(p, SpaceTimeField::zeros(g), g);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.level() == 1);
    }
}

TEST_CASE("forward and adjoint reject non-conforming inputs") {
    const Grid g = build_grid(15, 10, 0.5);
    const auto p = heat_problem(g, 0.5);
    CHECK_THROWS_AS(solve_forward(p, SpaceTimeField(10, 15), g), std::invalid_argument);
    CHECK_THROWS_AS(solve_adjoint(p, SpaceSlice(14), SpaceTimeField::zeros(g), g),
                    std::invalid_argument);
    const auto other = build_grid(15, 10, 0.6);
    CHECK_THROWS_AS(solve_forward(p, SpaceTimeField::zeros(other), other), std::invalid_argument);
}

TEST_CASE("discrete duality is exact for random data") {
    for (int which = 0; which < 3; ++which) {
        for (auto [n, m] : {std::pair{64, 64}, std::pair{256, 256}, std::pair{40, 13}}) {
            const Grid g = build_grid(n, m, 0.5);
            ControlProblem p = which == 0 ? heat_problem(g, 0.5) : degenerate_problem(g, 0.5);
            if (which == 2) p.c = Potential::sin_cos(2.0);
            for (std::uint64_t s = 0; s < 4; ++s) {
                const auto r = duality_check(p, random_slice(g, 10 + s), random_field(g, 20 + s),
                                             random_slice(g, 30 + s), g);
                CHECK(r.relative() <= 1e-12);
                CHECK(r.scale > 0.0);
            }
        }
    }
    const Grid g = build_grid(16, 16, 0.5);
    const auto p = heat_problem(g, 0.5);
    const auto r = duality_check(p, SpaceSlice::zeros(g), SpaceTimeField::zeros(g),
                                 random_slice(g, 1), g);
    CHECK(r.absolute == 0.0);
}

TEST_CASE("temporal order >= 0.9 and spatial order >= 1.8") {
    // dt-halving at fine h
    const double e1 = terminal_error(1999, 20, 0.1);
    const double e2 = terminal_error(1999, 40, 0.1);
    const double e3 = terminal_error(1999, 80, 0.1);
    CHECK(oracle::observed_order(e1, e2) >= 0.9);
    CHECK(oracle::observed_order(e2, e3) >= 0.9);
    // h-halving with dt proportional to h^2
    const double s1 = terminal_error(15, 26, 0.1);
    const double s2 = terminal_error(31, 103, 0.1);
    const double s3 = terminal_error(63, 410, 0.1);
    CHECK(oracle::observed_order(s1, s2) >= 1.8);
    CHECK(oracle::observed_order(s2, s3) >= 1.8);
}

TEST_CASE("degenerate profile: self-convergence toward a fine-grid reference") {
    // Inside [A,B] with c = 0 and no source the solution is frozen: u(0.5, t) = 1.
    const double T = 0.5;
    auto value_at = [&](int n, int m, double x) {
        const Grid g = build_grid(n, m, T);
        const auto p = degenerate_problem(g, T);
        const auto u = solve_forward(p, SpaceTimeField::zeros(g), g);
        const auto j = static_cast<std::size_t>(std::lround(x / g.h)) - 1;
        return u(static_cast<std::size_t>(m), j);
    };
    CHECK(value_at(199, 400, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(value_at(799, 6400, 0.5) == doctest::Approx(1.0).epsilon(1e-14));

    const double fine = value_at(799, 6400, 0.8);
    const double coarse = value_at(99, 100, 0.8);
    const double mid = value_at(199, 400, 0.8);
    CHECK(std::abs(mid - fine) < std::abs(coarse - fine));
    CHECK(std::abs(mid - fine) < 1e-2 * std::abs(fine));
}

TEST_CASE("implicit Euler is dissipative for c >= 0, f = 0") {
    const Grid g = build_grid(99, 120, 0.5);
    for (auto c : {Potential::zero(), Potential::constant(2.0)}) {
        ControlProblem p = degenerate_problem(g, 0.5);
        p.c = c;
        p.u0 = random_slice(g, 5);
        const auto u = solve_forward(p, SpaceTimeField::zeros(g), g);
        double prev = l2_norm(u.slice(0), g);
        for (std::size_t k = 1; k < u.rows(); ++k) {
            const double cur = l2_norm(u.slice(k), g);
            CHECK(cur <= prev * (1.0 + 1e-14));
            prev = cur;
        }
    }
}

TEST_CASE("energy report") {
    const Grid g = build_grid(199, 400, 0.5);
    ControlProblem p = heat_problem(g, 0.5);
    p.u0 = SpaceSlice::zeros(g);
    const auto zero = energy_check(p, SpaceTimeField::zeros(g), g);
    CHECK(zero.sup_l2_sq == 0.0);
    CHECK(zero.h1a_integral == 0.0);
    CHECK(zero.C_emp == 0.0);

    const auto heat = energy_check(heat_problem(g, 0.5), SpaceTimeField::zeros(g), g);
    CHECK(std::abs(heat.sup_l2_sq - 0.5) < 1e-3);
    CHECK(heat.l2_sq_by_level.front() == heat.sup_l2_sq);
}

TEST_CASE("energy constant is bounded by the Gronwall estimate across random data") {
    // d/dt|u|^2 + 2|u|_a^2 <= |f|^2 + |u|^2 gives
    // sup|u|^2 + int|u|_a^2 <= (e^T (1 + T/2) + 1/2) (|f|^2 + |u0|^2), up to O(dt).
    const double T = 0.5;
    const Grid g = build_grid(99, 200, T);
    const double bound = (std::exp(T) * (1.0 + 0.5 * T) + 0.5) / std::pow(1.0 - g.dt, g.m);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        ControlProblem p = degenerate_problem(g, T);
        p.u0 = random_slice(g, 100 + s);
        const auto r = energy_check(p, random_field(g, 200 + s), g);
        CHECK(std::isfinite(r.C_emp));
        CHECK(r.C_emp > 0.0);
        worst = std::max(worst, r.C_emp);
    }
    CHECK(worst <= bound);
}

TEST_CASE("accuracy warning when dt * sup|c| > 0.5") {
    const Grid g = build_grid(9, 4, 1.0);
    ControlProblem p = heat_problem(g, 1.0);
    p.c = Potential::constant(3.0);
    CHECK(DiscreteOperator(p, g).accuracy_warning());
    p.c = Potential::constant(1.0);
    CHECK_FALSE(DiscreteOperator(p, g).accuracy_warning());
}
