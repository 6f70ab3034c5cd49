#include "doctest.h"

#include "degenctl/carleman.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace degenctl;

namespace {

const double pi = std::numbers::pi;

ControlProblem default_problem(const Grid& g) {
    return {DiffusionProfile::power_law(0.4, 0.6, 2, 2), Potential::zero(), {0.3, 0.7}, g.T,
            SpaceSlice::sample(g, [](double x) { return std::sin(pi * x); })};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("log-sum-exp accumulator matches direct summation") {
    LogSum acc;
    double direct = 0.0;
    for (double v : {1e-3, 2.5, 7.0, 0.0, 1e-12}) {
        acc.add(LogScalar::from_value(v));
        direct += v;
    }
    CHECK(rel(acc.result().value(), direct) < 1e-14);
    CHECK(LogSum{}.result().is_zero());

    // Terms far below the double range still combine exactly in log form.
    LogSum tiny;
    tiny.add(-5000.0);
    tiny.add(-5000.0);
    CHECK(std::abs(tiny.result().ln - (-5000.0 + std::log(2.0))) < 1e-12);
}

TEST_CASE("weight values at the center point") {
    const Grid g = build_grid(99, 100, 1.0);  // t_50 = 0.5, x_50 = 0.5
    const CarlemanParams p{1.0, 1.0, 1.0, 0.5, 0.1};
    const WeightTables w(p, g);
    const std::size_t k = 50, j = 49;
    REQUIRE(std::abs(g.t(50) - 0.5) < 1e-15);
    REQUIRE(std::abs(g.interior_x(j) - 0.5) < 1e-15);

    CHECK(rel(w.theta(k), 256.0) < 1e-10);
    CHECK(rel(w.xi(k, j), 256.0 * std::exp(0.25)) < 1e-10);
    CHECK(rel(w.sigma(k, j), 256.0 * (std::exp(0.5) - std::exp(0.25))) < 1e-10);
    CHECK(rel(w.log_decay(k, j), -2.0 * 256.0 * (std::exp(0.5) - std::exp(0.25))) < 1e-10);
    CHECK(std::abs(w.log_decay(k, j) - (-186.72)) < 0.01);

    CHECK(p.eta_inf() == doctest::Approx(0.125));
    CHECK(p.eta(0.5) == 0.0);
    CHECK(p.eta(0.0) == doctest::Approx(-0.125));
}

TEST_CASE("weight tables satisfy their defining relations pointwise") {
    const Grid g = build_grid(63, 120, 0.5);
    const CarlemanParams p{2.0, 3.0, 0.5, 0.45, 0.2};
    const WeightTables w(p, g);
    for (std::size_t k = 1; k < static_cast<std::size_t>(g.m); ++k) {
        const double t = g.t(static_cast<int>(k));
        const double theta = 1.0 / std::pow(t * (p.T - t), 4);
        CHECK(rel(w.theta(k), theta) < 1e-12);
        for (std::size_t j = 0; j < static_cast<std::size_t>(g.n); j += 7) {
            const double x = g.interior_x(j);
            const double xi = theta * std::exp(p.lambda * (2 * p.eta_inf() + p.eta(x)));
            const double sigma = theta * std::exp(4 * p.lambda * p.eta_inf()) - xi;
            CHECK(rel(w.xi(k, j), xi) < 1e-12);
            CHECK(rel(w.sigma(k, j), sigma) < 1e-12);
        }
    }
}

TEST_CASE("sigma and xi are positive and the endpoint weight decays") {
    const Grid g = build_grid(199, 400, 0.5);
    const auto problem = default_problem(g);
    for (double s : {1.0, 4.0}) {
        for (double lambda : {1.0, 2.0}) {
            const auto p = CarlemanParams::for_profile(problem.profile, s, lambda, g.T, 0.15);
            const WeightTables w(p, g);
            bool positive = true;
            for (std::size_t k = 1; k < static_cast<std::size_t>(g.m); ++k)
                for (std::size_t j = 0; j < static_cast<std::size_t>(g.n); ++j)
                    positive = positive && w.sigma(k, j) > 0.0 && w.log_xi(k, j) > -1e300 &&
                               std::isfinite(w.log_xi(k, j));
            CHECK(positive);
            const std::size_t last = static_cast<std::size_t>(g.m) - 1;
            for (std::size_t j = 0; j < static_cast<std::size_t>(g.n); ++j) {
                CHECK(w.weight(1, j, 3.0) < 1e-30);
                CHECK(w.weight(last, j, 3.0) < 1e-30);
            }
        }
    }
}

TEST_CASE("analytic sigma derivatives agree with differences of the formula") {
    const Grid g = build_grid(99, 200, 1.0);
    const CarlemanParams p{1.0, 2.0, 1.0, 0.5, 0.1};
    const WeightTables w(p, g);
    auto sigma = [&](double x, double t) {
        const double theta = 1.0 / std::pow(t * (p.T - t), 4);
        return theta * (std::exp(4 * p.lambda * p.eta_inf()) -
                        std::exp(p.lambda * (2 * p.eta_inf() + p.eta(x))));
    };
    const double d = 1e-5;
    for (std::size_t k : {40u, 100u, 160u}) {
        for (std::size_t j : {10u, 49u, 80u}) {
            const double x = g.interior_x(j), t = g.t(static_cast<int>(k));
            const double sx = (sigma(x + d, t) - sigma(x - d, t)) / (2 * d);
            const double st = (sigma(x, t + d) - sigma(x, t - d)) / (2 * d);
            const double sxx = (sigma(x + d, t) - 2 * sigma(x, t) + sigma(x - d, t)) / (d * d);
            const double scale = std::abs(w.sigma(k, j)) + 1.0;
            CHECK(std::abs(w.sigma_x(k, j) - sx) < 1e-6 * scale);
            CHECK(std::abs(w.sigma_t(k, j) - st) < 1e-5 * std::max(scale, std::abs(st)));
            CHECK(std::abs(w.sigma_xx(k, j) - sxx) < 1e-3 * scale);
        }
    }
}

TEST_CASE("eta prime boundary signs and the gradient condition outside the window") {
    const Grid g = build_grid(199, 100, 0.5);
    const auto problem = default_problem(g);
    const auto p = CarlemanParams::for_profile(problem.profile, 1.0, 1.0, g.T, 0.15);
    CHECK(p.eta_prime(0.0) == doctest::Approx(p.x0));
    CHECK(p.eta_prime(0.0) > 0.0);
    CHECK(p.eta_prime(1.0) == doctest::Approx(-(1.0 - p.x0)));
    CHECK(p.eta_prime(1.0) < 0.0);

    const Interval win = p.omega_delta();
    double min_val = 1e300;
    for (std::size_t j = 0; j < static_cast<std::size_t>(g.n); ++j) {
        const double x = g.interior_x(j);
        if (win.contains(x)) continue;
        min_val = std::min(min_val, std::abs(p.eta_prime(x)) * problem.profile(x));
    }
    CHECK(min_val > 0.0);
}

TEST_CASE("parameter validation") {
    const Grid g = build_grid(15, 20, 1.0);
    CHECK_THROWS_AS(WeightTables(CarlemanParams{1, 1, 1, 0.0, 0.1}, g), std::invalid_argument);
    CHECK_THROWS_AS(WeightTables(CarlemanParams{1, 0, 1, 0.5, 0.1}, g), std::invalid_argument);
    CHECK_THROWS_AS(WeightTables(CarlemanParams{-1, 1, 1, 0.5, 0.1}, g), std::invalid_argument);
    CHECK_THROWS_AS(WeightTables(CarlemanParams{1, 1, 2, 0.5, 0.1}, g), std::invalid_argument);
    CHECK_NOTHROW(WeightTables(CarlemanParams{0, 1, 1, 0.5, 0.1}, g));
}

TEST_CASE("Carleman sides vanish on zero data") {
    const Grid g = build_grid(63, 100, 0.5);
    const auto problem = default_problem(g);
    const auto p = CarlemanParams::for_profile(problem.profile, 4.0, 2.0, g.T, 0.15);
    const auto zero = SpaceTimeField::zeros(g);
    const auto lhs = carleman_lhs(zero, problem, p, g);
    CHECK(lhs.total.is_zero());
    for (const auto& t : lhs.terms) CHECK(t.is_zero());
    const auto rhs = carleman_rhs(zero, zero, p, g);
    CHECK(rhs.total.is_zero());
    const auto report = carleman_report(zero, zero, problem, WeightTables(p, g));
    CHECK(report.degenerate);
    CHECK(std::isnan(report.ratio));
}

TEST_CASE("a-weighted terms vanish in the fully degenerate limit") {
    const Grid g = build_grid(63, 100, 0.5);
    // a == 0 on the whole segment.
    ControlProblem problem{DiffusionProfile::tabulated(0.1, 0.9, {0.0, 1.0}, {0.0, 0.0}),
                           Potential::zero(), {0.3, 0.7}, g.T, SpaceSlice::zeros(g)};
    const CarlemanParams p{4.0, 2.0, g.T, 0.5, 0.15};
    const auto v = SpaceTimeField::sample(
        g, [](double x, double t) { return std::sin(pi * x) * (1.0 + t); });
    const auto lhs = carleman_lhs(v, problem, p, g);
    CHECK(lhs.terms[1].is_zero());
    CHECK(lhs.terms[3].is_zero());
    CHECK(!lhs.terms[0].is_zero());
    CHECK(!lhs.terms[2].is_zero());
    LogSum two;
    two.add(lhs.terms[0]);
    two.add(lhs.terms[2]);
    CHECK(std::abs(two.result().ln - lhs.total.ln) < 1e-12);
}

TEST_CASE("local term only sees the inner window") {
    const Grid g = build_grid(99, 100, 0.5);
    const CarlemanParams p{2.0, 1.0, g.T, 0.5, 0.1};
    const auto zero = SpaceTimeField::zeros(g);
    const auto outside = SpaceTimeField::sample(g, [](double x, double) {
        return (x < 0.35 || x > 0.65) ? std::sin(pi * x) : 0.0;
    });
    CHECK(carleman_rhs(outside, zero, p, g).total.is_zero());
    const auto inside = SpaceTimeField::sample(g, [](double x, double) { return x * (1 - x); });
    const auto rhs = carleman_rhs(inside, zero, p, g);
    CHECK(!rhs.local.is_zero());
    CHECK(rhs.source.is_zero());
    const auto with_h = carleman_rhs(zero, inside, p, g);
    CHECK(!with_h.source.is_zero());
    CHECK(with_h.local.is_zero());
}

TEST_CASE("log-domain local term matches a direct sum where weights are representable") {
    const Grid g = build_grid(49, 60, 1.0);
    const CarlemanParams p{0.05, 1.0, g.T, 0.5, 0.2};
    const WeightTables w(p, g);
    const auto v = SpaceTimeField::sample(g, [](double x, double t) { return std::sin(pi * x) + t; });
    double direct = 0.0;
    for (std::size_t k = 1; k < static_cast<std::size_t>(g.m); ++k)
        for (std::size_t j = 0; j < static_cast<std::size_t>(g.n); ++j)
            if (p.omega_delta().contains(g.interior_x(j)))
                direct += g.h * g.dt * w.weight(k, j, 3.0) * v(k, j) * v(k, j);
    direct *= std::pow(p.s, 3) * std::pow(p.lambda, 4);
    const auto rhs = carleman_rhs(v, SpaceTimeField::zeros(g), w);
    CHECK(direct > 0.0);
    CHECK(rel(rhs.local.value(), direct) < 1e-10);
}

TEST_CASE("adjoint solution of the default profile gives a finite positive report") {
    const Grid g = build_grid(99, 200, 0.5);
    const auto problem = default_problem(g);
    const auto p = CarlemanParams::for_profile(problem.profile, 4.0, 2.0, g.T, 0.15);
    const auto v = solve_adjoint(problem, problem.u0, SpaceTimeField::zeros(g), g);
    const auto report = carleman_report(v, SpaceTimeField::zeros(g), problem, WeightTables(p, g));
    CHECK(!report.degenerate);
    CHECK(std::isfinite(report.lhs.total.ln));
    CHECK(std::isfinite(report.log_ratio));
    CHECK(report.ratio > 0.0);
    CHECK(std::isfinite(report.ratio));
}

TEST_CASE("ratio study is reproducible and flags zero samples") {
    const Grid g = build_grid(63, 120, 0.5);
    const auto problem = default_problem(g);
    const auto base = CarlemanParams::for_profile(problem.profile, 1.0, 1.0, g.T, 0.15);
    const std::vector<double> s_list{4, 8}, l_list{2, 4};

    const auto a = ratio_study(problem, base, s_list, l_list, 3, 77, g);
    const auto b = ratio_study(problem, base, s_list, l_list, 3, 77, g);
    REQUIRE(a.reports.size() == 12);
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
        CHECK(a.reports[i].ratio == b.reports[i].ratio);
        CHECK(a.reports[i].lhs.total.ln == b.reports[i].lhs.total.ln);
    }
    CHECK(a.reports[0].s == 4.0);
    CHECK(a.reports[0].lambda == 2.0);
    CHECK(a.reports[3].lambda == 4.0);
    CHECK(a.reports[6].s == 8.0);
    CHECK(a.degenerate_samples == 0);
    for (const auto& row : a.max_ratio)
        for (double r : row) CHECK(std::isfinite(r));

    const auto c = ratio_study(problem, base, s_list, l_list, 3, 78, g);
    CHECK(c.reports[0].lhs.total.ln != a.reports[0].lhs.total.ln);

    const auto zero = ratio_study(problem, base, {4}, {2}, 1, 0, g, [&](std::size_t) {
        return StudySample{SpaceSlice::zeros(g), SpaceTimeField::zeros(g)};
    });
    CHECK(zero.degenerate_samples == 1);
    CHECK(std::isnan(zero.max_ratio[0][0]));
    CHECK_THROWS_AS(ratio_study(problem, base, s_list, l_list, 0, 1, g), std::invalid_argument);
}

TEST_CASE("random samples are smooth and per-sample independent") {
    const Grid g = build_grid(63, 50, 0.5);
    const auto problem = default_problem(g);
    const DiscreteOperator op(problem, g);
    const auto s0 = random_fourier_sample(op, 5, 0);
    const auto s0b = random_fourier_sample(op, 5, 0);
    const auto s1 = random_fourier_sample(op, 5, 1);
    CHECK(s0.vT == s0b.vT);
    CHECK(s0.h == s0b.h);
    CHECK(!(s0.vT == s1.vT));
    CHECK(random_fourier_sample(op, 5, 1).vT == random_fourier_sample(op, 6, 0).vT);
    const auto no_h = random_fourier_sample(op, 5, 0, false);
    CHECK(no_h.h == SpaceTimeField::zeros(g));
}

TEST_CASE("observability quotient") {
    const Grid g = build_grid(63, 120, 0.5);
    SUBCASE("zero terminal datum is rejected") {
        const auto problem = default_problem(g);
        const auto p = CarlemanParams::for_profile(problem.profile, 1.0, 1.0, g.T, 0.15);
        CHECK_THROWS_AS(observability_quotient(problem, SpaceSlice::zeros(g), p, g),
                        std::invalid_argument);
    }
    SUBCASE("full observation of the heat equation") {
        ControlProblem heat{DiffusionProfile::constant(), Potential::zero(), {0.0, 1.0}, g.T,
                            SpaceSlice::zeros(g)};
        const CarlemanParams p{1.0, 1.0, g.T, 0.5, 0.2};
        const auto vT = SpaceSlice::sample(g, [](double x) { return std::sin(pi * x); });
        const auto r = observability_quotient(heat, vT, p, g);
        CHECK(!r.unbounded);
        CHECK(std::isfinite(r.log_quotient));
        const double u = unweighted_observability_quotient(DiscreteOperator(heat, g), vT);
        CHECK(std::isfinite(u));
        // ||v(0)||^2 <= (1/T) int_0^T ||v||^2 for a decaying mode up to the T factor.
        CHECK(u < 1.0 / g.T + 1e-9);
    }
    SUBCASE("study on the default profile is finite and reproducible") {
        const auto problem = default_problem(g);
        const auto p = CarlemanParams::for_profile(problem.profile, 1.0, 1.0, g.T, 0.15);
        const auto a = observability_study(problem, p, 5, 9, g);
        const auto b = observability_study(problem, p, 5, 9, g);
        CHECK(std::isfinite(a.max_log_quotient));
        CHECK(std::isfinite(a.max_unweighted));
        CHECK(a.max_log_quotient == b.max_log_quotient);
        CHECK(a.unweighted == b.unweighted);
    }
}

TEST_CASE("unweighted quotient denominator equals the Gramian quadratic form") {
    const Grid g = build_grid(31, 40, 0.5);
    const auto problem = default_problem(g);
    const DiscreteOperator op(problem, g);
    const SpaceSlice vT(oracle::random_vector(static_cast<std::size_t>(g.n), 3));
    const auto v = solve_adjoint(op, vT);
    double den = 0.0;
    for (std::size_t k = 0; k < static_cast<std::size_t>(g.m); ++k)
        for (std::size_t j = 0; j < static_cast<std::size_t>(g.n); ++j)
            if (problem.omega.contains(g.interior_x(j))) den += g.dt * g.h * v(k, j) * v(k, j);
    const double num = slice_inner(v.slice(0), v.slice(0), g);
    CHECK(rel(unweighted_observability_quotient(op, vT), num / den) < 1e-12);
}

TEST_CASE("conjugated operator identity") {
    SUBCASE("zero data") {
        const Grid g = build_grid(31, 64, 0.5);
        const auto problem = default_problem(g);
        const auto p = CarlemanParams::for_profile(problem.profile, 2.0, 1.0, g.T, 0.15);
        const auto zero = SpaceTimeField::zeros(g);
        CHECK(z_transform_identity(zero, zero, p, problem, g).residual == 0.0);
    }
    auto residual = [](int n, int m, double s) {
        const Grid g = build_grid(n, m, 0.5);
        const auto problem = default_problem(g);
        const auto p = CarlemanParams::for_profile(problem.profile, s, 1.0, g.T, 0.15);
        const DiscreteOperator op(problem, g);
        const auto sample = random_fourier_sample(op, 12345, 0);
        const auto v = solve_adjoint(op, sample.vT, sample.h);
        return std::pair{z_transform_identity(v, sample.h, p, problem, g),
                         plain_pde_residual(v, sample.h, problem, g)};
    };
    SUBCASE("s = 0 reduces to the plain residual") {
        const auto [id, plain] = residual(32, 64, 0.0);
        CHECK(std::abs(id.residual - plain) < 1e-12);
    }
    SUBCASE("refinement reduces the residual") {
        const auto coarse = residual(32, 64, 2.0).first;
        const auto fine = residual(128, 1024, 2.0).first;
        CHECK(fine.residual < coarse.residual);
        CHECK(std::isfinite(fine.energy_defect));
    }
}
