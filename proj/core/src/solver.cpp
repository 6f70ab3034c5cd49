#include "degenctl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace degenctl {

double Potential::operator()(double x, double t, double T) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::constant: return value_;
        case Kind::sin_cos:
            return value_ * std::sin(2.0 * std::numbers::pi * x) *
                   std::cos(2.0 * std::numbers::pi * t / T);
    }
    return 0.0;
}

std::string to_string(Potential::Kind kind) {
    switch (kind) {
        case Potential::Kind::zero: return "zero";
        case Potential::Kind::constant: return "constant";
        case Potential::Kind::sin_cos: return "sin_cos";
    }
    return "unknown";
}

DiscreteOperator::DiscreteOperator(const ControlProblem& problem, const Grid& grid)
    : grid_(grid), c_(problem.c) {
    if (std::abs(problem.T - grid.T) > 1e-12 * std::max(1.0, grid.T))
        throw std::invalid_argument("solver: problem horizon does not match the grid");
    if (!std::isfinite(c_.value())) throw std::invalid_argument("solver: potential is not finite");
    const auto n = static_cast<std::size_t>(grid.n);
    half_a_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) half_a_[i] = problem.profile(grid.x_nodes[i] + 0.5 * grid.h);
    const double r = grid.dt / (grid.h * grid.h);
    off_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) off_[i] = -r * half_a_[i + 1];
    mask_ = window_mask(grid, problem.omega);
    c_sup_ = c_.sup_bound();
    if (c_.time_independent()) {
        cache_ = factor(1);
        cached_ = true;
    }
}

void DiscreteOperator::apply_diffusion(std::span<const double> u, std::span<double> out) const {
    const std::size_t n = u.size();
    const double inv_h2 = 1.0 / (grid_.h * grid_.h);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i == 0 ? 0.0 : u[i - 1];
        const double right = i + 1 == n ? 0.0 : u[i + 1];
        out[i] = (half_a_[i + 1] * (right - u[i]) - half_a_[i] * (u[i] - left)) * inv_h2;
    }
}

void DiscreteOperator::step_matrix(int level, std::vector<double>& diag,
                                   std::vector<double>& off) const {
    const auto n = static_cast<std::size_t>(grid_.n);
    const double r = grid_.dt / (grid_.h * grid_.h);
    const double t = grid_.t(level);
    diag.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = 1.0 + r * (half_a_[i] + half_a_[i + 1]) +
                  grid_.dt * c_(grid_.interior_x(i), t, grid_.T);
    off = off_;
}

DiscreteOperator::Factorization DiscreteOperator::factor(int level) const {
    std::vector<double> diag;
    std::vector<double> off;
    step_matrix(level, diag, off);
    const std::size_t n = diag.size();
    Factorization fac;
    fac.pivot.resize(n);
    fac.lower.assign(n, 0.0);
    fac.pivot[0] = diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (!(std::abs(fac.pivot[i - 1]) > 1e-300) || !std::isfinite(fac.pivot[i - 1]))
            throw SolverError("singular tridiagonal step matrix", level);
        fac.lower[i] = off[i - 1] / fac.pivot[i - 1];
        fac.pivot[i] = diag[i] - fac.lower[i] * off[i - 1];
    }
    if (!(std::abs(fac.pivot[n - 1]) > 1e-300) || !std::isfinite(fac.pivot[n - 1]))
        throw SolverError("singular tridiagonal step matrix", level);
    return fac;
}

void DiscreteOperator::substitute(const Factorization& fac, int /*level*/,
                                  std::span<double> rhs) const {
    const std::size_t n = rhs.size();
    for (std::size_t i = 1; i < n; ++i) rhs[i] -= fac.lower[i] * rhs[i - 1];
    rhs[n - 1] /= fac.pivot[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off_[i] * rhs[i + 1]) / fac.pivot[i];
}

void DiscreteOperator::solve_step(int level, std::span<double> rhs) const {
    if (cached_) {
        substitute(cache_, level, rhs);
    } else {
        substitute(factor(level), level, rhs);
    }
}

SpaceTimeField solve_forward(const DiscreteOperator& op, const SpaceSlice& u0,
                             const SpaceTimeField& f) {
    const Grid& g = op.grid();
    require_conforming(u0, g, "solve_forward(u0)");
    require_conforming(f, g, "solve_forward(f)");
    const auto mask = op.control_mask();
    SpaceTimeField u = SpaceTimeField::zeros(g);
    u.set_slice(0, u0);
    for (int k = 0; k < g.m; ++k) {
        const auto next = static_cast<std::size_t>(k) + 1;
        auto prev = u.row(next - 1);
        auto cur = u.row(next);
        auto src = f.row(next);
        for (std::size_t j = 0; j < cur.size(); ++j) cur[j] = prev[j] + g.dt * mask[j] * src[j];
        op.solve_step(k + 1, cur);
    }
    return u;
}

SpaceTimeField solve_forward(const ControlProblem& problem, const SpaceTimeField& f,
                             const Grid& grid) {
    return solve_forward(DiscreteOperator(problem, grid), problem.u0, f);
}

namespace {

SpaceTimeField adjoint_sweep(const DiscreteOperator& op, const SpaceSlice& vT,
                             const SpaceTimeField* h) {
    const Grid& g = op.grid();
    require_conforming(vT, g, "solve_adjoint(vT)");
    if (h) require_conforming(*h, g, "solve_adjoint(h)");
    SpaceTimeField v = SpaceTimeField::zeros(g);
    v.set_slice(static_cast<std::size_t>(g.m), vT);
    for (int k = g.m - 1; k >= 0; --k) {
        const auto level = static_cast<std::size_t>(k);
        auto next = v.row(level + 1);
        auto cur = v.row(level);
        if (h) {
            auto src = h->row(level);
            for (std::size_t j = 0; j < cur.size(); ++j) cur[j] = next[j] - g.dt * src[j];
        } else {
            std::copy(next.begin(), next.end(), cur.begin());
        }
        op.solve_step(k + 1, cur);
    }
    return v;
}

}  // namespace

SpaceTimeField solve_adjoint(const DiscreteOperator& op, const SpaceSlice& vT,
                             const SpaceTimeField& h) {
    return adjoint_sweep(op, vT, &h);
}

SpaceTimeField solve_adjoint(const DiscreteOperator& op, const SpaceSlice& vT) {
    return adjoint_sweep(op, vT, nullptr);
}

SpaceTimeField solve_adjoint(const ControlProblem& problem, const SpaceSlice& vT,
                             const SpaceTimeField& h, const Grid& grid) {
    return solve_adjoint(DiscreteOperator(problem, grid), vT, h);
}

DualityResidual duality_check(const ControlProblem& problem, const SpaceSlice& u0,
                              const SpaceTimeField& f, const SpaceSlice& vT, const Grid& grid) {
    const DiscreteOperator op(problem, grid);
    const SpaceTimeField u = solve_forward(op, u0, f);
    const SpaceTimeField v = solve_adjoint(op, vT);
    const auto m = static_cast<std::size_t>(grid.m);
    const auto mask = op.control_mask();

    const double terminal = slice_inner(u.slice(m), vT, grid);
    const double initial = slice_inner(u0, v.slice(0), grid);
    double source = 0.0;
    double source_abs = 0.0;
    for (std::size_t k = 1; k <= m; ++k) {
        auto fk = f.row(k);
        auto vk = v.row(k - 1);
        double level = 0.0;
        for (std::size_t j = 0; j < fk.size(); ++j) level += mask[j] * fk[j] * vk[j];
        source += grid.dt * grid.h * level;
        source_abs += std::abs(grid.dt * grid.h * level);
    }
    DualityResidual r;
    r.absolute = std::abs(terminal - initial - source);
    r.scale = std::abs(terminal) + std::abs(initial) + source_abs;
    return r;
}

EnergyReport energy_check(const ControlProblem& problem, const SpaceTimeField& f,
                          const Grid& grid) {
    const SpaceTimeField u = solve_forward(problem, f, grid);
    EnergyReport r;
    r.l2_sq_by_level.reserve(u.rows());
    for (std::size_t k = 0; k < u.rows(); ++k) {
        const SpaceSlice s = u.slice(k);
        const double l2 = slice_inner(s, s, grid);
        r.l2_sq_by_level.push_back(l2);
        r.sup_l2_sq = std::max(r.sup_l2_sq, l2);
        if (k > 0) {
            const double semi = h1a_seminorm(s, problem.profile, grid);
            r.h1a_integral += grid.dt * semi * semi;
        }
    }
    r.data_sq = spacetime_inner(f, f, grid, std::nullopt, TimeRule::implicit_euler) +
                slice_inner(problem.u0, problem.u0, grid);
    if (r.data_sq > 0.0) {
        r.C_emp = (r.sup_l2_sq + r.h1a_integral) / r.data_sq;
        r.rhs_bound = r.C_emp * r.data_sq;
    }
    return r;
}

}  // namespace degenctl
