#include "degenctl/hum.hpp"

#include <cmath>
#include <stdexcept>

namespace degenctl {

namespace {

// Row k of the result is mask * trajectory row k-1, scaled; row 0 is zero.
SpaceTimeField shifted_masked(const SpaceTimeField& traj, std::span<const double> mask,
                              double scale) {
    SpaceTimeField out(traj.rows(), traj.cols());
    for (std::size_t k = 1; k < traj.rows(); ++k) {
        auto src = traj.row(k - 1);
        auto dst = out.row(k);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = scale * mask[j] * src[j];
    }
    return out;
}

double sq_norm(const SpaceSlice& s, const Grid& g) { return slice_inner(s, s, g); }

}  // namespace

Gramian::Gramian(const ControlProblem& problem, const Grid& grid) : op_(problem, grid) {}

SpaceTimeField Gramian::control_from(const SpaceSlice& phiT) const {
    const SpaceTimeField phi = solve_adjoint(op_, phiT);
    return shifted_masked(phi, op_.control_mask(), -1.0);
}

SpaceSlice Gramian::apply(const SpaceSlice& phiT) const {
    const SpaceTimeField phi = solve_adjoint(op_, phiT);
    const SpaceTimeField source = shifted_masked(phi, op_.control_mask(), 1.0);
    const SpaceTimeField u = solve_forward(op_, SpaceSlice::zeros(grid()), source);
    return u.slice(static_cast<std::size_t>(grid().m));
}

SpaceSlice Gramian::free_trace(const SpaceSlice& u0) const {
    const SpaceTimeField u = solve_forward(op_, u0, SpaceTimeField::zeros(grid()));
    return u.slice(static_cast<std::size_t>(grid().m));
}

SpaceSlice gramian_apply(const ControlProblem& problem, const SpaceSlice& phiT, const Grid& grid) {
    return Gramian(problem, grid).apply(phiT);
}

HUMResult hum_solve(const ControlProblem& problem, double eps, const Grid& grid,
                    const HumOptions& options) {
    return hum_solve(Gramian(problem, grid), problem, eps, options);
}

HUMResult hum_solve(const Gramian& gramian, const ControlProblem& problem, double eps,
                    const HumOptions& options) {
    if (!(eps > 0.0)) throw std::invalid_argument("hum_solve: eps must be > 0");
    if (!(options.tol > 0.0)) throw std::invalid_argument("hum_solve: tol must be > 0");
    if (options.max_iter < 0) throw std::invalid_argument("hum_solve: max_iter must be >= 0");
    const Grid& g = gramian.grid();
    require_conforming(problem.u0, g, "hum_solve(u0)");

    auto apply = [&](const SpaceSlice& p) {
        SpaceSlice out = gramian.apply(p);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += eps * p[j];
        return out;
    };
    auto axpy = [](SpaceSlice& y, double a, const SpaceSlice& x) {
        for (std::size_t j = 0; j < y.size(); ++j) y[j] += a * x[j];
    };

    const SpaceSlice b = gramian.free_trace(problem.u0);
    const double b_norm = l2_norm(b, g);

    HUMResult result;
    SpaceSlice x = options.warm_start ? *options.warm_start : SpaceSlice::zeros(g);
    require_conforming(x, g, "hum_solve(warm_start)");

    if (b_norm == 0.0) {
        x = SpaceSlice::zeros(g);
        result.converged = true;
        result.dual_history.push_back(0.0);
    } else {
        SpaceSlice r = b;
        axpy(r, -1.0, apply(x));
        auto dual_value = [&](const SpaceSlice& xi, const SpaceSlice& ri) {
            // 1/2 <A x, x> - <b, x> = -1/2 <x, b + r>
            return -0.5 * (slice_inner(xi, b, g) + slice_inner(xi, ri, g));
        };
        result.dual_history.push_back(dual_value(x, r));
        double rr = sq_norm(r, g);
        SpaceSlice p = r;
        int it = 0;
        while (std::sqrt(rr) > options.tol * b_norm && it < options.max_iter) {
            const SpaceSlice Ap = apply(p);
            const double pAp = slice_inner(p, Ap, g);
            if (!(pAp > 0.0)) break;
            const double alpha = rr / pAp;
            axpy(x, alpha, p);
            axpy(r, -alpha, Ap);
            const double rr_next = sq_norm(r, g);
            const double beta = rr_next / rr;
            rr = rr_next;
            for (std::size_t j = 0; j < p.size(); ++j) p[j] = r[j] + beta * p[j];
            ++it;
            result.dual_history.push_back(dual_value(x, r));
        }
        result.cg_iterations = it;
        result.converged = std::sqrt(rr) <= options.tol * b_norm;
    }

    result.phiT = x;
    result.f_eps = gramian.control_from(x);
    result.u_eps = solve_forward(gramian.op(), problem.u0, result.f_eps);
    const SpaceSlice uT = result.u_eps.slice(static_cast<std::size_t>(g.m));
    result.cost = spacetime_inner(result.f_eps, result.f_eps, g, std::nullopt,
                                  TimeRule::implicit_euler);
    result.terminal_sq = sq_norm(uT, g);
    result.j_eps = 0.5 * result.cost + 0.5 / eps * result.terminal_sq;

    if (b_norm > 0.0) {
        SpaceSlice true_r = b;
        axpy(true_r, -1.0, apply(x));
        result.cg_residual = l2_norm(true_r, g) / b_norm;
    }
    return result;
}

double j_eps_value(const ControlProblem& problem, const SpaceTimeField& f, double eps,
                   const Grid& grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("j_eps_value: eps must be > 0");
    const SpaceTimeField u = solve_forward(problem, f, grid);
    const SpaceSlice uT = u.slice(static_cast<std::size_t>(grid.m));
    return 0.5 * spacetime_inner(f, f, grid, std::nullopt, TimeRule::implicit_euler) +
           0.5 / eps * slice_inner(uT, uT, grid);
}

SpaceTimeField j_eps_gradient(const ControlProblem& problem, const SpaceTimeField& f, double eps,
                              const Grid& grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("j_eps_gradient: eps must be > 0");
    const DiscreteOperator op(problem, grid);
    const SpaceTimeField u = solve_forward(op, problem.u0, f);
    SpaceSlice terminal = u.slice(static_cast<std::size_t>(grid.m));
    terminal *= 1.0 / eps;
    const SpaceTimeField psi = solve_adjoint(op, terminal);
    SpaceTimeField grad = shifted_masked(psi, op.control_mask(), 1.0);
    for (std::size_t k = 1; k < grad.rows(); ++k) {
        auto gk = grad.row(k);
        auto fk = f.row(k);
        for (std::size_t j = 0; j < gk.size(); ++j) gk[j] += fk[j];
    }
    return grad;
}

bool SweepReport::all_converged() const {
    for (const auto& r : rows)
        if (!r.converged) return false;
    return true;
}

SweepReport eps_sweep(const ControlProblem& problem, const std::vector<double>& eps_list,
                      double tol, const Grid& grid, int max_iter) {
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw std::invalid_argument("eps_sweep: eps must be > 0");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("eps_sweep: eps_list must be strictly decreasing");
    }
    const Gramian gramian(problem, grid);
    const double u0_sq = slice_inner(problem.u0, problem.u0, grid);
    SweepReport report;
    std::optional<SpaceSlice> warm;
    for (double eps : eps_list) {
        HumOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        opts.warm_start = warm;
        const HUMResult res = hum_solve(gramian, problem, eps, opts);
        SweepRow row;
        row.eps = eps;
        row.cost = res.cost;
        row.terminal_sq = res.terminal_sq;
        row.terminal_ratio = u0_sq > 0.0 ? res.terminal_sq / (eps * u0_sq) : 0.0;
        row.cost_ratio = u0_sq > 0.0 ? res.cost / u0_sq : 0.0;
        row.cg_iterations = res.cg_iterations;
        row.converged = res.converged;
        report.rows.push_back(row);
        warm = res.phiT;
    }
    return report;
}

}  // namespace degenctl
