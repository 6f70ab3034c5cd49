#pragma once

#include "degenctl/mesh.hpp"
#include "degenctl/solver.hpp"

#include <optional>
#include <vector>

namespace degenctl {

/// Discrete control Gramian Lambda: phiT -> u(T), where phi is the adjoint
/// trajectory from phiT (h = 0) and u solves the forward problem from u0 = 0
/// with source 1_omega phi, row k of the source being phi^{k-1}. Because the
/// backward sweep is the exact transpose of the forward one,
///   <Lambda p, q>_h = sum_{k=0}^{m-1} dt <1_omega phi_p^k, phi_q^k>_h,
/// so Lambda is symmetric positive semidefinite.
class Gramian {
public:
    Gramian(const ControlProblem& problem, const Grid& grid);

    const DiscreteOperator& op() const { return op_; }
    const Grid& grid() const { return op_.grid(); }

    SpaceSlice apply(const SpaceSlice& phiT) const;

    /// Control field -1_omega phi^{k-1} in row k (row 0 zero) for phi the adjoint from phiT.
    SpaceTimeField control_from(const SpaceSlice& phiT) const;

    /// u(T) of the uncontrolled problem from u0.
    SpaceSlice free_trace(const SpaceSlice& u0) const;

private:
    DiscreteOperator op_;
};

SpaceSlice gramian_apply(const ControlProblem& problem, const SpaceSlice& phiT, const Grid& grid);

struct HUMResult {
    SpaceSlice phiT;
    SpaceTimeField f_eps;
    SpaceTimeField u_eps;
    double cost = 0.0;         ///< sum_{k=1..m} dt ||f^k||^2
    double terminal_sq = 0.0;  ///< ||u_eps(T)||^2
    int cg_iterations = 0;
    double cg_residual = 0.0;  ///< true relative residual ||b - (Lambda + eps I) phiT|| / ||b||
    double j_eps = 0.0;
    bool converged = false;
    /// Dual objective 1/2 <(Lambda + eps I) phi, phi> - <b, phi> after each iteration
    /// (entry 0 is the starting point).
    std::vector<double> dual_history;
};

struct HumOptions {
    double tol = 1e-8;
    int max_iter = 500;
    /// Initial dual iterate (zero when absent).
    std::optional<SpaceSlice> warm_start;
};

/// Penalized HUM. Minimizes J_eps through its dual: solves
/// (Lambda + eps I) phiT = u_free(T) by conjugate gradient, then sets
/// f_eps = -1_omega phi and u_eps the state it drives, so that at the optimum
/// u_eps(T) = eps phiT. Non-convergence within max_iter is reported through
/// `converged`, not thrown.
HUMResult hum_solve(const ControlProblem& problem, double eps, const Grid& grid,
                    const HumOptions& options = {});
HUMResult hum_solve(const Gramian& gramian, const ControlProblem& problem, double eps,
                    const HumOptions& options = {});

/// J_eps(f) = 1/2 ||f||^2_Q + 1/(2 eps) ||u^f(T)||^2, with the implicit-Euler
/// time rule for ||f||_Q.
double j_eps_value(const ControlProblem& problem, const SpaceTimeField& f, double eps,
                   const Grid& grid);

/// Gradient of J_eps in the same inner product: row k is f^k + 1_omega psi^{k-1},
/// psi the adjoint from u^f(T)/eps; row 0 is zero.
SpaceTimeField j_eps_gradient(const ControlProblem& problem, const SpaceTimeField& f, double eps,
                              const Grid& grid);

struct SweepRow {
    double eps = 0.0;
    double cost = 0.0;
    double terminal_sq = 0.0;
    double terminal_ratio = 0.0;  ///< terminal_sq / (eps ||u0||^2)
    double cost_ratio = 0.0;      ///< cost / ||u0||^2
    int cg_iterations = 0;
    bool converged = true;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    bool all_converged() const;
};

/// hum_solve for each eps (strictly decreasing), warm-starting each CG from the
/// previous minimizer.
SweepReport eps_sweep(const ControlProblem& problem, const std::vector<double>& eps_list,
                      double tol, const Grid& grid, int max_iter = 500);

}  // namespace degenctl
