#pragma once

#include "degenctl/mesh.hpp"
#include "degenctl/profile.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace degenctl {

/// Bounded zero-order coefficient c(x,t), drawn from a small fixed registry.
class Potential {
public:
    enum class Kind { zero, constant, sin_cos };

    static Potential zero() { return Potential(Kind::zero, 0.0); }
    static Potential constant(double value) { return Potential(Kind::constant, value); }
    /// c(x,t) = amplitude * sin(2 pi x) * cos(2 pi t / T).
    static Potential sin_cos(double amplitude = 1.0) { return Potential(Kind::sin_cos, amplitude); }

    double operator()(double x, double t, double T) const;
    bool time_independent() const { return kind_ != Kind::sin_cos; }
    bool is_zero() const { return kind_ == Kind::zero || value_ == 0.0; }
    Kind kind() const { return kind_; }
    double value() const { return value_; }
    /// sup |c| over Q.
    double sup_bound() const { return std::abs(value_); }

    friend bool operator==(const Potential&, const Potential&) = default;

private:
    Potential(Kind kind, double value) : kind_(kind), value_(value) {}
    Kind kind_;
    double value_;
};

std::string to_string(Potential::Kind kind);

struct ControlProblem {
    DiffusionProfile profile;
    Potential c = Potential::zero();
    Interval omega;
    double T = 0.0;
    SpaceSlice u0;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, int level)
        : std::runtime_error(what + " (time level " + std::to_string(level) + ")"), level_(level) {}
    int level() const { return level_; }

private:
    int level_;
};

/// Step matrices M_k = I + dt (-D_a + C_k) of the implicit Euler scheme, with
/// D_a the conservative three-point stencil using a at half nodes and C_k the
/// diagonal potential at level k. Each M_k is symmetric tridiagonal, so the
/// backward (adjoint) sweep with the same matrices is the exact discrete
/// transpose of the forward sweep.
class DiscreteOperator {
public:
    DiscreteOperator(const ControlProblem& problem, const Grid& grid);

    const Grid& grid() const { return grid_; }
    /// a(x_{i+1/2}) for i = 0..n.
    std::span<const double> half_coefficients() const { return half_a_; }
    /// 1 inside omega, 0 outside, per interior node.
    std::span<const double> control_mask() const { return mask_; }

    /// out = D_a u (u zero on the boundary).
    void apply_diffusion(std::span<const double> u, std::span<double> out) const;

    /// Overwrites rhs with M_level^{-1} rhs. Throws SolverError on a zero pivot.
    void solve_step(int level, std::span<double> rhs) const;

    /// Diagonal and off-diagonal of M_level (off has n-1 entries).
    void step_matrix(int level, std::vector<double>& diag, std::vector<double>& off) const;

    double potential_bound() const { return c_sup_; }
    /// dt * sup|c| > 0.5: an accuracy, not stability, concern.
    bool accuracy_warning() const { return grid_.dt * c_sup_ > 0.5; }

private:
    struct Factorization {
        std::vector<double> pivot;  // Thomas denominators
        std::vector<double> lower;  // elimination multipliers
    };
    Factorization factor(int level) const;
    void substitute(const Factorization& fac, int level, std::span<double> rhs) const;

    Grid grid_;
    Potential c_;
    std::vector<double> half_a_;
    std::vector<double> off_;  // -dt a_{i+1/2} / h^2 between interior nodes
    std::vector<double> mask_;
    double c_sup_ = 0.0;
    bool cached_ = false;
    Factorization cache_;
};

/// Implicit Euler for u_t - (a u_x)_x + c u = 1_omega f:
/// M_{k+1} u^{k+1} = u^k + dt (1_omega f)^{k+1}, u^0 = u0. Row 0 of f is unused.
SpaceTimeField solve_forward(const ControlProblem& problem, const SpaceTimeField& f,
                             const Grid& grid);
SpaceTimeField solve_forward(const DiscreteOperator& op, const SpaceSlice& u0,
                             const SpaceTimeField& f);

/// Backward sweep for v_t + (a v_x)_x - c v = h, v(T) = vT:
/// M_{k+1} v^k = v^{k+1} - dt h^k. Row m of h is unused.
SpaceTimeField solve_adjoint(const ControlProblem& problem, const SpaceSlice& vT,
                             const SpaceTimeField& h, const Grid& grid);
SpaceTimeField solve_adjoint(const DiscreteOperator& op, const SpaceSlice& vT,
                             const SpaceTimeField& h);
/// Adjoint with h = 0.
SpaceTimeField solve_adjoint(const DiscreteOperator& op, const SpaceSlice& vT);

struct DualityResidual {
    double absolute = 0.0;
    /// Sum of magnitudes of the three pairings.
    double scale = 0.0;
    double relative() const { return scale > 0.0 ? absolute / scale : 0.0; }
};

/// |<u(T), vT> - <u0, v(0)> - sum_k dt <(1_omega f)^k, v^{k-1}>| for u the
/// forward solution from (u0, f) and v the adjoint solution from (vT, 0).
DualityResidual duality_check(const ControlProblem& problem, const SpaceSlice& u0,
                              const SpaceTimeField& f, const SpaceSlice& vT, const Grid& grid);

struct EnergyReport {
    double sup_l2_sq = 0.0;        ///< max_k ||u^k||^2
    double h1a_integral = 0.0;     ///< sum_{k=1..m} dt |u^k|^2_{H^1_a}
    double data_sq = 0.0;          ///< ||f||^2_{L^2(Q)} + ||u0||^2
    double C_emp = 0.0;            ///< (sup_l2_sq + h1a_integral) / data_sq
    double rhs_bound = 0.0;        ///< C_emp * data_sq
    std::vector<double> l2_sq_by_level;
};

EnergyReport energy_check(const ControlProblem& problem, const SpaceTimeField& f,
                          const Grid& grid);

}  // namespace degenctl
