#pragma once

#include "degenctl/mesh.hpp"
#include "degenctl/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace degenctl {

/// A nonnegative quantity held as its natural logarithm. The Carleman weights
/// e^{-2 s sigma} sit far below the smallest double for any useful (s, lambda),
/// so weighted integrals and their ratios are only meaningful in this form.
struct LogScalar {
    double ln = -std::numeric_limits<double>::infinity();

    static LogScalar from_value(double v) { return {v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity()}; }
    /// Linear value; underflows to 0 and overflows to +inf.
    double value() const { return std::exp(ln); }
    bool is_zero() const { return ln == -std::numeric_limits<double>::infinity(); }
};

/// Streaming log-sum-exp accumulator.
class LogSum {
public:
    void add(double ln_term) {
        if (ln_term == -std::numeric_limits<double>::infinity()) return;
        if (ln_term > max_) {
            acc_ = acc_ * std::exp(max_ - ln_term) + 1.0;
            max_ = ln_term;
        } else {
            acc_ += std::exp(ln_term - max_);
        }
    }
    void add(const LogScalar& x) { add(x.ln); }
    LogScalar result() const {
        if (max_ == -std::numeric_limits<double>::infinity()) return {};
        return {max_ + std::log(acc_)};
    }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double acc_ = 0.0;
};

struct CarlemanParams {
    double s = 1.0;
    double lambda = 1.0;
    double T = 1.0;
    double x0 = 0.5;
    double delta = 0.1;

    /// |eta|_inf = max(x0^2, (1-x0)^2) / 2.
    double eta_inf() const { return 0.5 * std::max(x0 * x0, (1.0 - x0) * (1.0 - x0)); }
    Interval omega_delta() const { return {x0 - delta, x0 + delta}; }
    double eta(double x) const { return -0.5 * (x - x0) * (x - x0); }
    double eta_prime(double x) const { return -(x - x0); }

    /// Centers the weight at (A+B)/2 of the profile.
    static CarlemanParams for_profile(const DiffusionProfile& profile, double s, double lambda,
                                      double T, double delta);
    /// Throws std::invalid_argument unless x0 in (0,1), delta > 0, lambda > 0, s >= 0, T > 0.
    void validate() const;
};

/// Weight family on the grid:
///   theta(t) = 1/[t(T-t)]^4,  eta(x) = -(x-x0)^2/2,
///   xi = theta e^{lambda(2|eta|_inf + eta)},  sigma = theta e^{4 lambda |eta|_inf} - xi.
/// Rows 0 and m (t = 0, T) hold the limits theta = sigma = xi = +inf and
/// log_decay = -inf; every other entry is finite.
class WeightTables {
public:
    WeightTables(const CarlemanParams& params, const Grid& grid);

    const CarlemanParams& params() const { return params_; }
    const Grid& grid() const { return grid_; }

    double theta(std::size_t k) const { return theta_[k]; }
    double log_theta(std::size_t k) const { return log_theta_[k]; }
    /// theta'(t) / theta(t) = -4 (T - 2t) / (t (T - t)).
    double theta_log_derivative(std::size_t k) const { return dlog_theta_[k]; }
    double eta(std::size_t j) const { return eta_[j]; }
    double eta_prime(std::size_t j) const { return eta_prime_[j]; }

    double xi(std::size_t k, std::size_t j) const { return std::exp(log_xi_(k, j)); }
    double log_xi(std::size_t k, std::size_t j) const { return log_xi_(k, j); }
    double sigma(std::size_t k, std::size_t j) const { return sigma_(k, j); }
    /// -2 s sigma(x,t).
    double log_decay(std::size_t k, std::size_t j) const { return -2.0 * params_.s * sigma_(k, j); }
    /// Linear-domain e^{-2 s sigma} xi^power (0 when below the double range).
    double weight(std::size_t k, std::size_t j, double power) const {
        return std::exp(log_decay(k, j) + power * log_xi_(k, j));
    }

    /// Analytic derivatives: sigma_x = -lambda eta' xi, sigma_t = (theta'/theta) sigma,
    /// sigma_xx = lambda xi (1 - lambda eta'^2).
    double sigma_x(std::size_t k, std::size_t j) const;
    double sigma_t(std::size_t k, std::size_t j) const;
    double sigma_xx(std::size_t k, std::size_t j) const;

private:
    CarlemanParams params_;
    Grid grid_;
    std::vector<double> theta_, log_theta_, dlog_theta_;
    std::vector<double> eta_, eta_prime_;
    SpaceTimeField log_xi_;
    SpaceTimeField sigma_;
};

struct CarlemanLhs {
    /// s^-1 l^-1 xi^-1 |v_t|^2, s^-1 l^-1 xi^-1 |(a v_x)_x|^2, s^3 l^4 xi^3 |v|^2,
    /// s l^2 xi a |v_x|^2, each integrated against e^{-2 s sigma}.
    std::array<LogScalar, 4> terms;
    LogScalar total;
};

struct CarlemanRhs {
    LogScalar source;  ///< ||e^{-s sigma} h||^2
    LogScalar local;   ///< s^3 l^4 int_{omega_delta} e^{-2 s sigma} xi^3 |v|^2
    LogScalar total;
};

struct CarlemanReport {
    double s = 0.0;
    double lambda = 0.0;
    std::size_t sample_id = 0;
    CarlemanLhs lhs;
    CarlemanRhs rhs;
    /// lhs / rhs, formed from the logarithms; NaN for a degenerate sample.
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double log_ratio = std::numeric_limits<double>::quiet_NaN();
    /// Zero right-hand side (v vanishes on omega_delta and h == 0): no ratio.
    bool degenerate = false;
};

/// Weighted left side of the Carleman estimate over interior time levels
/// 1..m-1, with centered differences for v_t, v_x and the half-node stencil for
/// (a v_x)_x. Requires s > 0.
CarlemanLhs carleman_lhs(const SpaceTimeField& v, const ControlProblem& problem,
                         const WeightTables& weights);
CarlemanLhs carleman_lhs(const SpaceTimeField& v, const ControlProblem& problem,
                         const CarlemanParams& params, const Grid& grid);

CarlemanRhs carleman_rhs(const SpaceTimeField& v, const SpaceTimeField& h,
                         const WeightTables& weights);
CarlemanRhs carleman_rhs(const SpaceTimeField& v, const SpaceTimeField& h,
                         const CarlemanParams& params, const Grid& grid);

CarlemanReport carleman_report(const SpaceTimeField& v, const SpaceTimeField& h,
                               const ControlProblem& problem, const WeightTables& weights,
                               std::size_t sample_id = 0);

/// Terminal datum and source for one study sample.
struct StudySample {
    SpaceSlice vT;
    SpaceTimeField h;
};

using SampleGenerator = std::function<StudySample(std::size_t sample_id)>;

/// Seeded random sample: vT and each row of h are sine sums over the first 10
/// modes with coefficients uniform in [-1,1]; each h row is then smoothed by one
/// implicit diffusion step. Sample i uses its own generator seeded with seed + i.
StudySample random_fourier_sample(const DiscreteOperator& op, std::uint64_t seed,
                                  std::size_t sample_id, bool with_source = true);

struct RatioStudy {
    std::vector<double> s_list;
    std::vector<double> lambda_list;
    /// Ordered by s, then lambda, then sample.
    std::vector<CarlemanReport> reports;
    /// max_ratio[si][li] over non-degenerate samples (NaN if all degenerate).
    std::vector<std::vector<double>> max_ratio;
    std::size_t degenerate_samples = 0;

    double max_ratio_at(double s, double lambda) const;
};

/// For every sample solves the adjoint problem with the sample's (vT, h) and
/// evaluates the Carleman report at every (s, lambda) pair.
RatioStudy ratio_study(const ControlProblem& problem, const CarlemanParams& params_base,
                       const std::vector<double>& s_list, const std::vector<double>& lambda_list,
                       std::size_t sample_count, std::uint64_t seed, const Grid& grid,
                       const SampleGenerator& generator = {});

struct ObservabilityResult {
    LogScalar numerator;    ///< ||v(.,0)||^2
    LogScalar denominator;  ///< int_{omega x (0,T)} e^{-2 s sigma} xi^3 |v|^2
    double log_quotient = 0.0;
    /// exp(log_quotient); +inf when it leaves the double range or the denominator is zero.
    double quotient = 0.0;
    bool unbounded = false;
};

/// ||v(0)||^2 over the weighted observation of v on omega x (0,T), v the
/// adjoint solution with terminal datum vT and h = 0. Rejects vT == 0.
ObservabilityResult observability_quotient(const ControlProblem& problem, const SpaceSlice& vT,
                                           const CarlemanParams& params, const Grid& grid);

/// Unweighted discrete observability quotient ||v(0)||^2 / sum_{k=0}^{m-1} dt ||1_omega v^k||^2,
/// the constant the control cost bound is controlled by. Its denominator equals
/// <Lambda vT, vT> for the control Gramian.
double unweighted_observability_quotient(const DiscreteOperator& op, const SpaceSlice& vT);

struct ObservabilityStudy {
    std::vector<ObservabilityResult> weighted;
    std::vector<double> unweighted;
    double max_log_quotient = -std::numeric_limits<double>::infinity();
    double max_unweighted = 0.0;
};

ObservabilityStudy observability_study(const ControlProblem& problem, const CarlemanParams& params,
                                       std::size_t sample_count, std::uint64_t seed,
                                       const Grid& grid);

struct IdentityReport {
    /// ||P+ z + P- z - G|| / (||G|| + ||P+ z|| + ||P- z||).
    double residual = 0.0;
    double norm_plus = 0.0;
    double norm_minus = 0.0;
    double norm_G = 0.0;
    double cross = 0.0;  ///< ((P- z, P+ z))
    /// |‖P-z‖² + ‖P+z‖² + 2((P-z,P+z)) - ‖G‖²| relative to the sum of magnitudes.
    double energy_defect = 0.0;
};

/// Evaluates the conjugated operators for z = e^{-s sigma} v with c = 0:
///   P- z = 2 s (sigma_x a)_x z + 2 s sigma_x a z_x + z_t,
///   P+ z = s^2 |sigma_x|^2 a z + (a z_x)_x + s sigma_t z,
///   G    = e^{-s sigma} h + s (sigma_x a)_x z,
/// on interior levels with centered differences. All weighted quantities are
/// rescaled by the constant e^{s min sigma}, which leaves the relative residual
/// unchanged. s = 0 is allowed and reduces to the plain PDE residual.
IdentityReport z_transform_identity(const SpaceTimeField& v, const SpaceTimeField& h,
                                    const CarlemanParams& params, const ControlProblem& problem,
                                    const Grid& grid);

/// ||v_t + (a v_x)_x - h|| / (||h|| + ||(a v_x)_x|| + ||v_t||) with the same
/// centered differences and interior levels as z_transform_identity.
double plain_pde_residual(const SpaceTimeField& v, const SpaceTimeField& h,
                          const ControlProblem& problem, const Grid& grid);

}  // namespace degenctl
