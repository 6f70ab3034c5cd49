#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace degenctl {

/// Open interval (lo, hi) of the unit segment.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    bool contains(double x) const { return lo < x && x < hi; }
    double length() const { return hi - lo; }
    bool well_formed() const { return lo < hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

enum class ProfileKind { power_law, constant, tabulated };

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

/// Diffusion coefficient a(x) on [0,1] vanishing on the degeneracy set [A,B].
///
/// power_law:  (A-x)^alpha on [0,A), 0 on [A,B], (x-B)^beta on (B,1].
/// constant:   a == value everywhere (non-degenerate reference case).
/// tabulated:  monotone cubic (PCHIP) interpolation of user samples; A and B
///             describe where the table is expected to vanish.
///
/// Values are immutable once constructed; evaluation is thread-safe.
class DiffusionProfile {
public:
    static DiffusionProfile power_law(double A, double B, double alpha, double beta);
    static DiffusionProfile constant(double value = 1.0);
    static DiffusionProfile tabulated(double A, double B,
                                      std::vector<double> x, std::vector<double> a);

    /// a(x), a'(x) or a''(x). At x == A and x == B the derivative of the
    /// outer branch is taken as the one-sided limit from outside [A,B].
    double eval(double x, int order = 0) const;
    double operator()(double x) const { return eval(x, 0); }

    ProfileKind kind() const { return kind_; }
    double A() const { return A_; }
    double B() const { return B_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double constant_value() const { return value_; }
    const std::vector<double>& table_x() const { return table_x_; }
    const std::vector<double>& table_a() const { return table_a_; }

    /// Center of the degeneracy set, (A+B)/2.
    double center() const { return 0.5 * (A_ + B_); }

    friend bool operator==(const DiffusionProfile&, const DiffusionProfile&) = default;

private:
    DiffusionProfile() = default;

    double eval_power(double x, int order) const;
    double eval_table(double x, int order) const;

    ProfileKind kind_ = ProfileKind::constant;
    double A_ = 0.5;
    double B_ = 0.5;
    double alpha_ = 0.0;
    double beta_ = 0.0;
    double value_ = 1.0;
    std::vector<double> table_x_;
    std::vector<double> table_a_;
    std::vector<double> table_slope_;
};

struct HypothesisReport {
    bool degeneracy_ok = false;
    bool non_integrable_inverse_ok = false;
    bool regularity_ok = false;
    bool geometry_ok = false;
    /// omega_delta = (x0-delta, x0+delta) contains [A,B] and sits inside omega.
    bool window_ok = false;
    /// Super-strong regime (alpha, beta >= 2); informational.
    bool super_strong = false;
    double m_delta = 0.0;
    std::vector<std::string> messages;

    bool all_ok() const {
        return degeneracy_ok && non_integrable_inverse_ok && regularity_ok && geometry_ok &&
               window_ok;
    }
};

/// Checks the structural hypotheses on (a, omega). Failures are reported as
/// flags and messages, never thrown.
HypothesisReport validate_hypotheses(const DiffusionProfile& profile, Interval omega,
                                     double delta);

/// Midpoint-rule estimate of the integral of 1/a over [0,A) u (B,1] with
/// 2^level cells per branch. Returns +inf when a vanishes at a sample point.
double inverse_integral_estimate(const DiffusionProfile& profile, int level);

nlohmann::json to_json(const DiffusionProfile& profile);
DiffusionProfile profile_from_json(const nlohmann::json& j);

}  // namespace degenctl
