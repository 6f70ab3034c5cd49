#include "degenctl/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace degenctl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// d^p and its first two derivatives with respect to d, for d >= 0.
double branch(double d, double p, int order) {
    switch (order) {
        case 0:
            return p == 0.0 ? 1.0 : std::pow(d, p);
        case 1:
            if (p == 0.0) return 0.0;
            if (p == 1.0) return 1.0;
            return p * std::pow(d, p - 1.0);
        case 2:
            if (p == 0.0 || p == 1.0) return 0.0;
            if (p == 2.0) return 2.0;
            return p * (p - 1.0) * std::pow(d, p - 2.0);
        default:
            throw std::invalid_argument("derivative order must be 0, 1 or 2");
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Fritsch-Carlson node slopes; shape preserving, so nonnegative data with
// zero runs stay nonnegative and exactly zero on those runs.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), secant(n - 1), d(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x[k + 1] - x[k];
        secant[k] = (y[k + 1] - y[k]) / h[k];
    }
    if (n == 2) {
        d[0] = d[1] = secant[0];
        return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (secant[k - 1] * secant[k] <= 0.0) continue;
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / secant[k - 1] + w2 / secant[k]);
    }
    auto edge = [](double h0, double h1, double s0, double s1) {
        double e = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (e * s0 <= 0.0) return 0.0;
        if (s0 * s1 < 0.0 && std::abs(e) > 3.0 * std::abs(s0)) return 3.0 * s0;
        return e;
    };
    d[0] = edge(h[0], h[1], secant[0], secant[1]);
    d[n - 1] = edge(h[n - 2], h[n - 3], secant[n - 2], secant[n - 3]);
    return d;
}

}  // namespace

std::string to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::power_law: return "power_law";
        case ProfileKind::constant: return "constant";
        case ProfileKind::tabulated: return "tabulated";
    }
    return "unknown";
}

ProfileKind profile_kind_from_string(const std::string& name) {
    if (name == "power_law") return ProfileKind::power_law;
    if (name == "constant") return ProfileKind::constant;
    if (name == "tabulated") return ProfileKind::tabulated;
    throw std::invalid_argument("unknown profile kind '" + name + "'");
}

DiffusionProfile DiffusionProfile::power_law(double A, double B, double alpha, double beta) {
    if (!(A > 0.0)) throw std::invalid_argument("profile: A must be > 0");
    if (!(B < 1.0)) throw std::invalid_argument("profile: B must be < 1");
    if (!(B >= A)) throw std::invalid_argument("profile: B must be >= A");
    if (!(alpha >= 0.0) || !(beta >= 0.0))
        throw std::invalid_argument("profile: exponents must be >= 0");
    DiffusionProfile p;
    p.kind_ = ProfileKind::power_law;
    p.A_ = A;
    p.B_ = B;
    p.alpha_ = alpha;
    p.beta_ = beta;
    return p;
}

DiffusionProfile DiffusionProfile::constant(double value) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw std::invalid_argument("profile: constant coefficient must be positive and finite");
    DiffusionProfile p;
    p.kind_ = ProfileKind::constant;
    p.value_ = value;
    return p;
}

DiffusionProfile DiffusionProfile::tabulated(double A, double B, std::vector<double> x,
                                             std::vector<double> a) {
    if (!(A > 0.0) || !(B < 1.0) || !(B >= A))
        throw std::invalid_argument("profile: need 0 < A <= B < 1");
    if (x.size() != a.size() || x.size() < 2)
        throw std::invalid_argument("profile: table needs matching x/a arrays of length >= 2");
    if (x.front() != 0.0 || x.back() != 1.0)
        throw std::invalid_argument("profile: table must span [0,1]");
    for (std::size_t j = 1; j < x.size(); ++j)
        if (!(x[j] > x[j - 1])) throw std::invalid_argument("profile: table x must increase");
    for (double v : a)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("profile: table values must be finite and >= 0");
    DiffusionProfile p;
    p.kind_ = ProfileKind::tabulated;
    p.A_ = A;
    p.B_ = B;
    p.table_x_ = std::move(x);
    p.table_a_ = std::move(a);
    p.table_slope_ = pchip_slopes(p.table_x_, p.table_a_);
    return p;
}

double DiffusionProfile::eval(double x, int order) const {
    if (!(x >= 0.0 && x <= 1.0)) throw std::out_of_range("profile: x outside [0,1]");
    if (order < 0 || order > 2) throw std::invalid_argument("derivative order must be 0, 1 or 2");
    switch (kind_) {
        case ProfileKind::constant: return order == 0 ? value_ : 0.0;
        case ProfileKind::power_law: return eval_power(x, order);
        case ProfileKind::tabulated: return eval_table(x, order);
    }
    return 0.0;
}

double DiffusionProfile::eval_power(double x, int order) const {
    if (x > A_ && x < B_) return 0.0;
    if (x < A_) {
        const double sign = (order == 1) ? -1.0 : 1.0;
        return sign * branch(A_ - x, alpha_, order);
    }
    if (x > B_) return branch(x - B_, beta_, order);
    // x == A or x == B: value is zero, derivatives are one-sided limits from outside.
    if (order == 0) return 0.0;
    if (x == A_) {
        const double sign = (order == 1) ? -1.0 : 1.0;
        return alpha_ == 0.0 ? 0.0 : sign * branch(0.0, alpha_, order);
    }
    return beta_ == 0.0 ? 0.0 : branch(0.0, beta_, order);
}

double DiffusionProfile::eval_table(double x, int order) const {
    const auto& xs = table_x_;
    const std::size_t last = xs.size() - 1;
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    j = std::clamp<std::size_t>(j, 1, last);  // segment [j-1, j]
    const double w = xs[j] - xs[j - 1];
    const double t = (x - xs[j - 1]) / w;
    const double y0 = table_a_[j - 1];
    const double y1 = table_a_[j];
    const double m0 = w * table_slope_[j - 1];
    const double m1 = w * table_slope_[j];
    switch (order) {
        case 0: {
            const double v = (2 * t * t * t - 3 * t * t + 1) * y0 + (t * t * t - 2 * t * t + t) * m0 +
                             (-2 * t * t * t + 3 * t * t) * y1 + (t * t * t - t * t) * m1;
            return std::max(v, 0.0);
        }
        case 1:
            return ((6 * t * t - 6 * t) * y0 + (3 * t * t - 4 * t + 1) * m0 +
                    (-6 * t * t + 6 * t) * y1 + (3 * t * t - 2 * t) * m1) /
                   w;
        default:
            return ((12 * t - 6) * y0 + (6 * t - 4) * m0 + (-12 * t + 6) * y1 + (6 * t - 2) * m1) /
                   (w * w);
    }
}

double inverse_integral_estimate(const DiffusionProfile& profile, int level) {
    const std::size_t cells = std::size_t{1} << level;
    double total = 0.0;
    auto accumulate = [&](double lo, double hi) {
        if (!(hi > lo)) return;
        const double w = (hi - lo) / static_cast<double>(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            const double a = profile(lo + (static_cast<double>(c) + 0.5) * w);
            if (a <= 0.0) {
                total = kInf;
                return;
            }
            total += w / a;
        }
    };
    accumulate(0.0, profile.A());
    accumulate(profile.B(), 1.0);
    return total;
}

HypothesisReport validate_hypotheses(const DiffusionProfile& profile, Interval omega,
                                     double delta) {
    HypothesisReport r;
    const double A = profile.A();
    const double B = profile.B();

    switch (profile.kind()) {
        case ProfileKind::power_law: {
            r.degeneracy_ok = true;
            r.non_integrable_inverse_ok = profile.alpha() >= 1.0 && profile.beta() >= 1.0;
            r.regularity_ok = profile.alpha() >= 2.0 && profile.beta() >= 2.0;
            r.super_strong = r.regularity_ok;
            if (!r.non_integrable_inverse_ok)
                r.messages.push_back("1/a is integrable near the degeneracy set (alpha or beta < 1)");
            if (!r.regularity_ok)
                r.messages.push_back("a is not W^{2,inf} with a*a_xx in W^{1,inf} (alpha or beta < 2)");
            break;
        }
        case ProfileKind::constant: {
            r.regularity_ok = true;
            r.messages.push_back("constant coefficient has no degeneracy set");
            r.messages.push_back("1/a is integrable for a constant coefficient");
            break;
        }
        case ProfileKind::tabulated: {
            constexpr int kSamples = 20000;
            bool zero_inside = true;
            bool positive_outside = true;
            for (int k = 0; k <= kSamples; ++k) {
                const double x = static_cast<double>(k) / kSamples;
                const double a = profile(x);
                if (x >= A && x <= B) {
                    zero_inside = zero_inside && a == 0.0;
                } else {
                    positive_outside = positive_outside && a > 0.0;
                }
            }
            r.degeneracy_ok = zero_inside && positive_outside;
            if (!zero_inside) r.messages.push_back("table does not vanish on [A,B]");
            if (!positive_outside) r.messages.push_back("table vanishes outside [A,B]");

            double previous = 0.0;
            for (int level = 4; level <= 20; ++level) {
                const double est = inverse_integral_estimate(profile, level);
                if (est > 1e6 && previous > 1e6) {
                    r.non_integrable_inverse_ok = true;
                    break;
                }
                previous = est;
            }
            if (!r.non_integrable_inverse_ok)
                r.messages.push_back("midpoint estimate of int 1/a stays below 1e6 (integrable)");

            bool bounded = true;
            for (int k = 0; k <= kSamples; ++k) {
                const double x = static_cast<double>(k) / kSamples;
                bounded = bounded && std::isfinite(profile.eval(x, 1)) &&
                          std::isfinite(profile.eval(x, 2));
            }
            r.regularity_ok = bounded;
            r.messages.push_back("regularity of a tabulated profile is a finite-difference heuristic");
            break;
        }
    }

    r.geometry_ok = omega.well_formed() && omega.lo >= 0.0 && omega.hi <= 1.0 && omega.lo < A &&
                    B < omega.hi;
    if (!r.geometry_ok)
        r.messages.push_back("[A,B] = [" + fmt(A) + "," + fmt(B) + "] is not inside omega = (" +
                             fmt(omega.lo) + "," + fmt(omega.hi) + ")");

    const double x0 = profile.center();
    const Interval inner{x0 - delta, x0 + delta};
    r.window_ok = delta > 0.0 && inner.lo < A && B < inner.hi && omega.lo <= inner.lo &&
                  inner.hi <= omega.hi;
    if (!r.window_ok)
        r.messages.push_back("omega_delta = (" + fmt(inner.lo) + "," + fmt(inner.hi) +
                             ") must contain [A,B] and lie inside omega");

    // Minimum of a over [0,1] \ omega_delta, sampled on a uniform grid plus the window edges.
    constexpr int kSamples = 10000;
    double m = kInf;
    auto consider = [&](double x) {
        if (x < 0.0 || x > 1.0 || inner.contains(x)) return;
        m = std::min(m, profile(x));
    };
    for (int k = 0; k <= kSamples; ++k) consider(static_cast<double>(k) / kSamples);
    consider(inner.lo);
    consider(inner.hi);
    r.m_delta = std::isfinite(m) ? m : 0.0;
    if (!(r.m_delta > 0.0)) r.messages.push_back("a vanishes outside omega_delta (m_delta = 0)");
    return r;
}

nlohmann::json to_json(const DiffusionProfile& profile) {
    nlohmann::json j;
    j["kind"] = to_string(profile.kind());
    switch (profile.kind()) {
        case ProfileKind::power_law:
            j["A"] = profile.A();
            j["B"] = profile.B();
            j["alpha"] = profile.alpha();
            j["beta"] = profile.beta();
            break;
        case ProfileKind::constant:
            j["value"] = profile.constant_value();
            break;
        case ProfileKind::tabulated:
            j["A"] = profile.A();
            j["B"] = profile.B();
            j["table"] = {{"x", profile.table_x()}, {"a", profile.table_a()}};
            break;
    }
    return j;
}

DiffusionProfile profile_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("profile: expected a JSON object");
    const ProfileKind kind = profile_kind_from_string(j.at("kind").get<std::string>());
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (const auto& [key, _] : j.items()) {
            if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) ==
                keys.end())
                throw std::invalid_argument("profile: unknown key '" + key + "'");
        }
    };
    switch (kind) {
        case ProfileKind::power_law:
            allow({"kind", "A", "B", "alpha", "beta"});
            return DiffusionProfile::power_law(j.at("A").get<double>(), j.at("B").get<double>(),
                                               j.at("alpha").get<double>(),
                                               j.at("beta").get<double>());
        case ProfileKind::constant:
            allow({"kind", "value"});
            return DiffusionProfile::constant(j.value("value", 1.0));
        case ProfileKind::tabulated: {
            allow({"kind", "A", "B", "table"});
            const auto& t = j.at("table");
            return DiffusionProfile::tabulated(j.at("A").get<double>(), j.at("B").get<double>(),
                                               t.at("x").get<std::vector<double>>(),
                                               t.at("a").get<std::vector<double>>());
        }
    }
    throw std::invalid_argument("profile: unreachable kind");
}

}  // namespace degenctl
