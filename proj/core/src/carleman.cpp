#include "degenctl/carleman.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace degenctl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kSampleModes = 10;

double log_sq(double v) { return v == 0.0 ? -kInf : 2.0 * std::log(std::abs(v)); }

// Centered space derivative and half-node divergence at interior index j of a row.
struct RowStencil {
    std::span<const double> row;
    std::span<const double> half_a;
    double h;

    double at(std::size_t j) const { return row[j]; }
    double left(std::size_t j) const { return j == 0 ? 0.0 : row[j - 1]; }
    double right(std::size_t j) const { return j + 1 == row.size() ? 0.0 : row[j + 1]; }
    double dx(std::size_t j) const { return (right(j) - left(j)) / (2.0 * h); }
    double div(std::size_t j) const {
        return (half_a[j + 1] * (right(j) - row[j]) - half_a[j] * (row[j] - left(j))) / (h * h);
    }
};

std::vector<double> half_node_coefficients(const DiffusionProfile& profile, const Grid& g) {
    std::vector<double> a(static_cast<std::size_t>(g.n) + 1);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = profile(g.x_nodes[i] + 0.5 * g.h);
    return a;
}

}  // namespace

CarlemanParams CarlemanParams::for_profile(const DiffusionProfile& profile, double s,
                                           double lambda, double T, double delta) {
    CarlemanParams p{s, lambda, T, profile.center(), delta};
    p.validate();
    return p;
}

void CarlemanParams::validate() const {
    if (!(x0 > 0.0 && x0 < 1.0)) throw std::invalid_argument("carleman: x0 must lie in (0,1)");
    if (!(delta > 0.0)) throw std::invalid_argument("carleman: delta must be > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("carleman: lambda must be > 0");
    if (!(s >= 0.0)) throw std::invalid_argument("carleman: s must be >= 0");
    if (!(T > 0.0)) throw std::invalid_argument("carleman: T must be > 0");
}

WeightTables::WeightTables(const CarlemanParams& params, const Grid& grid)
    : params_(params), grid_(grid) {
    params_.validate();
    if (std::abs(grid.T - params.T) > 1e-12 * std::max(1.0, params.T))
        throw std::invalid_argument("carleman: grid horizon does not match params.T");
    const auto rows = static_cast<std::size_t>(grid.m) + 1;
    const auto cols = static_cast<std::size_t>(grid.n);
    const double T = params.T;
    const double lam = params.lambda;
    const double einf = params.eta_inf();

    theta_.assign(rows, kInf);
    log_theta_.assign(rows, kInf);
    dlog_theta_.assign(rows, 0.0);
    for (std::size_t k = 1; k + 1 < rows; ++k) {
        const double t = grid.t(static_cast<int>(k));
        const double q = t * (T - t);
        log_theta_[k] = -4.0 * std::log(q);
        theta_[k] = std::exp(log_theta_[k]);
        dlog_theta_[k] = -4.0 * (T - 2.0 * t) / q;
    }
    dlog_theta_.front() = kInf;
    dlog_theta_.back() = -kInf;

    eta_.resize(cols);
    eta_prime_.resize(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        eta_[j] = params.eta(grid.interior_x(j));
        eta_prime_[j] = params.eta_prime(grid.interior_x(j));
    }

    log_xi_ = SpaceTimeField(rows, cols, kInf);
    sigma_ = SpaceTimeField(rows, cols, kInf);
    for (std::size_t k = 1; k + 1 < rows; ++k) {
        for (std::size_t j = 0; j < cols; ++j) {
            log_xi_(k, j) = log_theta_[k] + lam * (2.0 * einf + eta_[j]);
            // theta (e^{4 l einf} - e^{l (2 einf + eta)}) without cancellation.
            sigma_(k, j) = std::exp(log_theta_[k] + 4.0 * lam * einf) *
                           -std::expm1(lam * (eta_[j] - 2.0 * einf));
        }
    }
}

double WeightTables::sigma_x(std::size_t k, std::size_t j) const {
    return -params_.lambda * eta_prime_[j] * xi(k, j);
}

double WeightTables::sigma_t(std::size_t k, std::size_t j) const {
    return dlog_theta_[k] * sigma_(k, j);
}

double WeightTables::sigma_xx(std::size_t k, std::size_t j) const {
    const double lam = params_.lambda;
    return lam * xi(k, j) * (1.0 - lam * eta_prime_[j] * eta_prime_[j]);
}

CarlemanLhs carleman_lhs(const SpaceTimeField& v, const ControlProblem& problem,
                         const WeightTables& weights) {
    const Grid& g = weights.grid();
    const CarlemanParams& p = weights.params();
    require_conforming(v, g, "carleman_lhs");
    if (!(p.s > 0.0)) throw std::invalid_argument("carleman_lhs: s must be > 0");
    const auto half_a = half_node_coefficients(problem.profile, g);
    std::vector<double> node_a(static_cast<std::size_t>(g.n));
    for (std::size_t j = 0; j < node_a.size(); ++j) node_a[j] = problem.profile(g.interior_x(j));

    const double ln_cell = std::log(g.h * g.dt);
    const double ln_s = std::log(p.s);
    const double ln_l = std::log(p.lambda);
    std::array<LogSum, 4> sums;
    for (std::size_t k = 1; k + 1 < v.rows(); ++k) {
        const RowStencil st{v.row(k), half_a, g.h};
        for (std::size_t j = 0; j < v.cols(); ++j) {
            const double base = ln_cell + weights.log_decay(k, j);
            const double lxi = weights.log_xi(k, j);
            const double vt = (v(k + 1, j) - v(k - 1, j)) / (2.0 * g.dt);
            sums[0].add(base - ln_s - ln_l - lxi + log_sq(vt));
            sums[1].add(base - ln_s - ln_l - lxi + log_sq(st.div(j)));
            sums[2].add(base + 3.0 * ln_s + 4.0 * ln_l + 3.0 * lxi + log_sq(st.at(j)));
            if (node_a[j] > 0.0)
                sums[3].add(base + ln_s + 2.0 * ln_l + lxi + std::log(node_a[j]) +
                            log_sq(st.dx(j)));
        }
    }
    CarlemanLhs out;
    LogSum total;
    for (std::size_t i = 0; i < 4; ++i) {
        out.terms[i] = sums[i].result();
        total.add(out.terms[i]);
    }
    out.total = total.result();
    return out;
}

CarlemanLhs carleman_lhs(const SpaceTimeField& v, const ControlProblem& problem,
                         const CarlemanParams& params, const Grid& grid) {
    return carleman_lhs(v, problem, WeightTables(params, grid));
}

CarlemanRhs carleman_rhs(const SpaceTimeField& v, const SpaceTimeField& h,
                         const WeightTables& weights) {
    const Grid& g = weights.grid();
    const CarlemanParams& p = weights.params();
    require_conforming(v, g, "carleman_rhs(v)");
    require_conforming(h, g, "carleman_rhs(h)");
    if (!(p.s > 0.0)) throw std::invalid_argument("carleman_rhs: s must be > 0");
    const auto mask = window_mask(g, p.omega_delta());
    const double ln_cell = std::log(g.h * g.dt);
    const double ln_pref = 3.0 * std::log(p.s) + 4.0 * std::log(p.lambda);
    LogSum source;
    LogSum local;
    for (std::size_t k = 1; k + 1 < v.rows(); ++k) {
        for (std::size_t j = 0; j < v.cols(); ++j) {
            const double base = ln_cell + weights.log_decay(k, j);
            source.add(base + log_sq(h(k, j)));
            if (mask[j] != 0.0)
                local.add(base + ln_pref + 3.0 * weights.log_xi(k, j) + log_sq(v(k, j)));
        }
    }
    CarlemanRhs out;
    out.source = source.result();
    out.local = local.result();
    LogSum total;
    total.add(out.source);
    total.add(out.local);
    out.total = total.result();
    return out;
}

CarlemanRhs carleman_rhs(const SpaceTimeField& v, const SpaceTimeField& h,
                         const CarlemanParams& params, const Grid& grid) {
    return carleman_rhs(v, h, WeightTables(params, grid));
}

CarlemanReport carleman_report(const SpaceTimeField& v, const SpaceTimeField& h,
                               const ControlProblem& problem, const WeightTables& weights,
                               std::size_t sample_id) {
    CarlemanReport r;
    r.s = weights.params().s;
    r.lambda = weights.params().lambda;
    r.sample_id = sample_id;
    r.lhs = carleman_lhs(v, problem, weights);
    r.rhs = carleman_rhs(v, h, weights);
    if (r.rhs.total.is_zero()) {
        r.degenerate = true;
        return r;
    }
    r.log_ratio = r.lhs.total.ln - r.rhs.total.ln;
    r.ratio = std::exp(r.log_ratio);
    return r;
}

StudySample random_fourier_sample(const DiscreteOperator& op, std::uint64_t seed,
                                  std::size_t sample_id, bool with_source) {
    const Grid& g = op.grid();
    std::mt19937_64 rng(seed + sample_id);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    auto draw = [&](std::span<double> out) {
        std::array<double, kSampleModes> c{};
        for (double& ck : c) ck = coef(rng);
        for (std::size_t j = 0; j < out.size(); ++j) {
            const double x = g.interior_x(j);
            double sum = 0.0;
            for (int mode = 0; mode < kSampleModes; ++mode)
                sum += c[static_cast<std::size_t>(mode)] *
                       std::sin((mode + 1) * std::numbers::pi * x);
            out[j] = sum;
        }
    };
    StudySample sample{SpaceSlice::zeros(g), SpaceTimeField::zeros(g)};
    draw(sample.vT.span());
    if (with_source) {
        for (std::size_t k = 0; k < sample.h.rows(); ++k) {
            draw(sample.h.row(k));
            op.solve_step(static_cast<int>(k == 0 ? 1 : k), sample.h.row(k));
        }
    }
    return sample;
}

double RatioStudy::max_ratio_at(double s, double lambda) const {
    for (std::size_t si = 0; si < s_list.size(); ++si)
        for (std::size_t li = 0; li < lambda_list.size(); ++li)
            if (s_list[si] == s && lambda_list[li] == lambda) return max_ratio[si][li];
    throw std::out_of_range("ratio_study: (s, lambda) not in the study");
}

RatioStudy ratio_study(const ControlProblem& problem, const CarlemanParams& params_base,
                       const std::vector<double>& s_list, const std::vector<double>& lambda_list,
                       std::size_t sample_count, std::uint64_t seed, const Grid& grid,
                       const SampleGenerator& generator) {
    if (sample_count < 1) throw std::invalid_argument("ratio_study: sample_count must be >= 1");
    if (s_list.empty() || lambda_list.empty())
        throw std::invalid_argument("ratio_study: empty s or lambda list");
    const DiscreteOperator op(problem, grid);

    std::vector<WeightTables> tables;
    for (double s : s_list) {
        for (double lambda : lambda_list) {
            CarlemanParams p = params_base;
            p.s = s;
            p.lambda = lambda;
            if (!(s > 0.0)) throw std::invalid_argument("ratio_study: s must be > 0");
            tables.emplace_back(p, grid);
        }
    }

    RatioStudy study;
    study.s_list = s_list;
    study.lambda_list = lambda_list;
    std::vector<std::vector<CarlemanReport>> per_table(tables.size());
    for (std::size_t i = 0; i < sample_count; ++i) {
        const StudySample sample = generator ? generator(i) : random_fourier_sample(op, seed, i);
        const SpaceTimeField v = solve_adjoint(op, sample.vT, sample.h);
        bool degenerate = false;
        for (std::size_t t = 0; t < tables.size(); ++t) {
            per_table[t].push_back(carleman_report(v, sample.h, problem, tables[t], i));
            degenerate = degenerate || per_table[t].back().degenerate;
        }
        if (degenerate) ++study.degenerate_samples;
    }

    study.max_ratio.assign(s_list.size(),
                           std::vector<double>(lambda_list.size(),
                                               std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t t = 0; t < tables.size(); ++t) {
        double best = std::numeric_limits<double>::quiet_NaN();
        for (const auto& r : per_table[t]) {
            if (r.degenerate) continue;
            if (std::isnan(best) || r.ratio > best) best = r.ratio;
        }
        study.max_ratio[t / lambda_list.size()][t % lambda_list.size()] = best;
        study.reports.insert(study.reports.end(), per_table[t].begin(), per_table[t].end());
    }
    return study;
}

namespace {

ObservabilityResult weighted_quotient(const SpaceTimeField& v, const std::vector<double>& mask,
                                      const WeightTables& weights) {
    const Grid& g = weights.grid();
    ObservabilityResult r;
    r.numerator = LogScalar::from_value(slice_inner(v.slice(0), v.slice(0), g));
    const double ln_cell = std::log(g.h * g.dt);
    LogSum den;
    for (std::size_t k = 1; k + 1 < v.rows(); ++k)
        for (std::size_t j = 0; j < v.cols(); ++j)
            if (mask[j] != 0.0)
                den.add(ln_cell + weights.log_decay(k, j) + 3.0 * weights.log_xi(k, j) +
                        log_sq(v(k, j)));
    r.denominator = den.result();
    if (r.denominator.is_zero()) {
        r.unbounded = true;
        r.log_quotient = kInf;
        r.quotient = kInf;
    } else {
        r.log_quotient = r.numerator.ln - r.denominator.ln;
        r.quotient = std::exp(r.log_quotient);
    }
    return r;
}

bool all_zero(const SpaceSlice& s) {
    for (double v : s.values())
        if (v != 0.0) return false;
    return true;
}

}  // namespace

ObservabilityResult observability_quotient(const ControlProblem& problem, const SpaceSlice& vT,
                                           const CarlemanParams& params, const Grid& grid) {
    require_conforming(vT, grid, "observability_quotient");
    if (all_zero(vT)) throw std::invalid_argument("observability_quotient: vT must be nonzero");
    const DiscreteOperator op(problem, grid);
    const SpaceTimeField v = solve_adjoint(op, vT);
    return weighted_quotient(v, window_mask(grid, problem.omega), WeightTables(params, grid));
}

double unweighted_observability_quotient(const DiscreteOperator& op, const SpaceSlice& vT) {
    const Grid& g = op.grid();
    require_conforming(vT, g, "unweighted_observability_quotient");
    if (all_zero(vT))
        throw std::invalid_argument("unweighted_observability_quotient: vT must be nonzero");
    const SpaceTimeField v = solve_adjoint(op, vT);
    const auto mask = op.control_mask();
    double den = 0.0;
    for (std::size_t k = 0; k + 1 < v.rows(); ++k) {
        auto row = v.row(k);
        double level = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) level += mask[j] * row[j] * row[j];
        den += g.dt * g.h * level;
    }
    const double num = slice_inner(v.slice(0), v.slice(0), g);
    return den > 0.0 ? num / den : kInf;
}

ObservabilityStudy observability_study(const ControlProblem& problem, const CarlemanParams& params,
                                       std::size_t sample_count, std::uint64_t seed,
                                       const Grid& grid) {
    if (sample_count < 1)
        throw std::invalid_argument("observability_study: sample_count must be >= 1");
    const DiscreteOperator op(problem, grid);
    const WeightTables weights(params, grid);
    const auto mask = window_mask(grid, problem.omega);
    ObservabilityStudy study;
    for (std::size_t i = 0; i < sample_count; ++i) {
        const StudySample sample = random_fourier_sample(op, seed, i, false);
        const SpaceTimeField v = solve_adjoint(op, sample.vT);
        study.weighted.push_back(weighted_quotient(v, mask, weights));
        study.unweighted.push_back(unweighted_observability_quotient(op, sample.vT));
        study.max_log_quotient = std::max(study.max_log_quotient, study.weighted.back().log_quotient);
        study.max_unweighted = std::max(study.max_unweighted, study.unweighted.back());
    }
    return study;
}

namespace {

double norm_sq_interior(const SpaceTimeField& f, const Grid& g) {
    double sum = 0.0;
    for (std::size_t k = 1; k + 1 < f.rows(); ++k)
        for (double x : f.row(k)) sum += x * x;
    return g.h * g.dt * sum;
}

}  // namespace

IdentityReport z_transform_identity(const SpaceTimeField& v, const SpaceTimeField& h,
                                    const CarlemanParams& params, const ControlProblem& problem,
                                    const Grid& grid) {
    require_conforming(v, grid, "z_transform_identity(v)");
    require_conforming(h, grid, "z_transform_identity(h)");
    const WeightTables w(params, grid);
    const double s = params.s;
    const auto rows = v.rows();
    const auto cols = v.cols();

    double sigma_min = kInf;
    for (std::size_t k = 1; k + 1 < rows; ++k)
        for (std::size_t j = 0; j < cols; ++j) sigma_min = std::min(sigma_min, w.sigma(k, j));

    // Rescaled e^{-s sigma}; the end rows are the t -> 0, T limits.
    SpaceTimeField scale(rows, cols, s > 0.0 ? 0.0 : 1.0);
    if (s > 0.0)
        for (std::size_t k = 1; k + 1 < rows; ++k)
            for (std::size_t j = 0; j < cols; ++j)
                scale(k, j) = std::exp(-s * (w.sigma(k, j) - sigma_min));

    SpaceTimeField z(rows, cols);
    for (std::size_t k = 0; k < rows; ++k)
        for (std::size_t j = 0; j < cols; ++j) z(k, j) = scale(k, j) * v(k, j);

    const auto half_a = half_node_coefficients(problem.profile, grid);
    SpaceTimeField minus(rows, cols), plus(rows, cols), G(rows, cols), defect(rows, cols);
    for (std::size_t k = 1; k + 1 < rows; ++k) {
        const RowStencil st{z.row(k), half_a, grid.h};
        for (std::size_t j = 0; j < cols; ++j) {
            const double x = grid.interior_x(j);
            const double a = problem.profile(x);
            const double ap = problem.profile.eval(x, 1);
            const double zk = z(k, j);
            const double zt = (z(k + 1, j) - z(k - 1, j)) / (2.0 * grid.dt);
            const double sx = s > 0.0 ? w.sigma_x(k, j) : 0.0;
            const double sxa_x = s > 0.0 ? w.sigma_xx(k, j) * a + sx * ap : 0.0;
            const double sigt = s > 0.0 ? w.sigma_t(k, j) : 0.0;

            minus(k, j) = 2.0 * s * sxa_x * zk + 2.0 * s * sx * a * st.dx(j) + zt;
            plus(k, j) = s * s * sx * sx * a * zk + st.div(j) + s * sigt * zk;
            G(k, j) = scale(k, j) * h(k, j) + s * sxa_x * zk;
            defect(k, j) = plus(k, j) + minus(k, j) - G(k, j);
        }
    }

    IdentityReport r;
    const double pm2 = norm_sq_interior(minus, grid);
    const double pp2 = norm_sq_interior(plus, grid);
    const double g2 = norm_sq_interior(G, grid);
    r.norm_minus = std::sqrt(pm2);
    r.norm_plus = std::sqrt(pp2);
    r.norm_G = std::sqrt(g2);
    double cross = 0.0;
    for (std::size_t k = 1; k + 1 < rows; ++k)
        for (std::size_t j = 0; j < cols; ++j) cross += minus(k, j) * plus(k, j);
    r.cross = grid.h * grid.dt * cross;
    const double denom = r.norm_G + r.norm_plus + r.norm_minus;
    r.residual = denom > 0.0 ? std::sqrt(norm_sq_interior(defect, grid)) / denom : 0.0;
    const double e_scale = pm2 + pp2 + 2.0 * std::abs(r.cross) + g2;
    r.energy_defect = e_scale > 0.0 ? std::abs(pm2 + pp2 + 2.0 * r.cross - g2) / e_scale : 0.0;
    return r;
}

double plain_pde_residual(const SpaceTimeField& v, const SpaceTimeField& h,
                          const ControlProblem& problem, const Grid& grid) {
    require_conforming(v, grid, "plain_pde_residual(v)");
    require_conforming(h, grid, "plain_pde_residual(h)");
    const auto half_a = half_node_coefficients(problem.profile, grid);
    double vt2 = 0.0, div2 = 0.0, h2 = 0.0, res2 = 0.0;
    for (std::size_t k = 1; k + 1 < v.rows(); ++k) {
        const RowStencil st{v.row(k), half_a, grid.h};
        for (std::size_t j = 0; j < v.cols(); ++j) {
            const double vt = (v(k + 1, j) - v(k - 1, j)) / (2.0 * grid.dt);
            const double div = st.div(j);
            const double res = div + vt - h(k, j);
            vt2 += vt * vt;
            div2 += div * div;
            h2 += h(k, j) * h(k, j);
            res2 += res * res;
        }
    }
    const double c = grid.h * grid.dt;
    const double denom = std::sqrt(c * h2) + std::sqrt(c * div2) + std::sqrt(c * vt2);
    return denom > 0.0 ? std::sqrt(c * res2) / denom : 0.0;
}

}  // namespace degenctl
