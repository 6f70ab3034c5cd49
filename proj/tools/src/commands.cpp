#include "degenctl_cli/commands.hpp"

#include "degenctl/carleman.hpp"
#include "degenctl/hum.hpp"
#include "degenctl/mesh.hpp"
#include "degenctl/profile.hpp"
#include "degenctl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace degenctl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_artifact(const CommandContext& ctx, const std::string& name) {
    fs::create_directories(ctx.out_dir);
    const fs::path path = ctx.out_dir / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    ctx.log << "  wrote " << path.string() << "\n";
    return os;
}

void write_json(const CommandContext& ctx, const std::string& name, const json& j) {
    auto os = open_artifact(ctx, name);
    os << j.dump(2) << "\n";
}

void write_field(const CommandContext& ctx, const std::string& name, const SpaceTimeField& f,
                 const Grid& g) {
    auto os = open_artifact(ctx, name);
    write_csv(os, f, g);
}

void write_slice(const CommandContext& ctx, const std::string& name, const SpaceSlice& s,
                 const Grid& g) {
    auto os = open_artifact(ctx, name);
    write_csv(os, s, g);
}

/// Two-column plot file "x,value" including the zero boundary nodes.
void write_profile_plot(const CommandContext& ctx, const std::string& name, const SpaceSlice& s,
                        const Grid& g, const std::string& column) {
    auto os = open_artifact(ctx, name);
    os << "x," << column << "\n";
    os << format_double(g.x(0)) << ",0\n";
    for (std::size_t j = 0; j < s.size(); ++j)
        os << format_double(g.interior_x(j)) << "," << format_double(s[j]) << "\n";
    os << format_double(g.x(g.n + 1)) << ",0\n";
}

/// JSON-safe double: non-finite values become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string ln_cell(const LogScalar& x) {
    return x.is_zero() ? std::string("-inf") : format_double(x.ln);
}

json energy_json(const std::string& mode, const EnergyReport& r) {
    return json{{"mode", mode},
                {"sup_l2_sq", r.sup_l2_sq},
                {"h1a_integral", r.h1a_integral},
                {"data_sq", r.data_sq},
                {"C_emp", r.C_emp},
                {"rhs_bound", r.rhs_bound},
                {"l2_sq_by_level", r.l2_sq_by_level}};
}

/// Energy quantities of an adjoint trajectory, mirrored from the forward report:
/// max_k ||v^k||^2, sum_{k=0..m-1} dt |v^k|^2_{H^1_a}, data ||vT||^2 + ||h||^2.
EnergyReport adjoint_energy(const SpaceTimeField& v, const SpaceSlice& vT, const SpaceTimeField& h,
                            const DiffusionProfile& profile, const Grid& g) {
    EnergyReport r;
    for (std::size_t k = 0; k < v.rows(); ++k) {
        const SpaceSlice s = v.slice(k);
        const double l2 = slice_inner(s, s, g);
        r.l2_sq_by_level.push_back(l2);
        r.sup_l2_sq = std::max(r.sup_l2_sq, l2);
        if (k + 1 < v.rows()) {
            const double semi = h1a_seminorm(s, profile, g);
            r.h1a_integral += g.dt * semi * semi;
        }
    }
    double h_sq = 0.0;
    for (std::size_t k = 0; k + 1 < h.rows(); ++k) {
        const SpaceSlice s = h.slice(k);
        h_sq += g.dt * slice_inner(s, s, g);
    }
    r.data_sq = h_sq + slice_inner(vT, vT, g);
    r.C_emp = r.data_sq > 0.0 ? (r.sup_l2_sq + r.h1a_integral) / r.data_sq : 0.0;
    r.rhs_bound = r.C_emp * r.data_sq;
    return r;
}

CsvTable read_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open data file");
    return read_csv(in);
}

}  // namespace

int cmd_validate(const CommandContext& ctx) {
    const auto& c = ctx.config;
    const HypothesisReport r = validate_hypotheses(c.profile, c.omega, c.delta);
    auto row = [&](const char* name, bool ok) {
        ctx.log << "  " << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    };
    ctx.log << "hypotheses for profile " << to_json(c.profile).dump() << ", omega ("
            << c.omega.lo << ", " << c.omega.hi << "), delta " << c.delta << "\n";
    row("degeneracy_ok", r.degeneracy_ok);
    row("non_integrable_inverse_ok", r.non_integrable_inverse_ok);
    row("regularity_ok", r.regularity_ok);
    row("geometry_ok", r.geometry_ok);
    row("window_ok", r.window_ok);
    ctx.log << "  super_strong = " << (r.super_strong ? "true" : "false")
            << ", m_delta = " << r.m_delta << "\n";
    for (const auto& msg : r.messages) ctx.log << "  note: " << msg << "\n";
    write_json(ctx, "validate.json",
               json{{"degeneracy_ok", r.degeneracy_ok},
                    {"non_integrable_inverse_ok", r.non_integrable_inverse_ok},
                    {"regularity_ok", r.regularity_ok},
                    {"geometry_ok", r.geometry_ok},
                    {"window_ok", r.window_ok},
                    {"super_strong", r.super_strong},
                    {"m_delta", r.m_delta},
                    {"all_ok", r.all_ok()},
                    {"messages", r.messages}});
    return r.all_ok() ? kOk : kCheckFailed;
}

int cmd_solve(const CommandContext& ctx, const SolveInputs& inputs) {
    const auto& c = ctx.config;
    const Grid g = c.build();
    ControlProblem problem = c.problem(g);
    const DiscreteOperator op(problem, g);
    if (op.accuracy_warning())
        ctx.log << "  warning: dt * sup|c| = " << g.dt * op.potential_bound() << " > 0.5\n";

    const SpaceSlice initial =
        inputs.initial ? slice_from_csv(read_table(*inputs.initial), g) : problem.u0;
    const SpaceTimeField source = inputs.source ? field_from_csv(read_table(*inputs.source), g)
                                                : SpaceTimeField::zeros(g);

    if (inputs.mode == "forward") {
        problem.u0 = initial;
        const SpaceTimeField u = solve_forward(op, initial, source);
        write_field(ctx, "trajectory.csv", u, g);
        write_profile_plot(ctx, "terminal_plot.csv", u.slice(static_cast<std::size_t>(g.m)), g, "u");
        write_json(ctx, "energy.json", energy_json("forward", energy_check(problem, source, g)));
        return kOk;
    }
    if (inputs.mode == "adjoint") {
        const SpaceTimeField v = solve_adjoint(op, initial, source);
        write_field(ctx, "trajectory.csv", v, g);
        write_profile_plot(ctx, "initial_plot.csv", v.slice(0), g, "v");
        write_json(ctx, "energy.json",
                   energy_json("adjoint", adjoint_energy(v, initial, source, problem.profile, g)));
        return kOk;
    }
    throw ConfigError("--mode", "expected forward or adjoint, got '" + inputs.mode + "'");
}

int cmd_carleman(const CommandContext& ctx) {
    const auto& c = ctx.config;
    const Grid g = c.build();
    const ControlProblem problem = c.problem(g);
    const CarlemanParams base = c.carleman_params(c.carleman.s_list.front(),
                                                  c.carleman.lambda_list.front());
    const RatioStudy study =
        ratio_study(problem, base, c.carleman.s_list, c.carleman.lambda_list,
                    static_cast<std::size_t>(c.carleman.sample_count), c.carleman.seed, g);

    {
        auto os = open_artifact(ctx, "carleman_study.csv");
        os << "s,lambda,sample_id,lhs_term1,lhs_term2,lhs_term3,lhs_term4,rhs_source,rhs_local,"
              "ratio\n";
        for (const auto& r : study.reports) {
            os << format_double(r.s) << "," << format_double(r.lambda) << "," << r.sample_id;
            for (const auto& t : r.lhs.terms) os << "," << ln_cell(t);
            os << "," << ln_cell(r.rhs.source) << "," << ln_cell(r.rhs.local) << ","
               << (r.degenerate ? std::string("nan") : format_double(r.ratio)) << "\n";
        }
    }

    json table = json::array();
    bool finite = true;
    for (std::size_t si = 0; si < study.s_list.size(); ++si) {
        for (std::size_t li = 0; li < study.lambda_list.size(); ++li) {
            const double r = study.max_ratio[si][li];
            finite = finite && std::isfinite(r);
            table.push_back({{"s", study.s_list[si]},
                             {"lambda", study.lambda_list[li]},
                             {"max_ratio", num(r)}});
            ctx.log << "  s=" << study.s_list[si] << " lambda=" << study.lambda_list[li]
                    << " max ratio " << r << "\n";
        }
    }
    write_json(ctx, "carleman_summary.json",
               json{{"seed", c.carleman.seed},
                    {"sample_count", c.carleman.sample_count},
                    {"degenerate_samples", study.degenerate_samples},
                    {"term_columns", "natural logarithms of the weighted integrals"},
                    {"max_ratio", table},
                    {"all_finite", finite}});
    return finite ? kOk : kCheckFailed;
}

int cmd_observability(const CommandContext& ctx) {
    const auto& c = ctx.config;
    const Grid g = c.build();
    const ControlProblem problem = c.problem(g);
    const CarlemanParams params = c.carleman_params(c.carleman.s, c.carleman.lambda);
    const ObservabilityStudy study =
        observability_study(problem, params, static_cast<std::size_t>(c.carleman.sample_count),
                            c.carleman.seed, g);
    {
        auto os = open_artifact(ctx, "observability.csv");
        os << "sample_id,ln_numerator,ln_denominator,log_quotient,unbounded,unweighted_quotient\n";
        for (std::size_t i = 0; i < study.weighted.size(); ++i) {
            const auto& w = study.weighted[i];
            os << i << "," << ln_cell(w.numerator) << "," << ln_cell(w.denominator) << ","
               << format_double(w.log_quotient) << "," << (w.unbounded ? 1 : 0) << ","
               << format_double(study.unweighted[i]) << "\n";
        }
    }
    const bool bounded = std::isfinite(study.max_log_quotient) && std::isfinite(study.max_unweighted);
    ctx.log << "  max log weighted quotient " << study.max_log_quotient
            << ", max unweighted quotient " << study.max_unweighted << "\n";
    write_json(ctx, "observability_summary.json",
               json{{"seed", c.carleman.seed},
                    {"s", params.s},
                    {"lambda", params.lambda},
                    {"sample_count", c.carleman.sample_count},
                    {"max_log_quotient", num(study.max_log_quotient)},
                    {"max_unweighted_quotient", num(study.max_unweighted)},
                    {"bounded", bounded}});
    return bounded ? kOk : kCheckFailed;
}

int cmd_hum(const CommandContext& ctx) {
    const auto& c = ctx.config;
    const Grid g = c.build();
    const ControlProblem problem = c.problem(g);
    HumOptions opts;
    opts.tol = c.hum.tol;
    opts.max_iter = c.hum.max_iter;
    const HUMResult r = hum_solve(problem, c.hum.eps, g, opts);
    const SpaceSlice uT = r.u_eps.slice(static_cast<std::size_t>(g.m));

    write_field(ctx, "control.csv", r.f_eps, g);
    write_slice(ctx, "terminal.csv", uT, g);
    write_profile_plot(ctx, "terminal_plot.csv", uT, g, "u");
    const double u0_sq = slice_inner(problem.u0, problem.u0, g);
    write_json(ctx, "hum_summary.json",
               json{{"eps", c.hum.eps},
                    {"tol", c.hum.tol},
                    {"cost", r.cost},
                    {"terminal_sq", r.terminal_sq},
                    {"terminal_ratio", u0_sq > 0.0 ? r.terminal_sq / (c.hum.eps * u0_sq) : 0.0},
                    {"cost_ratio", u0_sq > 0.0 ? r.cost / u0_sq : 0.0},
                    {"j_eps", r.j_eps},
                    {"cg_iterations", r.cg_iterations},
                    {"cg_residual", r.cg_residual},
                    {"converged", r.converged}});
    ctx.log << "  cost " << r.cost << ", terminal_sq " << r.terminal_sq << ", " << r.cg_iterations
            << " CG iterations\n";
    if (!r.converged) {
        ctx.log << "  warning: CG did not reach tol " << c.hum.tol << " within " << c.hum.max_iter
                << " iterations\n";
        return kCheckFailed;
    }
    return kOk;
}

int cmd_sweep(const CommandContext& ctx) {
    const auto& c = ctx.config;
    const Grid g = c.build();
    const ControlProblem problem = c.problem(g);
    const SweepReport rep = eps_sweep(problem, c.hum.eps_list, c.hum.tol, g, c.hum.max_iter);
    {
        auto os = open_artifact(ctx, "sweep.csv");
        os << "eps,cost,terminal_sq,terminal_ratio,cost_ratio,cg_iterations\n";
        for (const auto& r : rep.rows)
            os << format_double(r.eps) << "," << format_double(r.cost) << ","
               << format_double(r.terminal_sq) << "," << format_double(r.terminal_ratio) << ","
               << format_double(r.cost_ratio) << "," << r.cg_iterations << "\n";
    }
    {
        auto os = open_artifact(ctx, "sweep_plot.csv");
        os << "eps,cost_ratio\n";
        for (const auto& r : rep.rows)
            os << format_double(r.eps) << "," << format_double(r.cost_ratio) << "\n";
    }
    json rows = json::array();
    for (const auto& r : rep.rows) {
        rows.push_back({{"eps", r.eps}, {"converged", r.converged}});
        ctx.log << "  eps " << r.eps << ": cost_ratio " << r.cost_ratio << ", terminal_ratio "
                << r.terminal_ratio << ", " << r.cg_iterations << " CG iterations"
                << (r.converged ? "" : " (not converged)") << "\n";
    }
    write_json(ctx, "sweep_summary.json",
               json{{"tol", c.hum.tol}, {"rows", rows}, {"all_converged", rep.all_converged()}});
    return rep.all_converged() ? kOk : kCheckFailed;
}

int cmd_identity_check(const CommandContext& ctx) {
    const auto& c = ctx.config;
    const Grid g = c.build();
    ControlProblem problem = c.problem(g);
    const bool dropped_c = !problem.c.is_zero();
    problem.c = Potential::zero();
    const CarlemanParams params = c.carleman_params(c.carleman.s, c.carleman.lambda);
    const DiscreteOperator op(problem, g);
    const StudySample sample = random_fourier_sample(op, c.carleman.seed, 0);
    const SpaceTimeField v = solve_adjoint(op, sample.vT, sample.h);
    const IdentityReport id = z_transform_identity(v, sample.h, params, problem, g);
    const double plain = plain_pde_residual(v, sample.h, problem, g);
    if (dropped_c) ctx.log << "  note: the identity is evaluated with c = 0\n";
    ctx.log << "  residual " << id.residual << " (plain PDE residual " << plain << ")\n";
    write_json(ctx, "identity.json",
               json{{"s", params.s},
                    {"lambda", params.lambda},
                    {"seed", c.carleman.seed},
                    {"n", g.n},
                    {"m", g.m},
                    {"residual", num(id.residual)},
                    {"plain_residual", num(plain)},
                    {"norm_plus", num(id.norm_plus)},
                    {"norm_minus", num(id.norm_minus)},
                    {"norm_G", num(id.norm_G)},
                    {"cross", num(id.cross)},
                    {"energy_defect", num(id.energy_defect)},
                    {"potential_ignored", dropped_c}});
    return std::isfinite(id.residual) ? kOk : kCheckFailed;
}

}  // namespace degenctl::cli
