#include "pmix/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <limits>

#include "pmix/io.hpp"
#include "pmix/rng.hpp"

namespace pmix {

namespace {

std::string bool_cell(bool b) { return b ? "1" : "0"; }

std::string trace_csv(const SolveReport& report) {
    std::string out = "iteration,n,energy,residual,sup_norm\n";
    long cumulative = 0;
    std::size_t trace_idx = 0;
    for (const auto& stage : report.stages) {
        cumulative += stage.inner_iterations;
        // last recorded inner energy for this stage
        double energy = std::numeric_limits<double>::quiet_NaN();
        while (trace_idx < report.traces.size() && report.traces[trace_idx].n == stage.n) {
            if (!report.traces[trace_idx].energies.empty()) energy = report.traces[trace_idx].energies.back();
            ++trace_idx;
        }
        out += io::join_csv_row({std::to_string(cumulative), io::format_double(stage.n),
                                 io::format_double(energy), io::format_double(stage.residual),
                                 io::format_double(stage.sup_norm)});
    }
    return out;
}

std::string extremal_summary_text(const ExtremalResult& res, const ExperimentConfig& cfg) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "extremal summary (delta=%g p=%g s=%g)\n", cfg.delta, cfg.p, cfg.s);
    out += buf;
    out += "mu_from_formula = " + io::format_double(res.mu_from_formula) + "\n";
    out += "mu_from_infimum = " + io::format_double(res.mu_from_infimum) + "\n";
    out += "tau = " + io::format_double(res.tau) + "\n";
    out += "constraint_defect = " + io::format_double(res.constraint_defect) + "\n";
    out += "identity_defect = " + io::format_double(res.identity_defect) + "\n";
    out += "min_margin = " + io::format_double(res.margins.min_margin) + "\n";
    out += "min_margin_scaled(C=" + io::format_double(res.margins.slack) + "*mu) = " +
           io::format_double(res.margins.min_margin_scaled) + "\n";
    out += "samples = " + std::to_string(res.margins.samples) + "\n";
    out += "simplicity starts:\n";
    for (const auto& rec : res.simplicity) {
        std::snprintf(buf, sizeof(buf), "  start %d: converged=%d distance=%s quotient=%s\n", rec.start_id,
                      rec.converged ? 1 : 0, io::format_double(rec.distance).c_str(),
                      io::format_double(rec.quotient).c_str());
        out += buf;
    }
    return out;
}

}  // namespace

std::string summary_csv(const std::vector<RunRow>& rows) {
    std::string out =
        "run_id,delta,p,s,alpha,beta,nodes,n_final,iterations,mixed_norm_p,sup_norm,residual,"
        "mu_formula,mu_infimum,min_margin,checks_passed\n";
    for (const auto& r : rows) {
        out += io::join_csv_row({r.run_id, io::format_double(r.delta), io::format_double(r.p),
                                 io::format_double(r.s), io::format_double(r.alpha), io::format_double(r.beta),
                                 std::to_string(r.nodes), io::format_double(r.n_final),
                                 std::to_string(r.iterations), io::format_double(r.mixed_norm_p),
                                 io::format_double(r.sup_norm), io::format_double(r.residual),
                                 io::format_double(r.mu_formula), io::format_double(r.mu_infimum),
                                 io::format_double(r.min_margin), bool_cell(r.checks_passed)});
    }
    return out;
}

std::string verify_csv(const std::vector<VerifyRow>& rows) {
    std::string out = "check,params,metric,threshold,pass\n";
    for (const auto& r : rows)
        out += io::join_csv_row(
            {r.name, r.params, io::format_double(r.metric), io::format_double(r.threshold), bool_cell(r.pass)});
    return out;
}

RunArtifacts run_single(const ExperimentConfig& cfg, const std::string& dir, const std::string& run_id,
                        bool with_extremal) {
    const Grid grid = Grid::build(cfg.grid);
    const GridFunction f = make_source(cfg.f, grid);
    const OperatorParams op(KernelParams(cfg.p, cfg.s, grid.dim()), cfg.alpha, cfg.beta);
    const EnergyModel model(grid, op);
    const Solver solver(model, cfg.solver);
    const SingularProblem prob(grid, cfg.delta, f, op);

    RunArtifacts art;
    art.report = solver.solve_singular(prob);

    RunRow& row = art.row;
    row.run_id = run_id;
    row.delta = cfg.delta;
    row.p = cfg.p;
    row.s = cfg.s;
    row.alpha = cfg.alpha;
    row.beta = cfg.beta;
    row.nodes = cfg.grid.nodes_per_axis;
    row.iterations = art.report.total_inner_iterations;
    row.sup_norm = sup_norm(art.report.u_final);
    if (!art.report.stages.empty()) {
        row.n_final = art.report.stages.back().n;
        row.residual = art.report.stages.back().residual;
        row.mixed_norm_p = art.report.stages.back().mixed_norm_p;
    }
    row.checks_passed = art.report.converged;

    if (with_extremal && art.report.converged) {
        ExtremalResult res = extremal_constant(art.report.u_final, cfg.delta, f, model);
        Rng rng(cfg.seed);
        res.margins = verify_sobolev(res, cfg.delta, f, model, cfg.extremal.sobolev_samples,
                                     cfg.extremal.sobolev_slack, rng.split("sobolev"));
        res.simplicity =
            verify_simplicity(res, cfg.delta, f, model, cfg.extremal.simplicity_starts, rng.split("simplicity"));
        row.mu_formula = res.mu_from_formula;
        row.mu_infimum = res.mu_from_infimum;
        row.min_margin = res.margins.min_margin_scaled;

        const double mu_gap = std::abs(res.mu_from_formula - res.mu_from_infimum) / std::max(res.mu, 1e-300);
        bool simplicity_ok = true;
        for (const auto& rec : res.simplicity) simplicity_ok = simplicity_ok && rec.distance <= 1e-2;
        row.checks_passed = row.checks_passed && mu_gap <= 1e-3 && res.identity_defect <= 1e-3 &&
                            res.margins.negative_scaled == 0 && simplicity_ok;
        art.extremal = std::move(res);
    }

    io::write_file_atomic(dir + "/solution.csv", io::grid_function_csv(art.report.u_final));
    io::write_file_atomic(dir + "/trace.csv", trace_csv(art.report));
    if (art.extremal) {
        io::write_file_atomic(dir + "/extremal_summary.txt", extremal_summary_text(*art.extremal, cfg));
        io::write_file_atomic(dir + "/V_delta.csv", io::grid_function_csv(art.extremal->extremal));
    }
    return art;
}

std::vector<VerifyRow> run_verification(const ExperimentConfig& cfg, const std::string& dir) {
    std::vector<VerifyRow> rows;
    const Grid grid = Grid::build(cfg.grid);
    const GridFunction f = make_source(cfg.f, grid);
    const OperatorParams op(KernelParams(cfg.p, cfg.s, grid.dim()), cfg.alpha, cfg.beta);
    const EnergyModel model(grid, op);
    const Solver solver(model, cfg.solver);
    const SingularProblem prob(grid, cfg.delta, f, op);

    char params[160];
    std::snprintf(params, sizeof(params), "delta=%g;p=%g;s=%g;alpha=%g;beta=%g;nodes=%d", cfg.delta, cfg.p,
                  cfg.s, cfg.alpha, cfg.beta, cfg.grid.nodes_per_axis);

    const SolveReport report = solver.solve_singular(prob);
    {
        VerifyRow r{"solve_converged", params, 0.0, cfg.solver.tol_residual, report.converged};
        if (!report.stages.empty()) r.metric = report.stages.back().residual;
        rows.push_back(r);
    }
    if (report.stages.size() >= 2) {
        const CheckOutcome mono = check_monotone_sequence(report);
        rows.push_back({"monotone_sequence", params, mono.metric, mono.threshold, mono.pass});
        const CheckOutcome linf = check_linfty_uniform(report);
        rows.push_back({"sup_norm_uniform", params, linf.metric, linf.threshold, linf.pass});
        const CheckOutcome pos = check_compact_positivity(report);
        rows.push_back({"compact_positivity", params, pos.metric, pos.threshold, pos.pass});
    }
    if (report.stages.size() >= 3) {
        const GradientTrace gt = check_gradient_convergence(report, cfg.solver.compact_margin,
                                                            cfg.solver.tol_continuation);
        rows.push_back({"gradient_convergence", params, gt.gaps.back(), 10.0 * cfg.solver.tol_continuation,
                        gt.pass});
    }
    if (cfg.delta > 1.0 && !report.stages.empty()) {
        const CheckOutcome pw = check_power_norm_bound(report, cfg.delta, model);
        rows.push_back({"power_norm_bound", params, pw.metric, pw.threshold, pw.pass});
    }

    // symmetry rows for every axis where the source is mirror symmetric
    for (int axis = 0; axis < grid.dim(); ++axis) {
        if (!grid.mask_symmetric(axis)) continue;
        const GridFunction fr = reflect(f, axis);
        if (sup_distance(f, fr) > 1e-12 * std::max(sup_norm(f), 1e-300)) continue;
        const double asym = check_symmetry(report.u_final, axis);
        rows.push_back({"symmetry_axis" + std::to_string(axis), params, asym, symmetry_threshold(grid),
                        asym <= symmetry_threshold(grid)});
    }

    {
        const ProbeResult probe = uniqueness_probe(prob, model, cfg.solver);
        rows.push_back({"uniqueness_probe", params, probe.sup_gap, probe.threshold, probe.pass});
    }
    {
        GridFunction f2 = f;
        for (double& v : f2.values) v *= 2.0;
        const SingularProblem big(grid, cfg.delta, f2, op);
        try {
            const CheckOutcome cmp = check_comparison(prob, big, cfg.solver);
            rows.push_back({"comparison_f_vs_2f", params, cmp.metric, cmp.threshold, cmp.pass});
        } catch (const SolveError&) {
            rows.push_back({"comparison_f_vs_2f", params, std::numeric_limits<double>::infinity(), 1e-6, false});
        }
    }
    if (cfg.delta < 1.0) {
        const ModeReport modes = check_equivalence_modes(cfg.delta, f, grid, KernelParams(cfg.p, cfg.s, grid.dim()),
                                                         cfg.solver);
        double worst = 0.0;
        for (const auto& e : modes.entries) worst = std::max(worst, e.residual);
        rows.push_back({"mode_equivalence", params, worst, cfg.solver.tol_residual, modes.all_converged});
    }

    // integrability bookkeeping (informational)
    const ExponentUse uses[] = {ExponentUse::Existence, ExponentUse::Regularity, ExponentUse::Uniqueness};
    const char* names[] = {"exponent_existence", "exponent_regularity", "exponent_uniqueness"};
    for (int i = 0; i < 3; ++i) {
        if (uses[i] == ExponentUse::Existence && cfg.delta >= 1.0) continue;
        const IntegrabilityExponent e = required_integrability(cfg.p, grid.dim(), cfg.delta, uses[i]);
        const double value = e.any_above_one ? 1.0 : e.value;
        rows.push_back({names[i], params, value, 0.0, true});
    }

    io::write_file_atomic(dir + "/verification.csv", verify_csv(rows));
    io::write_file_atomic(dir + "/solution.csv", io::grid_function_csv(report.u_final));
    return rows;
}

int run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    io::write_file_atomic(cfg.output_dir + "/config_normalized.json", emit_config(cfg));

    try {
        switch (cfg.task) {
            case Task::Solve:
            case Task::Extremal: {
                const RunArtifacts art =
                    run_single(cfg, cfg.output_dir, "run_000", cfg.task == Task::Extremal);
                io::write_file_atomic(cfg.output_dir + "/summary.csv", summary_csv({art.row}));
                if (!art.report.converged)
                    std::fprintf(stderr, "solve failed: %s\n", art.report.failure_reason.c_str());
                return art.row.checks_passed ? 0 : 1;
            }
            case Task::Verify: {
                const auto rows = run_verification(cfg, cfg.output_dir);
                bool ok = true;
                for (const auto& r : rows) ok = ok && r.pass;
                return ok ? 0 : 1;
            }
            case Task::Sweep: {
                std::vector<ExperimentConfig> points;
                const auto deltas = cfg.sweep.delta.empty() ? std::vector<double>{cfg.delta} : cfg.sweep.delta;
                const auto ps = cfg.sweep.p.empty() ? std::vector<double>{cfg.p} : cfg.sweep.p;
                const auto ss = cfg.sweep.s.empty() ? std::vector<double>{cfg.s} : cfg.sweep.s;
                const auto nodes =
                    cfg.sweep.nodes.empty() ? std::vector<int>{cfg.grid.nodes_per_axis} : cfg.sweep.nodes;
                for (double d : deltas)
                    for (double pp : ps)
                        for (double sv : ss)
                            for (int nn : nodes) {
                                ExperimentConfig point = cfg;
                                point.task = Task::Solve;
                                point.delta = d;
                                point.p = pp;
                                point.s = sv;
                                point.grid.nodes_per_axis = nn;
                                points.push_back(point);
                            }

                std::vector<RunRow> rows(points.size());
                std::vector<bool> failures(points.size(), false);
                auto run_point = [&](std::size_t i) {
                    char id[32];
                    std::snprintf(id, sizeof(id), "run_%03zu", i);
                    const std::string dir = cfg.output_dir + "/" + id;
                    fs::create_directories(dir);
                    try {
                        const bool with_extremal = points[i].delta < 1.0;
                        const RunArtifacts art = run_single(points[i], dir, id, with_extremal);
                        rows[i] = art.row;
                        failures[i] = !art.row.checks_passed;
                    } catch (const std::exception& e) {
                        std::fprintf(stderr, "%s failed: %s\n", id, e.what());
                        rows[i].run_id = id;
                        rows[i].delta = points[i].delta;
                        rows[i].p = points[i].p;
                        rows[i].s = points[i].s;
                        rows[i].nodes = points[i].grid.nodes_per_axis;
                        failures[i] = true;
                    }
                };
                if (cfg.threads > 1) {
                    std::vector<std::future<void>> futs;
                    std::size_t next = 0;
                    while (next < points.size()) {
                        futs.clear();
                        for (int t = 0; t < cfg.threads && next < points.size(); ++t, ++next)
                            futs.push_back(std::async(std::launch::async, run_point, next));
                        for (auto& fu : futs) fu.get();
                    }
                } else {
                    for (std::size_t i = 0; i < points.size(); ++i) run_point(i);
                }
                io::write_file_atomic(cfg.output_dir + "/summary.csv", summary_csv(rows));
                for (bool f : failures)
                    if (f) return 1;
                return 0;
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}

}  // namespace pmix
