#include "pmix/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace pmix {

std::vector<double> SolverConfig::schedule() const {
    if (!n_schedule.empty()) return n_schedule;
    std::vector<double> out;
    double n = 8.0;
    for (int k = 0; k < 45; ++k) {
        out.push_back(n);
        n *= 2.0;
    }
    return out;
}

void SolverConfig::validate() const {
    if (!(tol_energy > 0.0) || !(tol_residual > 0.0) || !(tol_continuation > 0.0))
        throw std::invalid_argument("solver config: tolerances must be positive");
    if (max_iters < 1 || picard_max < 1) throw std::invalid_argument("solver config: iteration caps must be >= 1");
    if (!(armijo_slope > 0.0 && armijo_slope < 1.0) || !(armijo_backtrack > 0.0 && armijo_backtrack < 1.0))
        throw std::invalid_argument("solver config: line-search parameters must lie in (0,1)");
    const auto sched = schedule();
    for (std::size_t i = 0; i + 1 < sched.size(); ++i)
        if (!(sched[i] < sched[i + 1])) throw std::invalid_argument("solver config: schedule must be strictly increasing");
    if (!sched.empty() && !(sched.front() >= 1.0))
        throw std::invalid_argument("solver config: schedule entries must be >= 1");
}

SingularProblem::SingularProblem(const Grid& g, double delta_, GridFunction f_, OperatorParams op_)
    : grid(&g), delta(delta_), f(std::move(f_)), op(op_) {
    if (!(delta > 0.0)) throw std::invalid_argument("singular problem: delta must be > 0");
    f.validate();
    double fmax = 0.0;
    for (std::uint32_t k : g.interior_nodes()) {
        if (f.values[k] < 0.0) throw std::invalid_argument("singular problem: f must be nonnegative");
        fmax = std::max(fmax, f.values[k]);
    }
    if (!(fmax > 0.0)) throw std::invalid_argument("singular problem: f must not vanish identically");
}

GridFunction SingularProblem::f_trunc(double n) const {
    GridFunction fn = f;
    for (double& v : fn.values) v = std::min(v, n);
    return fn;
}

namespace {

struct DescentOptions {
    double stop_tol = 1e-10;         // on the projected gradient step ||w - clamp(w - g)||_inf
    double rel_energy_tol = 1e-12;
    long max_iters = 80000;
    double slope = 1e-4;
    double backtrack = 0.5;
    const std::vector<double>* lower = nullptr;
    const std::vector<double>* upper = nullptr;
    std::vector<double>* trace = nullptr;
};

struct DescentOutcome {
    long iterations = 0;
    bool converged = false;
    double stop_metric = 0.0;
    double energy = 0.0;
};

// Monotone descent with Armijo backtracking on the exact discrete gradient.
// The direction is the gradient rescaled by the Hessian diagonal (refreshed
// every few iterations); trial step lengths come from the spectral secant
// estimate of the previous step. Only gradient-level information is used.
// Box bounds, when present, are handled by projecting the trial point.
template <class Value, class ValueGrad, class Diag>
DescentOutcome descend(Value&& value, ValueGrad&& value_grad, Diag&& hess_diag, std::vector<double>& w,
                       const DescentOptions& o) {
    const std::size_t n = w.size();
    auto clamped = [&](double v, std::size_t i) {
        if (o.lower && v < (*o.lower)[i]) v = (*o.lower)[i];
        if (o.upper && v > (*o.upper)[i]) v = (*o.upper)[i];
        return v;
    };
    for (std::size_t i = 0; i < n; ++i) w[i] = clamped(w[i], i);

    std::vector<double> g(n), gnew(n), wt(n), step(n), diag(n, 1.0);
    DescentOutcome out;
    double E = value_grad(w, g);
    if (o.trace) o.trace->push_back(E);

    auto refresh_diag = [&] {
        hess_diag(w, diag);
        double dmax = 0.0;
        for (double d : diag) dmax = std::max(dmax, d);
        const double floor = std::max(dmax, 1e-300) * 1e-13;
        for (double& d : diag) d = std::max(d, floor);
    };
    refresh_diag();

    double alpha = 1.0;
    double best_metric = std::numeric_limits<double>::infinity();
    long last_improvement = 0;
    long energy_stall = 0;

    for (long it = 0; it < o.max_iters; ++it) {
        double metric = 0.0;
        for (std::size_t i = 0; i < n; ++i) metric = std::max(metric, std::abs(w[i] - clamped(w[i] - g[i], i)));
        out.stop_metric = metric;
        if (metric <= o.stop_tol) {
            out.converged = true;
            out.energy = E;
            return out;
        }
        if (metric < 0.99 * best_metric) {
            best_metric = metric;
            last_improvement = it;
        } else if (it - last_improvement > 8000 && energy_stall > 4000) {
            break;  // neither the gradient nor the energy is moving
        }
        if (it % 8 == 0 && it > 0) refresh_diag();

        double a = std::min(std::max(alpha, 1e-18), 1e18);
        double Et = E, gd = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 80; ++bt) {
            gd = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                wt[i] = clamped(w[i] - a * g[i] / diag[i], i);
                gd += g[i] * (wt[i] - w[i]);
            }
            Et = value(wt);
            if (Et <= E + o.slope * gd) {
                accepted = true;
                break;
            }
            // near the optimum the decrease falls below what doubles can
            // resolve; preconditioned spectral steps stay reliable there, so
            // accept any step whose required decrease and actual change both
            // sit at the roundoff floor of the energy
            const double resolution = 8.0 * 2.220446049250313e-16 * (std::abs(E) + std::abs(Et));
            if (-o.slope * gd <= resolution && Et <= E + resolution) {
                accepted = true;
                break;
            }
            a *= o.backtrack;
        }
        if (!accepted) {
            out.energy = E;
            return out;  // line search exhausted; report with the last metric
        }

        for (std::size_t i = 0; i < n; ++i) step[i] = wt[i] - w[i];
        w.swap(wt);
        const double Enew = value_grad(w, gnew);
        ++out.iterations;
        if (o.trace) o.trace->push_back(Enew);

        double sy = 0.0, sds = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sy += step[i] * (gnew[i] - g[i]);
            sds += step[i] * diag[i] * step[i];
        }
        // secant estimate, kept within a trust window of the accepted step so
        // noise-driven growth can never outrun the backtracking recovery
        const double cand = sy > 0.0 ? sds / sy : a * 2.0;
        alpha = std::clamp(cand, a * 1e-3, a * 1e3);
        if (E - Enew <= o.rel_energy_tol * (std::abs(E) + 1e-300))
            ++energy_stall;
        else
            energy_stall = 0;
        E = Enew;
        g.swap(gnew);
    }

    double metric = 0.0;
    for (std::size_t i = 0; i < n; ++i) metric = std::max(metric, std::abs(w[i] - clamped(w[i] - g[i], i)));
    out.stop_metric = metric;
    out.energy = E;
    out.converged = metric <= o.stop_tol;
    return out;
}

}  // namespace

Solver::Solver(const EnergyModel& model, SolverConfig cfg) : model_(&model), cfg_(std::move(cfg)) {
    cfg_.validate();
}

namespace {

// primitive of the regularized source slope (t^+ + 1/n)^{-delta}, defined for
// every delta > 0 (logarithmic at delta = 1), vanishing slope mismatch at 0
double regularized_primitive_any(double t, double n, double delta) {
    const double tp = t > 0.0 ? t : 0.0;
    const double tm = t < 0.0 ? -t : 0.0;
    double head;
    if (delta == 1.0)
        head = std::log1p(n * tp);
    else
        head = (std::pow(tp + 1.0 / n, 1.0 - delta) - std::pow(1.0 / n, 1.0 - delta)) / (1.0 - delta);
    return head - std::pow(n, delta) * tm;
}

}  // namespace

namespace {

// smooth positive profile vanishing at the boundary, used to seed descents;
// breaks the exact value ties of constant fields that stall p < 2 gradients
GridFunction boundary_bump(const Grid& grid) {
    GridFunction b = GridFunction::zeros(grid);
    int peak = 1;
    for (std::uint32_t k : grid.interior_nodes()) peak = std::max(peak, grid.cells_to_boundary(k));
    for (std::uint32_t k : grid.interior_nodes()) {
        const double d = static_cast<double>(grid.cells_to_boundary(k)) / peak;
        b.values[k] = d * (2.0 - d);
    }
    return b;
}

}  // namespace

GridFunction Solver::start_field() const {
    if (cfg_.start == SolverConfig::Start::Constant) {
        GridFunction u = boundary_bump(model_->grid());
        for (double& v : u.values)
            if (v != 0.0) v = cfg_.start_value * (1.0 + 1e-3 * v);
        return u;
    }
    return GridFunction::zeros(model_->grid());
}

GridFunction Solver::solve_source(const GridFunction& g, const GridFunction* warm,
                                  std::vector<double>* energy_trace, long* iterations,
                                  double tol_scale) const {
    g.validate();
    const EnergyModel& m = *model_;
    double rhs_scale = 0.0;
    for (std::uint32_t k : m.grid().interior_nodes()) {
        if (g.values[k] < 0.0) throw std::invalid_argument("solve_source: source must be nonnegative");
        rhs_scale = std::max(rhs_scale, g.values[k]);
    }
    rhs_scale *= m.grid().cell_measure();
    if (rhs_scale == 0.0) return GridFunction::zeros(m.grid());

    std::vector<double> w;
    if (warm)
        m.pack(*warm, w);
    else
        w.assign(m.dof(), 0.0);

    const double eps_rel = 1e-10;
    auto value = [&m, &g](const std::vector<double>& x) {
        return m.phi(x) / m.params().kp.p - m.dot_measure(x, g);
    };
    auto value_grad = [&m, &g, eps_rel](const std::vector<double>& x, std::vector<double>& grad) {
        const double val = m.phi_over_p(x, grad, true, eps_rel);
        const auto& nodes = m.grid().interior_nodes();
        const double hN = m.grid().cell_measure();
        double dot = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            grad[i] -= hN * g.values[nodes[i]];
            dot += g.values[nodes[i]] * x[i];
        }
        return val - hN * dot;
    };

    auto hess_diag = [&m, eps_rel](const std::vector<double>& x, std::vector<double>& d) {
        m.phi_diag(x, d, eps_rel);
    };

    DescentOptions opt;
    opt.stop_tol = 0.1 * cfg_.tol_residual * rhs_scale * tol_scale;
    opt.rel_energy_tol = cfg_.tol_energy;
    opt.max_iters = cfg_.max_iters;
    opt.slope = cfg_.armijo_slope;
    opt.backtrack = cfg_.armijo_backtrack;
    opt.trace = energy_trace;
    const DescentOutcome out = descend(value, value_grad, hess_diag, w, opt);
    if (iterations) *iterations = out.iterations;
    if (!out.converged) {
        char msg[160];
        std::snprintf(msg, sizeof(msg), "solve_source: descent stopped at projected-gradient level %g (target %g)",
                      out.stop_metric, opt.stop_tol);
        throw SolveError(msg);
    }

    double scale = 0.0;
    for (double v : w) scale = std::max(scale, std::abs(v));
    const double allowed = (tol_scale > 10.0 ? 1e-4 : 1e-6) * scale + 1e-300;
    for (double& v : w) {
        if (v < -allowed) throw SolveError("solve_source: materially negative minimizer");
        if (v < 0.0) v = 0.0;
    }
    return m.unpack(w);
}

GridFunction Solver::solve_regularized(double n, double delta, const GridFunction& f, const GridFunction* warm,
                                       int* picard_iterations, long* inner_iterations,
                                       std::vector<InnerTrace>* traces, double stage_label) const {
    if (!(n >= 1.0)) throw std::invalid_argument("solve_regularized: n must be >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("solve_regularized: delta must be > 0");
    const EnergyModel& m = *model_;
    const Grid& grid = m.grid();
    const double hN = grid.cell_measure();

    GridFunction fn = f;
    double fn_max = 0.0;
    for (double& v : fn.values) {
        v = std::min(v, n);
        fn_max = std::max(fn_max, v);
    }
    if (fn_max == 0.0) {
        std::fprintf(stderr, "warning: solve_regularized called with a vanishing source; returning zero\n");
        if (picard_iterations) *picard_iterations = 0;
        return GridFunction::zeros(grid);
    }

    GridFunction h = warm ? *warm : GridFunction::zeros(grid);
    if (sup_norm(h) == 0.0) {
        // seed a cold start at the self-consistent solution scale; launching
        // the fixed-point map from zero sends the first iterate to the n^delta
        // source response, which for p < 2 is a huge excursion
        const double pe = m.params().kp.p;
        const double L = grid.domain_diameter();
        auto response = [&](double G) {
            return (pe - 1.0) / pe * std::pow(0.5 * L, pe / (pe - 1.0)) * std::pow(G, 1.0 / (pe - 1.0));
        };
        double lo = 0.0, hi = 1e12;
        for (int b = 0; b < 200; ++b) {
            const double mid = 0.5 * (lo + hi);
            if (response(fn_max * regularized_source(mid, n, delta)) > mid)
                lo = mid;
            else
                hi = mid;
        }
        const double scale = std::max(0.5 * (lo + hi), 1e-12);
        h = boundary_bump(grid);
        for (double& v : h.values) v *= scale;
    }
    // workhorse: one direct convex minimization of the regularized energy per
    // stage; the fixed-point loop below then certifies (and if needed repairs)
    // the result against the map itself
    {
        const auto& nodes = grid.interior_nodes();
        std::vector<double> w;
        m.pack(h, w);
        auto value = [&](const std::vector<double>& x) {
            double srcsum = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i)
                srcsum += fn.values[nodes[i]] * regularized_primitive_any(x[i], n, delta);
            return m.phi(x) / m.params().kp.p - hN * srcsum;
        };
        auto value_grad = [&](const std::vector<double>& x, std::vector<double>& grad) {
            const double val = m.phi_over_p(x, grad, true);
            double srcsum = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const double fni = fn.values[nodes[i]];
                grad[i] -= hN * fni * regularized_source(x[i], n, delta);
                srcsum += fni * regularized_primitive_any(x[i], n, delta);
            }
            return val - hN * srcsum;
        };
        auto hess_diag = [&](const std::vector<double>& x, std::vector<double>& d) {
            m.phi_diag(x, d);
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                if (x[i] > 0.0)
                    d[i] += hN * fn.values[nodes[i]] * delta * std::pow(x[i] + 1.0 / n, -delta - 1.0);
            }
        };
        try {
            for (int round = 0; round < 3; ++round) {
                double rhs_scale = 0.0;
                for (std::size_t i = 0; i < nodes.size(); ++i)
                    rhs_scale = std::max(rhs_scale, hN * fn.values[nodes[i]] * regularized_source(w[i], n, delta));
                DescentOptions opt;
                opt.stop_tol = 0.1 * cfg_.tol_residual * std::max(rhs_scale, 1e-300);
                opt.rel_energy_tol = cfg_.tol_energy;
                opt.max_iters = cfg_.max_iters;
                opt.slope = cfg_.armijo_slope;
                opt.backtrack = cfg_.armijo_backtrack;
                const DescentOutcome out = descend(value, value_grad, hess_diag, w, opt);
                if (!out.converged) throw SolveError("stage pre-minimization did not converge");
                double rhs_after = 0.0;
                for (std::size_t i = 0; i < nodes.size(); ++i)
                    rhs_after = std::max(rhs_after, hN * fn.values[nodes[i]] * regularized_source(w[i], n, delta));
                if (rhs_after >= 0.5 * rhs_scale) break;
            }
            GridFunction candidate = m.unpack(w);
            bool ok = true;
            for (std::uint32_t k : grid.interior_nodes())
                if (candidate.values[k] < 0.0) ok = false;
            if (ok) h = std::move(candidate);
        } catch (const SolveError&) {
            // fall through to the plain fixed-point iteration from h
        }
    }

    GridFunction src = GridFunction::zeros(grid);
    const double picard_tol = cfg_.tol_continuation / 10.0;

    // the defect of the candidate against its own regularized equation
    std::vector<double> wv, gradv;
    auto regularized_defect = [&](const GridFunction& v) {
        m.pack(v, wv);
        gradv.resize(wv.size());
        m.phi_over_p(wv, gradv, false);
        double worst = 0.0, scale = 0.0;
        const auto& nodes = grid.interior_nodes();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double rhs = hN * fn.values[nodes[i]] * regularized_source(wv[i], n, delta);
            worst = std::max(worst, std::abs(gradv[i] - rhs));
            scale = std::max(scale, rhs);
        }
        return worst / std::max(scale, 1e-300);
    };

    bool damping = false;
    int oscillations = 0;
    double prev_gap = std::numeric_limits<double>::infinity();
    long inner_total = 0;

    for (int it = 1; it <= cfg_.picard_max; ++it) {
        for (std::uint32_t k : grid.interior_nodes())
            src.values[k] = fn.values[k] * regularized_source(h.values[k], n, delta);
        std::vector<double> trace;
        long iters = 0;
        // while the fixed-point gap is large the inner solves only need to
        // resolve the next iterate, not the final tolerance
        const double tol_scale = std::clamp(prev_gap / (1e3 * picard_tol), 1.0, 1e4);
        GridFunction v = solve_source(src, &h, traces ? &trace : nullptr, &iters, tol_scale);
        inner_total += iters;
        if (std::getenv("PMIX_DEBUG"))
            std::fprintf(stderr, "picard n=%g it=%d gap_prev=%.3e tol_scale=%.1e inner=%ld sup(v)=%.4g\n", n, it,
                         prev_gap, tol_scale, iters, sup_norm(v));
        if (traces) traces->push_back({stage_label >= 0.0 ? stage_label : n, it, std::move(trace)});

        const double gap = sup_distance(v, h);
        if (gap <= picard_tol && regularized_defect(v) <= 0.5 * cfg_.tol_residual) {
            if (picard_iterations) *picard_iterations = it;
            if (inner_iterations) *inner_iterations = inner_total;
            return v;
        }
        if (gap > prev_gap * (1.0 - 1e-14)) {
            if (++oscillations >= 2) damping = true;
        }
        prev_gap = gap;
        if (damping) {
            for (std::size_t k = 0; k < h.values.size(); ++k) h.values[k] = 0.5 * (h.values[k] + v.values[k]);
        } else {
            h = std::move(v);
        }
    }
    throw SolveError("solve_regularized: fixed-point iteration did not converge (n=" + std::to_string(n) + ")");
}

GridFunction Solver::solve_regularized_direct(double n, double delta, const GridFunction& f,
                                              const GridFunction* warm) const {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("solve_regularized_direct: requires 0 < delta < 1");
    const EnergyModel& m = *model_;
    const Grid& grid = m.grid();
    const double hN = grid.cell_measure();

    GridFunction fn = f;
    for (double& v : fn.values) v = std::min(v, n);

    std::vector<double> w;
    if (warm)
        m.pack(*warm, w);
    else
        w.assign(m.dof(), 0.0);

    const auto& nodes = grid.interior_nodes();
    auto value = [&](const std::vector<double>& x) {
        double src = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            src += fn.values[nodes[i]] * regularized_source_primitive(x[i], n, delta);
        return m.phi(x) / m.params().kp.p - hN * src;
    };
    auto value_grad = [&](const std::vector<double>& x, std::vector<double>& grad) {
        const double val = m.phi_over_p(x, grad, true);
        double src = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double fni = fn.values[nodes[i]];
            grad[i] -= hN * fni * regularized_source(x[i], n, delta);
            src += fni * regularized_source_primitive(x[i], n, delta);
        }
        return val - hN * src;
    };

    auto hess_diag = [&](const std::vector<double>& x, std::vector<double>& d) {
        m.phi_diag(x, d);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (x[i] > 0.0)
                d[i] += hN * fn.values[nodes[i]] * delta * std::pow(x[i] + 1.0 / n, -delta - 1.0);
        }
    };

    // the gradient tolerance tracks the source scale at the current point
    for (int round = 0; round < 3; ++round) {
        double rhs_scale = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            rhs_scale = std::max(rhs_scale, hN * fn.values[nodes[i]] * regularized_source(w[i], n, delta));
        DescentOptions opt;
        opt.stop_tol = 0.1 * cfg_.tol_residual * std::max(rhs_scale, 1e-300);
        opt.rel_energy_tol = cfg_.tol_energy;
        opt.max_iters = cfg_.max_iters;
        opt.slope = cfg_.armijo_slope;
        opt.backtrack = cfg_.armijo_backtrack;
        const DescentOutcome out = descend(value, value_grad, hess_diag, w, opt);
        if (!out.converged) throw SolveError("solve_regularized_direct: descent did not converge");
        double rhs_after = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            rhs_after = std::max(rhs_after, hN * fn.values[nodes[i]] * regularized_source(w[i], n, delta));
        if (rhs_after >= 0.5 * rhs_scale) break;  // scale settled; tolerance was adequate
    }
    return m.unpack(w);
}

SolveReport Solver::solve_singular(const SingularProblem& prob) const {
    const EnergyModel& m = *model_;
    const Grid& grid = m.grid();
    SolveReport report;
    report.u_final = start_field();

    auto margin = grid.margin_nodes(cfg_.compact_margin);
    if (margin.empty()) margin = grid.interior_nodes();

    GridFunction u = report.u_final;   // previous stage solution
    GridFunction prev = u;             // stage before that
    const auto sched = cfg_.schedule();
    for (std::size_t idx = 0; idx < sched.size(); ++idx) {
        const double n = sched[idx];
        StageRecord rec;
        rec.n = n;
        // stage gaps roughly halve along the doubling schedule, so nudging the
        // warm start forward saves a fixed-point step
        GridFunction warm = u;
        if (idx >= 2) {
            for (std::size_t k = 0; k < warm.values.size(); ++k)
                warm.values[k] += 0.5 * (u.values[k] - prev.values[k]);
        }
        GridFunction next;
        try {
            next = solve_regularized(n, prob.delta, prob.f, &warm, &rec.picard_iterations,
                                     &rec.inner_iterations, &report.traces, n);
        } catch (const SolveError& err) {
            report.failure_reason = err.what();
            break;
        }
        const double gap = sup_distance(next, u);
        prev = std::move(u);
        u = std::move(next);

        report.total_inner_iterations += rec.inner_iterations;
        rec.u = u;
        rec.mixed_norm_p = m.mixed_norm_p(u);
        rec.sup_norm = sup_norm(u);
        double mc = std::numeric_limits<double>::infinity();
        for (std::uint32_t k : margin) mc = std::min(mc, u.values[k]);
        rec.min_compact = mc;
        try {
            rec.residual = m.weak_residual(u, prob.delta, prob.f);
        } catch (const std::invalid_argument&) {
            rec.residual = std::numeric_limits<double>::infinity();
        }
        report.stages.push_back(std::move(rec));

        if (idx >= 2 && gap < cfg_.tol_continuation && report.stages.back().residual < cfg_.tol_residual) {
            report.converged = true;
            break;
        }
    }
    if (!report.stages.empty()) report.u_final = report.stages.back().u;
    if (!report.converged && report.failure_reason.empty())
        report.failure_reason = "continuation schedule exhausted before tolerances were met";
    return report;
}

GridFunction Solver::solve_obstacle(const GridFunction& v_upper, double k, const SingularProblem& prob) const {
    if (!(k > 0.0)) throw std::invalid_argument("solve_obstacle: k must be > 0");
    v_upper.validate();
    const EnergyModel& m = *model_;
    const Grid& grid = m.grid();
    const double hN = grid.cell_measure();
    const auto& nodes = grid.interior_nodes();
    for (std::uint32_t kk : nodes)
        if (!(v_upper.values[kk] > 0.0))
            throw std::invalid_argument("solve_obstacle: upper obstacle must be positive at interior nodes");

    std::vector<double> hi(m.dof()), lo(m.dof(), 0.0), w(m.dof());
    m.pack(v_upper, hi);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.5 * hi[i];

    const double delta = prob.delta;
    const GridFunction& f = prob.f;
    auto value = [&](const std::vector<double>& x) {
        double src = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            src += f.values[nodes[i]] * singular_source_trunc_primitive(x[i], k, delta);
        return m.phi(x) / m.params().kp.p - hN * src;
    };
    auto value_grad = [&](const std::vector<double>& x, std::vector<double>& grad) {
        const double val = m.phi_over_p(x, grad, true);
        double src = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double fi = f.values[nodes[i]];
            grad[i] -= hN * fi * singular_source_trunc(x[i], k, delta);
            src += fi * singular_source_trunc_primitive(x[i], k, delta);
        }
        return val - hN * src;
    };

    auto hess_diag = [&](const std::vector<double>& x, std::vector<double>& d) {
        m.phi_diag(x, d);
        const double lstar = std::pow(k, -1.0 / delta);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (x[i] > lstar) d[i] += hN * f.values[nodes[i]] * delta * std::pow(x[i], -delta - 1.0);
        }
    };

    double rhs_scale = 0.0;
    for (std::uint32_t kk : nodes) rhs_scale = std::max(rhs_scale, hN * f.values[kk] * k);
    DescentOptions opt;
    opt.stop_tol = 0.1 * cfg_.tol_residual * std::max(rhs_scale, 1e-300);
    opt.rel_energy_tol = cfg_.tol_energy;
    opt.max_iters = cfg_.max_iters;
    opt.slope = cfg_.armijo_slope;
    opt.backtrack = cfg_.armijo_backtrack;
    opt.lower = &lo;
    opt.upper = &hi;
    const DescentOutcome out = descend(value, value_grad, hess_diag, w, opt);
    if (!out.converged) throw SolveError("solve_obstacle: projected descent did not converge");
    return m.unpack(w);
}

}  // namespace pmix
