#include "pmix/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "pmix/extremal.hpp"

namespace pmix {

IntegrabilityExponent required_integrability(double p, int N, double delta, ExponentUse which) {
    if (!(p > 1.0)) throw std::invalid_argument("required_integrability: p must be > 1");
    if (N < 1) throw std::invalid_argument("required_integrability: N must be >= 1");
    if (which == ExponentUse::Existence && !(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("required_integrability: the existence exponent needs 0 < delta < 1");

    IntegrabilityExponent out;
    const double dN = static_cast<double>(N);
    if (std::abs(p - dN) < 1e-12) {
        out.regime = IntegrabilityExponent::Regime::Borderline;
        out.any_above_one = true;
        return out;
    }
    if (p > dN) {
        out.regime = IntegrabilityExponent::Regime::Supercritical;
        out.value = 1.0;
        return out;
    }
    out.regime = IntegrabilityExponent::Regime::Subcritical;
    out.p_star = dN * p / (dN - p);
    switch (which) {
        case ExponentUse::Existence:
            out.value = out.p_star / (out.p_star - (1.0 - delta));
            break;
        case ExponentUse::Regularity:
            out.value = out.p_star / (out.p_star - p);
            out.strict = true;
            break;
        case ExponentUse::Uniqueness:
            out.value = out.p_star / (out.p_star - 1.0);
            break;
    }
    return out;
}

CheckOutcome check_monotone_sequence(const SolveReport& report) {
    if (report.stages.size() < 2)
        throw std::invalid_argument("check_monotone_sequence: needs at least two stages");
    CheckOutcome out;
    const double scale = sup_norm(report.u_final);
    const double node_slack = 1e-8 * std::max(scale, 1e-300);
    double worst = 0.0;
    std::size_t worst_node = 0;
    bool node_fail = false, norm_fail = false;
    for (std::size_t s = 0; s + 1 < report.stages.size(); ++s) {
        const auto& a = report.stages[s].u;
        const auto& b = report.stages[s + 1].u;
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            const double drop = a.values[k] - b.values[k];
            if (drop > worst) {
                worst = drop;
                worst_node = k;
            }
        }
        const double na = report.stages[s].mixed_norm_p;
        const double nb = report.stages[s + 1].mixed_norm_p;
        if (na > nb * (1.0 + 1e-8)) norm_fail = true;
    }
    node_fail = worst > node_slack;
    out.metric = worst;
    out.threshold = node_slack;
    out.pass = !node_fail && !norm_fail;
    if (node_fail)
        out.witness = "node " + std::to_string(worst_node);
    else if (norm_fail)
        out.witness = "norm sequence decreased";
    return out;
}

CheckOutcome check_comparison(const SingularProblem& prob_small, const SingularProblem& prob_big,
                              const SolverConfig& cfg) {
    if (prob_small.grid != prob_big.grid) throw std::invalid_argument("check_comparison: grids differ");
    if (prob_small.delta != prob_big.delta) throw std::invalid_argument("check_comparison: delta differs");
    for (std::uint32_t k : prob_small.grid->interior_nodes())
        if (prob_small.f.values[k] > prob_big.f.values[k] * (1.0 + 1e-14) + 1e-300)
            throw std::invalid_argument("check_comparison: sources are not ordered");

    EnergyModel model(*prob_small.grid, prob_small.op);
    Solver solver(model, cfg);
    const SolveReport small = solver.solve_singular(prob_small);
    const SolveReport big = solver.solve_singular(prob_big);
    if (!small.converged || !big.converged) throw SolveError("check_comparison: a solve did not converge");

    const double scale = std::max(sup_norm(big.u_final), 1e-300);
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t worst_node = 0;
    for (std::size_t k = 0; k < small.u_final.values.size(); ++k) {
        const double excess = small.u_final.values[k] - big.u_final.values[k];
        if (excess > worst) {
            worst = excess;
            worst_node = k;
        }
    }
    CheckOutcome out;
    out.metric = worst / scale;
    out.threshold = 1e-6;
    out.pass = out.metric <= out.threshold;
    out.witness = "node " + std::to_string(worst_node);
    return out;
}

double check_symmetry(const GridFunction& u, int axis) {
    const GridFunction v = reflect(u, axis);
    const double denom = std::max(sup_norm(u), 1e-300);
    return sup_distance(u, v) / denom;
}

double symmetry_threshold(const Grid& grid) {
    const Shape s = grid.spec().shape;
    if (s == Shape::Disk || s == Shape::Annulus) return 5.0 * grid.spacing() * grid.spacing();
    return 1e-5;
}

namespace {

double max_gradient_gap(const Grid& grid, const GridFunction& a, const GridFunction& b,
                        const std::vector<std::uint32_t>& nodes) {
    const double h = grid.spacing();
    double worst = 0.0;
    for (std::uint32_t k : nodes) {
        const auto idx = grid.lattice_index(k);
        for (int ax = 0; ax < grid.dim(); ++ax) {
            int ii[2] = {idx[0], idx[1]};
            ii[ax] += 1;
            const std::size_t kk = grid.flatten(ii[0], ii[1]);
            const double da = (a.values[kk] - a.values[k]) / h;
            const double db = (b.values[kk] - b.values[k]) / h;
            worst = std::max(worst, std::abs(da - db));
        }
    }
    return worst;
}

}  // namespace

GradientTrace check_gradient_convergence(const SolveReport& report, int compact_margin,
                                         double tol_continuation) {
    if (report.stages.size() < 3)
        throw std::invalid_argument("check_gradient_convergence: needs at least three stages");
    const Grid& grid = *report.u_final.grid;
    const auto nodes = grid.margin_nodes(compact_margin);
    if (nodes.empty()) throw std::invalid_argument("check_gradient_convergence: empty compact set");

    GradientTrace trace;
    for (const auto& stage : report.stages)
        trace.gaps.push_back(max_gradient_gap(grid, stage.u, report.u_final, nodes));
    const double last = trace.gaps.back();
    const double first = trace.gaps.front();
    trace.pass = last <= 10.0 * tol_continuation && last <= first + 1e-300;
    return trace;
}

CheckOutcome check_linfty_uniform(const SolveReport& report) {
    if (report.stages.size() < 2) throw std::invalid_argument("check_linfty_uniform: needs at least two stages");
    double peak = 0.0;
    for (const auto& s : report.stages) peak = std::max(peak, s.sup_norm);
    CheckOutcome out;
    out.metric = peak;
    out.threshold = 1.05 * report.stages.back().sup_norm;
    out.pass = peak <= out.threshold;
    return out;
}

CheckOutcome check_compact_positivity(const SolveReport& report) {
    if (report.stages.empty()) throw std::invalid_argument("check_compact_positivity: empty report");
    CheckOutcome out;
    const double floor = 0.9 * report.stages.front().min_compact;
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& s : report.stages) lowest = std::min(lowest, s.min_compact);
    out.metric = lowest;
    out.threshold = floor;
    out.pass = lowest >= floor && lowest > 0.0;
    return out;
}

CheckOutcome check_power_norm_bound(const SolveReport& report, double delta, const EnergyModel& model) {
    if (!(delta > 1.0)) throw std::invalid_argument("check_power_norm_bound: requires delta > 1");
    if (report.stages.empty()) throw std::invalid_argument("check_power_norm_bound: empty report");
    const double p = model.params().kp.p;
    const double expo = (delta + p - 1.0) / p;
    auto powered_norm = [&](const GridFunction& u) {
        GridFunction w = u;
        for (double& v : w.values) v = v > 0.0 ? std::pow(v, expo) : 0.0;
        return model.mixed_norm_p(w);
    };
    const double first = powered_norm(report.stages.front().u);
    double peak = 0.0;
    for (const auto& s : report.stages) peak = std::max(peak, powered_norm(s.u));
    CheckOutcome out;
    out.metric = peak;
    out.threshold = 2.0 * first;
    out.pass = peak <= out.threshold;
    return out;
}

ModeReport check_equivalence_modes(double delta, const GridFunction& f, const Grid& grid,
                                   const KernelParams& kp, const SolverConfig& cfg) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("check_equivalence_modes: requires 0 < delta < 1");
    ModeReport rep;
    const double toggles[3][2] = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    std::vector<GridFunction> solutions;
    rep.all_converged = true;
    for (const auto& t : toggles) {
        OperatorParams op(kp, t[0], t[1]);
        EnergyModel model(grid, op);
        Solver solver(model, cfg);
        SingularProblem prob(grid, delta, f, op);
        const SolveReport report = solver.solve_singular(prob);
        ModeEntry entry;
        entry.alpha = t[0];
        entry.beta = t[1];
        entry.converged = report.converged;
        entry.residual = report.stages.empty() ? std::numeric_limits<double>::infinity()
                                               : report.stages.back().residual;
        entry.sup_norm = sup_norm(report.u_final);
        if (report.converged) {
            const double p = kp.p;
            entry.mu = std::pow(model.mixed_norm_p(report.u_final), (1.0 - delta - p) / (1.0 - delta));
        }
        rep.all_converged = rep.all_converged && report.converged;
        rep.entries.push_back(entry);
        solutions.push_back(report.u_final);
    }
    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < solutions[0].values.size(); ++k)
        excess = std::max(excess, solutions[2].values[k] - solutions[0].values[k]);
    rep.mixed_minus_local_max = excess;
    return rep;
}

ProbeResult uniqueness_probe(const SingularProblem& prob, const EnergyModel& model, const SolverConfig& cfg) {
    SolverConfig from_zero = cfg;
    from_zero.start = SolverConfig::Start::Zero;
    SolverConfig from_const = cfg;
    from_const.start = SolverConfig::Start::Constant;

    const SolveReport a = Solver(model, from_zero).solve_singular(prob);
    const SolveReport b = Solver(model, from_const).solve_singular(prob);
    ProbeResult out;
    out.both_converged = a.converged && b.converged;
    out.sup_gap = sup_distance(a.u_final, b.u_final);
    out.threshold = 10.0 * cfg.tol_continuation;
    out.pass = out.both_converged && out.sup_gap <= out.threshold;
    return out;
}

}  // namespace pmix
