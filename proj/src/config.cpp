#include "pmix/config.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "pmix/io.hpp"

namespace pmix {

using nlohmann::json;

std::string task_name(Task t) {
    switch (t) {
        case Task::Solve: return "solve";
        case Task::Extremal: return "extremal";
        case Task::Verify: return "verify";
        case Task::Sweep: return "sweep";
    }
    return "?";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

Task task_from_name(const std::string& name) {
    if (name == "solve") return Task::Solve;
    if (name == "extremal") return Task::Extremal;
    if (name == "verify") return Task::Verify;
    if (name == "sweep") return Task::Sweep;
    throw std::invalid_argument("config: task: unknown task '" + name + "'");
}

DomainSpec parse_grid(const json& j) {
    DomainSpec g;
    g.shape = shape_from_name(j.value("shape", std::string("interval")));
    g.dim = g.shape == Shape::Interval ? 1 : 2;
    if (j.contains("bounds")) {
        const auto& b = j.at("bounds");
        if (!b.is_array() || b.size() != static_cast<std::size_t>(g.dim)) fail("grid.bounds", "expected one [lo,hi] pair per axis");
        for (int a = 0; a < g.dim; ++a) {
            g.lo[a] = b.at(a).at(0).get<double>();
            g.hi[a] = b.at(a).at(1).get<double>();
        }
    } else if (g.dim == 2) {
        g.lo = {-1.0, -1.0};
        g.hi = {1.0, 1.0};
    }
    g.nodes_per_axis = j.value("nodes_per_axis", 101);
    g.inner_radius = j.value("inner_radius", 0.0);
    g.outer_radius = j.value("outer_radius", 0.0);
    if ((g.shape == Shape::Disk || g.shape == Shape::Annulus) && g.outer_radius <= 0.0)
        g.outer_radius = 0.5 * std::min(g.hi[0] - g.lo[0], g.hi[1] - g.lo[1]);
    double default_collar = 0.0;
    switch (g.shape) {
        case Shape::Interval: default_collar = g.hi[0] - g.lo[0]; break;
        case Shape::Rectangle: default_collar = std::hypot(g.hi[0] - g.lo[0], g.hi[1] - g.lo[1]); break;
        default: default_collar = 2.0 * g.outer_radius; break;
    }
    g.collar_radius = j.value("collar_radius", default_collar);
    return g;
}

SourceSpec parse_source(const json& j) {
    SourceSpec f;
    if (j.is_null()) return f;
    const std::string kind = j.value("kind", std::string("constant"));
    if (kind == "constant") {
        f.kind = SourceSpec::Kind::Constant;
        f.value = j.value("value", 1.0);
        if (f.value < 0.0) fail("problem.f.value", "the source must be nonnegative");
    } else if (kind == "radial_power") {
        f.kind = SourceSpec::Kind::RadialPower;
        f.c = j.value("c", 1.0);
        f.gamma = j.value("gamma", 0.0);
        if (f.c < 0.0) fail("problem.f.c", "the source must be nonnegative");
        if (j.contains("center")) {
            const auto& c = j.at("center");
            for (std::size_t a = 0; a < c.size() && a < 2; ++a) f.center[a] = c.at(a).get<double>();
        }
    } else if (kind == "csv") {
        f.kind = SourceSpec::Kind::Csv;
        f.path = j.value("path", std::string());
        if (f.path.empty()) fail("problem.f.path", "csv source needs a path");
    } else {
        fail("problem.f.kind", "expected constant, radial_power or csv");
    }
    return f;
}

SolverConfig parse_solver(const json& j) {
    SolverConfig s;
    if (j.is_null()) return s;
    s.tol_energy = j.value("tol_energy", s.tol_energy);
    s.tol_residual = j.value("tol_residual", s.tol_residual);
    s.tol_continuation = j.value("tol_continuation", s.tol_continuation);
    s.max_iters = j.value("max_iters", s.max_iters);
    s.armijo_slope = j.value("armijo_slope", s.armijo_slope);
    s.armijo_backtrack = j.value("armijo_backtrack", s.armijo_backtrack);
    s.picard_max = j.value("picard_max", s.picard_max);
    s.compact_margin = j.value("compact_margin", s.compact_margin);
    if (j.contains("n_schedule")) s.n_schedule = j.at("n_schedule").get<std::vector<double>>();
    const std::string start = j.value("start", std::string("zero"));
    if (start == "zero")
        s.start = SolverConfig::Start::Zero;
    else if (start == "constant")
        s.start = SolverConfig::Start::Constant;
    else
        fail("solver.start", "expected zero or constant");
    s.start_value = j.value("start_value", s.start_value);
    return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: document is not valid json: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.schema_version = j.value("schema_version", 1);
    if (cfg.schema_version != 1) fail("schema_version", "unsupported schema version");
    if (!j.contains("task")) fail("task", "missing");
    cfg.task = task_from_name(j.at("task").get<std::string>());

    cfg.grid = parse_grid(j.value("grid", json::object()));

    const json op = j.value("operator", json::object());
    cfg.p = op.value("p", 2.0);
    cfg.s = op.value("s", 0.5);
    cfg.alpha = op.value("alpha_local", 1.0);
    cfg.beta = op.value("beta_nonlocal", 1.0);
    if (!(cfg.p > 1.0)) fail("operator.p", "requires p > 1");
    if (!(cfg.s > 0.0 && cfg.s < 1.0)) fail("operator.s", "requires 0 < s < 1");
    if ((cfg.alpha != 0.0 && cfg.alpha != 1.0) || (cfg.beta != 0.0 && cfg.beta != 1.0))
        fail("operator.alpha_local/beta_nonlocal", "toggles must be 0 or 1");
    if (cfg.alpha + cfg.beta < 1.0) fail("operator", "at least one of the local/nonlocal parts must be active");

    const json prob = j.value("problem", json::object());
    cfg.delta = prob.value("delta", 0.5);
    if (!(cfg.delta > 0.0)) fail("problem.delta", "requires delta > 0");
    cfg.f = parse_source(prob.contains("f") ? prob.at("f") : json());
    if (cfg.f.kind == SourceSpec::Kind::RadialPower && cfg.f.gamma <= -static_cast<double>(cfg.grid.dim))
        fail("problem.f.gamma", "radial power must have gamma > -N for an integrable source");

    if (cfg.task == Task::Extremal && !(cfg.delta < 1.0))
        fail("problem.delta",
             "extremal analysis requires 0 < delta < 1; the extremal constant and the associated "
             "inequality are defined only in that range");

    cfg.solver = parse_solver(j.value("solver", json::object()));
    cfg.solver.validate();

    if (j.contains("sweep")) {
        const auto& sw = j.at("sweep");
        if (sw.contains("delta")) cfg.sweep.delta = sw.at("delta").get<std::vector<double>>();
        if (sw.contains("p")) cfg.sweep.p = sw.at("p").get<std::vector<double>>();
        if (sw.contains("s")) cfg.sweep.s = sw.at("s").get<std::vector<double>>();
        if (sw.contains("nodes_per_axis")) cfg.sweep.nodes = sw.at("nodes_per_axis").get<std::vector<int>>();
        for (double d : cfg.sweep.delta)
            if (!(d > 0.0)) fail("sweep.delta", "entries must be > 0");
        for (double pp : cfg.sweep.p)
            if (!(pp > 1.0)) fail("sweep.p", "entries must be > 1");
        for (double ss : cfg.sweep.s)
            if (!(ss > 0.0 && ss < 1.0)) fail("sweep.s", "entries must lie in (0,1)");
    }
    if (cfg.task == Task::Sweep && cfg.sweep.delta.empty() && cfg.sweep.p.empty() && cfg.sweep.s.empty() &&
        cfg.sweep.nodes.empty())
        fail("sweep", "sweep task needs at least one non-empty axis");

    if (j.contains("extremal_params")) {
        const auto& e = j.at("extremal_params");
        cfg.extremal.sobolev_samples = e.value("sobolev_samples", cfg.extremal.sobolev_samples);
        cfg.extremal.sobolev_slack = e.value("sobolev_slack", cfg.extremal.sobolev_slack);
        cfg.extremal.simplicity_starts = e.value("simplicity_starts", cfg.extremal.simplicity_starts);
    }

    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.seed = j.value("seed", static_cast<std::uint64_t>(1));
    cfg.deterministic = j.value("deterministic", false);
    cfg.threads = j.value("threads", 1);
    if (cfg.threads < 1) fail("threads", "must be >= 1");
    if (cfg.deterministic) cfg.threads = 1;
    return cfg;
}

std::string emit_config(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["task"] = task_name(cfg.task);

    json grid;
    grid["shape"] = shape_name(cfg.grid.shape);
    json bounds = json::array();
    for (int a = 0; a < cfg.grid.dim; ++a) bounds.push_back({cfg.grid.lo[a], cfg.grid.hi[a]});
    grid["bounds"] = bounds;
    grid["nodes_per_axis"] = cfg.grid.nodes_per_axis;
    grid["collar_radius"] = cfg.grid.collar_radius;
    if (cfg.grid.shape == Shape::Disk || cfg.grid.shape == Shape::Annulus)
        grid["outer_radius"] = cfg.grid.outer_radius;
    if (cfg.grid.shape == Shape::Annulus) grid["inner_radius"] = cfg.grid.inner_radius;
    j["grid"] = grid;

    j["operator"] = {{"p", cfg.p}, {"s", cfg.s}, {"alpha_local", cfg.alpha}, {"beta_nonlocal", cfg.beta}};

    json f;
    switch (cfg.f.kind) {
        case SourceSpec::Kind::Constant:
            f = {{"kind", "constant"}, {"value", cfg.f.value}};
            break;
        case SourceSpec::Kind::RadialPower:
            f = {{"kind", "radial_power"}, {"c", cfg.f.c}, {"gamma", cfg.f.gamma},
                 {"center", std::vector<double>(cfg.f.center.begin(), cfg.f.center.begin() + cfg.grid.dim)}};
            break;
        case SourceSpec::Kind::Csv:
            f = {{"kind", "csv"}, {"path", cfg.f.path}};
            break;
    }
    j["problem"] = {{"delta", cfg.delta}, {"f", f}};

    json solver;
    solver["tol_energy"] = cfg.solver.tol_energy;
    solver["tol_residual"] = cfg.solver.tol_residual;
    solver["tol_continuation"] = cfg.solver.tol_continuation;
    solver["max_iters"] = cfg.solver.max_iters;
    solver["armijo_slope"] = cfg.solver.armijo_slope;
    solver["armijo_backtrack"] = cfg.solver.armijo_backtrack;
    solver["picard_max"] = cfg.solver.picard_max;
    solver["compact_margin"] = cfg.solver.compact_margin;
    solver["start"] = cfg.solver.start == SolverConfig::Start::Zero ? "zero" : "constant";
    solver["start_value"] = cfg.solver.start_value;
    if (!cfg.solver.n_schedule.empty()) solver["n_schedule"] = cfg.solver.n_schedule;
    j["solver"] = solver;

    if (!cfg.sweep.delta.empty() || !cfg.sweep.p.empty() || !cfg.sweep.s.empty() || !cfg.sweep.nodes.empty()) {
        json sw;
        if (!cfg.sweep.delta.empty()) sw["delta"] = cfg.sweep.delta;
        if (!cfg.sweep.p.empty()) sw["p"] = cfg.sweep.p;
        if (!cfg.sweep.s.empty()) sw["s"] = cfg.sweep.s;
        if (!cfg.sweep.nodes.empty()) sw["nodes_per_axis"] = cfg.sweep.nodes;
        j["sweep"] = sw;
    }

    j["extremal_params"] = {{"sobolev_samples", cfg.extremal.sobolev_samples},
                            {"sobolev_slack", cfg.extremal.sobolev_slack},
                            {"simplicity_starts", cfg.extremal.simplicity_starts}};

    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    j["deterministic"] = cfg.deterministic;
    j["threads"] = cfg.threads;
    return j.dump(2) + "\n";
}

GridFunction make_source(const SourceSpec& spec, const Grid& grid) {
    switch (spec.kind) {
        case SourceSpec::Kind::Constant:
            return GridFunction::constant_interior(grid, spec.value);
        case SourceSpec::Kind::RadialPower: {
            GridFunction f = GridFunction::zeros(grid);
            for (std::uint32_t k : grid.interior_nodes()) {
                double d2 = 0.0;
                for (int a = 0; a < grid.dim(); ++a) {
                    const double dx = grid.coord(k, a) - spec.center[a];
                    d2 += dx * dx;
                }
                if (d2 == 0.0 && spec.gamma < 0.0)
                    throw std::invalid_argument(
                        "source: radial power with negative exponent centered exactly on a grid node");
                f.values[k] = spec.c * std::pow(d2, 0.5 * spec.gamma);
            }
            f.validate();
            return f;
        }
        case SourceSpec::Kind::Csv:
            return io::grid_function_from_csv(io::read_file(spec.path), grid);
    }
    throw std::invalid_argument("source: unknown kind");
}

}  // namespace pmix
