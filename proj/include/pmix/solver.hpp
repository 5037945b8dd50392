#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pmix/energy.hpp"
#include "pmix/grid.hpp"

namespace pmix {

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    double tol_energy = 4e-16;       // relative energy-decrease stall threshold (roundoff floor)
    double tol_residual = 1e-7;      // weak residual stop, source-normalized
    double tol_continuation = 1e-7;  // sup-norm gap between consecutive stages
    long max_iters = 80000;          // per inner descent
    std::vector<double> n_schedule;  // strictly increasing; empty = default doubling
    double armijo_slope = 1e-4;
    double armijo_backtrack = 0.5;
    int picard_max = 400;
    enum class Start { Zero, Constant };
    Start start = Start::Zero;
    double start_value = 10.0;
    int compact_margin = 3;  // cells, for the compact-subset witness

    std::vector<double> schedule() const;
    void validate() const;
};

// The singular problem data: exponent, nonnegative source, operator toggles.
struct SingularProblem {
    const Grid* grid;
    double delta;
    GridFunction f;
    OperatorParams op;

    SingularProblem(const Grid& g, double delta_, GridFunction f_, OperatorParams op_);
    GridFunction f_trunc(double n) const;
};

struct StageRecord {
    double n = 0.0;
    GridFunction u;
    int picard_iterations = 0;
    long inner_iterations = 0;
    double residual = 0.0;  // defect against the singular source f/u^delta
    double mixed_norm_p = 0.0;
    double sup_norm = 0.0;
    double min_compact = 0.0;
};

struct InnerTrace {
    double n = 0.0;
    int picard_step = 0;
    std::vector<double> energies;  // monotone nonincreasing per inner solve
};

struct SolveReport {
    GridFunction u_final;
    std::vector<StageRecord> stages;
    std::vector<InnerTrace> traces;
    bool converged = false;
    long total_inner_iterations = 0;
    std::string failure_reason;
};

class Solver {
public:
    Solver(const EnergyModel& model, SolverConfig cfg);

    const EnergyModel& model() const { return *model_; }
    const SolverConfig& config() const { return cfg_; }

    // unique minimizer of the source functional for a bounded source g >= 0;
    // tol_scale loosens the stop for inexact inner solves inside fixed-point steps
    GridFunction solve_source(const GridFunction& g, const GridFunction* warm = nullptr,
                              std::vector<double>* energy_trace = nullptr, long* iterations = nullptr,
                              double tol_scale = 1.0) const;

    // fixed point of the map h -> solve_source(f_n / (h^+ + 1/n)^delta)
    GridFunction solve_regularized(double n, double delta, const GridFunction& f,
                                   const GridFunction* warm = nullptr, int* picard_iterations = nullptr,
                                   long* inner_iterations = nullptr, std::vector<InnerTrace>* traces = nullptr,
                                   double stage_label = -1.0) const;

    // same solution by direct minimization of the regularized functional (delta < 1)
    GridFunction solve_regularized_direct(double n, double delta, const GridFunction& f,
                                          const GridFunction* warm = nullptr) const;

    // continuation along the n-schedule with warm starts
    SolveReport solve_singular(const SingularProblem& prob) const;

    // minimize the truncated-source functional over {0 <= z <= v_upper}
    GridFunction solve_obstacle(const GridFunction& v_upper, double k, const SingularProblem& prob) const;

    GridFunction start_field() const;

private:
    const EnergyModel* model_;
    SolverConfig cfg_;
};

}  // namespace pmix
