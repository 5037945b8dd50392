#pragma once

#include <string>
#include <vector>

#include "pmix/energy.hpp"
#include "pmix/grid.hpp"
#include "pmix/solver.hpp"

namespace pmix {

enum class ExponentUse { Existence, Regularity, Uniqueness };

// The source-integrability exponent demanded by each result, by p-vs-N case.
struct IntegrabilityExponent {
    enum class Regime { Subcritical, Borderline, Supercritical };
    Regime regime = Regime::Subcritical;
    double value = 0.0;         // exponent or bound, when defined
    bool any_above_one = false; // "any exponent > 1" marker (p = N)
    bool strict = false;        // value is an open lower bound
    double p_star = 0.0;        // defined for p < N
};

IntegrabilityExponent required_integrability(double p, int N, double delta, ExponentUse which);

struct CheckOutcome {
    bool pass = false;
    double metric = 0.0;
    double threshold = 0.0;
    std::string witness;
};

// nodewise monotonicity of the stage solutions plus norm monotonicity
CheckOutcome check_monotone_sequence(const SolveReport& report);

// solves both problems and verifies ordering of the solutions
CheckOutcome check_comparison(const SingularProblem& prob_small, const SingularProblem& prob_big,
                              const SolverConfig& cfg);

// relative sup-asymmetry of u about the midplane of the given axis
double check_symmetry(const GridFunction& u, int axis);
double symmetry_threshold(const Grid& grid);

struct GradientTrace {
    std::vector<double> gaps;  // per stage, max interior gradient gap to the final stage
    bool pass = false;
};
GradientTrace check_gradient_convergence(const SolveReport& report, int compact_margin, double tol_continuation);

CheckOutcome check_linfty_uniform(const SolveReport& report);

// min over the compact witness set stays above 0.9x its first-stage value
CheckOutcome check_compact_positivity(const SolveReport& report);

// for delta > 1: the mixed norm of u_n^{(delta+p-1)/p} stays within 2x its first-stage value
CheckOutcome check_power_norm_bound(const SolveReport& report, double delta, const EnergyModel& model);

struct ModeEntry {
    double alpha = 0.0, beta = 0.0;
    bool converged = false;
    double residual = 0.0;
    double mu = 0.0;  // per-mode extremal constant (delta < 1)
    double sup_norm = 0.0;
};
struct ModeReport {
    std::vector<ModeEntry> entries;  // (1,0), (0,1), (1,1)
    bool all_converged = false;
    double mixed_minus_local_max = 0.0;  // informational trend, not a pass/fail
};
ModeReport check_equivalence_modes(double delta, const GridFunction& f, const Grid& grid,
                                   const KernelParams& kp, const SolverConfig& cfg);

struct ProbeResult {
    bool both_converged = false;
    double sup_gap = 0.0;
    double threshold = 0.0;
    bool pass = false;
};
// two continuation runs from different initial iterates must meet
ProbeResult uniqueness_probe(const SingularProblem& prob, const EnergyModel& model, const SolverConfig& cfg);

}  // namespace pmix
