#pragma once

#include <vector>

#include "pmix/energy.hpp"
#include "pmix/grid.hpp"
#include "pmix/rng.hpp"

namespace pmix {

struct SimplicityRecord {
    int start_id = 0;
    bool converged = false;
    double distance = 0.0;  // min(sup|w-V|, sup|w+V|) / sup|V|
    double quotient = 0.0;  // constrained energy reached
};

struct MarginReport {
    int samples = 0;
    double slack = 0.99;          // C / mu used for the scaled margins
    double min_margin = 0.0;      // at C = mu
    double min_margin_scaled = 0.0;
    int negative_scaled = 0;      // samples violating the scaled inequality
    double extremal_margin = 0.0; // margin of the extremal itself at C = mu
};

struct ExtremalResult {
    double mu = 0.0;  // reported constant (formula route)
    double mu_from_formula = 0.0;
    double mu_from_infimum = 0.0;
    double tau = 0.0;
    GridFunction extremal;          // tau * u_delta, unit constraint integral
    double constraint_defect = 0.0; // |integral of extremal^{1-delta} f  -  1|
    double identity_defect = 0.0;   // relative defect of ||u||^p = integral u^{1-delta} f
    MarginReport margins;
    std::vector<SimplicityRecord> simplicity;
};

// scale factor placing u on the unit constraint set
double normalization_tau(const GridFunction& u, double delta, const GridFunction& f);

// constraint integral h^N sum |v|^{1-delta} f
double constraint_integral(const GridFunction& v, double delta, const GridFunction& f);

// energy-to-constraint quotient; scale invariant
double quotient(const GridFunction& v, double delta, const GridFunction& f, const EnergyModel& model);

// the extremal constant both ways: from the solution norm and as the energy
// of the normalized extremal
ExtremalResult extremal_constant(const GridFunction& u_delta, double delta, const GridFunction& f,
                                 const EnergyModel& model);

MarginReport verify_sobolev(const ExtremalResult& result, double delta, const GridFunction& f,
                            const EnergyModel& model, int sample_count, double slack, Rng rng);

std::vector<SimplicityRecord> verify_simplicity(const ExtremalResult& result, double delta,
                                                const GridFunction& f, const EnergyModel& model, int starts,
                                                Rng rng, const GridFunction* extra_start = nullptr);

// residual of the extremal against the equation with source mu * f
double check_euler_lagrange_extremal(const GridFunction& V, double mu, double delta, const GridFunction& f,
                                     const EnergyModel& model);

// sample generators used by the margin sweep
GridFunction random_smoothed_field(const Grid& grid, Rng& rng);
GridFunction random_bump(const Grid& grid, Rng& rng);

}  // namespace pmix
