#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pmix/grid.hpp"
#include "pmix/kernels.hpp"

namespace pmix {

// Which parts of the operator are active: (1,0) local only, (0,1) nonlocal
// only, (1,1) the mixed operator.
struct OperatorParams {
    KernelParams kp;
    double alpha_local = 1.0;
    double beta_nonlocal = 1.0;

    OperatorParams() = default;
    OperatorParams(KernelParams k, double alpha, double beta) : kp(k), alpha_local(alpha), beta_nonlocal(beta) {
        if ((alpha != 0.0 && alpha != 1.0) || (beta != 0.0 && beta != 1.0))
            throw std::invalid_argument("operator params: toggles must be 0 or 1");
        if (alpha + beta < 1.0) throw std::invalid_argument("operator params: at least one part must be active");
    }
};

struct EnergyBreakdown {
    double local = 0.0;
    double nonlocal = 0.0;
    double source = 0.0;
    double total = 0.0;
};

enum class Functional { Source, Regularized, SingularSmoothed, Obstacle };

struct FunctionalContext {
    const GridFunction* source = nullptr;  // g for Source, f for the others
    double n = 1.0;                        // Regularized
    double delta = 0.5;                    // Regularized / SingularSmoothed / Obstacle
    double k = 1.0;                        // Obstacle
    double smooth_eps = 1e-8;              // SingularSmoothed
};

// Discrete energies over one grid and one operator configuration. Pairwise
// tables (kernel weights by lattice offset, zero-exterior mass, tail
// coefficients) are assembled once at construction; everything afterwards is
// pure and safe for concurrent use.
class EnergyModel {
public:
    EnergyModel(const Grid& grid, OperatorParams op);

    const Grid& grid() const { return *grid_; }
    const OperatorParams& params() const { return op_; }

    // edge rule: sum over box edges of h^N |difference/h|^p
    double local_energy(const GridFunction& u) const;
    // pair quadrature with near-diagonal repair and analytic exterior tail
    double nonlocal_energy(const GridFunction& u) const;
    // alpha * local + beta * nonlocal (the p-th power of the norm)
    double mixed_norm_p(const GridFunction& u) const;

    EnergyBreakdown source_functional(const GridFunction& v, const GridFunction& g) const;
    double regularized_functional(const GridFunction& v, double n, double delta, const GridFunction& f) const;
    double singular_functional(const GridFunction& v, double delta, const GridFunction& f) const;
    double obstacle_functional(const GridFunction& v, double k, double delta, const GridFunction& f) const;

    GridFunction energy_gradient(const GridFunction& v, Functional which, const FunctionalContext& ctx) const;

    // max hat-function defect of the singular equation, normalized by the
    // largest source entry; for delta >= 1 hats within 2 cells of the
    // boundary are excluded
    double weak_residual(const GridFunction& u, double delta, const GridFunction& f) const;

    // ---- packed interface over interior degrees of freedom (hot path) ----
    std::size_t dof() const { return interior_.size(); }
    void pack(const GridFunction& u, std::vector<double>& w) const;
    GridFunction unpack(std::span<const double> w) const;
    std::uint32_t interior_node(std::size_t dof_index) const { return interior_[dof_index]; }

    double phi(std::span<const double> w) const;  // alpha E_L + beta E_NL
    // value of phi/p; fills grad with its gradient (smoothed nonlinearity if
    // smooth, with kink width eps_rel * scale of w)
    double phi_over_p(std::span<const double> w, std::span<double> grad, bool smooth,
                      double eps_rel = 1e-10) const;
    // diagonal of the Hessian of phi/p, for preconditioning descent directions
    void phi_diag(std::span<const double> w, std::span<double> diag, double eps_rel = 1e-10) const;

    double dot_measure(std::span<const double> w, const GridFunction& g) const;  // h^N sum g_i w_i

private:
    struct Sums {
        double e_local = 0.0;
        double e_pair = 0.0;
        double e_zero = 0.0;
    };
    Sums accumulate(std::span<const double> w, std::span<double> grad_local, std::span<double> grad_pair,
                    bool want_grad, bool smooth, double eps_rel) const;

    const Grid* grid_;
    OperatorParams op_;
    double h_, hN_, hNp_;   // spacing, h^N, h^{N-p}
    double c_near_ = 0.0;   // near-diagonal repair constant multiplying the edge energy

    std::vector<std::uint32_t> interior_;       // lattice ids, ascending
    std::vector<std::int32_t> dof_of_node_;     // lattice -> packed id, -1 outside
    std::vector<std::int32_t> int_ix_, int_iy_; // lattice coordinates per dof
    std::vector<double> wtab_;                  // pair weight by |offset|, 0 on excluded band
    int wtab_nx_ = 0, wtab_ny_ = 0;
    std::vector<double> zero_coef_;             // per dof: 2*(collar mass + tail), ordered-pair convention

    struct Edge { std::int32_t a, b; };         // box lattice edges as dof ids (-1 when not interior)
    std::vector<Edge> edges_;
};

// convenience wrappers matching the per-operation surface (they assemble a
// model internally; use EnergyModel directly in loops)
double local_energy(const GridFunction& u, double p);
double nonlocal_energy(const GridFunction& u, const KernelParams& kp);
double mixed_norm_p(const GridFunction& u, const OperatorParams& op);

}  // namespace pmix
