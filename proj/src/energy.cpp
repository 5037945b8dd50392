#include "pmix/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pmix {

EnergyModel::EnergyModel(const Grid& grid, OperatorParams op) : grid_(&grid), op_(op) {
    if (op.kp.N != grid.dim()) throw std::invalid_argument("energy model: kernel dimension differs from grid");
    const double p = op.kp.p, s = op.kp.s;
    h_ = grid.spacing();
    hN_ = grid.cell_measure();
    hNp_ = hN_ * std::pow(h_, -p);
    c_near_ = near_field_correction(h_, op_.kp, 1.0);

    interior_ = grid.interior_nodes();
    dof_of_node_.assign(grid.node_count(), -1);
    int_ix_.resize(interior_.size());
    int_iy_.resize(interior_.size());
    for (std::size_t i = 0; i < interior_.size(); ++i) {
        dof_of_node_[interior_[i]] = static_cast<std::int32_t>(i);
        const auto idx = grid.lattice_index(interior_[i]);
        int_ix_[i] = idx[0];
        int_iy_[i] = idx[1];
    }

    // kernel weight by integer offset; zero on the dropped band |x-y| < 1.5h
    const double ps = p * s;
    const int N = grid.dim();
    wtab_nx_ = grid.box_nodes(0);
    wtab_ny_ = N == 2 ? grid.box_nodes(1) : 1;
    wtab_.assign(static_cast<std::size_t>(wtab_nx_) * wtab_ny_, 0.0);
    const double wscale = std::pow(hN_, 2) * std::pow(h_, -(N + ps));
    for (int dy = 0; dy < wtab_ny_; ++dy)
        for (int dx = 0; dx < wtab_nx_; ++dx) {
            const double d2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
            if (d2 < 2.25) continue;
            wtab_[static_cast<std::size_t>(dy) * wtab_nx_ + dx] = wscale * std::pow(d2, -0.5 * (N + ps));
        }

    // zero-exterior mass per interior node: explicit collar/boundary nodes up
    // to the inscribed lattice ball plus the analytic radial tail beyond it
    zero_coef_.assign(interior_.size(), 0.0);
    const double cut2 = 2.25 * h_ * h_;
    for (std::size_t i = 0; i < interior_.size(); ++i) {
        const std::uint32_t ki = interior_[i];
        const double xi = grid.coord(ki, 0);
        const double yi = N == 2 ? grid.coord(ki, 1) : 0.0;
        const double Ri = grid.edge_distance(ki);
        const double R2 = Ri * Ri;
        double mass = 0.0;
        for (std::size_t kj = 0; kj < grid.node_count(); ++kj) {
            if (grid.is_interior(kj)) continue;
            const double dx = grid.coord(kj, 0) - xi;
            const double dy = N == 2 ? grid.coord(kj, 1) - yi : 0.0;
            const double d2 = dx * dx + dy * dy;
            if (d2 < cut2 || d2 > R2) continue;
            mass += std::pow(d2, -0.5 * (N + ps));
        }
        mass *= hN_ * hN_;
        const double tail = far_field_tail(Ri, 1.0, op_.kp) * hN_;
        zero_coef_[i] = 2.0 * (mass + tail);
    }

    // box lattice edges with at least one interior endpoint
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        if (!grid.in_box(k)) continue;
        const auto idx = grid.lattice_index(k);
        for (int a = 0; a < N; ++a) {
            int ii[2] = {idx[0], idx[1]};
            ii[a] += 1;
            const int nb_hi = grid.collar_cells() + grid.box_nodes(a);
            if (ii[a] >= nb_hi) continue;
            const std::size_t kk = grid_->flatten(ii[0], ii[1]);
            const std::int32_t da = dof_of_node_[k], db = dof_of_node_[kk];
            if (da < 0 && db < 0) continue;
            edges_.push_back({da, db});
        }
    }
}

EnergyModel::Sums EnergyModel::accumulate(std::span<const double> w, std::span<double> grad_local,
                                          std::span<double> grad_pair, bool want_grad, bool smooth,
                                          double eps_rel) const {
    const double p = op_.kp.p;
    double eps = 0.0;
    if (smooth && p != 2.0) {
        double scale = 0.0;
        for (double v : w) scale = std::max(scale, std::abs(v));
        eps = eps_rel * std::max(scale, 1e-30);
    }

    Sums sums;
    for (const Edge& e : edges_) {
        const double ua = e.a >= 0 ? w[e.a] : 0.0;
        const double ub = e.b >= 0 ? w[e.b] : 0.0;
        const double t = ua - ub;
        sums.e_local += pow_abs(t, p);
        if (want_grad) {
            const double c = smooth ? signed_power_smoothed(t, p, eps) : signed_power(t, p);
            if (e.a >= 0) grad_local[e.a] += c;
            if (e.b >= 0) grad_local[e.b] -= c;
        }
    }

    const std::size_t n = interior_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w[i];
        const int ixi = int_ix_[i], iyi = int_iy_[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const int dx = std::abs(int_ix_[j] - ixi);
            const int dy = std::abs(int_iy_[j] - iyi);
            const double wt = wtab_[static_cast<std::size_t>(dy) * wtab_nx_ + dx];
            if (wt == 0.0) continue;
            const double t = wi - w[j];
            sums.e_pair += wt * pow_abs(t, p);
            if (want_grad) {
                const double c = 2.0 * wt * (smooth ? signed_power_smoothed(t, p, eps) : signed_power(t, p));
                grad_pair[i] += c;
                grad_pair[j] -= c;
            }
        }
        sums.e_zero += zero_coef_[i] * pow_abs(wi, p);
        if (want_grad)
            grad_pair[i] += zero_coef_[i] * (smooth ? signed_power_smoothed(wi, p, eps) : signed_power(wi, p));
    }
    return sums;
}

double EnergyModel::phi(std::span<const double> w) const {
    const Sums s = accumulate(w, {}, {}, false, false, 0.0);
    const double e_local = hNp_ * s.e_local;
    const double e_nonlocal = 2.0 * s.e_pair + s.e_zero + c_near_ * e_local;
    return op_.alpha_local * e_local + op_.beta_nonlocal * e_nonlocal;
}

double EnergyModel::phi_over_p(std::span<const double> w, std::span<double> grad, bool smooth,
                               double eps_rel) const {
    std::vector<double> gl(w.size(), 0.0), gp(w.size(), 0.0);
    const Sums s = accumulate(w, gl, gp, true, smooth, eps_rel);
    const double e_local = hNp_ * s.e_local;
    const double e_nonlocal = 2.0 * s.e_pair + s.e_zero + c_near_ * e_local;
    const double cl = (op_.alpha_local + op_.beta_nonlocal * c_near_) * hNp_;
    for (std::size_t i = 0; i < w.size(); ++i) grad[i] = cl * gl[i] + op_.beta_nonlocal * gp[i];
    return (op_.alpha_local * e_local + op_.beta_nonlocal * e_nonlocal) / op_.kp.p;
}

void EnergyModel::phi_diag(std::span<const double> w, std::span<double> diag, double eps_rel) const {
    const double p = op_.kp.p;
    double scale = 0.0;
    for (double v : w) scale = std::max(scale, std::abs(v));
    const double eps = eps_rel * std::max(scale, 1e-30);
    const double e2 = eps * eps;
    auto curve = [p, e2](double t) {  // (p-1) |t|^{p-2}, smoothed
        if (p == 2.0) return 1.0;
        return (p - 1.0) * std::pow(t * t + e2, 0.5 * (p - 2.0));
    };
    for (double& d : diag) d = 0.0;
    const double cl = (op_.alpha_local + op_.beta_nonlocal * c_near_) * hNp_;
    for (const Edge& e : edges_) {
        const double ua = e.a >= 0 ? w[e.a] : 0.0;
        const double ub = e.b >= 0 ? w[e.b] : 0.0;
        const double c = cl * curve(ua - ub);
        if (e.a >= 0) diag[e.a] += c;
        if (e.b >= 0) diag[e.b] += c;
    }
    if (op_.beta_nonlocal != 0.0) {
        const std::size_t n = interior_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double wi = w[i];
            const int ixi = int_ix_[i], iyi = int_iy_[i];
            for (std::size_t j = i + 1; j < n; ++j) {
                const int dx = std::abs(int_ix_[j] - ixi);
                const int dy = std::abs(int_iy_[j] - iyi);
                const double wt = wtab_[static_cast<std::size_t>(dy) * wtab_nx_ + dx];
                if (wt == 0.0) continue;
                const double c = 2.0 * wt * curve(wi - w[j]);
                diag[i] += c;
                diag[j] += c;
            }
            diag[i] += zero_coef_[i] * curve(wi);
        }
    }
}

void EnergyModel::pack(const GridFunction& u, std::vector<double>& w) const {
    w.resize(interior_.size());
    for (std::size_t i = 0; i < interior_.size(); ++i) w[i] = u.values[interior_[i]];
}

GridFunction EnergyModel::unpack(std::span<const double> w) const {
    GridFunction u = GridFunction::zeros(*grid_);
    for (std::size_t i = 0; i < interior_.size(); ++i) u.values[interior_[i]] = w[i];
    return u;
}

double EnergyModel::dot_measure(std::span<const double> w, const GridFunction& g) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < interior_.size(); ++i) acc += g.values[interior_[i]] * w[i];
    return hN_ * acc;
}

double EnergyModel::local_energy(const GridFunction& u) const {
    const double p = op_.kp.p;
    double acc = 0.0;
    std::vector<double> w;
    pack(u, w);
    for (const Edge& e : edges_) {
        const double ua = e.a >= 0 ? w[e.a] : 0.0;
        const double ub = e.b >= 0 ? w[e.b] : 0.0;
        acc += pow_abs(ua - ub, p);
    }
    return hNp_ * acc;
}

double EnergyModel::nonlocal_energy(const GridFunction& u) const {
    std::vector<double> w;
    pack(u, w);
    const Sums s = accumulate(w, {}, {}, false, false, 0.0);
    return 2.0 * s.e_pair + s.e_zero + c_near_ * hNp_ * s.e_local;
}

double EnergyModel::mixed_norm_p(const GridFunction& u) const {
    std::vector<double> w;
    pack(u, w);
    return phi(w);
}

EnergyBreakdown EnergyModel::source_functional(const GridFunction& v, const GridFunction& g) const {
    g.validate();
    std::vector<double> w;
    pack(v, w);
    const Sums s = accumulate(w, {}, {}, false, false, 0.0);
    const double p = op_.kp.p;
    const double e_local = hNp_ * s.e_local;
    const double e_nonlocal = 2.0 * s.e_pair + s.e_zero + c_near_ * e_local;
    EnergyBreakdown out;
    out.local = op_.alpha_local * e_local / p;
    out.nonlocal = op_.beta_nonlocal * e_nonlocal / p;
    out.source = -dot_measure(w, g);
    out.total = out.local + out.nonlocal + out.source;
    return out;
}

double EnergyModel::regularized_functional(const GridFunction& v, double n, double delta,
                                           const GridFunction& f) const {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("regularized functional: requires 0 < delta < 1");
    std::vector<double> w;
    pack(v, w);
    double src = 0.0;
    for (std::size_t i = 0; i < interior_.size(); ++i) {
        const double fn = std::min(f.values[interior_[i]], n);
        src += fn * regularized_source_primitive(w[i], n, delta);
    }
    return phi(w) / op_.kp.p - hN_ * src;
}

double EnergyModel::singular_functional(const GridFunction& v, double delta, const GridFunction& f) const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("singular functional: requires 0 < delta < 1");
    std::vector<double> w;
    pack(v, w);
    double src = 0.0;
    for (std::size_t i = 0; i < interior_.size(); ++i) {
        const double vp = w[i] > 0.0 ? w[i] : 0.0;
        src += f.values[interior_[i]] * std::pow(vp, 1.0 - delta);
    }
    return phi(w) / op_.kp.p - hN_ * src / (1.0 - delta);
}

double EnergyModel::obstacle_functional(const GridFunction& v, double k, double delta,
                                        const GridFunction& f) const {
    std::vector<double> w;
    pack(v, w);
    double src = 0.0;
    for (std::size_t i = 0; i < interior_.size(); ++i)
        src += f.values[interior_[i]] * singular_source_trunc_primitive(w[i], k, delta);
    return phi(w) / op_.kp.p - hN_ * src;
}

GridFunction EnergyModel::energy_gradient(const GridFunction& v, Functional which,
                                          const FunctionalContext& ctx) const {
    if (!ctx.source) throw std::invalid_argument("energy gradient: missing source term");
    const GridFunction& src = *ctx.source;
    std::vector<double> w, grad(interior_.size());
    pack(v, w);
    phi_over_p(w, grad, true);
    for (std::size_t i = 0; i < interior_.size(); ++i) {
        const double fi = src.values[interior_[i]];
        double slope = 0.0;
        switch (which) {
            case Functional::Source: slope = 1.0; break;
            case Functional::Regularized:
                slope = regularized_source(w[i], ctx.n, ctx.delta);
                break;
            case Functional::SingularSmoothed:
                slope = w[i] > 0.0 ? std::pow(w[i] + ctx.smooth_eps, -ctx.delta) : 0.0;
                break;
            case Functional::Obstacle:
                slope = singular_source_trunc(w[i], ctx.k, ctx.delta);
                break;
        }
        grad[i] -= hN_ * fi * slope;
    }
    return unpack(grad);
}

double EnergyModel::weak_residual(const GridFunction& u, double delta, const GridFunction& f) const {
    if (!(delta > 0.0)) throw std::invalid_argument("weak residual: delta must be > 0");
    std::vector<double> w, grad(interior_.size());
    pack(u, w);
    for (double v : w)
        if (!(v > 0.0)) throw std::invalid_argument("weak residual: solution must be positive at interior nodes");
    phi_over_p(w, grad, false);
    const int margin = delta >= 1.0 ? 3 : 0;
    double worst = 0.0, scale = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < interior_.size(); ++i) {
        if (grid_->cells_to_boundary(interior_[i]) < margin) continue;
        any = true;
        const double rhs = hN_ * f.values[interior_[i]] * std::pow(w[i], -delta);
        worst = std::max(worst, std::abs(grad[i] - rhs));
        scale = std::max(scale, std::abs(rhs));
    }
    if (!any) throw std::invalid_argument("weak residual: margin leaves no test nodes");
    return worst / std::max(scale, 1e-300);
}

double local_energy(const GridFunction& u, double p) {
    OperatorParams op(KernelParams(p, 0.5, u.grid->dim()), 1.0, 0.0);
    return EnergyModel(*u.grid, op).local_energy(u);
}

double nonlocal_energy(const GridFunction& u, const KernelParams& kp) {
    OperatorParams op(kp, 0.0, 1.0);
    return EnergyModel(*u.grid, op).nonlocal_energy(u);
}

double mixed_norm_p(const GridFunction& u, const OperatorParams& op) {
    return EnergyModel(*u.grid, op).mixed_norm_p(u);
}

}  // namespace pmix
