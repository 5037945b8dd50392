#include "pmix/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pmix {

double constraint_integral(const GridFunction& v, double delta, const GridFunction& f) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("constraint integral: requires 0 < delta < 1");
    const Grid& g = *v.grid;
    double acc = 0.0;
    for (std::uint32_t k : g.interior_nodes())
        acc += std::pow(std::abs(v.values[k]), 1.0 - delta) * f.values[k];
    return g.cell_measure() * acc;
}

double normalization_tau(const GridFunction& u, double delta, const GridFunction& f) {
    const double I = constraint_integral(u, delta, f);
    if (!(I > 0.0)) throw std::invalid_argument("normalization_tau: constraint integral vanishes");
    return std::pow(I, -1.0 / (1.0 - delta));
}

double quotient(const GridFunction& v, double delta, const GridFunction& f, const EnergyModel& model) {
    const double I = constraint_integral(v, delta, f);
    if (!(I > 0.0)) throw std::invalid_argument("quotient: constraint integral vanishes");
    const double p = model.params().kp.p;
    return model.mixed_norm_p(v) * std::pow(I, -p / (1.0 - delta));
}

ExtremalResult extremal_constant(const GridFunction& u_delta, double delta, const GridFunction& f,
                                 const EnergyModel& model) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("extremal_constant: requires 0 < delta < 1");
    for (std::uint32_t k : model.grid().interior_nodes())
        if (!(u_delta.values[k] > 0.0))
            throw std::invalid_argument("extremal_constant: solution must be positive at interior nodes");

    const double p = model.params().kp.p;
    ExtremalResult res;
    const double norm_p = model.mixed_norm_p(u_delta);
    const double I = constraint_integral(u_delta, delta, f);
    res.identity_defect = std::abs(norm_p - I) / std::max(norm_p, 1e-300);
    res.tau = normalization_tau(u_delta, delta, f);

    res.extremal = u_delta;
    for (double& v : res.extremal.values) v *= res.tau;
    res.constraint_defect = std::abs(constraint_integral(res.extremal, delta, f) - 1.0);

    res.mu_from_formula = std::pow(norm_p, (1.0 - delta - p) / (1.0 - delta));
    res.mu_from_infimum = model.mixed_norm_p(res.extremal);
    res.mu = res.mu_from_formula;
    return res;
}

GridFunction random_smoothed_field(const Grid& grid, Rng& rng) {
    GridFunction u = GridFunction::zeros(grid);
    for (std::uint32_t k : grid.interior_nodes()) u.values[k] = rng.normal();
    // one Jacobi sweep knocks out the highest lattice frequencies
    GridFunction v = GridFunction::zeros(grid);
    for (std::uint32_t k : grid.interior_nodes()) {
        const auto idx = grid.lattice_index(k);
        double acc = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            for (int step : {-1, 1}) {
                int ii[2] = {idx[0], idx[1]};
                ii[a] += step;
                acc += u.values[grid.flatten(ii[0], ii[1])];
            }
        }
        v.values[k] = acc / (2.0 * grid.dim());
    }
    return v;
}

GridFunction random_bump(const Grid& grid, Rng& rng) {
    const auto& nodes = grid.interior_nodes();
    const std::uint32_t center = nodes[static_cast<std::size_t>(rng.uniform() * nodes.size()) % nodes.size()];
    const double cx = grid.coord(center, 0);
    const double cy = grid.dim() == 2 ? grid.coord(center, 1) : 0.0;
    const double width = rng.uniform(0.05, 0.3) * grid.domain_diameter();
    GridFunction u = GridFunction::zeros(grid);
    for (std::uint32_t k : nodes) {
        const double dx = grid.coord(k, 0) - cx;
        const double dy = grid.dim() == 2 ? grid.coord(k, 1) - cy : 0.0;
        u.values[k] = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
    }
    return u;
}

MarginReport verify_sobolev(const ExtremalResult& result, double delta, const GridFunction& f,
                            const EnergyModel& model, int sample_count, double slack, Rng rng) {
    if (sample_count < 1) throw std::invalid_argument("verify_sobolev: sample_count must be >= 1");
    const double p = model.params().kp.p;
    const double mu = result.mu;
    MarginReport rep;
    rep.samples = sample_count;
    rep.slack = slack;
    rep.min_margin = std::numeric_limits<double>::infinity();
    rep.min_margin_scaled = std::numeric_limits<double>::infinity();

    auto margin_of = [&](const GridFunction& v, double C) {
        const double I = constraint_integral(v, delta, f);
        return model.mixed_norm_p(v) - C * std::pow(I, p / (1.0 - delta));
    };

    rep.extremal_margin = margin_of(result.extremal, mu);
    rep.min_margin = rep.extremal_margin;
    rep.min_margin_scaled = margin_of(result.extremal, slack * mu);
    if (rep.min_margin_scaled < 0.0) rep.negative_scaled++;

    for (int i = 0; i < sample_count; ++i) {
        Rng sub = rng.split("sobolev-sample", static_cast<std::uint64_t>(i));
        const GridFunction v = (i % 2 == 0) ? random_smoothed_field(model.grid(), sub)
                                            : random_bump(model.grid(), sub);
        rep.min_margin = std::min(rep.min_margin, margin_of(v, mu));
        const double ms = margin_of(v, slack * mu);
        rep.min_margin_scaled = std::min(rep.min_margin_scaled, ms);
        if (ms < 0.0) rep.negative_scaled++;
    }
    return rep;
}

namespace {

// descend the quotient with spectral steps, renormalizing onto the unit
// constraint set; the quotient is scale invariant so renormalization never
// changes its value
SimplicityRecord descend_quotient(GridFunction w, int start_id, double delta, const GridFunction& f,
                                  const EnergyModel& model, const GridFunction& V) {
    SimplicityRecord rec;
    rec.start_id = start_id;
    const Grid& grid = model.grid();
    const double p = model.params().kp.p;
    const double hN = grid.cell_measure();
    const auto& nodes = grid.interior_nodes();

    std::vector<double> x, gphi(model.dof()), gq(model.dof()), gq_new(model.dof()), step(model.dof());
    model.pack(w, x);

    auto normalize = [&](std::vector<double>& y) {
        double I = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            I += std::pow(std::abs(y[i]), 1.0 - delta) * f.values[nodes[i]];
        I *= hN;
        if (!(I > 0.0)) return false;
        const double tau = std::pow(I, -1.0 / (1.0 - delta));
        for (double& v : y) v *= tau;
        return true;
    };
    auto q_value = [&](const std::vector<double>& y) {
        double I = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            I += std::pow(std::abs(y[i]), 1.0 - delta) * f.values[nodes[i]];
        I *= hN;
        if (!(I > 0.0)) return std::numeric_limits<double>::infinity();
        return model.phi(y) * std::pow(I, -p / (1.0 - delta));
    };
    // gradient of the quotient at a point on the unit constraint set
    auto q_grad = [&](const std::vector<double>& y, std::vector<double>& out) {
        const double q = model.phi_over_p(y, gphi, true) * p;
        double scale = 0.0;
        for (double v : y) scale = std::max(scale, std::abs(v));
        const double eps = 1e-9 * std::max(scale, 1e-30);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double sgn = y[i] > 0.0 ? 1.0 : (y[i] < 0.0 ? -1.0 : 0.0);
            const double gI = hN * f.values[nodes[i]] * (1.0 - delta) * sgn * std::pow(std::abs(y[i]) + eps, -delta);
            out[i] = p * gphi[i] - q * (p / (1.0 - delta)) * gI;
        }
        return q;
    };

    if (!normalize(x)) return rec;  // start has no mass against f; recorded as failed
    double q = q_grad(x, gq);
    double alpha = 0.0;
    {
        double gmax = 0.0;
        for (double v : gq) gmax = std::max(gmax, std::abs(v));
        alpha = 0.01 / std::max(gmax, 1e-300);
    }

    int stall = 0;
    const int max_iters = 5000;
    for (int it = 0; it < max_iters; ++it) {
        double gmax = 0.0, g2 = 0.0;
        for (double v : gq) {
            gmax = std::max(gmax, std::abs(v));
            g2 += v * v;
        }
        double scale = 0.0;
        for (double v : x) scale = std::max(scale, std::abs(v));
        if (gmax <= 1e-9 * p * q / std::max(scale, 1e-30)) {
            rec.converged = true;
            break;
        }
        double a = std::min(std::max(alpha, 1e-18), 1e18);
        bool accepted = false;
        std::vector<double> xt;
        double qt = q;
        for (int bt = 0; bt < 70; ++bt) {
            xt = x;
            for (std::size_t i = 0; i < xt.size(); ++i) xt[i] -= a * gq[i];
            qt = q_value(xt);
            if (qt <= q - 1e-4 * a * g2) {
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        if (!accepted) break;
        normalize(xt);
        for (std::size_t i = 0; i < x.size(); ++i) step[i] = xt[i] - x[i];
        x.swap(xt);
        const double q_new = q_grad(x, gq_new);
        double sy = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sy += step[i] * (gq_new[i] - gq[i]);
            ss += step[i] * step[i];
        }
        alpha = sy > 0.0 ? ss / sy : a * 4.0;
        if (q - q_new <= 1e-14 * std::abs(q)) ++stall;
        else stall = 0;
        q = q_new;
        gq.swap(gq_new);
        if (stall >= 12) {
            rec.converged = true;  // quotient is at its floor
            break;
        }
    }

    rec.quotient = q;
    const GridFunction wf = model.unpack(x);
    double dplus = 0.0, dminus = 0.0, vsup = 0.0;
    for (std::size_t k = 0; k < wf.values.size(); ++k) {
        dplus = std::max(dplus, std::abs(wf.values[k] - V.values[k]));
        dminus = std::max(dminus, std::abs(wf.values[k] + V.values[k]));
        vsup = std::max(vsup, std::abs(V.values[k]));
    }
    rec.distance = std::min(dplus, dminus) / std::max(vsup, 1e-300);
    return rec;
}

}  // namespace

std::vector<SimplicityRecord> verify_simplicity(const ExtremalResult& result, double delta,
                                                const GridFunction& f, const EnergyModel& model, int starts,
                                                Rng rng, const GridFunction* extra_start) {
    if (starts < 2) throw std::invalid_argument("verify_simplicity: needs at least two starts");
    std::vector<SimplicityRecord> records;
    for (int i = 0; i < starts; ++i) {
        Rng sub = rng.split("simplicity-start", static_cast<std::uint64_t>(i));
        GridFunction w = random_smoothed_field(model.grid(), sub);
        for (std::uint32_t k : model.grid().interior_nodes()) w.values[k] = std::abs(w.values[k]) + 0.1;
        records.push_back(descend_quotient(std::move(w), i, delta, f, model, result.extremal));
    }
    if (extra_start)
        records.push_back(
            descend_quotient(*extra_start, starts, delta, f, model, result.extremal));
    return records;
}

double check_euler_lagrange_extremal(const GridFunction& V, double mu, double delta, const GridFunction& f,
                                     const EnergyModel& model) {
    for (std::uint32_t k : model.grid().interior_nodes())
        if (!(V.values[k] > 0.0))
            throw std::invalid_argument("euler-lagrange check: extremal must be positive at interior nodes");
    GridFunction muf = f;
    for (double& v : muf.values) v *= mu;
    return model.weak_residual(V, delta, muf);
}

}  // namespace pmix
