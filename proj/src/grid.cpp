#include "pmix/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace pmix {

std::string shape_name(Shape s) {
    switch (s) {
        case Shape::Interval: return "interval";
        case Shape::Rectangle: return "rectangle";
        case Shape::Disk: return "disk";
        case Shape::Annulus: return "annulus";
    }
    return "?";
}

Shape shape_from_name(const std::string& name) {
    if (name == "interval") return Shape::Interval;
    if (name == "rectangle") return Shape::Rectangle;
    if (name == "disk") return Shape::Disk;
    if (name == "annulus") return Shape::Annulus;
    throw std::invalid_argument("unknown shape: " + name);
}

namespace {

double shape_diameter(const DomainSpec& s) {
    switch (s.shape) {
        case Shape::Interval: return s.hi[0] - s.lo[0];
        case Shape::Rectangle: return std::hypot(s.hi[0] - s.lo[0], s.hi[1] - s.lo[1]);
        case Shape::Disk: return 2.0 * s.outer_radius;
        case Shape::Annulus: return 2.0 * s.outer_radius;
    }
    return 0.0;
}

bool point_interior(const DomainSpec& s, double x, double y) {
    switch (s.shape) {
        case Shape::Interval:
            return x > s.lo[0] && x < s.hi[0];
        case Shape::Rectangle:
            return x > s.lo[0] && x < s.hi[0] && y > s.lo[1] && y < s.hi[1];
        case Shape::Disk: {
            const double cx = 0.5 * (s.lo[0] + s.hi[0]);
            const double cy = 0.5 * (s.lo[1] + s.hi[1]);
            const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            return r2 < s.outer_radius * s.outer_radius;
        }
        case Shape::Annulus: {
            const double cx = 0.5 * (s.lo[0] + s.hi[0]);
            const double cy = 0.5 * (s.lo[1] + s.hi[1]);
            const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            return r2 < s.outer_radius * s.outer_radius && r2 > s.inner_radius * s.inner_radius;
        }
    }
    return false;
}

}  // namespace

Grid Grid::build(const DomainSpec& spec) {
    if (spec.dim != 1 && spec.dim != 2) throw std::invalid_argument("grid: dim must be 1 or 2");
    if (spec.nodes_per_axis < 3) throw std::invalid_argument("grid: nodes_per_axis must be >= 3");
    if ((spec.shape == Shape::Interval) != (spec.dim == 1))
        throw std::invalid_argument("grid: interval is 1D, other shapes are 2D");

    Grid g;
    g.spec_ = spec;

    const double len0 = spec.hi[0] - spec.lo[0];
    if (!(len0 > 0.0)) throw std::invalid_argument("grid: degenerate bounds on axis 0");
    g.h_ = len0 / (spec.nodes_per_axis - 1);
    g.nb_[0] = spec.nodes_per_axis;
    if (spec.dim == 2) {
        const double len1 = spec.hi[1] - spec.lo[1];
        if (!(len1 > 0.0)) throw std::invalid_argument("grid: degenerate bounds on axis 1");
        const double cells = len1 / g.h_;
        const long rounded = std::lround(cells);
        if (rounded < 2 || std::abs(cells - static_cast<double>(rounded)) > 1e-9 * std::max(1.0, cells))
            throw std::invalid_argument("grid: axis 1 length is not a multiple of the axis 0 spacing");
        g.nb_[1] = static_cast<int>(rounded) + 1;
    }

    if (spec.shape == Shape::Disk || spec.shape == Shape::Annulus) {
        if (!(spec.outer_radius > 0.0)) throw std::invalid_argument("grid: disk/annulus needs outer_radius > 0");
        const double half0 = 0.5 * (spec.hi[0] - spec.lo[0]);
        const double half1 = 0.5 * (spec.hi[1] - spec.lo[1]);
        if (spec.outer_radius > std::min(half0, half1) * (1.0 + 1e-12))
            throw std::invalid_argument("grid: outer_radius inconsistent with bounds");
        if (spec.shape == Shape::Annulus &&
            !(spec.inner_radius > 0.0 && spec.inner_radius < spec.outer_radius))
            throw std::invalid_argument("grid: annulus needs 0 < inner_radius < outer_radius");
    }

    g.diam_ = shape_diameter(spec);
    if (spec.collar_radius < g.diam_ * (1.0 - 1e-12))
        throw std::invalid_argument("grid: collar_radius must be >= the domain diameter");
    g.nc_ = static_cast<int>(std::ceil(spec.collar_radius / g.h_ - 1e-12));

    g.nl_[0] = g.nb_[0] + 2 * g.nc_;
    g.nl_[1] = spec.dim == 2 ? g.nb_[1] + 2 * g.nc_ : 1;
    g.total_ = static_cast<std::size_t>(g.nl_[0]) * static_cast<std::size_t>(g.nl_[1]);
    g.hN_ = spec.dim == 2 ? g.h_ * g.h_ : g.h_;

    g.interior_mask_.assign(g.total_, 0);
    for (std::size_t k = 0; k < g.total_; ++k) {
        if (!g.in_box(k)) continue;
        const double x = g.coord(k, 0);
        const double y = spec.dim == 2 ? g.coord(k, 1) : 0.0;
        if (point_interior(spec, x, y)) {
            g.interior_mask_[k] = 1;
            g.interior_nodes_.push_back(static_cast<std::uint32_t>(k));
        }
    }
    if (g.interior_nodes_.empty()) throw std::invalid_argument("grid: no interior nodes at this resolution");

    // multi-source BFS over lattice edges, seeded at non-interior nodes
    g.cell_dist_.assign(g.total_, -1);
    std::deque<std::uint32_t> queue;
    for (std::size_t k = 0; k < g.total_; ++k) {
        if (!g.interior_mask_[k]) {
            g.cell_dist_[k] = 0;
            queue.push_back(static_cast<std::uint32_t>(k));
        }
    }
    while (!queue.empty()) {
        const std::uint32_t k = queue.front();
        queue.pop_front();
        const auto idx = g.lattice_index(k);
        const int d = g.cell_dist_[k];
        for (int a = 0; a < spec.dim; ++a) {
            for (int step : {-1, 1}) {
                int ii[2] = {idx[0], idx[1]};
                ii[a] += step;
                if (ii[a] < 0 || ii[a] >= g.nl_[a]) continue;
                const std::size_t kk = g.flatten(ii[0], ii[1]);
                if (g.cell_dist_[kk] < 0) {
                    g.cell_dist_[kk] = d + 1;
                    queue.push_back(static_cast<std::uint32_t>(kk));
                }
            }
        }
    }

    for (std::uint32_t k : g.interior_nodes_) {
        if (g.edge_distance(k) < spec.collar_radius * (1.0 - 1e-12))
            throw std::logic_error("grid: collar does not fully surround the domain");
    }
    return g;
}

Grid build_grid(const DomainSpec& spec) { return Grid::build(spec); }

std::vector<std::uint32_t> Grid::margin_nodes(int margin_cells) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t k : interior_nodes_)
        if (cell_dist_[k] >= margin_cells) out.push_back(k);
    return out;
}

double Grid::edge_distance(std::size_t node) const {
    double best = std::numeric_limits<double>::infinity();
    const auto idx = lattice_index(node);
    for (int a = 0; a < spec_.dim; ++a) {
        best = std::min(best, h_ * idx[a]);
        best = std::min(best, h_ * (nl_[a] - 1 - idx[a]));
    }
    return best;
}

std::size_t Grid::mirror_node(std::size_t node, int axis) const {
    auto idx = lattice_index(node);
    idx[axis] = nl_[axis] - 1 - idx[axis];
    return flatten(idx[0], idx[1]);
}

bool Grid::mask_symmetric(int axis) const {
    if (axis < 0 || axis >= spec_.dim) throw std::invalid_argument("grid: axis out of range");
    for (std::size_t k = 0; k < total_; ++k)
        if (interior_mask_[k] != interior_mask_[mirror_node(k, axis)]) return false;
    return true;
}

GridFunction::GridFunction(const Grid& g, std::vector<double> vals) : grid(&g), values(std::move(vals)) {
    validate();
}

GridFunction GridFunction::zeros(const Grid& g) {
    GridFunction u;
    u.grid = &g;
    u.values.assign(g.node_count(), 0.0);
    return u;
}

GridFunction GridFunction::constant_interior(const Grid& g, double c) {
    GridFunction u = zeros(g);
    for (std::uint32_t k : g.interior_nodes()) u.values[k] = c;
    return u;
}

GridFunction GridFunction::from_function(const Grid& g,
                                         const std::function<double(std::span<const double>)>& fn) {
    GridFunction u = zeros(g);
    for (std::uint32_t k : g.interior_nodes()) {
        const double xy[2] = {g.coord(k, 0), g.dim() == 2 ? g.coord(k, 1) : 0.0};
        u.values[k] = fn(std::span<const double>(xy, static_cast<std::size_t>(g.dim())));
    }
    u.validate();
    return u;
}

void GridFunction::validate() const {
    if (!grid) throw std::invalid_argument("grid function: missing grid");
    if (values.size() != grid->node_count()) throw std::invalid_argument("grid function: size mismatch");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) throw std::invalid_argument("grid function: non-finite value");
        if (!grid->is_interior(k) && values[k] != 0.0)
            throw std::invalid_argument("grid function: nonzero value outside the domain");
    }
}

GridFunction zero_extend(std::span<const double> interior_values, const Grid& g) {
    if (interior_values.size() != g.interior_count())
        throw std::invalid_argument("zero_extend: expected one value per interior node");
    GridFunction u = GridFunction::zeros(g);
    const auto& nodes = g.interior_nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!std::isfinite(interior_values[i])) throw std::invalid_argument("zero_extend: non-finite value");
        u.values[nodes[i]] = interior_values[i];
    }
    return u;
}

GridFunction reflect(const GridFunction& u, int axis) {
    const Grid& g = *u.grid;
    if (!g.mask_symmetric(axis)) throw std::invalid_argument("reflect: grid is not symmetric about this axis");
    GridFunction v = GridFunction::zeros(g);
    for (std::size_t k = 0; k < g.node_count(); ++k) v.values[k] = u.values[g.mirror_node(k, axis)];
    return v;
}

double sup_norm(const GridFunction& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
    return m;
}

}  // namespace pmix
