#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pmix {

enum class Shape { Interval, Rectangle, Disk, Annulus };

std::string shape_name(Shape s);
Shape shape_from_name(const std::string& name);

// How to discretize the domain. The lattice covers the bounding box plus an
// exterior collar of explicitly represented nodes where functions vanish.
struct DomainSpec {
    Shape shape = Shape::Interval;
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    int nodes_per_axis = 101;    // box node count along axis 0; other axes must be commensurate
    double collar_radius = 0.0;  // exterior extent, >= diam(domain)
    double inner_radius = 0.0;   // annulus only
    double outer_radius = 0.0;   // disk / annulus
};

// Uniform node lattice over the bounding box of the domain plus a collar of
// exterior nodes. Immutable after construction; safe for concurrent reads.
class Grid {
public:
    static Grid build(const DomainSpec& spec);

    int dim() const { return spec_.dim; }
    double spacing() const { return h_; }
    const DomainSpec& spec() const { return spec_; }
    double domain_diameter() const { return diam_; }
    double cell_measure() const { return hN_; }  // h^dim

    int lattice_nodes(int axis) const { return nl_[axis]; }
    int box_nodes(int axis) const { return nb_[axis]; }
    int collar_cells() const { return nc_; }
    std::size_t node_count() const { return total_; }

    std::size_t flatten(int i0, int i1 = 0) const {
        return static_cast<std::size_t>(i0) + static_cast<std::size_t>(nl_[0]) * static_cast<std::size_t>(i1);
    }
    std::array<int, 2> lattice_index(std::size_t node) const {
        const int i0 = static_cast<int>(node % static_cast<std::size_t>(nl_[0]));
        const int i1 = static_cast<int>(node / static_cast<std::size_t>(nl_[0]));
        return {i0, i1};
    }
    double coord(std::size_t node, int axis) const {
        const auto idx = lattice_index(node);
        return spec_.lo[axis] + h_ * (idx[axis] - nc_);
    }

    bool is_interior(std::size_t node) const { return interior_mask_[node] != 0; }
    bool in_box(std::size_t node) const {
        const auto idx = lattice_index(node);
        for (int a = 0; a < spec_.dim; ++a)
            if (idx[a] < nc_ || idx[a] >= nc_ + nb_[a]) return false;
        return true;
    }
    const std::vector<std::uint32_t>& interior_nodes() const { return interior_nodes_; }
    std::size_t interior_count() const { return interior_nodes_.size(); }

    // lattice hops to the nearest non-interior node; 0 on non-interior nodes
    int cells_to_boundary(std::size_t node) const { return cell_dist_[node]; }
    std::vector<std::uint32_t> margin_nodes(int margin_cells) const;

    // distance from a node to the nearest outer face of the lattice
    double edge_distance(std::size_t node) const;

    std::size_t mirror_node(std::size_t node, int axis) const;
    bool mask_symmetric(int axis) const;

private:
    Grid() = default;

    DomainSpec spec_;
    double h_ = 0.0;
    double hN_ = 0.0;
    double diam_ = 0.0;
    int nb_[2] = {1, 1};
    int nl_[2] = {1, 1};
    int nc_ = 0;
    std::size_t total_ = 0;
    std::vector<std::uint8_t> interior_mask_;
    std::vector<std::uint32_t> interior_nodes_;
    std::vector<std::int32_t> cell_dist_;
};

Grid build_grid(const DomainSpec& spec);

// Nodal values with implicit zero extension outside the domain: exactly zero
// at every non-interior node, finite everywhere.
struct GridFunction {
    const Grid* grid = nullptr;           // non-owning; the grid outlives its functions
    std::vector<double> values;           // one per lattice node

    GridFunction() = default;
    GridFunction(const Grid& g, std::vector<double> vals);

    static GridFunction zeros(const Grid& g);
    static GridFunction constant_interior(const Grid& g, double c);
    static GridFunction from_function(const Grid& g, const std::function<double(std::span<const double>)>& fn);

    double operator[](std::size_t node) const { return values[node]; }
    double& at(std::size_t node) { return values[node]; }
    std::size_t size() const { return values.size(); }

    void validate() const;  // throws on violated invariants
};

GridFunction zero_extend(std::span<const double> interior_values, const Grid& g);
GridFunction reflect(const GridFunction& u, int axis);

double sup_norm(const GridFunction& u);
double sup_distance(const GridFunction& a, const GridFunction& b);

}  // namespace pmix
