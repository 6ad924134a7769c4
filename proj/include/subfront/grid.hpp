#pragma once

#include <cstddef>
#include <vector>

namespace subfront {

// Uniform 1-D grid with nodes x_i = x_min + i dx, i = 0..n_cells-1. In the periodic
// case node n_cells coincides with node 0.
struct Grid1D {
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t n_cells = 16;
    bool periodic = true;

    static constexpr std::size_t kMinCells = 16;

    double dx() const { return (x_max - x_min) / static_cast<double>(n_cells); }
    double length() const { return x_max - x_min; }
    double node(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
    std::vector<double> nodes() const;
    void validate() const;

    bool operator==(const Grid1D&) const = default;
};

struct GridField {
    Grid1D grid;
    std::vector<double> values;
    double time = 0.0;

    GridField() = default;
    GridField(Grid1D g, std::vector<double> v, double t = 0.0);

    template <class F>
    static GridField sample(const Grid1D& g, F&& f, double t = 0.0) {
        std::vector<double> v(g.n_cells);
        for (std::size_t i = 0; i < g.n_cells; ++i) v[i] = f(g.node(i));
        return GridField(g, std::move(v), t);
    }

    std::size_t size() const { return values.size(); }
    double max() const;
    double min() const;
    bool all_finite() const;
};

}  // namespace subfront
