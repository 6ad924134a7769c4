#include "subfront/grid.hpp"

#include <algorithm>
#include <cmath>

#include "subfront/errors.hpp"

namespace subfront {

std::vector<double> Grid1D::nodes() const {
    std::vector<double> x(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) x[i] = node(i);
    return x;
}

void Grid1D::validate() const {
    if (!(x_max > x_min)) throw DomainError("grid: x_max must exceed x_min");
    if (n_cells < kMinCells) throw DomainError("grid: at least 16 cells required");
    if (!(dx() > 0.0)) throw DomainError("grid: non-positive spacing");
}

GridField::GridField(Grid1D g, std::vector<double> v, double t)
    : grid(g), values(std::move(v)), time(t) {
    grid.validate();
    if (values.size() != grid.n_cells) throw DomainError("grid field: value count differs from n_cells");
    if (!(t >= 0.0)) throw DomainError("grid field: negative time");
}

double GridField::max() const { return *std::max_element(values.begin(), values.end()); }

double GridField::min() const { return *std::min_element(values.begin(), values.end()); }

bool GridField::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace subfront
