#include "collapsar/grid.hpp"

#include "collapsar/errors.hpp"

namespace collapsar {

Grid::Grid(int n_per_axis, double box) : n(n_per_axis), box_length(box) {
    if (n < 2 || n % 2 != 0)
        throw ContractViolation("grid: n must be even and >= 2");
    if (!(box_length > 0.0))
        throw ContractViolation("grid: box length must be positive");
}

} // namespace collapsar
