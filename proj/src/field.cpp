#include "collapsar/field.hpp"

#include <cmath>

#include "collapsar/errors.hpp"
#include "collapsar/spectral.hpp"

namespace collapsar {

Field::Field(const Grid& grid, Rep rep)
    : grid_(grid), rep_(rep), values_(grid.size()) {}

Field::Field(const Grid& grid, Rep rep, std::vector<cplx> values)
    : grid_(grid), rep_(rep), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw ContractViolation("field: value count does not match grid");
}

Field make_gaussian(const Grid& grid, double sigma,
                    std::array<double, 3> center) {
    if (!(sigma > 0.0))
        throw ContractViolation("gaussian: sigma must be positive");
    Field f(grid, Rep::position);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int i = 0; i < grid.n; ++i) {
        double x = grid.position(i) - center[0];
        for (int j = 0; j < grid.n; ++j) {
            double y = grid.position(j) - center[1];
            for (int l = 0; l < grid.n; ++l) {
                double z = grid.position(l) - center[2];
                double r2 = x * x + y * y + z * z;
                f.at(i, j, l) = std::exp(-r2 * inv2s2);
            }
        }
    }
    return normalized(f);
}

Field make_plane_wave(const Grid& grid, std::array<int, 3> k_index) {
    for (int c = 0; c < 3; ++c)
        if (k_index[c] < -grid.n / 2 || k_index[c] >= grid.n / 2)
            throw ContractViolation("plane wave: k index off the lattice");
    Field f(grid, Rep::position);
    const double amp = 1.0 / std::sqrt(grid.box_length * grid.box_length *
                                       grid.box_length);
    const double k0 = 2.0 * std::numbers::pi / grid.box_length;
    for (int i = 0; i < grid.n; ++i) {
        double px = k0 * k_index[0] * grid.position(i);
        for (int j = 0; j < grid.n; ++j) {
            double py = k0 * k_index[1] * grid.position(j);
            for (int l = 0; l < grid.n; ++l) {
                double pz = k0 * k_index[2] * grid.position(l);
                f.at(i, j, l) = amp * std::polar(1.0, px + py + pz);
            }
        }
    }
    return f;
}

Field normalized(const Field& f) {
    double nrm = l2_norm(f);
    if (!(nrm > 0.0))
        throw ContractViolation("normalized: zero field");
    return cplx(1.0 / nrm, 0.0) * f;
}

Field operator+(const Field& a, const Field& b) {
    if (a.grid() != b.grid() || a.rep() != b.rep())
        throw ContractViolation("field +: mismatched grid or representation");
    Field out = a;
    for (std::size_t i = 0; i < out.values().size(); ++i) out[i] += b[i];
    return out;
}

Field operator-(const Field& a, const Field& b) {
    if (a.grid() != b.grid() || a.rep() != b.rep())
        throw ContractViolation("field -: mismatched grid or representation");
    Field out = a;
    for (std::size_t i = 0; i < out.values().size(); ++i) out[i] -= b[i];
    return out;
}

Field operator*(cplx s, const Field& a) {
    Field out = a;
    for (auto& v : out.values()) v *= s;
    return out;
}

} // namespace collapsar
