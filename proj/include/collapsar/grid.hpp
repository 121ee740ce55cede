#ifndef COLLAPSAR_GRID_HPP
#define COLLAPSAR_GRID_HPP

#include <cstddef>
#include <numbers>

namespace collapsar {

// Uniform periodic grid on the cube [-L/2, L/2)^3 with n points per axis.
// Position nodes are x_i = dx*(i - n/2); the frequency lattice uses signed
// index representatives, so wavenumbers run over (2*pi/L)*{-n/2, ..., n/2-1}
// per axis and the Nyquist row sits at the negative representative -n/2.
struct Grid {
    int n = 0;
    double box_length = 0.0;

    Grid() = default;
    Grid(int n_per_axis, double box);

    double dx() const { return box_length / n; }
    double cell_volume() const { return dx() * dx() * dx(); }
    std::size_t size() const {
        return static_cast<std::size_t>(n) * n * n;
    }

    std::size_t index(int i, int j, int l) const {
        return (static_cast<std::size_t>(i) * n + j) * n + l;
    }

    double position(int i) const { return dx() * (i - n / 2); }

    int signed_index(int m) const { return m < n / 2 ? m : m - n; }

    double wavenumber(int m) const {
        return 2.0 * std::numbers::pi / box_length * signed_index(m);
    }

    // largest per-axis |k| on the lattice (Nyquist magnitude)
    double nyquist() const { return std::numbers::pi * n / box_length; }

    bool operator==(const Grid&) const = default;
};

} // namespace collapsar

#endif
