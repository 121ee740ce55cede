#ifndef COLLAPSAR_FIELD_HPP
#define COLLAPSAR_FIELD_HPP

#include <array>
#include <complex>
#include <vector>

#include "collapsar/grid.hpp"

namespace collapsar {

using cplx = std::complex<double>;

enum class Rep { position, frequency };

// A complex scalar field together with its grid and the representation its
// values currently live in. Operations treat fields as immutable values and
// return new ones; the discrete L2 norm is carried by cell volume in position
// space and by plain coefficient sums in frequency space (the transform is
// unitary between the two).
class Field {
public:
    Field() = default;
    Field(const Grid& grid, Rep rep);
    Field(const Grid& grid, Rep rep, std::vector<cplx> values);

    const Grid& grid() const { return grid_; }
    Rep rep() const { return rep_; }

    const std::vector<cplx>& values() const { return values_; }
    std::vector<cplx>& values() { return values_; }

    const cplx& operator[](std::size_t i) const { return values_[i]; }
    cplx& operator[](std::size_t i) { return values_[i]; }

    const cplx& at(int i, int j, int l) const {
        return values_[grid_.index(i, j, l)];
    }
    cplx& at(int i, int j, int l) { return values_[grid_.index(i, j, l)]; }

private:
    Grid grid_;
    Rep rep_ = Rep::position;
    std::vector<cplx> values_;
};

// Isotropic Gaussian exp(-|x-c|^2 / (2 sigma^2)), amplitude-normalized so the
// discrete L2 mass is exactly 1.
Field make_gaussian(const Grid& grid, double sigma,
                    std::array<double, 3> center = {0.0, 0.0, 0.0});

// Plane wave exp(i k.x) of unit L2 norm; k given by signed lattice indices.
Field make_plane_wave(const Grid& grid, std::array<int, 3> k_index);

// f scaled so its L2 norm is exactly 1 (error on the zero field).
Field normalized(const Field& f);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(cplx s, const Field& a);

} // namespace collapsar

#endif
