#ifndef COLLAPSAR_INTERACTION_HPP
#define COLLAPSAR_INTERACTION_HPP

#include "collapsar/field.hpp"

namespace collapsar {

// Free-space convolution kernel tabulated on a 2x zero-padded grid
// (Hockney's trick): circular convolution on the padded cube reproduces the
// aperiodic sum exactly for densities supported in the original box, so no
// periodic images contaminate the potential.
//
// Profiles: newton is 1/(|x| + alpha) with alpha = 0 the bare Coulomb case;
// inverse_square is 1/|x|^2 (used for the Hardy ratio and for bounding the
// regularization error). The origin cell always receives the analytic cell
// average of the profile over one cell, evaluated by a fixed 32^3 midpoint
// quadrature; point-sampling the origin would inject a spurious dx^3/alpha
// term that diverges as alpha -> 0 instead of vanishing linearly.
class InteractionKernel {
public:
    enum class Profile { newton, inverse_square };

    InteractionKernel(const Grid& grid, double alpha,
                      Profile profile = Profile::newton);

    const Grid& grid() const { return grid_; }
    double alpha() const { return alpha_; }
    Profile profile() const { return profile_; }

    // Tabulated real-space value at a signed cell offset (|d| <= n per axis).
    // Offset (0,0,0) returns the origin cell average.
    double value_at_offset(int di, int dj, int dl) const;

    // Half-spectrum of the padded kernel (r2c layout), premultiplied by
    // nothing; convolve() applies the quadrature weight.
    const std::vector<cplx>& spectrum() const { return spectrum_; }

private:
    Grid grid_;
    double alpha_ = 0.0;
    Profile profile_ = Profile::newton;
    std::vector<cplx> spectrum_;
};

InteractionKernel build_kernel(const Grid& grid, double alpha);

// Potential (K * rho)(x) = sum_y K(x-y) rho(y) dx^3 for a real, non-negative
// density given in position representation. Noise down to -1e-12 (relative to
// the density scale) is clamped; anything more negative is an error. The
// result is real (zero imaginary part).
Field convolve(const InteractionKernel& kernel, const Field& density);

// Cross-validation path: periodic Poisson solve via the analytic symbol
// 4*pi/|k|^2 with the k = 0 mode zeroed, so the potential has zero box mean.
// Tabulated-kernel convolve() is the authoritative path; this one carries
// periodic images and is only compared against it on smooth densities.
Field convolve_periodic_symbol(const Field& density);

// sup_x (|.|^-1 * |f|^2)(x) / || |grad|^(1/2) f ||^2. Bounded by pi/2.
double kato_ratio(const Field& f);
double kato_ratio(const Field& f, const InteractionKernel& bare_kernel);

// sup_x (|.|^-2 * |f|^2)(x) / || grad f ||^2. Bounded by 4.
double hardy_ratio(const Field& f);
double hardy_ratio(const Field& f, const InteractionKernel& inv_square_kernel);

} // namespace collapsar

#endif
