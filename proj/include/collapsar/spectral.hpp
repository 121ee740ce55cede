#ifndef COLLAPSAR_SPECTRAL_HPP
#define COLLAPSAR_SPECTRAL_HPP

#include <functional>

#include "collapsar/field.hpp"

namespace collapsar {

// Frequency multiplier m(kx, ky, kz). Real multipliers convert implicitly.
using Multiplier = std::function<cplx(double, double, double)>;

// Unitary DFT pair. to_frequency expects a position field, to_position a
// frequency field (anything else is a contract violation). Plancherel holds
// exactly: l2_norm is preserved and a constant c maps to the single k = 0
// coefficient c * L^(3/2).
Field to_frequency(const Field& f);
Field to_position(const Field& f);

// Applies m(k) on the frequency side; a position field is round-tripped
// internally and comes back in position representation. Non-finite multiplier
// values raise a numeric error.
Field apply_multiplier(const Field& f, const Multiplier& m);

// Discrete L2 norm in either representation.
double l2_norm(const Field& f);

// Inner product <a, b>, antilinear in the first argument, with the same cell
// weighting as l2_norm. Both fields must share grid and representation.
cplx inner_product(const Field& a, const Field& b);

// H^s norm: sqrt(sum_k (1+|k|^2)^s |f_hat(k)|^2), s >= 0.
double sobolev_norm(const Field& f, double s);

// Homogeneous seminorm sqrt(sum_k |k|^(2s) |f_hat(k)|^2).
double homogeneous_seminorm(const Field& f, double s);

// e^{-i t sqrt(1 - Laplacian)}: the free semirelativistic flow. Exactly
// unitary on the grid and diagonal in k, so it commutes with multipliers and
// preserves every H^s norm.
Field free_propagator(const Field& f, double t);

} // namespace collapsar

#endif
