#ifndef COLLAPSAR_ENERGY_HPP
#define COLLAPSAR_ENERGY_HPP

#include "collapsar/interaction.hpp"

namespace collapsar {

// total = kinetic - lambda * interaction, with
//   kinetic     = sum_k sqrt(1+|k|^2) |f_hat(k)|^2   (the H^(1/2) norm squared)
//   interaction = (1/2) <|f|^2, K * |f|^2>
struct EnergyBreakdown {
    double kinetic = 0.0;
    double interaction = 0.0;
    double total = 0.0;
};

EnergyBreakdown energy(const Field& f, double lambda,
                       const InteractionKernel& kernel);

// Squared L2 norm (the conserved particle mass of the flow).
double mass(const Field& f);

// The coupling at which this profile's energy crosses zero:
// lambda_star = kinetic / interaction. Errors on the zero field.
double negative_energy_threshold(const Field& f,
                                 const InteractionKernel& kernel);

} // namespace collapsar

#endif
