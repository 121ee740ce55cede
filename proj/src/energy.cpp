#include "collapsar/energy.hpp"

#include <cmath>

#include "collapsar/errors.hpp"
#include "collapsar/spectral.hpp"

namespace collapsar {

namespace {

double interaction_term(const Field& f, const InteractionKernel& kernel) {
    Field rho(f.grid(), Rep::position);
    for (std::size_t i = 0; i < f.values().size(); ++i)
        rho[i] = cplx(std::norm(f[i]), 0.0);
    Field pot = convolve(kernel, rho);
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.values().size(); ++i)
        acc += rho[i].real() * pot[i].real();
    return 0.5 * acc * f.grid().cell_volume();
}

} // namespace

EnergyBreakdown energy(const Field& f, double lambda,
                       const InteractionKernel& kernel) {
    if (f.rep() != Rep::position)
        throw ContractViolation("energy: field must be in position representation");
    if (!std::isfinite(lambda))
        throw ContractViolation("energy: non-finite lambda");
    EnergyBreakdown e;
    double h_half = sobolev_norm(f, 0.5);
    e.kinetic = h_half * h_half;
    e.interaction = interaction_term(f, kernel);
    e.total = e.kinetic - lambda * e.interaction;
    return e;
}

double mass(const Field& f) {
    double nrm = l2_norm(f);
    return nrm * nrm;
}

double negative_energy_threshold(const Field& f,
                                 const InteractionKernel& kernel) {
    EnergyBreakdown e = energy(f, 0.0, kernel);
    if (!(e.kinetic > 0.0) || !(e.interaction > 0.0))
        throw ContractViolation("negative_energy_threshold: zero field");
    return e.kinetic / e.interaction;
}

} // namespace collapsar
