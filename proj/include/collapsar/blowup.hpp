#ifndef COLLAPSAR_BLOWUP_HPP
#define COLLAPSAR_BLOWUP_HPP

#include <vector>

#include "collapsar/interaction.hpp"

namespace collapsar {

// Eligibility test for the finite-time collapse criterion: spherically
// symmetric data with negative energy and finite variance collapses, so a run
// flagged eligible is expected to trip the blow-up monitors.
struct FLCriterion {
    bool eligible = false;
    bool radial = false;
    bool energy_negative = false;
    bool variance_finite = false;
    double radial_deviation = 0.0; // relative L2 distance to spherical average
    double energy_total = 0.0;
    double variance = 0.0;         // integral |x|^2 |f|^2
};

FLCriterion fl_check(const Field& f, double lambda,
                     const InteractionKernel& kernel,
                     double radial_tol = 1e-6);

// Relative L2 distance between f and its spherical average about the box
// center (shells are exact integer squared radii in cell units).
double radial_deviation(const Field& f);

// Fraction of spectral L2 mass on modes whose |k|_inf lies in the outer third
// of the lattice. A growing tail means the collapse cascade has reached the
// resolution limit.
double tail_fraction(const Field& f);

struct BlowupVerdict {
    enum class Reason { none, h_half_threshold, tail_threshold };

    bool detected = false;
    Reason reason = Reason::none;
    double t_detect = 0.0;
    double h_half_at_detect = 0.0;
    double tail_at_detect = 0.0;
};

// Scans monitor rows for the first time the H^(1/2) norm exceeds
// h_half_factor times its initial value or the tail fraction exceeds
// tail_max. The H^(1/2) trigger marks genuine norm growth; the tail trigger
// marks the run unresolved (collapse reached the grid scale). When both fire
// on the same row the H^(1/2) reason wins.
BlowupVerdict check(const std::vector<double>& times,
                    const std::vector<double>& h_half,
                    const std::vector<double>& tail,
                    double h_half_factor = 10.0,
                    double tail_max = 0.01);

} // namespace collapsar

#endif
