#ifndef COLLAPSAR_CRITICAL_HPP
#define COLLAPSAR_CRITICAL_HPP

#include <vector>

#include "collapsar/interaction.hpp"

namespace collapsar {

struct RatioEstimate {
    double ratio = 0.0;        // best value of D / (2K) found
    double lambda_upper = 0.0; // 1 / ratio: upper estimate of the critical coupling
    int iterations = 0;        // accepted ascent steps
    bool converged = false;
    std::vector<double> history; // ratio after every accepted step
    Field profile;               // the maximizing profile (unit L2 norm)
};

// The scale-invariant quotient
//   R(f) = (1/2) Iint |f(x)|^2 |f(y)|^2 / |x-y| dx dy  /  || |grad|^(1/2) f ||^2
// whose supremum is the reciprocal of the critical coupling. Errors on fields
// with (near-)zero seminorm.
double weinstein_ratio(const Field& f);
double weinstein_ratio(const Field& f, const InteractionKernel& bare_kernel);

// Projected gradient ascent on the unit L2 sphere with backtracking line
// search (initial step `step`, halved on failure, at most 40 halvings per
// iteration). Converged when the relative gain over the last 10 accepted
// steps drops below tol. The ratio sequence is non-decreasing by
// construction. The iterates are kept at zero box mean: the lattice constant
// mode has zero seminorm and would make the discrete quotient unbounded,
// which has no whole-space counterpart.
RatioEstimate maximize_ratio(const Field& start, int max_iters = 400,
                             double step = 0.5, double tol = 1e-8);

} // namespace collapsar

#endif
