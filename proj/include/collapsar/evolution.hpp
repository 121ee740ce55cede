#ifndef COLLAPSAR_EVOLUTION_HPP
#define COLLAPSAR_EVOLUTION_HPP

#include <optional>
#include <string>
#include <vector>

#include "collapsar/blowup.hpp"
#include "collapsar/errors.hpp"
#include "collapsar/interaction.hpp"

namespace collapsar {

// Integrator controls for i d/dt phi = sqrt(1-Laplacian) phi - lambda (K*|phi|^2) phi.
struct HartreeParams {
    double lambda = 1.0;
    double alpha = 0.0;          // kernel regularization
    double t_end = 1.0;
    double dt_init = 1e-3;
    double dt_min = 0.0;         // 0 -> 1e-8 * t_end
    double cfl_constant = 0.1;   // dt = min(dt_init, cfl / ||phi||_{H^1/2}^p)
    double adapt_exponent = 2.0; // the p above
    int monitor_stride = 10;     // steps between monitor rows
    int snapshot_stride = 0;     // monitor rows between stored fields; 0 = off
};

enum class Termination { completed, blowup_detected, dt_underflow };

struct Trajectory {
    std::vector<double> times;
    std::vector<double> dts;     // dt in effect at each monitor row
    std::vector<double> mass;
    std::vector<double> total_energy;
    std::vector<double> h_half;
    std::vector<double> h1;
    std::vector<double> h2;
    std::vector<double> tail;

    std::vector<double> snapshot_times;
    std::vector<Field> snapshots;

    std::optional<Field> final_field;
    Termination termination = Termination::completed;
    BlowupVerdict verdict;       // populated when termination is blowup_detected
};

// Raised when the field turns non-finite; carries the last good state.
class EvolveError : public NumericError {
public:
    EvolveError(const std::string& what, Trajectory partial)
        : NumericError(what), partial_(std::move(partial)) {}
    const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

// Exact flow of i d/dt phi = -lambda (K*|phi|^2) phi over one step:
// phi <- exp(+i lambda dt V[phi]) phi with V = K * |phi|^2. |phi| is
// pointwise invariant, so V is frozen and the step is exact and unitary.
Field nonlinear_phase_step(const Field& f, double lambda,
                           const InteractionKernel& kernel, double dt);

// Strang splitting: half kinetic, full potential, half kinetic. Both
// sub-flows are exact, so the step is unitary and second order; the palindrome
// makes it time-reversible (a -dt step undoes a +dt step exactly).
Field strang_step(const Field& f, double lambda,
                  const InteractionKernel& kernel, double dt);

// Steps from t = 0 until t_end, blow-up detection, or dt underflow, recording
// monitor rows (mass, energy, H^1/2, H^1, H^2, spectral tail) every
// monitor_stride steps plus the initial and final states. dt is re-evaluated
// at monitor rows from the adaptive law above.
Trajectory evolve(const Field& f0, const HartreeParams& params,
                  double h_half_factor = 10.0, double tail_max = 0.01);

} // namespace collapsar

#endif
