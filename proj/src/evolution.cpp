#include "collapsar/evolution.hpp"

#include <cmath>

#include "collapsar/energy.hpp"
#include "collapsar/errors.hpp"
#include "collapsar/spectral.hpp"

namespace collapsar {

Field nonlinear_phase_step(const Field& f, double lambda,
                           const InteractionKernel& kernel, double dt) {
    if (f.rep() != Rep::position)
        throw ContractViolation("nonlinear_phase_step: field must be in position representation");
    if (!std::isfinite(dt) || !std::isfinite(lambda))
        throw ContractViolation("nonlinear_phase_step: non-finite dt or lambda");
    if (dt == 0.0 || lambda == 0.0) return f;

    Field rho(f.grid(), Rep::position);
    for (std::size_t i = 0; i < f.values().size(); ++i)
        rho[i] = cplx(std::norm(f[i]), 0.0);
    Field pot = convolve(kernel, rho);

    Field out = f;
    const double c = lambda * dt;
    for (std::size_t i = 0; i < out.values().size(); ++i)
        out[i] *= std::polar(1.0, c * pot[i].real());
    return out;
}

Field strang_step(const Field& f, double lambda,
                  const InteractionKernel& kernel, double dt) {
    Field half = free_propagator(f, 0.5 * dt);
    half = nonlinear_phase_step(half, lambda, kernel, dt);
    return free_propagator(half, 0.5 * dt);
}

namespace {

struct MonitorRow {
    double mass, energy, h_half, h1, h2, tail;
};

MonitorRow measure(const Field& f, double lambda,
                   const InteractionKernel& kernel) {
    MonitorRow row;
    EnergyBreakdown e = energy(f, lambda, kernel);
    row.energy = e.total;
    row.h_half = std::sqrt(e.kinetic);
    row.mass = mass(f);
    row.h1 = sobolev_norm(f, 1.0);
    row.h2 = sobolev_norm(f, 2.0);
    row.tail = tail_fraction(f);
    return row;
}

} // namespace

Trajectory evolve(const Field& f0, const HartreeParams& p,
                  double h_half_factor, double tail_max) {
    if (f0.rep() != Rep::position)
        throw ContractViolation("evolve: field must be in position representation");
    if (!(p.t_end > 0.0)) throw ContractViolation("evolve: t_end must be positive");
    if (!(p.dt_init > 0.0)) throw ContractViolation("evolve: dt_init must be positive");
    if (p.monitor_stride < 1)
        throw ContractViolation("evolve: monitor_stride must be >= 1");
    if (!(p.cfl_constant > 0.0) || !(p.adapt_exponent >= 0.0))
        throw ContractViolation("evolve: bad adaptive-stepping constants");

    const double dt_min = p.dt_min > 0.0 ? p.dt_min : 1e-8 * p.t_end;
    InteractionKernel kernel = build_kernel(f0.grid(), p.alpha);

    Trajectory traj;
    Field f = f0;
    double t = 0.0;

    auto adapted_dt = [&](double h_half) {
        double dt = p.dt_init;
        if (p.adapt_exponent > 0.0)
            dt = std::min(dt, p.cfl_constant / std::pow(h_half, p.adapt_exponent));
        return dt;
    };

    auto record = [&](double dt_now, const MonitorRow& row) {
        traj.times.push_back(t);
        traj.dts.push_back(dt_now);
        traj.mass.push_back(row.mass);
        traj.total_energy.push_back(row.energy);
        traj.h_half.push_back(row.h_half);
        traj.h1.push_back(row.h1);
        traj.h2.push_back(row.h2);
        traj.tail.push_back(row.tail);
        if (p.snapshot_stride > 0 &&
            (traj.times.size() - 1) % p.snapshot_stride == 0) {
            traj.snapshot_times.push_back(t);
            traj.snapshots.push_back(f);
        }
    };

    MonitorRow row = measure(f, p.lambda, kernel);
    if (!std::isfinite(row.mass) || !std::isfinite(row.h_half))
        throw ContractViolation("evolve: initial field is not finite");
    double dt = adapted_dt(row.h_half);
    record(dt, row);
    Field last_good = f;

    const double t_eps = 1e-12 * p.t_end;
    while (t < p.t_end - t_eps) {
        if (dt < dt_min) {
            traj.termination = Termination::dt_underflow;
            traj.final_field = f;
            return traj;
        }
        bool monitor_due = false;
        for (int s = 0; s < p.monitor_stride && t < p.t_end - t_eps; ++s) {
            double step_dt = std::min(dt, p.t_end - t);
            f = strang_step(f, p.lambda, kernel, step_dt);
            t += step_dt;
            monitor_due = true;
        }
        if (!monitor_due) break;

        row = measure(f, p.lambda, kernel);
        if (!std::isfinite(row.mass) || !std::isfinite(row.h_half) ||
            !std::isfinite(row.energy)) {
            traj.final_field = std::move(last_good); // last finite state
            throw EvolveError("evolve: field turned non-finite", std::move(traj));
        }
        record(dt, row);
        last_good = f;

        BlowupVerdict v = check(traj.times, traj.h_half, traj.tail,
                                h_half_factor, tail_max);
        if (v.detected) {
            traj.termination = Termination::blowup_detected;
            traj.verdict = v;
            traj.final_field = f;
            return traj;
        }
        dt = adapted_dt(row.h_half);
    }

    traj.termination = Termination::completed;
    traj.final_field = f;
    return traj;
}

} // namespace collapsar
