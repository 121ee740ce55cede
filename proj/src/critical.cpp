#include "collapsar/critical.hpp"

#include <cmath>

#include "collapsar/errors.hpp"
#include "collapsar/spectral.hpp"

namespace collapsar {

namespace {

struct RatioParts {
    double d = 0.0;      // double self-interaction integral
    double k = 0.0;      // homogeneous H^(1/2) seminorm squared
    double ratio = 0.0;  // d / (2k)
    Field potential;     // K0 * |f|^2, reused by the gradient
};

// The lattice constant mode has zero seminorm but positive interaction, so
// the discrete quotient is unbounded along it; a box artifact, absent on
// whole space. The ascent therefore works in the zero-box-mean sector.
void remove_mean(Field& f) {
    cplx mean(0.0, 0.0);
    for (const cplx& v : f.values()) mean += v;
    mean /= static_cast<double>(f.values().size());
    for (cplx& v : f.values()) v -= mean;
}

RatioParts ratio_parts(const Field& f, const InteractionKernel& kernel) {
    Field rho(f.grid(), Rep::position);
    for (std::size_t i = 0; i < f.values().size(); ++i)
        rho[i] = cplx(std::norm(f[i]), 0.0);
    RatioParts parts;
    parts.potential = convolve(kernel, rho);
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.values().size(); ++i)
        acc += rho[i].real() * parts.potential[i].real();
    parts.d = acc * f.grid().cell_volume();
    double semi = homogeneous_seminorm(f, 0.5);
    parts.k = semi * semi;
    double mass = l2_norm(f);
    if (parts.k <= 1e-20 * mass * mass)
        throw ContractViolation("weinstein_ratio: field has (near-)zero seminorm");
    parts.ratio = parts.d / (2.0 * parts.k);
    return parts;
}

} // namespace

double weinstein_ratio(const Field& f, const InteractionKernel& bare_kernel) {
    if (f.rep() != Rep::position)
        throw ContractViolation("weinstein_ratio: field must be in position representation");
    if (bare_kernel.alpha() != 0.0 ||
        bare_kernel.profile() != InteractionKernel::Profile::newton)
        throw ContractViolation("weinstein_ratio: kernel must be the bare 1/|x| kernel");
    if (!(l2_norm(f) > 0.0))
        throw ContractViolation("weinstein_ratio: zero field");
    return ratio_parts(f, bare_kernel).ratio;
}

double weinstein_ratio(const Field& f) {
    return weinstein_ratio(f, build_kernel(f.grid(), 0.0));
}

RatioEstimate maximize_ratio(const Field& start, int max_iters, double step,
                             double tol) {
    if (start.rep() != Rep::position)
        throw ContractViolation("maximize_ratio: field must be in position representation");
    if (max_iters < 1 || !(step > 0.0) || !(tol > 0.0))
        throw ContractViolation("maximize_ratio: bad optimizer controls");

    InteractionKernel kernel = build_kernel(start.grid(), 0.0);
    Field f = normalized(start);
    remove_mean(f);
    if (!(l2_norm(f) > 1e-12))
        throw ContractViolation("maximize_ratio: start field is (near-)constant");
    f = normalized(f);
    RatioParts parts = ratio_parts(f, kernel);

    RatioEstimate est;
    est.history.push_back(parts.ratio);

    const int window = 10;
    double step_now = step;

    for (int iter = 0; iter < max_iters; ++iter) {
        // gradient of R = D/(2K): (2/K) V f - (D/K^2) |k| f, then projected
        // onto the tangent space of the unit sphere at f
        Field grad = apply_multiplier(f, [](double kx, double ky, double kz) {
            return std::sqrt(kx * kx + ky * ky + kz * kz);
        });
        const double cd = 2.0 / parts.k;
        const double ck = parts.d / (parts.k * parts.k);
        for (std::size_t i = 0; i < grad.values().size(); ++i)
            grad[i] = cd * parts.potential[i].real() * f[i] - ck * grad[i];
        remove_mean(grad);
        cplx overlap = inner_product(f, grad);
        for (std::size_t i = 0; i < grad.values().size(); ++i)
            grad[i] -= overlap * f[i];

        bool accepted = false;
        for (int h = 0; h <= 40; ++h) {
            Field trial = f;
            for (std::size_t i = 0; i < trial.values().size(); ++i)
                trial[i] += step_now * grad[i];
            trial = normalized(trial);
            RatioParts trial_parts = ratio_parts(trial, kernel);
            if (trial_parts.ratio > parts.ratio) {
                f = std::move(trial);
                parts = std::move(trial_parts);
                accepted = true;
                break;
            }
            step_now *= 0.5;
        }
        if (!accepted) {
            // no ascent direction at line-search resolution: stationary point
            est.converged = true;
            break;
        }

        est.history.push_back(parts.ratio);
        est.iterations += 1;
        step_now = std::min(step_now * 2.0, step);

        if (static_cast<int>(est.history.size()) > window) {
            double prev = est.history[est.history.size() - 1 - window];
            if (parts.ratio - prev < tol * parts.ratio) {
                est.converged = true;
                break;
            }
        }
    }

    est.ratio = parts.ratio;
    est.lambda_upper = 1.0 / parts.ratio;
    est.profile = std::move(f);
    return est;
}

} // namespace collapsar
