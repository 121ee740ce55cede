#include "collapsar/spectral.hpp"

#include <cmath>
#include <cstring>

#include "collapsar/errors.hpp"
#include "fft_cache.hpp"

namespace collapsar {

namespace {

// The box is centered: x_j = dx*(j - n/2), so relative to the plain DFT each
// axis picks up the phase (-1)^m on the frequency side. The forward scale
// dx^3 / L^(3/2) (and 1 / L^(3/2) backward) makes the pair unitary between
// the cell-weighted position norm and the plain coefficient-sum norm.
void run_transform(const Field& in, Field& out, bool forward) {
    const Grid& g = in.grid();
    auto& plans = detail::cplx_plans(g.n);
    cplx* buf = plans.data();

    const double L = g.box_length;
    const double scale = forward
        ? g.cell_volume() / std::pow(L, 1.5)
        : 1.0 / std::pow(L, 1.5);

    const std::size_t count = g.size();
    if (forward) {
        std::memcpy(buf, in.values().data(), count * sizeof(cplx));
        fftw_execute(plans.fwd);
    } else {
        const cplx* src = in.values().data();
        std::size_t idx = 0;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int l = 0; l < g.n; ++l, ++idx)
                    buf[idx] = ((i + j + l) & 1) ? -src[idx] : src[idx];
        fftw_execute(plans.bwd);
    }

    cplx* dst = out.values().data();
    if (forward) {
        std::size_t idx = 0;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int l = 0; l < g.n; ++l, ++idx) {
                    cplx v = buf[idx] * scale;
                    dst[idx] = ((i + j + l) & 1) ? -v : v;
                }
    } else {
        for (std::size_t idx = 0; idx < count; ++idx)
            dst[idx] = buf[idx] * scale;
    }
}

} // namespace

Field to_frequency(const Field& f) {
    if (f.rep() != Rep::position)
        throw ContractViolation("to_frequency: field is not in position representation");
    Field out(f.grid(), Rep::frequency);
    run_transform(f, out, true);
    return out;
}

Field to_position(const Field& f) {
    if (f.rep() != Rep::frequency)
        throw ContractViolation("to_position: field is not in frequency representation");
    Field out(f.grid(), Rep::position);
    run_transform(f, out, false);
    return out;
}

Field apply_multiplier(const Field& f, const Multiplier& m) {
    const bool from_position = (f.rep() == Rep::position);
    Field hat = from_position ? to_frequency(f) : f;
    const Grid& g = hat.grid();
    std::size_t idx = 0;
    for (int i = 0; i < g.n; ++i) {
        double kx = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            double ky = g.wavenumber(j);
            for (int l = 0; l < g.n; ++l, ++idx) {
                cplx w = m(kx, ky, g.wavenumber(l));
                if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
                    throw NumericError("apply_multiplier: non-finite multiplier value");
                hat[idx] *= w;
            }
        }
    }
    return from_position ? to_position(hat) : hat;
}

double l2_norm(const Field& f) {
    double s = 0.0;
    for (const cplx& v : f.values()) s += std::norm(v);
    if (f.rep() == Rep::position) s *= f.grid().cell_volume();
    return std::sqrt(s);
}

cplx inner_product(const Field& a, const Field& b) {
    if (a.grid() != b.grid() || a.rep() != b.rep())
        throw ContractViolation("inner_product: mismatched grid or representation");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        s += std::conj(a[i]) * b[i];
    if (a.rep() == Rep::position) s *= a.grid().cell_volume();
    return s;
}

namespace {

double weighted_freq_sum(const Field& f, double s, bool homogeneous) {
    const Field hat = (f.rep() == Rep::position) ? to_frequency(f) : f;
    const Grid& g = hat.grid();
    double acc = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < g.n; ++i) {
        double kx = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            double ky = g.wavenumber(j);
            for (int l = 0; l < g.n; ++l, ++idx) {
                double kz = g.wavenumber(l);
                double k2 = kx * kx + ky * ky + kz * kz;
                double w = homogeneous ? std::pow(k2, s) : std::pow(1.0 + k2, s);
                acc += w * std::norm(hat[idx]);
            }
        }
    }
    return std::sqrt(acc);
}

} // namespace

double sobolev_norm(const Field& f, double s) {
    if (!std::isfinite(s) || s < 0.0)
        throw ContractViolation("sobolev_norm: s must be finite and non-negative");
    return weighted_freq_sum(f, s, false);
}

double homogeneous_seminorm(const Field& f, double s) {
    if (!std::isfinite(s) || s < 0.0)
        throw ContractViolation("homogeneous_seminorm: s must be finite and non-negative");
    return weighted_freq_sum(f, s, true);
}

Field free_propagator(const Field& f, double t) {
    if (f.rep() != Rep::position)
        throw ContractViolation("free_propagator: field is not in position representation");
    if (!std::isfinite(t))
        throw ContractViolation("free_propagator: non-finite time");
    Field hat = to_frequency(f);
    const Grid& g = hat.grid();
    std::size_t idx = 0;
    for (int i = 0; i < g.n; ++i) {
        double kx = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            double ky = g.wavenumber(j);
            for (int l = 0; l < g.n; ++l, ++idx) {
                double kz = g.wavenumber(l);
                double w = std::sqrt(1.0 + kx * kx + ky * ky + kz * kz);
                hat[idx] *= std::polar(1.0, -t * w);
            }
        }
    }
    return to_position(hat);
}

} // namespace collapsar
