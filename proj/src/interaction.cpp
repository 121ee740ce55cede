#include "collapsar/interaction.hpp"

#include <cmath>
#include <cstring>

#include "collapsar/errors.hpp"
#include "collapsar/spectral.hpp"
#include "fft_cache.hpp"

namespace collapsar {

namespace {

double profile_value(InteractionKernel::Profile p, double r, double alpha) {
    if (p == InteractionKernel::Profile::newton) return 1.0 / (r + alpha);
    return 1.0 / (r * r);
}

// Cell average of the profile over [-dx/2, dx/2]^3 by a fixed 32^3 midpoint
// rule. Midpoints never hit r = 0, and both 1/r and 1/r^2 are integrable over
// the cell, so the average is finite for every alpha >= 0.
double origin_cell_average(InteractionKernel::Profile p, double dx,
                           double alpha) {
    constexpr int q = 32;
    double sum = 0.0;
    for (int a = 0; a < q; ++a) {
        double u = ((a + 0.5) / q - 0.5) * dx;
        for (int b = 0; b < q; ++b) {
            double v = ((b + 0.5) / q - 0.5) * dx;
            for (int c = 0; c < q; ++c) {
                double w = ((c + 0.5) / q - 0.5) * dx;
                sum += profile_value(p, std::sqrt(u * u + v * v + w * w), alpha);
            }
        }
    }
    return sum / (static_cast<double>(q) * q * q);
}

} // namespace

InteractionKernel::InteractionKernel(const Grid& grid, double alpha,
                                     Profile profile)
    : grid_(grid), alpha_(alpha), profile_(profile) {
    if (!(alpha >= 0.0))
        throw ContractViolation("kernel: alpha must be non-negative");
    if (alpha >= grid.box_length)
        throw ContractViolation("kernel: alpha must be smaller than the box");

    const int m = 2 * grid.n;
    const double dx = grid.dx();
    const double origin = origin_cell_average(profile, dx, alpha);

    auto& plans = detail::real_plans(m);
    double* rbuf = plans.rbuf;
    // padded kernel with signed offsets: index a on the 2n-grid represents
    // the offset dx * (a < n ? a : a - 2n)
    std::size_t idx = 0;
    for (int i = 0; i < m; ++i) {
        double x = dx * (i < grid.n ? i : i - m);
        for (int j = 0; j < m; ++j) {
            double y = dx * (j < grid.n ? j : j - m);
            for (int l = 0; l < m; ++l, ++idx) {
                double z = dx * (l < grid.n ? l : l - m);
                double r = std::sqrt(x * x + y * y + z * z);
                rbuf[idx] = (r == 0.0) ? origin : profile_value(profile, r, alpha);
            }
        }
    }
    fftw_execute(plans.r2c);
    spectrum_.assign(plans.cdata(), plans.cdata() + plans.complex_count());
}

InteractionKernel build_kernel(const Grid& grid, double alpha) {
    return InteractionKernel(grid, alpha, InteractionKernel::Profile::newton);
}

double InteractionKernel::value_at_offset(int di, int dj, int dl) const {
    if (std::abs(di) > grid_.n || std::abs(dj) > grid_.n || std::abs(dl) > grid_.n)
        throw ContractViolation("kernel: offset outside the padded range");
    if (di == 0 && dj == 0 && dl == 0)
        return origin_cell_average(profile_, grid_.dx(), alpha_);
    double dx = grid_.dx();
    double r = dx * std::sqrt(double(di) * di + double(dj) * dj + double(dl) * dl);
    return profile_value(profile_, r, alpha_);
}

Field convolve(const InteractionKernel& kernel, const Field& density) {
    const Grid& g = density.grid();
    if (density.rep() != Rep::position)
        throw ContractViolation("convolve: density must be in position representation");
    if (g != kernel.grid())
        throw ContractViolation("convolve: density grid does not match kernel grid");

    double scale = 0.0;
    for (const cplx& v : density.values())
        scale = std::max(scale, std::abs(v.real()));
    const double floor = -1e-12 * std::max(1.0, scale);
    for (const cplx& v : density.values()) {
        if (v.real() < floor)
            throw ContractViolation("convolve: density has negative values beyond noise");
        if (std::abs(v.imag()) > 1e-12 * std::max(1.0, scale))
            throw ContractViolation("convolve: density has a non-negligible imaginary part");
    }

    const int n = g.n;
    const int m = 2 * n;
    auto& plans = detail::real_plans(m);

    std::size_t rcount = static_cast<std::size_t>(m) * m * m;
    std::memset(plans.rbuf, 0, rcount * sizeof(double));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const cplx* src = &density.values()[g.index(i, j, 0)];
            double* dst = &plans.rbuf[(static_cast<std::size_t>(i) * m + j) * m];
            for (int l = 0; l < n; ++l)
                dst[l] = std::max(0.0, src[l].real());
        }
    fftw_execute(plans.r2c);

    const std::vector<cplx>& khat = kernel.spectrum();
    cplx* chat = plans.cdata();
    const std::size_t ccount = plans.complex_count();
    // dx^3 quadrature weight and 1/m^3 from the unnormalized inverse
    const double w = g.cell_volume() / rcount;
    for (std::size_t i = 0; i < ccount; ++i) chat[i] *= khat[i] * w;
    fftw_execute(plans.c2r);

    Field out(g, Rep::position);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double* src = &plans.rbuf[(static_cast<std::size_t>(i) * m + j) * m];
            cplx* dst = &out.values()[g.index(i, j, 0)];
            for (int l = 0; l < n; ++l)
                dst[l] = cplx(src[l], 0.0);
        }
    return out;
}

Field convolve_periodic_symbol(const Field& density) {
    if (density.rep() != Rep::position)
        throw ContractViolation("convolve_periodic_symbol: density must be in position representation");
    Field hat = to_frequency(density);
    const Grid& g = hat.grid();
    std::size_t idx = 0;
    for (int i = 0; i < g.n; ++i) {
        double kx = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            double ky = g.wavenumber(j);
            for (int l = 0; l < g.n; ++l, ++idx) {
                double kz = g.wavenumber(l);
                double k2 = kx * kx + ky * ky + kz * kz;
                hat[idx] *= (k2 == 0.0) ? 0.0 : 4.0 * std::numbers::pi / k2;
            }
        }
    }
    return to_position(hat);
}

namespace {

Field abs_squared(const Field& f) {
    Field rho(f.grid(), Rep::position);
    for (std::size_t i = 0; i < f.values().size(); ++i)
        rho[i] = cplx(std::norm(f[i]), 0.0);
    return rho;
}

double ratio_impl(const Field& f, const InteractionKernel& kernel, double s) {
    if (f.rep() != Rep::position)
        throw ContractViolation("ratio: field must be in position representation");
    const double mass = l2_norm(f);
    if (!(mass > 0.0))
        throw ContractViolation("ratio: zero field");
    double semi = homogeneous_seminorm(f, s);
    if (semi <= 1e-10 * mass)
        throw ContractViolation("ratio: field has (near-)zero seminorm");
    Field pot = convolve(kernel, abs_squared(f));
    double sup = 0.0;
    for (const cplx& v : pot.values()) sup = std::max(sup, v.real());
    return sup / (semi * semi);
}

} // namespace

double kato_ratio(const Field& f, const InteractionKernel& bare_kernel) {
    if (bare_kernel.profile() != InteractionKernel::Profile::newton ||
        bare_kernel.alpha() != 0.0)
        throw ContractViolation("kato_ratio: kernel must be the bare 1/|x| kernel");
    return ratio_impl(f, bare_kernel, 0.5);
}

double kato_ratio(const Field& f) {
    return ratio_impl(f, build_kernel(f.grid(), 0.0), 0.5);
}

double hardy_ratio(const Field& f, const InteractionKernel& inv_square_kernel) {
    if (inv_square_kernel.profile() != InteractionKernel::Profile::inverse_square)
        throw ContractViolation("hardy_ratio: kernel must be the 1/|x|^2 kernel");
    return ratio_impl(f, inv_square_kernel, 1.0);
}

double hardy_ratio(const Field& f) {
    return ratio_impl(
        f, InteractionKernel(f.grid(), 0.0,
                             InteractionKernel::Profile::inverse_square), 1.0);
}

} // namespace collapsar
