#ifndef COLLAPSAR_FFT_CACHE_HPP
#define COLLAPSAR_FFT_CACHE_HPP

// Internal FFTW plumbing. Plans are created under a global mutex (the FFTW
// planner is not thread-safe) and cached per thread, so concurrent runs each
// execute their own plan/buffer pair, which is the documented safe pattern.
// Everything is planned with FFTW_ESTIMATE: plan selection is then
// deterministic, which keeps floating-point summation order (and therefore
// emitted CSV/JSON bytes) identical across reruns.

#include <complex>
#include <fftw3.h>

namespace collapsar::detail {

// In-place complex transforms on an n^3 cube.
struct CplxPlans {
    int n = 0;
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    std::complex<double>* data() {
        return reinterpret_cast<std::complex<double>*>(buf);
    }
};

// Real <-> half-complex transforms on an m^3 cube (padded convolutions).
struct RealPlans {
    int m = 0;
    double* rbuf = nullptr;
    fftw_complex* cbuf = nullptr; // m * m * (m/2 + 1)
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    std::complex<double>* cdata() {
        return reinterpret_cast<std::complex<double>*>(cbuf);
    }
    std::size_t complex_count() const {
        return static_cast<std::size_t>(m) * m * (m / 2 + 1);
    }
};

CplxPlans& cplx_plans(int n);
RealPlans& real_plans(int m);

} // namespace collapsar::detail

#endif
