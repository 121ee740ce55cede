#include "fft_cache.hpp"

#include <cstddef>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace collapsar::detail {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct CplxDeleter {
    void operator()(CplxPlans* p) const {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (p->fwd) fftw_destroy_plan(p->fwd);
        if (p->bwd) fftw_destroy_plan(p->bwd);
        if (p->buf) fftw_free(p->buf);
        delete p;
    }
};

struct RealDeleter {
    void operator()(RealPlans* p) const {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (p->r2c) fftw_destroy_plan(p->r2c);
        if (p->c2r) fftw_destroy_plan(p->c2r);
        if (p->rbuf) fftw_free(p->rbuf);
        if (p->cbuf) fftw_free(p->cbuf);
        delete p;
    }
};

} // namespace

CplxPlans& cplx_plans(int n) {
    thread_local std::unordered_map<int, std::unique_ptr<CplxPlans, CplxDeleter>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        auto p = std::unique_ptr<CplxPlans, CplxDeleter>(new CplxPlans);
        p->n = n;
        std::size_t count = static_cast<std::size_t>(n) * n * n;
        p->buf = fftw_alloc_complex(count);
        p->fwd = fftw_plan_dft_3d(n, n, n, p->buf, p->buf,
                                  FFTW_FORWARD, FFTW_ESTIMATE);
        p->bwd = fftw_plan_dft_3d(n, n, n, p->buf, p->buf,
                                  FFTW_BACKWARD, FFTW_ESTIMATE);
        it = cache.emplace(n, std::move(p)).first;
    }
    return *it->second;
}

RealPlans& real_plans(int m) {
    thread_local std::unordered_map<int, std::unique_ptr<RealPlans, RealDeleter>> cache;
    auto it = cache.find(m);
    if (it == cache.end()) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        auto p = std::unique_ptr<RealPlans, RealDeleter>(new RealPlans);
        p->m = m;
        std::size_t rcount = static_cast<std::size_t>(m) * m * m;
        p->rbuf = fftw_alloc_real(rcount);
        p->cbuf = fftw_alloc_complex(p->complex_count());
        p->r2c = fftw_plan_dft_r2c_3d(m, m, m, p->rbuf, p->cbuf, FFTW_ESTIMATE);
        p->c2r = fftw_plan_dft_c2r_3d(m, m, m, p->cbuf, p->rbuf, FFTW_ESTIMATE);
        it = cache.emplace(m, std::move(p)).first;
    }
    return *it->second;
}

} // namespace collapsar::detail
