#ifndef COLLAPSAR_FOCK_HPP
#define COLLAPSAR_FOCK_HPP

#include <complex>
#include <vector>

namespace collapsar {

using fcplx = std::complex<double>;
using ModeVector = std::vector<fcplx>; // one-particle vector, one entry per mode

// Bosonic Fock space over M modes, truncated at total occupation n_max.
// Basis states are occupation tuples (n_1, ..., n_M) with sum <= n_max,
// ordered by total occupation and lexicographically within each grade
// ((0,2) < (1,1) < (2,0)). Immutable once built; safe to share across
// threads.
class FockSpace {
public:
    FockSpace(int modes, int n_max);

    int modes() const { return modes_; }
    int n_max() const { return n_max_; }
    std::size_t dim() const { return occupations_.size(); }

    const std::vector<int>& occupation(std::size_t b) const {
        return occupations_[b];
    }
    std::size_t index_of(const std::vector<int>& occ) const;
    int total_occupation(std::size_t b) const { return totals_[b]; }

    // basis index after n_i -> n_i + 1 (or -1 if that exceeds n_max)
    long raise_index(int mode, std::size_t b) const {
        return raise_[mode][b];
    }
    // basis index after n_i -> n_i - 1 (or -1 if n_i = 0)
    long lower_index(int mode, std::size_t b) const {
        return lower_[mode][b];
    }

private:
    int modes_ = 0;
    int n_max_ = 0;
    std::vector<std::vector<int>> occupations_;
    std::vector<int> totals_;
    std::vector<std::vector<long>> raise_, lower_; // [mode][basis]
};

struct FockVector {
    const FockSpace* space = nullptr;
    std::vector<fcplx> coeff;

    FockVector() = default;
    explicit FockVector(const FockSpace& s)
        : space(&s), coeff(s.dim(), fcplx(0.0, 0.0)) {}
};

FockVector vacuum(const FockSpace& space);

double norm(const FockVector& v);
fcplx overlap(const FockVector& u, const FockVector& v); // antilinear in u

// a(f) v: sum_i conj(f_i) a_i with a_i |n> = sqrt(n_i) |n - e_i>.
FockVector annihilate(const FockSpace& space, const ModeVector& f,
                      const FockVector& v);

// a*(f) v with a_i* |n> = sqrt(n_i + 1) |n + e_i>. Components that would
// exceed n_max are dropped; the squared norm they carried is reported.
struct CreateResult {
    FockVector state;
    double dropped_mass = 0.0;
};
CreateResult create(const FockSpace& space, const ModeVector& f,
                    const FockVector& v);

// || [a(f), a*(g)] v - <f, g> v ||. Zero below the truncation boundary.
double ccr_defect(const FockSpace& space, const ModeVector& f,
                  const ModeVector& g, const FockVector& v);

// W(f) v = exp(a*(f) - a(f)) v, applied matrix-free by scaling + truncated
// Taylor series. The truncated generator stays anti-Hermitian, so the
// operator is unitary on the truncated space. Requires ||f||^2 <= n_max / 4
// so the result is a faithful image of the untruncated one.
FockVector weyl(const FockSpace& space, const ModeVector& f,
                const FockVector& v);

// W(f) vacuum: the coherent state with Poissonian occupation statistics.
FockVector coherent(const FockSpace& space, const ModeVector& f);

// (||a(f) v|| - ||f|| ||N^(1/2) v||, ||a*(f) v|| - ||f|| ||(N+1)^(1/2) v||):
// both are <= 0 up to rounding for any truncation-safe v.
std::pair<double, double> lemma31_defect(const FockSpace& space,
                                         const ModeVector& f,
                                         const FockVector& v);

// <v, N v> / <v, v> and the corresponding variance.
double number_expectation(const FockVector& v);
double number_variance(const FockVector& v);

// The normalized N-particle product state (a*(f))^N / sqrt(N!) applied to the
// vacuum, constructed by phase-averaging coherent states:
//   d_N * (1/Q) sum_q e^{i theta_q N} W(e^{-i theta_q} sqrt(N) f) vacuum
// with d_N = sqrt(N!) / (N^(N/2) e^(-N/2)) and theta_q uniform on [0, 2pi).
// Q starts at 8N and is doubled (at most twice) until the off-grade alias
// mass falls below tolerance. Requires ||f|| = 1, N <= n_max / 2, modes <= 2.
FockVector phase_average_product_state(const FockSpace& space,
                                       const ModeVector& f, int N);

} // namespace collapsar

#endif
