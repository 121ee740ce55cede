#include "collapsar/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "collapsar/errors.hpp"

namespace collapsar {

namespace {

void enumerate_grade(int modes, int grade, std::vector<int>& occ, int mode,
                     int remaining,
                     std::vector<std::vector<int>>& out) {
    if (mode == modes - 1) {
        occ[mode] = remaining;
        out.push_back(occ);
        return;
    }
    for (int c = 0; c <= remaining; ++c) {
        occ[mode] = c;
        enumerate_grade(modes, grade, occ, mode + 1, remaining - c, out);
    }
}

double norm_sq(const ModeVector& f) {
    double s = 0.0;
    for (const fcplx& v : f) s += std::norm(v);
    return s;
}

} // namespace

FockSpace::FockSpace(int modes, int n_max) : modes_(modes), n_max_(n_max) {
    if (modes < 1) throw ContractViolation("fock: need at least one mode");
    if (n_max < 0) throw ContractViolation("fock: n_max must be non-negative");

    std::vector<int> occ(modes);
    for (int grade = 0; grade <= n_max; ++grade)
        enumerate_grade(modes, grade, occ, 0, grade, occupations_);

    std::map<std::vector<int>, std::size_t> lookup;
    totals_.resize(occupations_.size());
    for (std::size_t b = 0; b < occupations_.size(); ++b) {
        lookup[occupations_[b]] = b;
        int t = 0;
        for (int c : occupations_[b]) t += c;
        totals_[b] = t;
    }

    raise_.assign(modes, std::vector<long>(occupations_.size(), -1));
    lower_.assign(modes, std::vector<long>(occupations_.size(), -1));
    for (std::size_t b = 0; b < occupations_.size(); ++b) {
        std::vector<int> t = occupations_[b];
        for (int i = 0; i < modes; ++i) {
            if (totals_[b] + 1 <= n_max) {
                t[i] += 1;
                raise_[i][b] = static_cast<long>(lookup.at(t));
                t[i] -= 1;
            }
            if (t[i] > 0) {
                t[i] -= 1;
                lower_[i][b] = static_cast<long>(lookup.at(t));
                t[i] += 1;
            }
        }
    }
}

std::size_t FockSpace::index_of(const std::vector<int>& occ) const {
    if (static_cast<int>(occ.size()) != modes_)
        throw ContractViolation("fock: occupation tuple has wrong length");
    int total = 0;
    for (int c : occ) {
        if (c < 0) throw ContractViolation("fock: negative occupation");
        total += c;
    }
    if (total > n_max_)
        throw ContractViolation("fock: occupation exceeds truncation");
    // graded lexicographic rank: binary-search within the grade block
    auto lo = std::lower_bound(
        occupations_.begin(), occupations_.end(), occ,
        [&](const std::vector<int>& a, const std::vector<int>& b) {
            int ta = 0, tb = 0;
            for (int c : a) ta += c;
            for (int c : b) tb += c;
            if (ta != tb) return ta < tb;
            return a < b;
        });
    return static_cast<std::size_t>(lo - occupations_.begin());
}

FockVector vacuum(const FockSpace& space) {
    FockVector v(space);
    v.coeff[0] = 1.0;
    return v;
}

double norm(const FockVector& v) {
    double s = 0.0;
    for (const fcplx& c : v.coeff) s += std::norm(c);
    return std::sqrt(s);
}

fcplx overlap(const FockVector& u, const FockVector& v) {
    if (u.space != v.space)
        throw ContractViolation("fock overlap: vectors from different spaces");
    fcplx s = 0.0;
    for (std::size_t i = 0; i < u.coeff.size(); ++i)
        s += std::conj(u.coeff[i]) * v.coeff[i];
    return s;
}

namespace {

void check_operands(const FockSpace& space, const ModeVector& f,
                    const FockVector& v) {
    if (static_cast<int>(f.size()) != space.modes())
        throw ContractViolation("fock: mode vector has wrong length");
    if (v.space != &space)
        throw ContractViolation("fock: vector belongs to a different space");
}

} // namespace

FockVector annihilate(const FockSpace& space, const ModeVector& f,
                      const FockVector& v) {
    check_operands(space, f, v);
    FockVector out(space);
    for (int i = 0; i < space.modes(); ++i) {
        if (f[i] == fcplx(0.0, 0.0)) continue;
        const fcplx fb = std::conj(f[i]);
        for (std::size_t b = 0; b < space.dim(); ++b) {
            long tgt = space.lower_index(i, b);
            if (tgt < 0) continue;
            double n_i = space.occupation(b)[i];
            out.coeff[tgt] += fb * std::sqrt(n_i) * v.coeff[b];
        }
    }
    return out;
}

CreateResult create(const FockSpace& space, const ModeVector& f,
                    const FockVector& v) {
    check_operands(space, f, v);
    CreateResult res;
    res.state = FockVector(space);
    for (int i = 0; i < space.modes(); ++i) {
        if (f[i] == fcplx(0.0, 0.0)) continue;
        for (std::size_t b = 0; b < space.dim(); ++b) {
            if (v.coeff[b] == fcplx(0.0, 0.0)) continue;
            double amp_n = space.occupation(b)[i] + 1.0;
            fcplx contrib = f[i] * std::sqrt(amp_n) * v.coeff[b];
            long tgt = space.raise_index(i, b);
            if (tgt < 0)
                res.dropped_mass += std::norm(contrib);
            else
                res.state.coeff[tgt] += contrib;
        }
    }
    return res;
}

double ccr_defect(const FockSpace& space, const ModeVector& f,
                  const ModeVector& g, const FockVector& v) {
    check_operands(space, f, v);
    if (static_cast<int>(g.size()) != space.modes())
        throw ContractViolation("fock: mode vector has wrong length");
    FockVector up = create(space, g, v).state;
    FockVector a_up = annihilate(space, f, up);
    FockVector down = annihilate(space, f, v);
    FockVector up_down = create(space, g, down).state;
    fcplx fg = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) fg += std::conj(f[i]) * g[i];
    double s = 0.0;
    for (std::size_t b = 0; b < space.dim(); ++b)
        s += std::norm(a_up.coeff[b] - up_down.coeff[b] - fg * v.coeff[b]);
    return std::sqrt(s);
}

namespace {

// y = (a*(f) - a(f)) x restricted to the truncated space. The projected
// generator is still anti-Hermitian, so its exponential is unitary.
void apply_generator(const FockSpace& space, const ModeVector& f,
                     const std::vector<fcplx>& x, std::vector<fcplx>& y) {
    std::fill(y.begin(), y.end(), fcplx(0.0, 0.0));
    for (int i = 0; i < space.modes(); ++i) {
        if (f[i] == fcplx(0.0, 0.0)) continue;
        const fcplx fi = f[i];
        const fcplx fb = std::conj(f[i]);
        for (std::size_t b = 0; b < space.dim(); ++b) {
            const fcplx xb = x[b];
            if (xb == fcplx(0.0, 0.0)) continue;
            long up = space.raise_index(i, b);
            if (up >= 0)
                y[up] += fi * std::sqrt(space.occupation(b)[i] + 1.0) * xb;
            long down = space.lower_index(i, b);
            if (down >= 0)
                y[down] -= fb * std::sqrt(double(space.occupation(b)[i])) * xb;
        }
    }
}

// exp(A) x via scaling and repeated truncated Taylor application:
// ||A||_2 <= 2 ||f|| sqrt(n_max + 1), scale so the series argument has norm
// <= 1/2, run the series to machine tail, apply 2^s times.
std::vector<fcplx> expmv(const FockSpace& space, const ModeVector& f,
                         std::vector<fcplx> x) {
    double bound = 2.0 * std::sqrt(norm_sq(f)) * std::sqrt(space.n_max() + 1.0);
    int s = 0;
    while (bound > 0.5 && s < 60) {
        bound *= 0.5;
        ++s;
    }
    const double scale = std::ldexp(1.0, -s); // 2^-s
    std::vector<fcplx> term(x.size()), next(x.size()), acc(x.size());
    for (long rep = 0; rep < (1L << s); ++rep) {
        acc = x;
        term = x;
        for (int j = 1; j <= 40; ++j) {
            apply_generator(space, f, term, next);
            const double c = scale / j;
            double tail = 0.0;
            for (std::size_t b = 0; b < term.size(); ++b) {
                term[b] = c * next[b];
                acc[b] += term[b];
                tail += std::norm(term[b]);
            }
            if (tail < 1e-32) break; // ||term|| < 1e-16
        }
        x = acc;
    }
    return x;
}

} // namespace

FockVector weyl(const FockSpace& space, const ModeVector& f,
                const FockVector& v) {
    check_operands(space, f, v);
    if (norm_sq(f) > space.n_max() / 4.0)
        throw ContractViolation("weyl: ||f||^2 exceeds n_max / 4");
    FockVector out(space);
    out.coeff = expmv(space, f, v.coeff);
    return out;
}

FockVector coherent(const FockSpace& space, const ModeVector& f) {
    return weyl(space, f, vacuum(space));
}

std::pair<double, double> lemma31_defect(const FockSpace& space,
                                         const ModeVector& f,
                                         const FockVector& v) {
    check_operands(space, f, v);
    const double fn = std::sqrt(norm_sq(f));
    double nsq = 0.0, n1sq = 0.0;
    for (std::size_t b = 0; b < space.dim(); ++b) {
        double t = space.total_occupation(b);
        double p = std::norm(v.coeff[b]);
        nsq += t * p;
        n1sq += (t + 1.0) * p;
    }
    double lhs_a = norm(annihilate(space, f, v));
    double lhs_c = norm(create(space, f, v).state);
    return {lhs_a - fn * std::sqrt(nsq), lhs_c - fn * std::sqrt(n1sq)};
}

double number_expectation(const FockVector& v) {
    if (!v.space) throw ContractViolation("fock: empty vector");
    double p_total = 0.0, acc = 0.0;
    for (std::size_t b = 0; b < v.coeff.size(); ++b) {
        double p = std::norm(v.coeff[b]);
        p_total += p;
        acc += v.space->total_occupation(b) * p;
    }
    if (!(p_total > 0.0)) throw ContractViolation("fock: zero vector");
    return acc / p_total;
}

double number_variance(const FockVector& v) {
    if (!v.space) throw ContractViolation("fock: empty vector");
    double p_total = 0.0, acc = 0.0, acc2 = 0.0;
    for (std::size_t b = 0; b < v.coeff.size(); ++b) {
        double p = std::norm(v.coeff[b]);
        double t = v.space->total_occupation(b);
        p_total += p;
        acc += t * p;
        acc2 += t * t * p;
    }
    if (!(p_total > 0.0)) throw ContractViolation("fock: zero vector");
    double mean = acc / p_total;
    return acc2 / p_total - mean * mean;
}

FockVector phase_average_product_state(const FockSpace& space,
                                       const ModeVector& f, int N) {
    if (static_cast<int>(f.size()) != space.modes())
        throw ContractViolation("fock: mode vector has wrong length");
    if (space.modes() > 2)
        throw ContractViolation("phase_average: supported for at most 2 modes");
    if (N < 0 || N > space.n_max() / 2)
        throw ContractViolation("phase_average: N must satisfy 0 <= N <= n_max / 2");
    if (std::abs(norm_sq(f) - 1.0) > 1e-10)
        throw ContractViolation("phase_average: f must be normalized");

    const double d_n =
        N == 0 ? 1.0
               : std::exp(0.5 * std::lgamma(N + 1.0) -
                          0.5 * N * std::log(double(N)) + 0.5 * N);
    const double root_n = std::sqrt(double(N));

    // nodes go through expmv directly: the quadrature owns its truncation
    // accuracy (N <= n_max/2 keeps the Poisson tail of ||f_q||^2 = N beyond
    // n_max negligible), independent of weyl's stricter precondition
    auto average = [&](int q_nodes) {
        FockVector acc(space);
        for (int q = 0; q < q_nodes; ++q) {
            double theta = 2.0 * std::numbers::pi * q / q_nodes;
            ModeVector fq(f.size());
            const fcplx rot = std::polar(root_n, -theta);
            for (std::size_t i = 0; i < f.size(); ++i) fq[i] = rot * f[i];
            std::vector<fcplx> node = expmv(space, fq, vacuum(space).coeff);
            const fcplx w = std::polar(d_n / q_nodes, theta * N);
            for (std::size_t b = 0; b < acc.coeff.size(); ++b)
                acc.coeff[b] += w * node[b];
        }
        return acc;
    };

    // A Q-node rule keeps exactly the harmonics at grades N + mQ, so the
    // quadrature residual is the coefficient mass away from grade N.
    int q_nodes = std::max(8 * N, 8);
    for (int doubling = 0; doubling <= 2; ++doubling, q_nodes *= 2) {
        FockVector result = average(q_nodes);
        double off = 0.0;
        for (std::size_t b = 0; b < result.coeff.size(); ++b)
            if (space.total_occupation(b) != N) off += std::norm(result.coeff[b]);
        if (std::sqrt(off) <= 1e-9) return result;
    }
    throw NumericError("phase_average: quadrature did not converge after doubling twice");
}

} // namespace collapsar
