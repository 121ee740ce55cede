#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "collapsar/errors.hpp"
#include "collapsar/fock.hpp"

using namespace collapsar;

namespace {

FockVector basis_state(const FockSpace& s, const std::vector<int>& occ) {
    FockVector v(s);
    v.coeff[s.index_of(occ)] = fcplx(1.0, 0.0);
    return v;
}

FockVector random_low_state(const FockSpace& s, int cap, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    auto u = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53 - 0.5; };
    FockVector v(s);
    for (std::size_t b = 0; b < s.dim(); ++b)
        if (s.total_occupation(b) <= cap) v.coeff[b] = fcplx(u(), u());
    double n = norm(v);
    for (auto& c : v.coeff) c /= n;
    return v;
}

double distance(const FockVector& a, const FockVector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.coeff.size(); ++i)
        acc += std::norm(a.coeff[i] - b.coeff[i]);
    return std::sqrt(acc);
}

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

} // namespace

TEST_CASE("basis enumeration is graded lexicographic") {
    FockSpace s(2, 3);
    CHECK(s.modes() == 2);
    CHECK(s.n_max() == 3);
    CHECK(s.dim() == 10); // C(3 + 2, 2)

    const std::vector<std::vector<int>> expected = {
        {0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1},
        {2, 0}, {0, 3}, {1, 2}, {2, 1}, {3, 0}};
    for (std::size_t b = 0; b < expected.size(); ++b) {
        CHECK(s.occupation(b) == expected[b]);
        CHECK(s.index_of(expected[b]) == b);
        CHECK(s.total_occupation(b) == expected[b][0] + expected[b][1]);
    }

    CHECK(FockSpace(3, 4).dim() == 35);  // C(7, 3)
    CHECK(FockSpace(2, 40).dim() == 861); // C(42, 2)
    CHECK(FockSpace(1, 0).dim() == 1);

    CHECK(s.raise_index(0, s.index_of({0, 1})) ==
          static_cast<long>(s.index_of({1, 1})));
    CHECK(s.raise_index(1, s.index_of({0, 0})) ==
          static_cast<long>(s.index_of({0, 1})));
    CHECK(s.raise_index(0, s.index_of({3, 0})) == -1); // leaves the truncation
    CHECK(s.lower_index(0, s.index_of({0, 1})) == -1);
    CHECK(s.lower_index(1, s.index_of({0, 1})) ==
          static_cast<long>(s.index_of({0, 0})));

    CHECK_THROWS_AS(FockSpace(0, 3), ContractViolation);
    CHECK_THROWS_AS(FockSpace(2, -1), ContractViolation);
    CHECK_THROWS_AS(s.index_of({1}), ContractViolation);
    CHECK_THROWS_AS(s.index_of({-1, 0}), ContractViolation);
    CHECK_THROWS_AS(s.index_of({2, 2}), ContractViolation);
}

TEST_CASE("ladder operators carry the square-root amplitudes") {
    FockSpace s(2, 5);
    FockVector vac = vacuum(s);
    CHECK(norm(vac) == 1.0);

    // a*(f) is linear in f
    CreateResult one = create(s, {fcplx(2.0, 0.0), fcplx(0.0, 0.0)}, vac);
    CHECK(one.dropped_mass == 0.0);
    CHECK(std::abs(one.state.coeff[s.index_of({1, 0})] - fcplx(2.0, 0.0)) < 1e-15);

    CreateResult two = create(s, {fcplx(1.0, 0.0), fcplx(0.0, 0.0)}, one.state);
    CHECK(std::abs(two.state.coeff[s.index_of({2, 0})] -
                   fcplx(2.0 * std::sqrt(2.0), 0.0)) < 1e-14);

    // a(f) is antilinear in f
    FockVector down = annihilate(s, {fcplx(0.0, 0.0), fcplx(0.0, 3.0)},
                                 basis_state(s, {1, 1}));
    CHECK(std::abs(down.coeff[s.index_of({1, 0})] - fcplx(0.0, -3.0)) < 1e-15);
    CHECK(std::abs(annihilate(s, {fcplx(1.0, 0.0), fcplx(0.0, 0.0)}, vac)
                       .coeff[0]) == 0.0);

    // adjointness <a*(f) u, v> = <u, a(f) v> away from the truncation edge
    std::vector<ModeVector> fs = {{fcplx(0.4, 0.1), fcplx(-0.2, 0.3)},
                                  {fcplx(0.0, 1.0), fcplx(0.5, 0.0)}};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        FockVector u = random_low_state(s, 3, seed);
        FockVector v = random_low_state(s, 3, seed + 100);
        for (const auto& f : fs) {
            fcplx lhs = overlap(create(s, f, u).state, v);
            fcplx rhs = overlap(u, annihilate(s, f, v));
            CHECK(std::abs(lhs - rhs) < 1e-14);
        }
    }

    CHECK_THROWS_AS(create(s, {fcplx(1.0, 0.0)}, vac), ContractViolation);
    CHECK_THROWS_AS(annihilate(s, {fcplx(1.0, 0.0)}, vac), ContractViolation);
}

TEST_CASE("creation above the truncation reports the dropped mass") {
    FockSpace s(1, 3);
    FockVector top = basis_state(s, {3});
    CreateResult r = create(s, {fcplx(0.5, 0.0)}, top);
    // would produce 0.5 sqrt(4) |4>, which does not exist here
    CHECK(norm(r.state) == 0.0);
    CHECK(r.dropped_mass == doctest::Approx(1.0).epsilon(1e-14));

    FockVector low = basis_state(s, {1});
    CHECK(create(s, {fcplx(0.5, 0.0)}, low).dropped_mass == 0.0);
}

TEST_CASE("canonical commutator holds below the boundary") {
    FockSpace s(2, 6);
    ModeVector f = {fcplx(0.3, -0.2), fcplx(0.1, 0.4)};
    ModeVector g = {fcplx(-0.5, 0.0), fcplx(0.2, 0.2)};

    for (std::uint64_t seed = 1; seed <= 4; ++seed)
        CHECK(ccr_defect(s, f, g, random_low_state(s, 4, seed)) < 1e-13);

    // at the top grade a*(g) truncates and the commutator degrades:
    // [a(f), a*(f)] |3,0> loses a(f) a*(f) |3,0> = 4 |3,0> entirely,
    // leaving || -3 v - v || = 4 for unit f along the first mode
    FockSpace tight(2, 3);
    ModeVector e1 = {fcplx(1.0, 0.0), fcplx(0.0, 0.0)};
    CHECK(ccr_defect(tight, e1, e1, basis_state(tight, {3, 0})) ==
          doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("weyl operators are unitary with the group law") {
    FockSpace s(2, 20);
    ModeVector f = {fcplx(0.4, 0.2), fcplx(-0.3, 0.1)};
    ModeVector g = {fcplx(0.1, -0.3), fcplx(0.2, 0.2)};
    FockVector v = random_low_state(s, 4, 9);

    FockVector wv = weyl(s, f, v);
    CHECK(norm(wv) == doctest::Approx(1.0).epsilon(1e-11));

    ModeVector mf = {-f[0], -f[1]};
    CHECK(distance(weyl(s, mf, wv), v) < 1e-10);

    // W(f) W(g) = exp(-i Im<f,g>) W(f+g) with the antilinear-first pairing
    fcplx pair = std::conj(f[0]) * g[0] + std::conj(f[1]) * g[1];
    FockVector lhs = weyl(s, f, weyl(s, g, v));
    FockVector sum = weyl(s, {f[0] + g[0], f[1] + g[1]}, v);
    for (auto& c : sum.coeff) c *= std::exp(fcplx(0.0, -pair.imag()));
    CHECK(distance(lhs, sum) < 1e-8);

    ModeVector big = {fcplx(3.0, 0.0), fcplx(0.0, 0.0)};
    CHECK_THROWS_AS(weyl(s, big, v), ContractViolation); // ||f||^2 > n_max/4
}

TEST_CASE("weyl matches a dense matrix exponential") {
    FockSpace s(2, 8);
    const int dim = static_cast<int>(s.dim());
    ModeVector f = {fcplx(0.9, 0.0), fcplx(0.7, 0.3)};

    // columns of A = a*(f) - a(f); exactly anti-Hermitian on the truncation
    Eigen::MatrixXcd A(dim, dim);
    for (int b = 0; b < dim; ++b) {
        FockVector e(s);
        e.coeff[b] = fcplx(1.0, 0.0);
        FockVector up = create(s, f, e).state;
        FockVector down = annihilate(s, f, e);
        for (int r = 0; r < dim; ++r) A(r, b) = up.coeff[r] - down.coeff[r];
    }
    CHECK((A + A.adjoint()).norm() < 1e-13);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        (fcplx(0.0, -1.0) * A).eval());
    REQUIRE(es.info() == Eigen::Success);

    FockVector v = random_low_state(s, 3, 21);
    Eigen::VectorXcd vec(dim);
    for (int i = 0; i < dim; ++i) vec(i) = v.coeff[i];
    Eigen::VectorXcd image =
        es.eigenvectors() *
        (es.eigenvalues().array().cast<fcplx>() * fcplx(0.0, 1.0))
            .exp()
            .matrix()
            .asDiagonal() *
        (es.eigenvectors().adjoint() * vec);

    FockVector w = weyl(s, f, v);
    double worst = 0.0;
    for (int i = 0; i < dim; ++i)
        worst = std::max(worst, std::abs(w.coeff[i] - image(i)));
    CHECK(worst < 1e-11);
}

TEST_CASE("coherent states have the Poisson profile") {
    FockSpace s(2, 24);
    ModeVector f = {fcplx(0.6, 0.0), fcplx(0.4, -0.2)};
    double f2 = std::norm(f[0]) + std::norm(f[1]);
    FockVector c = coherent(s, f);

    CHECK(norm(c) == doctest::Approx(1.0).epsilon(1e-12));
    double worst = 0.0;
    for (std::size_t b = 0; b < s.dim(); ++b) {
        const auto& occ = s.occupation(b);
        fcplx expected = std::exp(-0.5 * f2) * std::pow(f[0], occ[0]) *
                         std::pow(f[1], occ[1]) /
                         std::sqrt(factorial(occ[0]) * factorial(occ[1]));
        worst = std::max(worst, std::abs(c.coeff[b] - expected));
    }
    CHECK(worst < 1e-12);

    CHECK(number_expectation(c) == doctest::Approx(f2).epsilon(1e-10));
    CHECK(number_variance(c) == doctest::Approx(f2).epsilon(1e-10));

    // <W(f) vac, W(g) vac> = exp(-||f||^2/2 - ||g||^2/2 + <f,g>)
    ModeVector g = {fcplx(0.2, 0.3), fcplx(-0.1, 0.5)};
    fcplx pair = std::conj(f[0]) * g[0] + std::conj(f[1]) * g[1];
    double g2 = std::norm(g[0]) + std::norm(g[1]);
    fcplx law = std::exp(fcplx(-0.5 * f2 - 0.5 * g2, 0.0) + pair);
    CHECK(std::abs(overlap(c, coherent(s, g)) - law) < 1e-10);
}

TEST_CASE("annihilation is dominated by the number operator") {
    FockSpace s(2, 16);
    std::vector<ModeVector> fs = {{fcplx(0.8, 0.1), fcplx(-0.4, 0.2)},
                                  {fcplx(0.0, 2.0), fcplx(1.0, 0.0)}};
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        FockVector v = random_low_state(s, 8, seed);
        for (const auto& f : fs) {
            auto [lower, upper] = lemma31_defect(s, f, v);
            CHECK(lower <= 1e-12);
            CHECK(upper <= 1e-12);
        }
    }
}

TEST_CASE("number statistics on simple states") {
    FockSpace s(2, 6);
    FockVector b = basis_state(s, {2, 1});
    CHECK(number_expectation(b) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(number_variance(b) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(number_expectation(vacuum(s)) == 0.0);

    FockSpace line(1, 4);
    FockVector mix(line);
    mix.coeff[line.index_of({0})] = fcplx(1.0 / std::sqrt(2.0), 0.0);
    mix.coeff[line.index_of({2})] = fcplx(1.0 / std::sqrt(2.0), 0.0);
    CHECK(number_expectation(mix) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(number_variance(mix) == doctest::Approx(1.0).epsilon(1e-13));

    FockVector zero(s);
    CHECK_THROWS_AS(number_expectation(zero), ContractViolation);
    CHECK_THROWS_AS(number_variance(zero), ContractViolation);
    FockVector unbound;
    CHECK_THROWS_AS(number_expectation(unbound), ContractViolation);
}

TEST_CASE("phase averaging builds exact product states") {
    // coefficient accuracy is set by the scaled Taylor evaluation of W(f),
    // observed ~1e-8 on these small spaces

    FockSpace line(1, 12);
    FockVector three = phase_average_product_state(line, {fcplx(1.0, 0.0)}, 3);
    CHECK(norm(three) == doctest::Approx(1.0).epsilon(5e-8));
    CHECK(std::abs(three.coeff[line.index_of({3})] - fcplx(1.0, 0.0)) < 5e-8);

    // N = 0 is the vacuum
    FockVector none = phase_average_product_state(line, {fcplx(1.0, 0.0)}, 0);
    CHECK(std::abs(none.coeff[line.index_of({0})] - fcplx(1.0, 0.0)) < 1e-12);

    // two modes: (a*(f))^2 vac / sqrt(2) with f = (1,1)/sqrt(2) spreads
    // binomially: (|2,0> + sqrt(2) |1,1> + |0,2>) / 2
    FockSpace s(2, 10);
    double r = 1.0 / std::sqrt(2.0);
    FockVector pair =
        phase_average_product_state(s, {fcplx(r, 0.0), fcplx(r, 0.0)}, 2);
    CHECK(std::abs(pair.coeff[s.index_of({2, 0})] - fcplx(0.5, 0.0)) < 5e-8);
    CHECK(std::abs(pair.coeff[s.index_of({1, 1})] - fcplx(r, 0.0)) < 5e-8);
    CHECK(std::abs(pair.coeff[s.index_of({0, 2})] - fcplx(0.5, 0.0)) < 5e-8);
    for (std::size_t b = 0; b < s.dim(); ++b)
        if (s.total_occupation(b) != 2) CHECK(std::abs(pair.coeff[b]) < 5e-8);

    CHECK(number_expectation(pair) == doctest::Approx(2.0).epsilon(5e-8));
    CHECK(number_variance(pair) == doctest::Approx(0.0).epsilon(1e-8));

    // an asymmetric direction keeps the binomial weights
    ModeVector skew = {fcplx(0.8, 0.0), fcplx(0.0, 0.6)};
    FockVector sk = phase_average_product_state(s, skew, 2);
    CHECK(std::abs(sk.coeff[s.index_of({2, 0})] - fcplx(0.64, 0.0)) < 5e-8);
    CHECK(std::abs(std::abs(sk.coeff[s.index_of({1, 1})]) -
                   std::sqrt(2.0) * 0.48) < 5e-8);
    CHECK(std::abs(std::abs(sk.coeff[s.index_of({0, 2})]) - 0.36) < 5e-8);

    CHECK_THROWS_AS(phase_average_product_state(s, {fcplx(1.0, 0.0), fcplx(1.0, 0.0)}, 2),
                    ContractViolation); // not normalized
    CHECK_THROWS_AS(phase_average_product_state(s, skew, 6), ContractViolation);
    CHECK_THROWS_AS(phase_average_product_state(s, skew, -1), ContractViolation);
    CHECK_THROWS_AS(phase_average_product_state(FockSpace(3, 10),
                                                {fcplx(1.0, 0.0), fcplx(0.0, 0.0),
                                                 fcplx(0.0, 0.0)},
                                                2),
                    ContractViolation); // more than two modes
}

TEST_CASE("overlap is antilinear in its first argument") {
    FockSpace s(2, 4);
    FockVector u = random_low_state(s, 3, 5);
    FockVector v = random_low_state(s, 3, 6);
    fcplx base = overlap(u, v);

    FockVector cu = u;
    fcplx c(0.3, -0.7);
    for (auto& x : cu.coeff) x *= c;
    CHECK(std::abs(overlap(cu, v) - std::conj(c) * base) < 1e-14);
    CHECK(std::abs(overlap(u, v) - std::conj(overlap(v, u))) < 1e-14);

    FockSpace other(2, 5);
    FockVector w(other);
    CHECK_THROWS_AS(overlap(u, w), ContractViolation);
}
