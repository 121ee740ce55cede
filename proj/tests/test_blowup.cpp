#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "collapsar/blowup.hpp"
#include "collapsar/energy.hpp"
#include "collapsar/errors.hpp"
#include "collapsar/evolution.hpp"
#include "collapsar/field.hpp"
#include "collapsar/spectral.hpp"

#include "oracles.hpp"

using namespace collapsar;

TEST_CASE("radial deviation vanishes exactly for centered profiles") {
    Grid g(16, 8.0);
    // shell decomposition is exact in cell units, so a centered radial
    // profile has identical values on every shell node
    CHECK(radial_deviation(make_gaussian(g, 1.0)) < 1e-14);
    CHECK(radial_deviation(make_gaussian(g, 0.7)) < 1e-14);

    CHECK(radial_deviation(make_gaussian(g, 1.0, {0.5, 0.0, 0.0})) > 1e-2);
    CHECK(radial_deviation(make_plane_wave(g, {1, 0, 0})) > 0.1);

    Field zero(g, Rep::position);
    CHECK_THROWS_AS(radial_deviation(zero), ContractViolation);
    CHECK_THROWS_AS(radial_deviation(to_frequency(make_gaussian(g, 1.0))),
                    ContractViolation);
}

TEST_CASE("collapse eligibility combines sign, symmetry, and variance") {
    Grid g(32, 16.0);
    Field f = make_gaussian(g, 1.0);
    InteractionKernel kernel(g, 0.0);
    double ls = negative_energy_threshold(f, kernel);

    FLCriterion super = fl_check(f, 3.0 * ls, kernel);
    CHECK(super.eligible);
    CHECK(super.radial);
    CHECK(super.energy_negative);
    CHECK(super.variance_finite);
    // integral |x|^2 |f|^2 = 3 sigma^2 / 2 for the unit Gaussian
    CHECK(super.variance == doctest::Approx(1.5).epsilon(1e-8));
    CHECK(super.energy_total == doctest::Approx(-2.0 * energy(f, 0.0, kernel).kinetic)
                                    .epsilon(1e-10));

    FLCriterion sub = fl_check(f, 1.0, kernel);
    CHECK(!sub.eligible);
    CHECK(!sub.energy_negative);
    CHECK(sub.radial);

    Field off = make_gaussian(g, 1.0, {0.5, 0.0, 0.0});
    FLCriterion displaced = fl_check(off, 3.0 * ls, kernel);
    CHECK(!displaced.eligible);
    CHECK(!displaced.radial);
    CHECK(displaced.radial_deviation > 1e-2);
    // a loose tolerance re-admits the displaced profile
    CHECK(fl_check(off, 3.0 * ls, kernel, 1.0).eligible);

    CHECK_THROWS_AS(fl_check(f, 1.0, kernel, 0.0), ContractViolation);
    CHECK_THROWS_AS(fl_check(to_frequency(f), 1.0, kernel), ContractViolation);
}

TEST_CASE("tail fraction splits the lattice at the outer third") {
    Grid g(12, 6.0);

    // single modes land entirely inside or outside the cut 3|s| >= n; the
    // inside cases leave only FFT roundoff (~1e-16 amplitude, squared)
    CHECK(tail_fraction(make_plane_wave(g, {3, 0, 0})) < 1e-30);
    CHECK(tail_fraction(make_plane_wave(g, {4, 0, 0})) == 1.0);
    CHECK(tail_fraction(make_plane_wave(g, {0, 0, -6})) == 1.0); // Nyquist
    CHECK(tail_fraction(make_plane_wave(g, {1, -2, 0})) < 1e-30);

    Grid fine(32, 16.0);
    Field f = make_gaussian(fine, 1.0);
    CHECK(tail_fraction(f) < 1e-7); // spectrum ~ exp(-18.7) past the cut
    // accepts either representation
    CHECK(tail_fraction(to_frequency(f)) == doctest::Approx(tail_fraction(f)));

    Field zero(g, Rep::position);
    CHECK_THROWS_AS(tail_fraction(zero), ContractViolation);
}

TEST_CASE("verdict scan finds the first crossing") {
    std::vector<double> times = {0.0, 0.1, 0.2, 0.3, 0.4};
    std::vector<double> flat = {1.0, 1.0, 1.0, 1.0, 1.0};
    std::vector<double> quiet = {0.0, 0.0, 0.0, 0.0, 0.0};

    BlowupVerdict none = check(times, flat, quiet, 10.0, 0.01);
    CHECK(!none.detected);
    CHECK(none.reason == BlowupVerdict::Reason::none);

    std::vector<double> growing = {1.0, 2.0, 5.0, 10.0, 12.0};
    BlowupVerdict by_norm = check(times, growing, quiet, 10.0, 0.01);
    CHECK(by_norm.detected);
    CHECK(by_norm.reason == BlowupVerdict::Reason::h_half_threshold);
    CHECK(by_norm.t_detect == 0.3); // >= threshold counts
    CHECK(by_norm.h_half_at_detect == 10.0);

    std::vector<double> leaking = {0.0, 0.0, 0.02, 0.05, 0.1};
    BlowupVerdict by_tail = check(times, flat, leaking, 10.0, 0.01);
    CHECK(by_tail.detected);
    CHECK(by_tail.reason == BlowupVerdict::Reason::tail_threshold);
    CHECK(by_tail.t_detect == 0.2);
    CHECK(by_tail.tail_at_detect == 0.02);

    // earlier trigger wins regardless of kind
    BlowupVerdict first = check(times, growing, leaking, 10.0, 0.01);
    CHECK(first.t_detect == 0.2);
    CHECK(first.reason == BlowupVerdict::Reason::tail_threshold);

    // on a simultaneous crossing the norm reason is reported
    std::vector<double> both = {1.0, 1.0, 1.0, 10.0, 10.0};
    std::vector<double> same = {0.0, 0.0, 0.0, 0.5, 0.5};
    BlowupVerdict tie = check(times, both, same, 10.0, 0.01);
    CHECK(tie.reason == BlowupVerdict::Reason::h_half_threshold);
    CHECK(tie.t_detect == 0.3);

    // thresholds are relative to the first row
    std::vector<double> scaled = {2.0, 2.0, 2.0, 20.0, 20.0};
    CHECK(check(times, scaled, quiet, 10.0, 0.01).t_detect == 0.3);
}

TEST_CASE("verdict scan contracts") {
    std::vector<double> times = {0.0, 0.1};
    std::vector<double> ok = {1.0, 1.0};
    std::vector<double> shorter = {1.0};

    CHECK_THROWS_AS(check(times, shorter, ok, 10.0, 0.01), ContractViolation);
    CHECK_THROWS_AS(check(times, ok, shorter, 10.0, 0.01), ContractViolation);
    CHECK_THROWS_AS(check({}, {}, {}, 10.0, 0.01), ContractViolation);
    CHECK_THROWS_AS(check(times, ok, ok, 1.0, 0.01), ContractViolation);
    CHECK_THROWS_AS(check(times, ok, ok, 10.0, 0.0), ContractViolation);
}

TEST_CASE("supercritical coupling trips detection in a short run") {
    Grid g(16, 8.0);
    Field f0 = make_gaussian(g, 1.0);
    InteractionKernel kernel(g, 0.0);
    double ls = negative_energy_threshold(f0, kernel);
    REQUIRE(fl_check(f0, 3.0 * ls, kernel).eligible);

    HartreeParams p;
    p.lambda = 3.0 * ls;
    p.t_end = 2.0;
    p.dt_init = 2e-3;
    p.adapt_exponent = 0.0;
    p.monitor_stride = 10;
    Trajectory traj = evolve(f0, p);

    CHECK(traj.termination == Termination::blowup_detected);
    CHECK(traj.verdict.detected);
    CHECK(traj.verdict.t_detect < 2.0);
    CHECK(traj.verdict.t_detect == traj.times.back());
    CHECK(traj.verdict.t_detect > 0.0);

    // the subcritical twin stays smooth for the whole window
    p.lambda = 1.0;
    Trajectory calm = evolve(f0, p);
    CHECK(calm.termination == Termination::completed);
    CHECK(!calm.verdict.detected);
}
