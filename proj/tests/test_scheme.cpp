#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dspstab/numerics.hpp"
#include "dspstab/profile.hpp"
#include "dspstab/scheme.hpp"

using namespace dspstab;
using Catch::Approx;

namespace {

SchemeSpec reference_scheme() {
    return make_mlf(0.5, 0.8, burgers_flux(), burgers_flux_derivative(), -1.5, 1.5);
}

} // namespace

TEST_CASE("make_mlf rejects bad parameters") {
    CHECK_THROWS_AS(make_mlf(-0.5, 0.8, burgers_flux(), burgers_flux_derivative(), -1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_mlf(0.5, 0.0, burgers_flux(), burgers_flux_derivative(), -1, 1),
                    std::invalid_argument);
}

TEST_CASE("reference scheme satisfies nu < 2 D nu < 1") {
    const SchemeSpec s = reference_scheme();
    CHECK(s.nu < 2.0 * 0.8 * s.nu);
    CHECK(2.0 * 0.8 * s.nu < 1.0);
}

TEST_CASE("constants are fixed points of evolve") {
    const SchemeSpec s = reference_scheme();
    for (double c : {-1.25, -0.3, 0.0, 0.7, 1.25}) {
        const TailedSeq u = make_constant(c);
        const TailedSeq v = evolve(s, u);
        CHECK(v.values.empty());
        CHECK(v.left_tail == c);
        CHECK(v.right_tail == c);
    }
}

TEST_CASE("one mLF step on the reference step datum") {
    // (..., 1, 1, 0, -1, -1, ...) with the 0 at index 0
    const SchemeSpec s = reference_scheme();
    TailedSeq u;
    u.offset = 0;
    u.values = {0.0};
    u.left_tail = 1.0;
    u.right_tail = -1.0;
    const TailedSeq v = evolve(s, u);
    CHECK(v.at(-2) == Approx(1.0));
    CHECK(v.at(-1) == Approx(0.725));
    CHECK(v.at(0) == Approx(0.0).margin(1e-15));
    CHECK(v.at(1) == Approx(-0.725));
    CHECK(v.at(2) == Approx(-1.0));
}

TEST_CASE("evolve rejects states outside U") {
    const SchemeSpec s = reference_scheme();
    TailedSeq u = make_constant(0.0);
    u.offset = 3;
    u.values = {2.0};
    CHECK_THROWS_WITH(evolve(s, u), Catch::Matchers::ContainsSubstring("state escaped U at index 3"));
}

TEST_CASE("mass conservation along the nonlinear evolution") {
    const SchemeSpec s = reference_scheme();
    const ShockPair sp = shock_pair(s, 1.0, -1.0);
    const Profile pr = solve_sdsp(s, sp, 0.0);
    Rng rng(31337);
    for (int t = 0; t < 20; ++t) {
        TailedSeq h;
        h.offset = rng.uniform_int(-10, 0);
        h.values.resize(static_cast<std::size_t>(rng.uniform_int(1, 15)));
        for (auto& v : h.values) v = rng.uniform(-0.05, 0.05);
        TailedSeq u = add_seq(pr.seq, h, 0.0);
        const double m0 = mass(diff_seq(u, pr.seq, 0.0));
        for (int n = 0; n < 10; ++n) u = evolve(s, u, 1e-300);
        const double m1 = mass(diff_seq(u, pr.seq, 0.0));
        CHECK(std::abs(m1 - m0) < 1e-12);
    }
}

TEST_CASE("finite speed of support growth") {
    // evolving u and ubar in lockstep keeps the difference support exact:
    // cells whose stencils see identical states produce identical outputs
    const SchemeSpec s = reference_scheme();
    const ShockPair sp = shock_pair(s, 1.0, -1.0);
    const Profile pr = solve_sdsp(s, sp, 0.0);
    TailedSeq u = add_seq(pr.seq, make_dirac(5, 0.01), 0.0);
    TailedSeq ref = pr.seq;
    for (int n = 1; n <= 8; ++n) {
        u = evolve(s, u, 1e-300);
        ref = evolve(s, ref, 1e-300);
        const TailedSeq d = diff_seq(u, ref, 0.0);
        CHECK(d.lo() >= 5 - n * s.q);
        CHECK(d.hi() <= 5 + n * s.p);
    }
}

TEST_CASE("consistency checks") {
    const SchemeSpec s = reference_scheme();
    const auto rep = check_consistency(s);
    CHECK(rep.pass);
    CHECK(rep.worst_value == 0.0); // (f+f)/2 + D*0 is exactly f

    SchemeSpec broken = s;
    broken.numerical_flux = [base = s.numerical_flux](double nu, std::span<const double> u) {
        return base(nu, u) + 0.01;
    };
    const auto rep2 = check_consistency(broken);
    CHECK_FALSE(rep2.pass);
    CHECK(rep2.worst_value == Approx(0.01));

    // Lax-Friedrichs viscosity D = 1/(2 nu)
    const SchemeSpec lf = make_mlf(0.5, 1.0, burgers_flux(), burgers_flux_derivative(), -1.5, 1.5);
    CHECK(check_consistency(lf).pass);
}

TEST_CASE("cfl checks") {
    const SchemeSpec s = reference_scheme();
    const auto rep = check_cfl(s);
    CHECK(rep.pass);
    CHECK(rep.worst_value == Approx(0.25).margin(1e-6)); // 1 - 0.5*1.5

    const SchemeSpec fast = make_mlf(3.0, 0.1, burgers_flux(), burgers_flux_derivative(), -1.5, 1.5);
    CHECK_FALSE(check_cfl(fast).pass);

    const SchemeSpec still =
        make_mlf(7.0, 0.01, [](double) { return 1.0; }, [](double) { return 0.0; }, -1.5, 1.5);
    CHECK(check_cfl(still).pass);
}

TEST_CASE("shock pair classification") {
    const SchemeSpec s = reference_scheme();
    const ShockPair lax = shock_pair(s, 1.0, -1.0);
    CHECK(lax.rh_residual == 0.0);
    CHECK(lax.lax_ok);

    const ShockPair not_lax = shock_pair(s, 1.0, 0.5);
    CHECK(not_lax.rh_residual == Approx(0.375));
    CHECK_FALSE(not_lax.lax_ok);

    const ShockPair equal = shock_pair(s, 0.25, 0.25);
    CHECK(equal.rh_residual == 0.0);
    CHECK_FALSE(equal.lax_ok);

    CHECK_THROWS_AS(shock_pair(s, 5.0, -1.0), std::invalid_argument);
}
