#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dspstab/profile.hpp"
#include "dspstab/scheme.hpp"
#include "dspstab/stability.hpp"

using namespace dspstab;
using Catch::Approx;

namespace {

SchemeSpec reference_scheme() {
    return make_mlf(0.5, 0.8, burgers_flux(), burgers_flux_derivative(), -1.5, 1.5);
}

const ProfileFamily& reference_family() {
    static const ProfileFamily fam = [] {
        const SchemeSpec s = reference_scheme();
        return solve_family(s, shock_pair(s, 1.0, -1.0),
                            {-0.5, -0.25, -0.125, -0.0625, 0.0, 0.0625, 0.125, 0.25, 0.5});
    }();
    return fam;
}

} // namespace

TEST_CASE("reference profile: odd-like transition pinned at zero") {
    const Profile& pr = reference_family().reference();
    CHECK(pr.residual <= 1e-13);
    CHECK(pr.seq.left_tail == 1.0);
    CHECK(pr.seq.right_tail == -1.0);
    CHECK(std::abs(pr.seq.at(0)) < 1e-13);
    for (std::int64_t j = 1; j <= 10; ++j) {
        CHECK(pr.seq.at(j) < 0.0);
        CHECK(pr.seq.at(-j) == Approx(-pr.seq.at(j)).margin(1e-12));
        CHECK(pr.seq.at(j) > pr.seq.at(j + 1)); // monotone decreasing
    }
}

TEST_CASE("solve_sdsp preconditions") {
    const SchemeSpec s = reference_scheme();
    const ShockPair bad = shock_pair(s, 1.0, 0.5);
    CHECK_THROWS_AS(solve_sdsp(s, bad, 0.0), std::invalid_argument);
}

TEST_CASE("restart from a converged profile returns immediately") {
    const SchemeSpec s = reference_scheme();
    const ShockPair sp = shock_pair(s, 1.0, -1.0);
    const Profile& pr = reference_family().reference();
    const Profile again = solve_sdsp(s, sp, 0.0, 60, 1e-12, 1000000, pr.seq);
    CHECK(again.iterations <= 1);
}

TEST_CASE("mass parametrization M(delta) = delta") {
    const ProfileFamily& fam = reference_family();
    for (double d : {-0.5, -0.25, 0.25, 0.5})
        CHECK(mass_function(fam, d) == Approx(d).margin(1e-8));
    CHECK(mass_function(fam, 0.0) == 0.0);

    // monotone over the sampled grid
    double prev = -1e9;
    for (const auto& m : fam.members) {
        const double mm = mass_function(fam, m.delta);
        CHECK(mm > prev);
        prev = mm;
    }
}

TEST_CASE("localization rates of the reference profile") {
    const auto rates = localization_rates(reference_family().reference());
    CHECK(rates.exponential_left);
    CHECK(rates.exponential_right);
    CHECK(rates.rate_left > 0.5);
    CHECK(rates.rate_right > 0.5);
    // decay per cell should match the stable root log(13/3)
    CHECK(rates.rate_right == Approx(std::log(13.0 / 3.0)).margin(0.05));
}

TEST_CASE("localization flags algebraic tails") {
    Profile fake;
    fake.seq.offset = -2000;
    fake.seq.left_tail = 1.0;
    fake.seq.right_tail = -1.0;
    fake.seq.values.resize(4001);
    for (std::int64_t j = -2000; j <= 2000; ++j) {
        const double v = j == 0 ? 0.0 : 1.0 / static_cast<double>(j);
        fake.seq.values[static_cast<std::size_t>(j + 2000)] =
            (j < 0 ? 1.0 : -1.0) + v; // tails approached like 1/j
    }
    const auto rates = localization_rates(fake);
    CHECK_FALSE(rates.exponential_right);
}

TEST_CASE("localization on the raw step datum reports the infinite-rate surrogate") {
    Profile step;
    step.seq = sdsp_initial_datum(ShockPair{1.0, -1.0, 0.0, true}, 0.0);
    const auto rates = localization_rates(step);
    CHECK(std::isinf(rates.rate_left));
    CHECK(std::isinf(rates.rate_right));
}

TEST_CASE("localization rejects windows with too few usable points") {
    Profile narrow;
    narrow.seq.offset = -6;
    narrow.seq.left_tail = 1.0;
    narrow.seq.right_tail = -1.0;
    narrow.seq.values.resize(13);
    for (std::int64_t j = -6; j <= 6; ++j)
        narrow.seq.values[static_cast<std::size_t>(j + 6)] =
            (j < 0 ? 1.0 : -1.0) + 1e-3 * std::exp(-std::abs(static_cast<double>(j)));
    CHECK_THROWS_WITH(localization_rates(narrow),
                      Catch::Matchers::ContainsSubstring("degenerate window"));
}

TEST_CASE("family lipschitz bound") {
    const auto rep = family_lipschitz_check(reference_family());
    CHECK(rep.pass);
    CHECK(rep.max_ratio < 100.0);
    CHECK(rep.fitted_c > 0.0);
    CHECK(rep.anomalies.empty());
}

TEST_CASE("family lipschitz flags a collapsed member") {
    ProfileFamily fam = reference_family();
    for (auto& m : fam.members)
        if (m.delta == 0.5) m.seq = fam.reference().seq; // zero difference at delta != 0
    const auto rep = family_lipschitz_check(fam);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.anomalies.size() == 1);
    CHECK(rep.anomalies.front() == 0.5);
}

TEST_CASE("single-sided family still passes") {
    const SchemeSpec s = reference_scheme();
    const ProfileFamily fam =
        solve_family(s, shock_pair(s, 1.0, -1.0), {0.0, 0.125, 0.25, 0.375});
    CHECK(family_lipschitz_check(fam).pass);
}

TEST_CASE("identify_delta by mass") {
    const ProfileFamily& fam = reference_family();
    CHECK(identify_delta(fam, make_hJ(9, 2.0)) == 0.0);

    TailedSeq h = make_dirac(0, 0.3);
    CHECK(identify_delta(fam, h) == Approx(0.3).margin(1e-6));

    TailedSeq big = make_dirac(0, 0.75); // beyond the solved grid
    CHECK_THROWS_WITH(identify_delta(fam, big),
                      Catch::Matchers::ContainsSubstring("outside family range"));
}
