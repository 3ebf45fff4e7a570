#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "dspstab/numerics.hpp"
#include "dspstab/seqcore.hpp"
#include "dspstab/stability.hpp"

using namespace dspstab;
using Catch::Approx;

namespace {

TailedSeq random_compact(Rng& rng, int max_half = 30) {
    TailedSeq h;
    const std::int64_t lo = rng.uniform_int(-max_half, 0);
    const std::int64_t hi = rng.uniform_int(0, max_half);
    h.offset = lo;
    h.values.resize(static_cast<std::size_t>(hi - lo + 1));
    for (auto& v : h.values) v = rng.uniform(-2.0, 2.0);
    return h;
}

} // namespace

TEST_CASE("weighted norm on canonical examples") {
    const TailedSeq dirac = make_dirac(0);
    CHECK(weighted_norm(dirac, norm_l1(0.0)) == 1.0);
    CHECK(weighted_norm(dirac, norm_l1(3.7)) == 1.0);

    const TailedSeq at_one = make_dirac(1);
    CHECK(weighted_norm(at_one, norm_linf(1.0)) == Approx(2.0));

    const TailedSeq hJ = make_hJ(7, 2.5);
    CHECK(weighted_norm(hJ, norm_l1(2.5)) == Approx(1.0).margin(1e-15));
}

TEST_CASE("weighted norm rejects nonzero tails") {
    TailedSeq s = make_constant(1.0);
    CHECK_THROWS_WITH(weighted_norm(s, norm_l1(0.0)),
                      Catch::Matchers::ContainsSubstring("non-summable"));
    CHECK_THROWS_AS(mass(s), std::invalid_argument);
}

TEST_CASE("mass on canonical examples") {
    CHECK(mass(make_dirac(0)) == 1.0);
    CHECK(mass(make_hJ(12, 2.0)) == 0.0);
    TailedSeq pair;
    pair.offset = 0;
    pair.values = {-2.0, 0.0, 0.0, 0.0, 0.0, 2.0};
    CHECK(mass(pair) == 0.0);
}

TEST_CASE("shift semantics") {
    const TailedSeq d1 = make_dirac(1);
    const TailedSeq shifted = shift(d1);
    CHECK(shifted.at(0) == 1.0);
    CHECK(shifted.at(1) == 0.0);

    const TailedSeq c = make_constant(3.25);
    const TailedSeq cs = shift(c);
    for (std::int64_t j : {-5, 0, 7}) CHECK(cs.at(j) == c.at(j));
}

TEST_CASE("shift properties over random compact sequences") {
    Rng rng(2024);
    for (int t = 0; t < 50; ++t) {
        const TailedSeq h = random_compact(rng);
        // telescoping: mass(h - shift h) = 0
        CHECK(std::abs(mass(diff_seq(h, shift(h)))) < 1e-12);
        // bijection on stored data
        const TailedSeq round = unshift(shift(h));
        REQUIRE(round.offset == h.offset);
        REQUIRE(round.values == h.values);
    }
}

TEST_CASE("diff_seq basics") {
    Rng rng(7);
    const TailedSeq h = random_compact(rng);
    const TailedSeq zero = diff_seq(h, h);
    CHECK(zero.compact());
    CHECK(zero.values.empty());

    // step minus shifted step: single transition cell of mass 2
    const TailedSeq step = make_step(1.0, -1.0, 0);
    const TailedSeq d = diff_seq(step, shift(step));
    CHECK(d.compact());
    CHECK(mass(d) == Approx(2.0));
    CHECK(d.at(-1) == Approx(2.0));
    CHECK(d.at(0) == 0.0);
}

TEST_CASE("norm ordering invariants") {
    Rng rng(99);
    for (int t = 0; t < 50; ++t) {
        const TailedSeq h = random_compact(rng);
        const double g = rng.uniform(0.0, 2.0);
        const double G = g + rng.uniform(0.0, 2.0);
        CHECK(weighted_norm(h, norm_l1(g)) <= weighted_norm(h, norm_l1(G)) + 1e-12);
        CHECK(weighted_norm(h, norm_linf(g)) <= weighted_norm(h, norm_l1(g)) + 1e-12);
        CHECK(std::abs(mass(h)) <= weighted_norm(h, norm_l1(0.0)) + 1e-12);
    }
}

TEST_CASE("canonicalization trims tail-equal edges") {
    TailedSeq s;
    s.offset = -2;
    s.values = {5e-15, 1.0, 2.0, -5e-15, 0.0};
    const TailedSeq c = canonicalized(s);
    CHECK(c.offset == -1);
    CHECK(c.values.size() == 2);
    CHECK(c.at(-1) == 1.0);
    CHECK(c.at(0) == 2.0);
}

TEST_CASE("csv round trip") {
    Rng rng(5);
    TailedSeq s = random_compact(rng);
    s.left_tail = 1.0;
    s.right_tail = -1.0;
    std::stringstream buf;
    write_seq_csv(buf, s);
    const TailedSeq back = read_seq_csv(buf);
    REQUIRE(back.offset == s.offset);
    REQUIRE(back.values == s.values);
    CHECK(back.left_tail == s.left_tail);
    CHECK(back.right_tail == s.right_tail);
}
