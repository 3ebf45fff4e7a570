#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dspstab/green.hpp"
#include "dspstab/linop.hpp"
#include "dspstab/profile.hpp"
#include "dspstab/scheme.hpp"

using namespace dspstab;
using Catch::Approx;

namespace {

SchemeSpec reference_scheme() {
    return make_mlf(0.5, 0.8, burgers_flux(), burgers_flux_derivative(), -1.5, 1.5);
}

const ProfileFamily& reference_family() {
    static const ProfileFamily fam = [] {
        const SchemeSpec s = reference_scheme();
        return solve_family(s, shock_pair(s, 1.0, -1.0), {-0.0625, 0.0, 0.0625});
    }();
    return fam;
}

const BandedOp& reference_op() {
    static const BandedOp op = linearize(reference_scheme(), reference_family().reference());
    return op;
}

const EigenV& reference_v() {
    static const EigenV v = eigenvector_v(reference_op(), reference_family());
    return v;
}

SymbolData plus_symbol() {
    SymbolData sym = limit_symbol(reference_scheme(), -1.0, Side::right);
    extract_diffusion(sym);
    return sym;
}

std::vector<std::int64_t> range_list(std::int64_t lo, std::int64_t hi, std::int64_t step) {
    std::vector<std::int64_t> out;
    for (std::int64_t n = lo; n <= hi; n += step) out.push_back(n);
    return out;
}

} // namespace

TEST_CASE("gaussian kernel closed forms") {
    const KernelSpec k{1, 0.25};
    CHECK(h2mu(k, 0.0) == Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-12));
    for (double x : {0.3, 1.7, 4.0}) CHECK(h2mu(k, x) == Approx(h2mu(k, -x)).epsilon(1e-13));
}

TEST_CASE("quartic kernel against the gamma-function oracle") {
    const KernelSpec k{2, 1.0};
    // (1/pi) int_0^inf e^{-u^4} du = Gamma(5/4) / pi
    const double expected = std::tgamma(1.25) / M_PI;
    CHECK(kernel_quadrature::h2mu(k, 0.0) == Approx(expected).epsilon(1e-9));
    CHECK(h2mu(k, 1.3) == Approx(h2mu(k, -1.3)).margin(1e-10));
}

TEST_CASE("closed form vs quadrature for the gaussian kernel") {
    const KernelSpec k{1, 0.275};
    for (double x : {0.0, 0.5, 1.0, 2.5, 5.0, 9.0}) {
        CHECK(std::abs(h2mu(k, x) - kernel_quadrature::h2mu(k, x)) < 1e-10);
        CHECK(std::abs(e2mu(k, x) - kernel_quadrature::e2mu(k, x)) < 1e-10);
    }
}

TEST_CASE("error-function kernel identities") {
    for (int mu : {1, 2}) {
        const KernelSpec k{mu, 0.275};
        CHECK(e2mu(k, 0.0) == 0.5);
        for (double x : {0.25, 1.0, 2.0}) {
            CHECK(e2mu(k, -x) + e2mu(k, x) == Approx(1.0).margin(2e-10));
        }
    }
    const KernelSpec k1{1, 0.275};
    CHECK(e2mu(k1, -20.0) == Approx(1.0).margin(1e-12));
}

TEST_CASE("kernel decay bounds") {
    const KernelSpec k1{1, 0.275};
    std::vector<double> grid;
    for (double x = 0.5; x <= 6.0; x += 0.25) grid.push_back(x);
    const auto rep = kernel_bound_check(k1, 0, grid);
    CHECK(rep.pass);
    CHECK(rep.fitted_c > 0.0);
    CHECK(rep.exponent_estimate == Approx(2.0).margin(0.2));

    const auto rep_e = kernel_bound_check_e(k1, grid);
    CHECK(rep_e.pass);
    CHECK(rep_e.fitted_c > 0.0);

    const KernelSpec k2{2, 1.0};
    std::vector<double> grid2;
    for (double x = 1.0; x <= 14.0; x += 0.2) grid2.push_back(x);
    const auto rep2 = kernel_bound_check(k2, 1, grid2);
    CHECK(rep2.pass);
    CHECK(rep2.exponent_estimate == Approx(4.0 / 3.0).margin(0.15));
}

TEST_CASE("green column basics") {
    const BandedOp& op = reference_op();
    CHECK_THROWS_AS(green_column(op, -1, 0), std::invalid_argument);
    CHECK_THROWS_AS(
        decomposition_residual(op, reference_v(), plus_symbol(), {100, 200, 300}, 0),
        std::invalid_argument);

    const GreenColumn g0 = green_column(op, 0, 3);
    CHECK(g0.seq.at(3) == 1.0);
    CHECK(g0.seq.values.size() == 1);

    for (std::int64_t j0 : {-17, 0, 23}) {
        const GreenColumn g = green_column(op, 500, j0);
        CHECK(g.support_ok);
        CHECK(g.mass_error <= 1e-12 * 501.0);
    }
}

TEST_CASE("eigenvector V") {
    const EigenV& v = reference_v();
    CHECK(mass(v.seq) == Approx(1.0).margin(1e-12));
    CHECK(v.residual <= 1e-10);
    CHECK(v.method_cosine > 1.0 - 1e-6);
    CHECK(v.decay_rate == Approx(std::log(13.0 / 3.0)).margin(0.05));
    const TailedSeq lv = apply(reference_op(), v.seq, 0.0);
    CHECK(sup_norm(diff_seq(lv, v.seq, 0.0)) <= 1e-10);
}

TEST_CASE("decomposition residual decays") {
    const auto rep =
        decomposition_residual(reference_op(), reference_v(), plus_symbol(), range_list(60, 400, 4), 0);
    CHECK_FALSE(rep.linf_fit.degenerate);
    CHECK(rep.linf_fit.exponent >= 0.4);
    CHECK(rep.residual_vanishes);
    CHECK(rep.rows.back().linf < 1e-12);
}

TEST_CASE("activation factor switches around n = -j0/alpha") {
    const SymbolData sym = plus_symbol();
    const KernelSpec k{sym.mu, sym.beta};
    // j0 = 40, alpha = -0.5: transition near n = 80
    CHECK(e2mu(k, activation_argument(sym, 20, 40)) < 0.01);
    CHECK(e2mu(k, activation_argument(sym, 80, 40)) == Approx(0.5).margin(0.1));
    CHECK(e2mu(k, activation_argument(sym, 300, 40)) > 0.99);
}

TEST_CASE("decomposition is sensitive to the drift") {
    // wrong drift misplaces the activation transition and inflates the residual
    const auto& op = reference_op();
    const auto& v = reference_v();
    SymbolData correct = plus_symbol();
    SymbolData fast = correct;
    fast.alpha *= 1.5;
    SymbolData slow = correct;
    slow.alpha *= 0.9;
    const auto n_list = range_list(60, 240, 4);
    auto total = [&](const SymbolData& sym) {
        const auto rep = decomposition_residual(op, v, sym, n_list, 40);
        double acc = 0.0;
        for (const auto& r : rep.rows) acc += r.linf;
        return acc;
    };
    const double base = total(correct);
    CHECK(total(fast) > base);
    CHECK(total(slow) > base);
}

TEST_CASE("discrete derivative of the green function decays in l1") {
    const auto rep = derivative_decay(reference_op(), 0, range_list(0, 300, 4));
    CHECK(rep.l1[0] == Approx(2.0)); // n = 0: delta_0 - delta_{-1}
    for (double m : rep.mass_abs) CHECK(m < 1e-12);
    CHECK_FALSE(rep.l1_fit.degenerate);
    CHECK(rep.l1_fit.exponent >= 0.4);
}

TEST_CASE("semigroup decay of a zero-mass dipole") {
    TailedSeq dipole;
    dipole.offset = 0;
    dipole.values = {1.0, -1.0}; // delta_0 - delta_1
    const auto rep = semigroup_decay(reference_op(), dipole, {norm_linf(0.0), norm_l1(0.0)}, 300,
                                     /*Gamma=*/1.0, /*mu=*/1);
    CHECK(rep.rows[0].target_exponent == Approx(1.0));
    CHECK_FALSE(rep.rows[0].fit.degenerate);
    CHECK(rep.rows[0].fit.exponent >= 0.8);
}

TEST_CASE("semigroup rejects nonzero mass when zero mass is required") {
    CHECK_THROWS_AS(semigroup_decay(reference_op(), make_dirac(0), {norm_l1(0.0)}, 10, 1.0, 1),
                    std::invalid_argument);
}

TEST_CASE("nonzero-mass data converges to mass(h) V") {
    const TailedSeq h = make_dirac(2, 0.7);
    const auto rep = semigroup_decay(reference_op(), h, {norm_linf(0.0)}, 400, 0.0, 1,
                                     /*zero_mass_required=*/false);
    const double plateau = rep.rows[0].norms.back();
    const double expected = 0.7 * weighted_norm(reference_v().seq, norm_linf(0.0));
    CHECK(plateau == Approx(expected).epsilon(1e-6));
}

TEST_CASE("the eigenvector is a fixed point of the semigroup") {
    const auto rep = semigroup_decay(reference_op(), reference_v().seq, {norm_linf(0.0)}, 200, 0.0,
                                     1, /*zero_mass_required=*/false);
    const double n0 = weighted_norm(reference_v().seq, norm_linf(0.0));
    for (double v : rep.rows[0].norms) CHECK(v == Approx(n0).epsilon(1e-9));
}
