#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dspstab/numerics.hpp"
#include "dspstab/profile.hpp"
#include "dspstab/scheme.hpp"
#include "dspstab/seqcore.hpp"

namespace dspstab {

/// Banded operator (L h)_j = sum_{k=-p}^{q} a_{j,k} h_{j+k} with spatially
/// varying coefficients inside [win_lo, win_hi] and constant limits outside.
/// The b tables hold the flux Jacobian entries b_{j,k} = nu dF/du_k, k in
/// {-p,...,q-1}, from which the a coefficients are assembled.
struct BandedOp {
    int p = 1;
    int q = 1;
    std::int64_t win_lo = 0;
    std::int64_t win_hi = -1;
    std::vector<double> a_var;   // (win_hi-win_lo+1) rows of p+q+1 entries, k = -p..q
    std::vector<double> a_left, a_right;
    std::vector<double> b_var;   // rows of p+q entries, k = -p..q-1
    std::vector<double> b_left, b_right;

    std::int64_t rows() const { return win_hi - win_lo + 1; }

    double a(std::int64_t j, int k) const {
        if (j < win_lo) return a_left[static_cast<std::size_t>(k + p)];
        if (j > win_hi) return a_right[static_cast<std::size_t>(k + p)];
        return a_var[static_cast<std::size_t>(j - win_lo) * (p + q + 1) + static_cast<std::size_t>(k + p)];
    }

    double b(std::int64_t j, int k) const {
        if (j < win_lo) return b_left[static_cast<std::size_t>(k + p)];
        if (j > win_hi) return b_right[static_cast<std::size_t>(k + p)];
        return b_var[static_cast<std::size_t>(j - win_lo) * (p + q) + static_cast<std::size_t>(k + p)];
    }
};

namespace detail {

/// nu * dF/du_k at the given stencil states: central differences over steps
/// h, h/2, h/4 with two Richardson stages. The base step is large enough to
/// keep the subtraction noise below the band-edge vanishing threshold of the
/// hypothesis checks; the O(h^6) truncation is negligible for smooth fluxes.
inline std::vector<double> flux_jacobian_row(const SchemeSpec& s, std::vector<double> states,
                                             double step = 1e-3) {
    const int m = s.stencil_size();
    std::vector<double> b(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double saved = states[static_cast<std::size_t>(k)];
        auto central = [&](double h) {
            states[static_cast<std::size_t>(k)] = saved + h;
            const double fp = s.numerical_flux(s.nu, states);
            states[static_cast<std::size_t>(k)] = saved - h;
            const double fm = s.numerical_flux(s.nu, states);
            states[static_cast<std::size_t>(k)] = saved;
            return (fp - fm) / (2.0 * h);
        };
        const double d1 = central(step);
        const double d2 = central(step / 2.0);
        const double d4 = central(step / 4.0);
        const double r1 = (4.0 * d2 - d1) / 3.0;
        const double r2 = (4.0 * d4 - d2) / 3.0;
        b[static_cast<std::size_t>(k)] = s.nu * ((16.0 * r2 - r1) / 15.0);
    }
    return b;
}

/// Assemble a_{j,k} from b_{j,k} and b_{j+1,k}:
///   a_{j,q} = -b_{j+1,q-1}, a_{j,-p} = b_{j,-p},
///   a_{j,k} = delta_{k,0} + b_{j,k} - b_{j+1,k-1} otherwise.
inline std::vector<double> assemble_a_row(int p, int q, const std::vector<double>& b_j,
                                          const std::vector<double>& b_j1) {
    std::vector<double> a(static_cast<std::size_t>(p + q + 1), 0.0);
    for (int k = -p; k <= q; ++k) {
        double v;
        if (k == q)
            v = -b_j1[static_cast<std::size_t>(q - 1 + p)];
        else if (k == -p)
            v = b_j[0];
        else
            v = (k == 0 ? 1.0 : 0.0) + b_j[static_cast<std::size_t>(k + p)] -
                b_j1[static_cast<std::size_t>(k - 1 + p)];
        a[static_cast<std::size_t>(k + p)] = v;
    }
    return a;
}

} // namespace detail

/// Linearize the evolution operator about a converged profile.
inline BandedOp linearize(const SchemeSpec& s, const Profile& pr) {
    if (!(pr.residual <= 1e-9))
        throw std::invalid_argument("linearize: profile not converged");
    const int p = s.p, q = s.q, m = p + q;
    BandedOp op;
    op.p = p;
    op.q = q;
    // rows whose stencil can touch the profile window, plus one for the b_{j+1} coupling
    const std::int64_t seq_lo = pr.seq.empty_window() ? pr.seq.offset : pr.seq.lo();
    const std::int64_t seq_hi = pr.seq.empty_window() ? pr.seq.offset : pr.seq.hi();
    op.win_lo = seq_lo - m - 1;
    op.win_hi = seq_hi + m + 1;

    std::vector<double> states(static_cast<std::size_t>(m));
    auto b_row_at = [&](std::int64_t j) {
        for (int k = 0; k < m; ++k) states[static_cast<std::size_t>(k)] = pr.seq.at(j - p + k);
        return detail::flux_jacobian_row(s, states);
    };
    std::fill(states.begin(), states.end(), pr.seq.left_tail);
    op.b_left = detail::flux_jacobian_row(s, states);
    std::fill(states.begin(), states.end(), pr.seq.right_tail);
    op.b_right = detail::flux_jacobian_row(s, states);
    op.a_left = detail::assemble_a_row(p, q, op.b_left, op.b_left);
    op.a_right = detail::assemble_a_row(p, q, op.b_right, op.b_right);

    const std::int64_t rows = op.rows();
    op.b_var.resize(static_cast<std::size_t>(rows) * m);
    op.a_var.resize(static_cast<std::size_t>(rows) * (m + 1));
    std::vector<std::vector<double>> b_rows(static_cast<std::size_t>(rows + 1));
    for (std::int64_t j = op.win_lo; j <= op.win_hi + 1; ++j)
        b_rows[static_cast<std::size_t>(j - op.win_lo)] = b_row_at(j);
    for (std::int64_t j = op.win_lo; j <= op.win_hi; ++j) {
        const std::size_t r = static_cast<std::size_t>(j - op.win_lo);
        const auto a = detail::assemble_a_row(p, q, b_rows[r], b_rows[r + 1]);
        std::copy(a.begin(), a.end(), op.a_var.begin() + static_cast<std::ptrdiff_t>(r * (m + 1)));
        std::copy(b_rows[r].begin(), b_rows[r].end(),
                  op.b_var.begin() + static_cast<std::ptrdiff_t>(r * m));
    }
    return op;
}

/// Banded matrix-vector product on a compact sequence; widens the window by q
/// on the left and p on the right before trimming.
inline TailedSeq apply(const BandedOp& op, const TailedSeq& h, double trim_tol = kCanonicalTrimTol) {
    if (!h.compact()) throw std::invalid_argument("apply: sequence must have zero tails");
    if (h.empty_window()) return h;
    TailedSeq out;
    out.offset = h.lo() - op.q;
    out.values.assign(h.values.size() + static_cast<std::size_t>(op.p + op.q), 0.0);
    const std::int64_t h_lo = h.lo(), h_hi = h.hi();
    for (std::int64_t j = out.lo(); j <= out.hi(); ++j) {
        double acc = 0.0;
        const std::int64_t k_min = std::max<std::int64_t>(-op.p, h_lo - j);
        const std::int64_t k_max = std::min<std::int64_t>(op.q, h_hi - j);
        for (std::int64_t k = k_min; k <= k_max; ++k)
            acc += op.a(j, static_cast<int>(k)) * h.values[static_cast<std::size_t>(j + k - h_lo)];
        out.values[static_cast<std::size_t>(j - out.lo())] = acc;
    }
    return canonicalized(std::move(out), trim_tol);
}

/// (L^delta - L) h; the result has zero mass by the conservative structure.
inline TailedSeq op_difference_apply(const BandedOp& op_a, const BandedOp& op_b, const TailedSeq& h,
                                     double trim_tol = kCanonicalTrimTol) {
    if (op_a.p != op_b.p || op_a.q != op_b.q)
        throw std::invalid_argument("op_difference_apply: stencil mismatch");
    TailedSeq out = diff_seq(apply(op_a, h, 0.0), apply(op_b, h, 0.0), trim_tol);
    const double m = mass(out);
    const double scale = std::max(1.0, sup_norm(h));
    if (std::abs(m) > 1e-10 * scale)
        throw std::runtime_error("op_difference_apply: zero-mass identity violated");
    return out;
}

/// Conservation sums sum_k a_{j-k,k}; these are exactly one by the telescoping
/// structure of the coefficients and underlie the mass conservation of L.
inline double conservation_sum(const BandedOp& op, std::int64_t j) {
    double s = 0.0;
    for (int k = -op.p; k <= op.q; ++k) s += op.a(j - k, k);
    return s;
}

// ---------------------------------------------------------------------------
// Limiting symbols F^{+-}(kappa) = sum_k a_k^{+-} kappa^k and their expansion
// data: drift alpha, diffusion order mu, diffusion coefficient beta.
// ---------------------------------------------------------------------------

enum class Side { left, right };

struct SymbolData {
    Side side = Side::right;
    int p = 1;
    int q = 1;
    double state = 0.0;
    std::vector<double> coeffs; // a_k, k = -p..q
    double alpha = 0.0;         // nu f'(u^{+-}) = -F'(1)
    int mu = 0;                 // 0 until extract_diffusion succeeds
    complex_t beta = 0.0;
    bool dissipative = false;
    std::vector<complex_t> unit_roots;

    complex_t eval(complex_t kappa) const {
        if (kappa == complex_t(0.0)) throw std::invalid_argument("SymbolData: kappa must be nonzero");
        complex_t acc = 0.0;
        complex_t pw = std::pow(kappa, -p);
        for (int k = -p; k <= q; ++k) {
            acc += coeffs[static_cast<std::size_t>(k + p)] * pw;
            pw *= kappa;
        }
        return acc;
    }

    double derivative_at_one() const {
        double acc = 0.0;
        for (int k = -p; k <= q; ++k) acc += static_cast<double>(k) * coeffs[static_cast<std::size_t>(k + p)];
        return acc;
    }
};

inline SymbolData limit_symbol(const SchemeSpec& s, double state, Side side) {
    if (!s.admissible(state)) throw std::invalid_argument("limit_symbol: state outside U");
    SymbolData sym;
    sym.side = side;
    sym.p = s.p;
    sym.q = s.q;
    sym.state = state;
    std::vector<double> states(static_cast<std::size_t>(s.stencil_size()), state);
    const auto b = detail::flux_jacobian_row(s, states);
    sym.coeffs = detail::assemble_a_row(s.p, s.q, b, b);
    sym.alpha = s.nu * s.flux_derivative(state);
    const double alpha_check = -sym.derivative_at_one();
    if (std::abs(sym.alpha - alpha_check) > 1e-8)
        throw std::runtime_error("limit_symbol: drift cross-check failed (formula vs -F'(1))");
    return sym;
}

struct DissipativityReport {
    bool pass = false;
    double max_modulus_off_arc = 0.0;
    double limit_gap_at_one = 0.0; // |F(e^{i eps}) - 1|
};

/// |F(kappa)| < 1 on the unit circle away from kappa = 1, with F -> 1 there.
inline DissipativityReport check_dissipativity(const SymbolData& sym, int n_grid = 2048) {
    if (n_grid < 64) throw std::invalid_argument("check_dissipativity: n_grid >= 64");
    DissipativityReport rep;
    const double arc = 1e-6;
    for (int i = 0; i < n_grid; ++i) {
        const double xi = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n_grid);
        const double dist = std::min(xi, 2.0 * M_PI - xi);
        if (dist < arc) continue;
        rep.max_modulus_off_arc =
            std::max(rep.max_modulus_off_arc, std::abs(sym.eval(std::polar(1.0, xi))));
    }
    rep.limit_gap_at_one = std::abs(sym.eval(std::polar(1.0, 1e-9)) - complex_t(1.0));
    rep.pass = rep.max_modulus_off_arc < 1.0 - 1e-12 && rep.limit_gap_at_one < 1e-6;
    return rep;
}

struct DiffusionData {
    int mu = 0;
    complex_t beta = 0.0;
    double fit_residual = 0.0;
    double log_slope = 0.0;
};

/// Expansion F(e^{i xi}) = exp(-i alpha xi - beta xi^{2 mu} + O(xi^{2 mu + 1})):
/// finds the smallest mu with a stable xi^{2 mu} power law for
/// g(xi) = log F(e^{i xi}) + i alpha xi and fits beta from it.
inline DiffusionData extract_diffusion_from(const std::function<complex_t(complex_t)>& eval_symbol,
                                            double alpha, int mu_max = 4) {
    constexpr int kPoints = 40;
    std::vector<double> xi(kPoints);
    for (int i = 0; i < kPoints; ++i)
        xi[static_cast<std::size_t>(i)] =
            std::pow(10.0, -3.0 + 2.0 * static_cast<double>(i) / static_cast<double>(kPoints - 1));
    std::vector<complex_t> g(kPoints);
    std::vector<double> lx(kPoints), ly(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        const double x = xi[static_cast<std::size_t>(i)];
        g[static_cast<std::size_t>(i)] = std::log(eval_symbol(std::polar(1.0, x))) + complex_t(0.0, alpha * x);
        lx[static_cast<std::size_t>(i)] = std::log(x);
        ly[static_cast<std::size_t>(i)] = std::log(std::abs(g[static_cast<std::size_t>(i)]) + 1e-300);
    }
    const double slope = fit_line(lx, ly).slope;
    for (int mu = 1; mu <= mu_max; ++mu) {
        if (std::abs(slope - 2.0 * mu) > 0.2) continue;
        // four-term fit g ~ -beta xi^{2mu} + c1 xi^{2mu+1} + c2 xi^{2mu+2} + c3 xi^{2mu+3},
        // abscissae scaled to unit range for conditioning
        const double xs = xi.back();
        std::vector<std::vector<complex_t>> cols(4, std::vector<complex_t>(kPoints));
        for (int i = 0; i < kPoints; ++i) {
            const double t = xi[static_cast<std::size_t>(i)] / xs;
            double tp = std::pow(t, 2.0 * mu);
            for (int c = 0; c < 4; ++c) {
                cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = tp;
                tp *= t;
            }
        }
        const auto coef = solve_least_squares(cols, g);
        const complex_t beta = -coef[0] / std::pow(xs, 2.0 * mu);
        double ss = 0.0, sg = 0.0;
        for (int i = 0; i < kPoints; ++i) {
            complex_t model = 0.0;
            const double t = xi[static_cast<std::size_t>(i)] / xs;
            double tp = std::pow(t, 2.0 * mu);
            for (int c = 0; c < 4; ++c) {
                model += coef[static_cast<std::size_t>(c)] * tp;
                tp *= t;
            }
            ss += std::norm(g[static_cast<std::size_t>(i)] - model);
            sg += std::norm(g[static_cast<std::size_t>(i)]);
        }
        const double rel = std::sqrt(ss / sg);
        if (rel < 1e-4 && beta.real() > 0.0) {
            DiffusionData out;
            out.mu = mu;
            out.beta = beta;
            // conjugate-symmetric symbols (real coefficients) have a real beta;
            // strip fit noise from its imaginary part in that case
            const complex_t sym_gap =
                eval_symbol(std::polar(1.0, 0.05)) - std::conj(eval_symbol(std::polar(1.0, -0.05)));
            if (std::abs(sym_gap) < 1e-12 && std::abs(beta.imag()) < 1e-6 * std::abs(beta.real()))
                out.beta = complex_t(beta.real(), 0.0);
            out.fit_residual = rel;
            out.log_slope = slope;
            return out;
        }
    }
    throw std::runtime_error("extract_diffusion: no diffusive order found up to mu_max");
}

inline DiffusionData extract_diffusion(SymbolData& sym, int mu_max = 4) {
    if (!sym.dissipative) {
        const auto rep = check_dissipativity(sym);
        if (!rep.pass) throw std::invalid_argument("extract_diffusion: dissipativity check failed");
        sym.dissipative = true;
    }
    const auto out = extract_diffusion_from([&](complex_t k) { return sym.eval(k); }, sym.alpha, mu_max);
    sym.mu = out.mu;
    sym.beta = out.beta;
    return out;
}

struct HypInvReport {
    bool pass = false;
    double min_band_edge = 0.0;
    std::int64_t failing_index = 0;
    bool limit_ok = false;
};

/// Hypothesis: the band edges a_{j,-p}, a_{j,q} and their limits never vanish.
inline HypInvReport check_hyp_inv(const BandedOp& op) {
    HypInvReport rep;
    rep.min_band_edge = std::numeric_limits<double>::infinity();
    auto scan = [&](std::int64_t j) {
        for (int k : {-op.p, op.q}) {
            const double v = std::abs(op.a(j, k));
            if (v < rep.min_band_edge) {
                rep.min_band_edge = v;
                rep.failing_index = j;
            }
        }
    };
    for (std::int64_t j = op.win_lo; j <= op.win_hi; ++j) scan(j);
    const double lim = std::min(
        std::min(std::abs(op.a_left.front()), std::abs(op.a_left.back())),
        std::min(std::abs(op.a_right.front()), std::abs(op.a_right.back())));
    rep.limit_ok = lim > 1e-12;
    rep.pass = rep.min_band_edge > 1e-12 && rep.limit_ok;
    return rep;
}

/// Roots of F(kappa) = 1, i.e. of kappa^p (F(kappa) - 1): a degree p+q
/// polynomial solved through its companion matrix. kappa = 1 is always a root.
inline std::vector<complex_t> count_unit_roots(SymbolData& sym) {
    const int p = sym.p, q = sym.q;
    std::vector<complex_t> coeffs(static_cast<std::size_t>(p + q + 1));
    for (int k = -p; k <= q; ++k)
        coeffs[static_cast<std::size_t>(k + p)] = sym.coeffs[static_cast<std::size_t>(k + p)];
    coeffs[static_cast<std::size_t>(p)] -= 1.0; // subtract kappa^p
    auto roots = polynomial_roots(coeffs);
    bool has_one = false;
    for (const auto& r : roots) has_one |= std::abs(r - complex_t(1.0)) <= 1e-8;
    if (!has_one) throw std::runtime_error("count_unit_roots: kappa = 1 missing (F(1) != 1?)");
    sym.unit_roots = roots;
    return roots;
}

inline bool unit_roots_distinct(const std::vector<complex_t>& roots, double tol = 1e-8) {
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (std::abs(roots[i] - roots[j]) <= tol) return false;
    return true;
}

/// Power iteration on the truncated operator deflated against the eigenvalue-1
/// direction: x -> L x - mass(L x) V, valid because the all-ones functional is
/// a left eigenvector (conservation) and sum V = 1. Returns the estimated
/// dominant modulus of the complement; < 1 supports spectral stability.
inline double spectral_probe(const BandedOp& op, const TailedSeq& v_eig, int half_width = 60,
                             int iters = 2000) {
    TailedSeq x;
    x.offset = -half_width;
    x.values.assign(static_cast<std::size_t>(2 * half_width + 1), 0.0);
    Rng rng(12345);
    for (auto& e : x.values) e = rng.uniform(-1.0, 1.0);

    auto truncate = [&](TailedSeq s) {
        TailedSeq t;
        t.offset = -half_width;
        t.values.assign(static_cast<std::size_t>(2 * half_width + 1), 0.0);
        for (std::int64_t j = -half_width; j <= half_width; ++j)
            t.values[static_cast<std::size_t>(j + half_width)] = s.at(j);
        return t;
    };
    auto deflate = [&](TailedSeq s) {
        const double m = mass(s);
        return diff_seq(s, scale_seq(v_eig, m), 0.0);
    };

    x = deflate(x);
    double nx = weighted_norm(x, norm_linf(0.0));
    if (nx == 0.0) throw std::runtime_error("spectral_probe: start vector degenerate");
    x = scale_seq(x, 1.0 / nx);

    const int window = 50;
    double prev_mean = -1.0;
    double log_acc = 0.0;
    int acc_count = 0;
    double last_estimate = 0.0;
    double last_drift = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= iters; ++it) {
        TailedSeq y = truncate(deflate(apply(op, x, 0.0)));
        const double ny = weighted_norm(y, norm_linf(0.0));
        if (ny == 0.0) return 0.0;
        x = scale_seq(y, 1.0 / ny);
        log_acc += std::log(ny);
        if (++acc_count == window) {
            const double mean = std::exp(log_acc / window);
            last_estimate = mean;
            if (prev_mean > 0.0) {
                last_drift = std::abs(mean - prev_mean) / mean;
                if (last_drift <= 1e-3) return mean;
            }
            prev_mean = mean;
            log_acc = 0.0;
            acc_count = 0;
        }
    }
    if (last_drift > 1e-2) throw std::runtime_error("spectral_probe: iteration stagnation");
    return last_estimate;
}

} // namespace dspstab
