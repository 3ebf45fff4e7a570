#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dspstab/linop.hpp"
#include "dspstab/numerics.hpp"
#include "dspstab/profile.hpp"
#include "dspstab/seqcore.hpp"

namespace dspstab {

// ---------------------------------------------------------------------------
// Generalized Gaussian kernels
//   H_{2mu}(beta; x) = (1/2pi) int_R e^{i x u} e^{-beta u^{2mu}} du
//   E_{2mu}(beta; x) = int_x^inf H_{2mu}(beta; y) dy
// ---------------------------------------------------------------------------

struct KernelSpec {
    int mu = 1;
    complex_t beta = 0.25;
};

namespace kernel_quadrature {

/// Truncation point: e^{-Re(beta) u^{2mu}} < 1e-16 beyond it.
inline double cutoff(const KernelSpec& k) {
    return std::pow(16.0 * std::log(10.0) / k.beta.real(), 1.0 / (2.0 * k.mu));
}

/// (1/2pi) int (i u)^m e^{i x u} e^{-beta u^{2mu}} du by tanh-sinh quadrature
/// over each half line (complex result).
inline complex_t h2mu_derivative(const KernelSpec& k, int m, double x, double abs_tol = 1e-11) {
    if (!(k.beta.real() > 0.0)) throw std::invalid_argument("h2mu: Re(beta) must be positive");
    const double U = cutoff(k);
    // u^{2mu} is even, so both halves share the damping factor
    const complex_t plus = tanh_sinh(
        [&](double u) {
            return std::pow(complex_t(0.0, u), m) *
                   std::exp(complex_t(0.0, x * u) - k.beta * std::pow(u, 2.0 * k.mu));
        },
        0.0, U, abs_tol);
    const complex_t minus = tanh_sinh(
        [&](double u) {
            return std::pow(complex_t(0.0, -u), m) *
                   std::exp(complex_t(0.0, -x * u) - k.beta * std::pow(u, 2.0 * k.mu));
        },
        0.0, U, abs_tol);
    return (plus + minus) / (2.0 * M_PI);
}

inline double h2mu(const KernelSpec& k, double x, double abs_tol = 1e-11) {
    const complex_t v = h2mu_derivative(k, 0, x, abs_tol);
    if (k.beta.imag() == 0.0 && std::abs(v.imag()) > 1e-10)
        throw std::runtime_error("h2mu: imaginary residue above tolerance for real beta");
    return v.real();
}

/// E by the midpoint identity E(x) = 1/2 - int_0^x H.
inline double e2mu(const KernelSpec& k, double x, double abs_tol = 1e-11) {
    if (x == 0.0) return 0.5;
    const complex_t integral = tanh_sinh(
        [&](double y) { return complex_t(h2mu(k, y, abs_tol * 0.1), 0.0); }, 0.0, x, abs_tol);
    return 0.5 - integral.real();
}

} // namespace kernel_quadrature

/// H_{2mu}; closed form for mu = 1, quadrature otherwise.
inline double h2mu(const KernelSpec& k, double x) {
    if (!(k.beta.real() > 0.0)) throw std::invalid_argument("h2mu: Re(beta) must be positive");
    if (k.mu == 1) {
        const complex_t v = std::exp(-x * x / (4.0 * k.beta)) / std::sqrt(4.0 * M_PI * k.beta);
        return v.real();
    }
    return kernel_quadrature::h2mu(k, x);
}

/// E_{2mu}; erfc closed form for mu = 1 with real beta, quadrature otherwise.
inline double e2mu(const KernelSpec& k, double x) {
    if (!(k.beta.real() > 0.0)) throw std::invalid_argument("e2mu: Re(beta) must be positive");
    if (k.mu == 1 && k.beta.imag() == 0.0)
        return 0.5 * std::erfc(x / (2.0 * std::sqrt(k.beta.real())));
    return kernel_quadrature::e2mu(k, x);
}

struct KernelBoundReport {
    bool pass = false;
    double fitted_c = 0.0;        // decay constant against exp(-c |x|^rho)
    double fitted_C = 0.0;
    double exponent_estimate = 0.0; // free-exponent fit of rho
    double rho = 0.0;             // imposed exponent 2mu/(2mu-1)
};

/// Fits |d^m H / dx^m| <= C exp(-c |x|^{2mu/(2mu-1)}) over the grid; the
/// derivative values come from the differentiated integral. Generalized
/// Gaussians oscillate for mu >= 2, so the fit runs on binned envelope maxima
/// rather than raw samples.
inline KernelBoundReport kernel_bound_check(const KernelSpec& k, int m,
                                            const std::vector<double>& x_grid) {
    if (m < 0) throw std::invalid_argument("kernel_bound_check: m >= 0");
    if (x_grid.size() < 6) throw std::invalid_argument("kernel_bound_check: grid too small");
    KernelBoundReport rep;
    rep.rho = 2.0 * k.mu / (2.0 * k.mu - 1.0);
    std::vector<double> xs, vals;
    for (double x : x_grid) {
        const double v = std::abs(kernel_quadrature::h2mu_derivative(k, m, x));
        if (v > 1e-280) {
            xs.push_back(std::abs(x));
            vals.push_back(v);
        }
    }
    if (xs.size() < 4) throw std::runtime_error("kernel_bound_check: all samples below floor");
    // envelope touch points: strict local maxima of the sampled magnitudes;
    // monotone data has none, in which case every sample is used
    std::vector<double> ex, elog;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i)
        if (vals[i] > vals[i - 1] && vals[i] > vals[i + 1]) {
            ex.push_back(xs[i]);
            elog.push_back(std::log(vals[i]));
        }
    if (ex.size() < 4) {
        ex.assign(xs.begin(), xs.end());
        elog.clear();
        for (double v : vals) elog.push_back(std::log(v));
    }
    std::vector<double> powx(ex.size());
    for (std::size_t i = 0; i < ex.size(); ++i) powx[i] = std::pow(ex[i], rep.rho);
    const LineFit lf = fit_line(powx, elog);
    rep.fitted_c = -lf.slope;
    rep.fitted_C = std::exp(lf.intercept);
    rep.pass = rep.fitted_c > 0.0;
    // free-exponent estimate: log(logC - log|H|) ~ log c + rho log x
    const double logC = *std::max_element(elog.begin(), elog.end()) + 0.5;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ex.size(); ++i) {
        const double drop = logC - elog[i];
        if (drop > 1.0 && ex[i] > 0.0) {
            lx.push_back(std::log(ex[i]));
            ly.push_back(std::log(drop));
        }
    }
    if (lx.size() >= 4) rep.exponent_estimate = fit_line(lx, ly).slope;
    return rep;
}

/// Same bound check for the error-function tail E (positive x side).
inline KernelBoundReport kernel_bound_check_e(const KernelSpec& k,
                                              const std::vector<double>& x_grid) {
    KernelBoundReport rep;
    rep.rho = 2.0 * k.mu / (2.0 * k.mu - 1.0);
    std::vector<double> xs, logs;
    for (double x : x_grid) {
        if (!(x > 0.0)) throw std::invalid_argument("kernel_bound_check_e: grid must be positive");
        const double v = std::abs(e2mu(k, x));
        if (v > 1e-280) {
            xs.push_back(std::pow(x, rep.rho));
            logs.push_back(std::log(v));
        }
    }
    if (xs.size() < 4) throw std::runtime_error("kernel_bound_check_e: all samples below floor");
    const LineFit lf = fit_line(xs, logs);
    rep.fitted_c = -lf.slope;
    rep.fitted_C = std::exp(lf.intercept);
    rep.pass = rep.fitted_c > 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Green's function of the linearized operator
// ---------------------------------------------------------------------------

struct GreenColumn {
    std::int64_t n = 0;
    std::int64_t j0 = 0;
    TailedSeq seq;
    double mass_error = 0.0;   // |sum - 1|
    bool support_ok = false;   // support inside {j0 - n q, ..., j0 + n p}
};

namespace detail {

inline bool support_within(const TailedSeq& s, std::int64_t lo, std::int64_t hi) {
    if (s.empty_window()) return true;
    return s.lo() >= lo && s.hi() <= hi;
}

} // namespace detail

/// Walks the recursion G(n+1) = L G(n) from a Dirac mass, invoking the visitor
/// after every step. The trim threshold flushes denormals without disturbing
/// the mass audit.
template <class Visitor>
inline void green_walk(const BandedOp& op, std::int64_t n_max, std::int64_t j0, Visitor&& visit,
                       double trim_tol = 1e-300) {
    TailedSeq g = make_dirac(j0);
    for (std::int64_t n = 1; n <= n_max; ++n) {
        g = apply(op, g, trim_tol);
        visit(n, g);
    }
}

inline GreenColumn green_column(const BandedOp& op, std::int64_t n, std::int64_t j0) {
    if (n < 0) throw std::invalid_argument("green_column: n >= 0");
    GreenColumn out;
    out.n = n;
    out.j0 = j0;
    out.seq = make_dirac(j0);
    if (n > 0)
        green_walk(op, n, j0, [&](std::int64_t step, const TailedSeq& g) {
            if (step == n) out.seq = g;
        });
    out.mass_error = std::abs(mass(out.seq) - 1.0);
    out.support_ok = detail::support_within(out.seq, j0 - n * op.q, j0 + n * op.p);
    return out;
}

// ---------------------------------------------------------------------------
// Eigenvector V spanning ker(Id - L), normalized to sum V = 1
// ---------------------------------------------------------------------------

struct EigenV {
    TailedSeq seq;
    double decay_rate = 0.0;
    double residual = 0.0;         // ||L V - V||_linf of the returned vector
    double method_cosine = 0.0;    // direction agreement of the two routes
};

/// Two construction routes: a centered difference of the profile family at
/// +-delta0, and inverse iteration on the truncated operator seeded with it.
/// The refined vector is returned; the finite-difference route only guards the
/// direction (cosine similarity).
inline EigenV eigenvector_v(const BandedOp& op, const ProfileFamily& fam, int half_width = 60,
                            double delta0 = 0.0625) {
    const Profile* plus = fam.find(delta0);
    const Profile* minus = fam.find(-delta0);
    if (!plus || !minus)
        throw std::invalid_argument("eigenvector_v: family must contain +-delta0 members");
    TailedSeq fd = scale_seq(diff_seq(plus->seq, minus->seq), 1.0 / (2.0 * delta0));
    const double fd_mass = mass(fd);
    if (std::abs(fd_mass) < 1e-8 * weighted_norm(fd, norm_l1(0.0)))
        throw std::runtime_error("eigenvector_v: sum V vanishes");
    fd = scale_seq(fd, 1.0 / fd_mass);

    // inverse iteration on the truncated operator with a small shift
    const int n = 2 * half_width + 1;
    std::vector<double> mat(static_cast<std::size_t>(n) * n, 0.0);
    const double shift = 1.0 + 1e-8;
    for (int r = 0; r < n; ++r) {
        const std::int64_t j = r - half_width;
        for (int k = -op.p; k <= op.q; ++k) {
            const int c = r + k;
            if (c < 0 || c >= n) continue;
            mat[static_cast<std::size_t>(r) * n + c] += op.a(j, k);
        }
        mat[static_cast<std::size_t>(r) * n + r] -= shift;
    }
    const LuFactors lu = lu_factor(std::move(mat), n);
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < n; ++r) x[static_cast<std::size_t>(r)] = fd.at(r - half_width);
    for (int it = 0; it < 50; ++it) {
        lu_solve(lu, x);
        double nrm = 0.0;
        for (double v : x) nrm = std::max(nrm, std::abs(v));
        for (double& v : x) v /= nrm;
    }
    TailedSeq refined;
    refined.offset = -half_width;
    refined.values.assign(x.begin(), x.end());
    refined = canonicalized(std::move(refined), 1e-300);
    const double m = mass(refined);
    if (std::abs(m) < 1e-8 * weighted_norm(refined, norm_l1(0.0)))
        throw std::runtime_error("eigenvector_v: sum V vanishes");
    refined = scale_seq(refined, 1.0 / m);

    // direction agreement between the two routes
    double dot = 0.0, nfd = 0.0, nrf = 0.0;
    const std::int64_t lo = std::min(fd.lo(), refined.lo());
    const std::int64_t hi = std::max(fd.hi(), refined.hi());
    for (std::int64_t j = lo; j <= hi; ++j) {
        dot += fd.at(j) * refined.at(j);
        nfd += fd.at(j) * fd.at(j);
        nrf += refined.at(j) * refined.at(j);
    }
    EigenV out;
    out.method_cosine = dot / std::sqrt(nfd * nrf);
    if (!(out.method_cosine > 1.0 - 1e-6))
        throw std::runtime_error("eigenvector_v: construction methods disagree");
    out.seq = refined;
    out.residual = sup_norm(diff_seq(apply(op, refined, 0.0), refined, 0.0));

    std::vector<double> xs, ys;
    for (std::int64_t j = 1; j <= refined.hi(); ++j) {
        const double v = std::abs(refined.at(j));
        if (v > 1e-250) {
            xs.push_back(static_cast<double>(j));
            ys.push_back(std::log(v));
        }
    }
    out.decay_rate = xs.size() >= 4 ? -fit_line(xs, ys).slope : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Numerical verification of the Green's function decomposition
// ---------------------------------------------------------------------------

struct DecompositionRow {
    std::int64_t n = 0;
    double e_factor = 0.0;
    double linf = 0.0;
    double l1 = 0.0;
};

struct DecompositionReport {
    std::vector<DecompositionRow> rows;
    DecayFit linf_fit;
    bool residual_vanishes = false; // late residual below early residual
};

/// Leading-term argument (n alpha^+ + j0)/n^{1/2mu} for j0 >= 0, mirrored for
/// j0 < 0 where the left symbol's drift is positive.
inline double activation_argument(const SymbolData& sym, std::int64_t n, std::int64_t j0) {
    const double nn = static_cast<double>(n);
    const double arg = (nn * sym.alpha + static_cast<double>(j0)) / std::pow(nn, 1.0 / (2.0 * sym.mu));
    return j0 >= 0 ? arg : -arg;
}

/// R(n, .) = G(n, j0, .) - E_{2mu}(beta; (n alpha + j0)/n^{1/2mu}) V with the
/// normalization C_E = 1 (sum V = 1). Reports norms and the fitted decay
/// exponent of ||R||_linf.
inline DecompositionReport decomposition_residual(const BandedOp& op, const EigenV& v,
                                                  const SymbolData& sym,
                                                  const std::vector<std::int64_t>& n_list,
                                                  std::int64_t j0) {
    if (n_list.size() < 4) throw std::invalid_argument("decomposition_residual: n_list too short");
    if ((j0 >= 0) != (sym.side == Side::right))
        throw std::invalid_argument("decomposition_residual: symbol side does not match sign of j0");
    if (sym.mu <= 0) throw std::invalid_argument("decomposition_residual: run extract_diffusion first");
    DecompositionReport rep;
    const KernelSpec kern{sym.mu, sym.beta};
    std::int64_t n_max = 0;
    for (auto n : n_list) n_max = std::max(n_max, n);
    std::size_t next = 0;
    std::vector<std::int64_t> sorted = n_list;
    std::sort(sorted.begin(), sorted.end());
    green_walk(op, n_max, j0, [&](std::int64_t n, const TailedSeq& g) {
        if (next >= sorted.size() || sorted[next] != n) return;
        ++next;
        DecompositionRow row;
        row.n = n;
        row.e_factor = e2mu(kern, activation_argument(sym, n, j0));
        const TailedSeq resid = diff_seq(g, scale_seq(v.seq, row.e_factor), 0.0);
        row.linf = weighted_norm(resid, norm_linf(0.0));
        row.l1 = weighted_norm(resid, norm_l1(0.0));
        rep.rows.push_back(row);
    });
    std::vector<double> ns, vals;
    for (const auto& r : rep.rows) {
        ns.push_back(static_cast<double>(r.n));
        vals.push_back(r.linf);
    }
    rep.linf_fit = fit_decay_exponent(ns, vals);
    rep.residual_vanishes = rep.rows.back().linf < rep.rows.front().linf;
    return rep;
}

struct DerivativeDecayReport {
    std::vector<std::int64_t> n_list;
    std::vector<double> l1;
    std::vector<double> mass_abs;
    DecayFit l1_fit;
};

/// L^n (Id - T) delta_{j0} = G(n, j0, .) - G(n, j0 - 1, .); l1 decay against
/// the (Gamma = gamma = 0) rate 1/(2mu).
inline DerivativeDecayReport derivative_decay(const BandedOp& op, std::int64_t j0,
                                              const std::vector<std::int64_t>& n_list) {
    DerivativeDecayReport rep;
    std::vector<std::int64_t> sorted = n_list;
    std::sort(sorted.begin(), sorted.end());
    std::int64_t n_max = sorted.empty() ? 0 : sorted.back();
    std::vector<TailedSeq> a_at, b_at;
    std::size_t next_a = 0, next_b = 0;
    if (!sorted.empty() && sorted.front() == 0) {
        a_at.push_back(make_dirac(j0));
        b_at.push_back(make_dirac(j0 - 1));
        next_a = next_b = 1;
    }
    green_walk(op, n_max, j0, [&](std::int64_t n, const TailedSeq& g) {
        if (next_a < sorted.size() && sorted[next_a] == n) {
            a_at.push_back(g);
            ++next_a;
        }
    });
    green_walk(op, n_max, j0 - 1, [&](std::int64_t n, const TailedSeq& g) {
        if (next_b < sorted.size() && sorted[next_b] == n) {
            b_at.push_back(g);
            ++next_b;
        }
    });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const TailedSeq d = diff_seq(a_at[i], b_at[i], 0.0);
        rep.n_list.push_back(sorted[i]);
        rep.l1.push_back(weighted_norm(d, norm_l1(0.0)));
        rep.mass_abs.push_back(std::abs(mass(d)));
    }
    if (sorted.size() >= 4) {
        std::vector<double> ns(rep.n_list.begin(), rep.n_list.end());
        rep.l1_fit = fit_decay_exponent(ns, rep.l1);
    }
    return rep;
}

struct SemigroupDecayRow {
    WeightedNormSpec spec;
    std::vector<double> norms;
    DecayFit fit;
    double target_exponent = 0.0;
};

struct SemigroupDecayReport {
    std::vector<std::int64_t> n_list;
    std::vector<SemigroupDecayRow> rows;
};

/// Time series ||L^n h|| in the requested weighted norms with the decay
/// targets of the semigroup estimates: Gamma - gamma for l1 and
/// Gamma - gamma + min(gamma, 1/2mu) for linf (zero-mass data).
inline SemigroupDecayReport semigroup_decay(const BandedOp& op, const TailedSeq& h,
                                            const std::vector<WeightedNormSpec>& norms,
                                            std::int64_t n_max, double Gamma, int mu,
                                            bool zero_mass_required = true) {
    if (!h.compact()) throw std::invalid_argument("semigroup_decay: h must be compact");
    if (zero_mass_required && std::abs(mass(h)) > 1e-10)
        throw std::invalid_argument("semigroup_decay: zero-mass input required");
    SemigroupDecayReport rep;
    for (const auto& spec : norms) {
        SemigroupDecayRow row;
        row.spec = spec;
        const double g = spec.gamma;
        row.target_exponent = spec.r == WeightedNormSpec::Kind::l1
                                  ? Gamma - g
                                  : Gamma - g + std::min(g, 1.0 / (2.0 * mu));
        rep.rows.push_back(std::move(row));
    }
    TailedSeq x = h;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        x = apply(op, x, 1e-300);
        rep.n_list.push_back(n);
        for (auto& row : rep.rows) row.norms.push_back(weighted_norm(x, row.spec));
    }
    std::vector<double> ns(rep.n_list.begin(), rep.n_list.end());
    for (auto& row : rep.rows) row.fit = fit_decay_exponent(ns, row.norms);
    return rep;
}

} // namespace dspstab
