#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dspstab/green.hpp"
#include "dspstab/linop.hpp"
#include "dspstab/numerics.hpp"
#include "dspstab/profile.hpp"
#include "dspstab/scheme.hpp"
#include "dspstab/seqcore.hpp"

namespace dspstab {

constexpr std::uint64_t kBoundCheckSeed = 0x5EED;

// ---------------------------------------------------------------------------
// Condition (H) and the theorem's parameter conditions (C1)-(C4)
// ---------------------------------------------------------------------------

/// (a,b,c) satisfies (H): 1-a <= b-c if a < 1; 0 < b-c if a = 1; 0 <= b-c if a > 1.
inline bool cond_h(double a, double b, double c) {
    if (a < 0.0 || b < 0.0 || c < 0.0) throw std::invalid_argument("cond_h: negative input");
    const double bc = b - c;
    if (a < 1.0) return 1.0 - a <= bc;
    if (a == 1.0) return 0.0 < bc;
    return 0.0 <= bc;
}

struct DecayParams {
    double gamma1 = 0.0;
    double gamma_inf = 0.0;
    double p1 = 0.0;
    double p_inf = 0.0;
    int mu = 1;
    double Gamma = 0.0;
    bool c1 = false, c2 = false, c3 = false, c4 = false;

    bool all_conditions() const { return c1 && c2 && c3 && c4; }
};

/// Gamma = max(p1 + gamma1, p_inf + gamma_inf - 1/2mu, p_inf, gamma_inf).
inline double gamma_of(const DecayParams& dp) {
    const double inv = 1.0 / (2.0 * dp.mu);
    return std::max(std::max(dp.p1 + dp.gamma1, dp.p_inf + dp.gamma_inf - inv),
                    std::max(dp.p_inf, dp.gamma_inf));
}

inline DecayParams check_conditions(DecayParams dp) {
    const double inv = 1.0 / (2.0 * dp.mu);
    const double mn = std::min(dp.gamma_inf, inv);
    dp.c1 = cond_h(dp.p1 + dp.p_inf, dp.gamma_inf + inv, dp.p1);
    dp.c2 = cond_h(dp.gamma_inf + inv, dp.p1 + dp.p_inf, dp.p1);
    dp.c3 = cond_h(dp.p1 + dp.p_inf, dp.gamma1 + inv + mn, dp.p_inf) ||
            cond_h(2.0 * dp.p_inf, dp.gamma_inf + mn, dp.p_inf);
    dp.c4 = cond_h(dp.gamma1 + inv + mn, dp.p1 + dp.p_inf, dp.p_inf) ||
            cond_h(dp.gamma_inf + mn, 2.0 * dp.p_inf, dp.p_inf);
    dp.Gamma = gamma_of(dp);
    return dp;
}

/// Parameter presets:
///   choice 1: (gamma1, gamma_inf, p1, p_inf) = (p, p + 1/2mu, p, p),
///             valid for p >= (1-1/mu)/2 (strict at mu = 1);
///   choice 2: (p, p, p, p + 1/2mu), valid for p >= max((1-1/mu)/2, 1/2mu).
inline DecayParams preset(int choice, double p, int mu) {
    if (mu < 1) throw std::invalid_argument("preset: mu >= 1");
    if (p < 0.0) throw std::invalid_argument("preset: p >= 0");
    const double inv = 1.0 / (2.0 * mu);
    const double base = 0.5 * (1.0 - 1.0 / mu);
    DecayParams dp;
    dp.mu = mu;
    if (choice == 1) {
        const bool valid = mu == 1 ? p > base : p >= base;
        if (!valid) throw std::invalid_argument("preset: p below the choice-1 validity bound");
        dp.gamma1 = p;
        dp.gamma_inf = p + inv;
        dp.p1 = p;
        dp.p_inf = p;
    } else if (choice == 2) {
        if (!(p >= std::max(base, inv)))
            throw std::invalid_argument("preset: p below the choice-2 validity bound");
        dp.gamma1 = p;
        dp.gamma_inf = p;
        dp.p1 = p;
        dp.p_inf = p + inv;
    } else {
        throw std::invalid_argument("preset: choice must be 1 or 2");
    }
    return check_conditions(dp);
}

/// Perturbation family h_J: -(1+(1+J)^Gamma)^{-1} at j = 0 and the opposite
/// value at j = J; zero mass, unit l1_Gamma norm.
inline TailedSeq make_hJ(std::int64_t J, double Gamma) {
    if (J < 1) throw std::invalid_argument("make_hJ: J >= 1");
    const double amp = 1.0 / (1.0 + std::pow(1.0 + static_cast<double>(J), Gamma));
    TailedSeq h;
    h.offset = 0;
    h.values.assign(static_cast<std::size_t>(J + 1), 0.0);
    h.values.front() = -amp;
    h.values.back() = amp;
    return h;
}

// ---------------------------------------------------------------------------
// The nonlinear stability experiment
// ---------------------------------------------------------------------------

struct ExperimentSlopes {
    double fitted = 0.0;
    double target = 0.0; // -p1 or -p_inf
    double slack = 0.0;
    bool pass = false;
};

struct ExperimentReport {
    DecayParams params;
    std::vector<std::int64_t> J_list;
    std::vector<std::int64_t> n_list;                // 1..n_max
    std::vector<std::vector<double>> l1_norms;       // [J index][n-1]
    std::vector<std::vector<double>> linf_norms;
    std::vector<double> log_env_l1;                  // sup_J log(norm / ||h_J||_{l1_Gamma})
    std::vector<double> log_env_linf;
    ExperimentSlopes slope_l1;
    ExperimentSlopes slope_linf;
    std::int64_t fit_lo = 0;
    std::int64_t fit_hi = 0;
    double max_mass_drift_ratio = 0.0; // max_n |drift| / ((1+n) ||h||_l1)
    bool degenerate = false;           // all-zero perturbation
};

struct ExperimentOptions {
    std::int64_t n_max = 2000;
    std::int64_t fit_lo = 0; // 0 = derive from the J range (arrival window)
    std::int64_t fit_hi = 0;
    double slack_l1 = 0.1;
    double slack_linf = 0.15;
    int domain_pad = 20;
    bool require_conditions = true; // false = warn-and-continue
};

/// Default regression window: the envelope is produced by perturbations still
/// in flight toward the shock, which caps the informative range at n ~ J_max;
/// beyond it the envelope collapses faster than any power law.
inline std::pair<std::int64_t, std::int64_t> default_fit_window(std::int64_t j_max) {
    const std::int64_t lo = std::max<std::int64_t>(2, (j_max + 6) / 12);
    const std::int64_t hi = std::max<std::int64_t>(lo + 4, (4 * j_max) / 5);
    return {lo, hi};
}

inline ExperimentReport run_experiment(const SchemeSpec& s, const ProfileFamily& fam,
                                       const DecayParams& dp,
                                       const std::vector<std::int64_t>& J_list,
                                       const ExperimentOptions& opt = {}) {
    if (opt.require_conditions && !dp.all_conditions())
        throw std::invalid_argument("run_experiment: conditions (C1)-(C4) not satisfied");
    if (J_list.empty()) throw std::invalid_argument("run_experiment: empty J list");

    ExperimentReport rep;
    rep.params = dp;
    rep.J_list = J_list;
    std::int64_t j_max = 0;
    for (auto J : J_list) j_max = std::max(j_max, J);

    const TailedSeq& ubar = fam.reference().seq;
    const std::int64_t prof_half =
        std::max(std::llabs(ubar.empty_window() ? ubar.offset : ubar.lo()),
                 std::llabs(ubar.empty_window() ? ubar.offset : ubar.hi()));
    const std::int64_t reach =
        prof_half + opt.n_max * std::max(s.p, s.q) + j_max + opt.domain_pad;

    // weight tables over the reachable index range
    std::vector<double> w1(static_cast<std::size_t>(2 * reach + 1));
    std::vector<double> wi(static_cast<std::size_t>(2 * reach + 1));
    for (std::int64_t j = -reach; j <= reach; ++j) {
        w1[static_cast<std::size_t>(j + reach)] = polynomial_weight(j, dp.gamma1);
        wi[static_cast<std::size_t>(j + reach)] = polynomial_weight(j, dp.gamma_inf);
    }

    rep.n_list.resize(static_cast<std::size_t>(opt.n_max));
    for (std::int64_t n = 1; n <= opt.n_max; ++n) rep.n_list[static_cast<std::size_t>(n - 1)] = n;
    rep.l1_norms.assign(J_list.size(), {});
    rep.linf_norms.assign(J_list.size(), {});
    std::vector<double> drift_ratio(J_list.size(), 0.0);

    parallel_for(J_list.size(), [&](std::size_t ji) {
        const std::int64_t J = J_list[ji];
        const TailedSeq hJ = make_hJ(J, dp.Gamma);
        const double h_mass = mass(hJ);
        const double h_l1 = weighted_norm(hJ, norm_l1(0.0));
        // h_J has zero mass, so the limit profile is the reference member;
        // nonzero-mass perturbations converge to the member identified by mass
        const double delta = identify_delta(fam, hJ);
        TailedSeq target;
        if (std::abs(delta) <= 1e-14)
            target = fam.reference().seq;
        else if (const Profile* m = fam.find(delta))
            target = m->seq;
        else
            target = solve_sdsp(fam.scheme, fam.shock, delta, fam.half_width, fam.tol).seq;
        TailedSeq u = add_seq(ubar, hJ, 0.0);
        auto& l1 = rep.l1_norms[ji];
        auto& li = rep.linf_norms[ji];
        l1.resize(static_cast<std::size_t>(opt.n_max));
        li.resize(static_cast<std::size_t>(opt.n_max));
        double worst_drift = 0.0;
        for (std::int64_t n = 1; n <= opt.n_max; ++n) {
            u = evolve(s, u, 1e-300);
            double acc1 = 0.0, acci = 0.0, acc_mass = 0.0;
            for (std::int64_t j = u.lo(); j <= u.hi(); ++j) {
                const double hj = u.at(j) - target.at(j);
                const double a = std::abs(hj);
                acc_mass += u.at(j) - ubar.at(j);
                acc1 += w1[static_cast<std::size_t>(j + reach)] * a;
                const double t = wi[static_cast<std::size_t>(j + reach)] * a;
                if (t > acci) acci = t;
            }
            l1[static_cast<std::size_t>(n - 1)] = acc1;
            li[static_cast<std::size_t>(n - 1)] = acci;
            const double drift = std::abs(acc_mass - h_mass);
            worst_drift = std::max(worst_drift, drift / ((1.0 + static_cast<double>(n)) * h_l1));
        }
        drift_ratio[ji] = worst_drift;
    });

    for (double d : drift_ratio) rep.max_mass_drift_ratio = std::max(rep.max_mass_drift_ratio, d);

    // envelope: ordered fold over J at each n (||h_J||_{l1_Gamma} = 1)
    rep.log_env_l1.assign(static_cast<std::size_t>(opt.n_max), -std::numeric_limits<double>::infinity());
    rep.log_env_linf.assign(static_cast<std::size_t>(opt.n_max), -std::numeric_limits<double>::infinity());
    bool any_positive = false;
    for (std::size_t ji = 0; ji < J_list.size(); ++ji) {
        for (std::int64_t n = 1; n <= opt.n_max; ++n) {
            const std::size_t k = static_cast<std::size_t>(n - 1);
            if (rep.l1_norms[ji][k] > 0.0) {
                any_positive = true;
                rep.log_env_l1[k] = std::max(rep.log_env_l1[k], std::log(rep.l1_norms[ji][k]));
            }
            if (rep.linf_norms[ji][k] > 0.0)
                rep.log_env_linf[k] = std::max(rep.log_env_linf[k], std::log(rep.linf_norms[ji][k]));
        }
    }
    if (!any_positive) {
        rep.degenerate = true;
        return rep;
    }

    auto [lo, hi] = default_fit_window(j_max);
    if (opt.fit_lo > 0) lo = opt.fit_lo;
    if (opt.fit_hi > 0) hi = opt.fit_hi;
    hi = std::min<std::int64_t>(hi, opt.n_max);
    rep.fit_lo = lo;
    rep.fit_hi = hi;
    std::vector<double> xs, y1, yi;
    for (std::int64_t n = lo; n <= hi; ++n) {
        xs.push_back(std::log(static_cast<double>(n)));
        y1.push_back(rep.log_env_l1[static_cast<std::size_t>(n - 1)]);
        yi.push_back(rep.log_env_linf[static_cast<std::size_t>(n - 1)]);
    }
    rep.slope_l1.fitted = fit_line(xs, y1).slope;
    rep.slope_l1.target = -dp.p1;
    rep.slope_l1.slack = opt.slack_l1;
    rep.slope_l1.pass = rep.slope_l1.fitted <= rep.slope_l1.target + opt.slack_l1;
    rep.slope_linf.fitted = fit_line(xs, yi).slope;
    rep.slope_linf.target = -dp.p_inf;
    rep.slope_linf.slack = opt.slack_linf;
    rep.slope_linf.pass = rep.slope_linf.fitted <= rep.slope_linf.target + opt.slack_linf;
    return rep;
}

// ---------------------------------------------------------------------------
// Quadratic remainder Q^delta and the identities built from it
// ---------------------------------------------------------------------------

/// Margin R between the profile states and the boundary of U.
inline double state_margin(const SchemeSpec& s, const Profile& pr) {
    double lo = std::min(pr.seq.left_tail, pr.seq.right_tail);
    double hi = std::max(pr.seq.left_tail, pr.seq.right_tail);
    for (double v : pr.seq.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return std::min(lo - s.state_lo, s.state_hi - hi) - SchemeSpec::kBoundaryMargin;
}

/// Q^delta(h)_j = nu F(ubar^d + h stencil) - nu F(ubar^d stencil)
///               - sum_k b_{j,k} h_{j+k}.
inline TailedSeq q_remainder(const SchemeSpec& s, const Profile& pr, const BandedOp& op,
                             const TailedSeq& h) {
    if (!h.compact()) throw std::invalid_argument("q_remainder: h must be compact");
    const double R = state_margin(s, pr);
    if (!(sup_norm(h) < R)) throw std::invalid_argument("q_remainder: perturbation too large");
    if (h.empty_window()) return h;
    const int p = s.p, q = s.q, m = p + q;
    TailedSeq out;
    out.offset = h.lo() - q + 1; // Q_j depends on h_{j-p..j+q-1}
    out.values.assign(h.values.size() + static_cast<std::size_t>(m - 1), 0.0);
    std::vector<double> base(static_cast<std::size_t>(m)), pert(static_cast<std::size_t>(m));
    for (std::int64_t j = out.lo(); j <= out.hi(); ++j) {
        for (int k = 0; k < m; ++k) {
            const std::int64_t idx = j - p + k;
            base[static_cast<std::size_t>(k)] = pr.seq.at(idx);
            pert[static_cast<std::size_t>(k)] = pr.seq.at(idx) + h.at(idx);
        }
        double lin = 0.0;
        for (int k = -p; k <= q - 1; ++k) lin += op.b(j, k) * h.at(j + k);
        out.values[static_cast<std::size_t>(j - out.lo())] =
            s.nu * (s.numerical_flux(s.nu, pert) - s.numerical_flux(s.nu, base)) - lin;
    }
    return canonicalized(std::move(out), 0.0);
}

inline TailedSeq q_remainder(const SchemeSpec& s, const Profile& pr, const TailedSeq& h) {
    return q_remainder(s, pr, linearize(s, pr), h);
}

/// Residual of N(ubar + h) = ubar + L h + (Id - T) Q(h).
inline double decomposition_identity_residual(const SchemeSpec& s, const Profile& pr,
                                              const BandedOp& op, const TailedSeq& h) {
    const TailedSeq lhs = evolve(s, add_seq(pr.seq, h, 0.0), 0.0);
    const TailedSeq qd = q_remainder(s, pr, op, h);
    TailedSeq rhs = add_seq(pr.seq, apply(op, h, 0.0), 0.0);
    rhs = add_seq(rhs, diff_seq(qd, shift(qd), 0.0), 0.0);
    return sup_norm(diff_seq(lhs, rhs, 0.0));
}

struct InqBoundReport {
    bool pass = false;
    double max_ratio_l1 = 0.0;   // ||Q||_{l1_{g1+gi}} / (||h||_{l1_g1} ||h||_{linf_gi})
    double max_ratio_linf = 0.0; // ||Q||_{linf_{2gi}} / ||h||^2_{linf_gi}
    int trials = 0;
};

/// Random compact perturbations supported on [-20, 20] with entries inside a
/// quarter of the state margin; checks the quadratic-remainder norm ratios.
inline InqBoundReport check_inq_bounds(const SchemeSpec& s, const Profile& pr, double gamma1,
                                       double gamma_inf, int trials,
                                       std::uint64_t seed = kBoundCheckSeed) {
    if (trials < 10) throw std::invalid_argument("check_inq_bounds: trials >= 10");
    const BandedOp op = linearize(s, pr);
    const double R = state_margin(s, pr);
    Rng rng(seed);
    InqBoundReport rep;
    rep.trials = trials;
    for (int t = 0; t < trials; ++t) {
        TailedSeq h;
        h.offset = -20;
        h.values.assign(41, 0.0);
        for (auto& v : h.values) v = rng.uniform(-R / 4.0, R / 4.0);
        const TailedSeq qd = q_remainder(s, pr, op, h);
        const double q_l1 = weighted_norm(qd, norm_l1(gamma1 + gamma_inf));
        const double q_li = weighted_norm(qd, norm_linf(2.0 * gamma_inf));
        const double h_l1 = weighted_norm(h, norm_l1(gamma1));
        const double h_li = weighted_norm(h, norm_linf(gamma_inf));
        if (h_l1 == 0.0 || h_li == 0.0) continue;
        rep.max_ratio_l1 = std::max(rep.max_ratio_l1, q_l1 / (h_l1 * h_li));
        rep.max_ratio_linf = std::max(rep.max_ratio_linf, q_li / (h_li * h_li));
    }
    rep.pass = std::isfinite(rep.max_ratio_l1) && std::isfinite(rep.max_ratio_linf) &&
               rep.max_ratio_l1 > 0.0;
    return rep;
}

struct InsumReport {
    bool pass = false;
    double sup = 0.0;
    double sup_at_tenth = 0.0;
    double relative_growth = 0.0;
};

/// Brute-force audit of sum_{m<=((n+1)/2)} (m+1)^{-a} (n+1-m)^{-b} <= C/(n+2)^c:
/// the running sup of (n+2)^c S(n) must stabilize over the last decade of n.
inline InsumReport insum_bound_check(double a, double b, double c, std::int64_t n_max) {
    if (!cond_h(a, b, c)) throw std::invalid_argument("insum_bound_check: condition (H) violated");
    std::vector<double> pow_a(static_cast<std::size_t>(n_max / 2 + 2));
    std::vector<double> pow_b(static_cast<std::size_t>(n_max + 2));
    for (std::size_t m = 0; m < pow_a.size(); ++m)
        pow_a[m] = std::pow(static_cast<double>(m + 1), -a);
    for (std::size_t i = 1; i < pow_b.size(); ++i)
        pow_b[i] = std::pow(static_cast<double>(i), -b);
    InsumReport rep;
    for (std::int64_t n = 0; n <= n_max; ++n) {
        double S = 0.0;
        for (std::int64_t m = 0; m <= (n + 1) / 2; ++m)
            S += pow_a[static_cast<std::size_t>(m)] * pow_b[static_cast<std::size_t>(n + 1 - m)];
        const double W = std::pow(static_cast<double>(n + 2), c) * S;
        rep.sup = std::max(rep.sup, W);
        if (n == n_max / 10) rep.sup_at_tenth = rep.sup;
    }
    rep.relative_growth = (rep.sup - rep.sup_at_tenth) / rep.sup_at_tenth;
    rep.pass = rep.relative_growth < 1e-3;
    return rep;
}

struct DuhamelReport {
    double residual = 0.0;   // || h^n_direct - h^n_duhamel ||_linf
    std::int64_t n_check = 0;
};

/// Duhamel reconstruction
///   h^n = L^n h^0 + sum_m L^{n-1-m} (L^d - L) h^m
///               + sum_m L^{n-1-m} (Id - T) Q^d(h^m)
/// cross-checked against direct nonlinear evolution of u^0 = ubar^d + h.
inline DuhamelReport duhamel_check(const SchemeSpec& s, const ProfileFamily& fam, double delta,
                                   const TailedSeq& h, std::int64_t n_check) {
    if (n_check < 1 || n_check > 100)
        throw std::invalid_argument("duhamel_check: n_check in [1, 100]");
    const Profile* member = fam.find(delta);
    if (!member) throw std::invalid_argument("duhamel_check: delta is not a solved member");
    const Profile& ref = fam.reference();
    const BandedOp op_ref = linearize(s, ref);
    const BandedOp op_delta = delta == 0.0 ? op_ref : linearize(s, *member);

    // direct nonlinear trajectory and the perturbation history h^m
    std::vector<TailedSeq> hist;
    hist.reserve(static_cast<std::size_t>(n_check + 1));
    TailedSeq u = add_seq(member->seq, h, 0.0);
    hist.push_back(h);
    for (std::int64_t n = 1; n <= n_check; ++n) {
        u = evolve(s, u, 1e-300);
        hist.push_back(diff_seq(u, member->seq, 0.0));
    }

    // L^{n} h^0
    TailedSeq acc = hist.front();
    for (std::int64_t m = 0; m < n_check; ++m) acc = apply(op_ref, acc, 1e-300);
    // source terms, each propagated n-1-m times
    for (std::int64_t m = 0; m < n_check; ++m) {
        TailedSeq src = delta == 0.0
                            ? TailedSeq{}
                            : op_difference_apply(op_delta, op_ref, hist[static_cast<std::size_t>(m)], 0.0);
        const TailedSeq qd = q_remainder(s, *member, op_delta, hist[static_cast<std::size_t>(m)]);
        src = add_seq(src, diff_seq(qd, shift(qd), 0.0), 0.0);
        for (std::int64_t k = 0; k < n_check - 1 - m; ++k) src = apply(op_ref, src, 1e-300);
        acc = add_seq(acc, src, 0.0);
    }
    DuhamelReport rep;
    rep.n_check = n_check;
    rep.residual = sup_norm(diff_seq(hist.back(), acc, 0.0));
    return rep;
}

} // namespace dspstab
