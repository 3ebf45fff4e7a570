#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dspstab/numerics.hpp"
#include "dspstab/scheme.hpp"
#include "dspstab/seqcore.hpp"

namespace dspstab {

struct Profile {
    TailedSeq seq;       // left tail u-, right tail u+
    double delta = 0.0;
    double residual = 0.0;
    std::int64_t iterations = 0;
};

/// Step initial datum for the fixed-point iteration: u- left of the transition
/// cell floor((delta+1)/2), the intermediate value delta - 2 floor((delta+1)/2)
/// on it, u+ to the right.
inline TailedSeq sdsp_initial_datum(const ShockPair& shock, double delta) {
    const std::int64_t jstar = static_cast<std::int64_t>(std::floor((delta + 1.0) / 2.0));
    TailedSeq u;
    u.offset = jstar;
    u.values = {delta - 2.0 * static_cast<double>(jstar)};
    u.left_tail = shock.u_minus;
    u.right_tail = shock.u_plus;
    return u;
}

/// Long-time iteration of the evolution operator until the fixed-point
/// residual ||N u - u||_linf drops below tol.
inline Profile solve_sdsp(const SchemeSpec& s, const ShockPair& shock, double delta,
                          int half_width = 60, double tol = 1e-13,
                          std::int64_t max_steps = 1000000,
                          std::optional<TailedSeq> initial = std::nullopt) {
    if (!shock.lax_ok) throw std::invalid_argument("solve_sdsp: Lax condition violated");
    if (std::abs(shock.rh_residual) > 1e-12)
        throw std::invalid_argument("solve_sdsp: Rankine-Hugoniot residual too large");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_sdsp: tol must be positive");

    TailedSeq u = initial ? *initial : sdsp_initial_datum(shock, delta);
    if (!initial) {
        // pad to the requested half-width so transients develop inside the window
        TailedSeq padded;
        padded.offset = u.offset - half_width;
        padded.left_tail = u.left_tail;
        padded.right_tail = u.right_tail;
        padded.values.assign(static_cast<std::size_t>(2 * half_width + 1), 0.0);
        for (std::int64_t j = padded.lo(); j <= padded.hi(); ++j)
            padded.values[static_cast<std::size_t>(j - padded.lo())] = u.at(j);
        u = std::move(padded);
    }

    Profile pr;
    pr.delta = delta;
    for (std::int64_t it = 1; it <= max_steps; ++it) {
        TailedSeq v = evolve(s, u);
        const double r = sup_norm(diff_seq(v, u, 0.0));
        u = std::move(v);
        if (r <= tol) {
            pr.seq = canonicalized(std::move(u));
            pr.residual = r;
            pr.iterations = it;
            return pr;
        }
    }
    throw std::runtime_error("solve_sdsp: no convergence after max_steps");
}

struct ProfileFamily {
    ShockPair shock;
    SchemeSpec scheme;
    std::vector<Profile> members; // sorted by strictly increasing delta
    std::size_t reference_index = 0;
    int half_width = 60;
    double tol = 1e-13;

    const Profile& reference() const { return members[reference_index]; }

    const Profile* find(double delta, double tol_delta = 1e-12) const {
        for (const auto& m : members)
            if (std::abs(m.delta - delta) <= tol_delta) return &m;
        return nullptr;
    }
};

inline std::vector<double> default_delta_grid(int count = 17, double lo = -0.5, double hi = 0.5) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        g.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    return g;
}

/// Solve the family over a delta grid; members are independent and solved in
/// parallel, then assembled in delta order.
inline ProfileFamily solve_family(const SchemeSpec& s, const ShockPair& shock,
                                  std::vector<double> deltas, int half_width = 60,
                                  double tol = 1e-13, std::int64_t max_steps = 1000000) {
    std::sort(deltas.begin(), deltas.end());
    bool has_reference = false;
    for (double d : deltas) has_reference |= d == 0.0;
    if (!has_reference) throw std::invalid_argument("solve_family: delta grid must contain 0");
    ProfileFamily fam;
    fam.shock = shock;
    fam.scheme = s;
    fam.half_width = half_width;
    fam.tol = tol;
    fam.members.resize(deltas.size());
    parallel_for(deltas.size(), [&](std::size_t i) {
        fam.members[i] = solve_sdsp(s, shock, deltas[i], half_width, tol, max_steps);
    });
    for (std::size_t i = 0; i < fam.members.size(); ++i)
        if (fam.members[i].delta == 0.0) fam.reference_index = i;
    return fam;
}

/// M(delta) = sum_j (ubar^delta_j - ubar_j) over a solved member.
inline double mass_function(const ProfileFamily& fam, double delta) {
    const Profile* m = fam.find(delta);
    if (!m) throw std::invalid_argument("mass_function: delta is not a solved member");
    return mass(diff_seq(m->seq, fam.reference().seq));
}

struct LocalizationRates {
    double rate_left = 0.0;  // fitted c in |ubar_{-j} - u-| <= C e^{-c j}
    double rate_right = 0.0;
    double fit_rms_left = 0.0;
    double fit_rms_right = 0.0;
    bool exponential_left = false;
    bool exponential_right = false;
};

namespace detail {

inline void localization_fit_side(const std::vector<double>& dist, const std::vector<double>& resid,
                                  double& rate, double& rms, bool& ok) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < dist.size(); ++i)
        if (resid[i] > 1e-300) {
            xs.push_back(dist[i]);
            ys.push_back(std::log(resid[i]));
        }
    if (xs.empty()) {
        // exact tails everywhere: report an infinite-rate surrogate
        rate = std::numeric_limits<double>::infinity();
        rms = 0.0;
        ok = true;
        return;
    }
    if (xs.size() < 8) throw std::runtime_error("localization_rates: degenerate window");
    const LineFit lf = fit_line(xs, ys);
    rate = -lf.slope;
    rms = lf.rms_residual;
    ok = lf.slope < -1e-3;
}

} // namespace detail

/// Exponential-localization diagnostic over the outer half of each side of the
/// profile window (Hypothesis: |ubar_j - u+-| <= C e^{-c |j|}).
inline LocalizationRates localization_rates(const Profile& pr) {
    const TailedSeq& s = pr.seq;
    LocalizationRates out;
    if (s.empty_window()) {
        out.rate_left = out.rate_right = std::numeric_limits<double>::infinity();
        out.exponential_left = out.exponential_right = true;
        return out;
    }
    std::vector<double> dl, rl, dr, rr;
    const std::int64_t lo = s.lo(), hi = s.hi();
    const std::int64_t left_cut = lo + (0 - lo) / 2;   // outer half of the left side
    const std::int64_t right_cut = hi - hi / 2;        // outer half of the right side
    for (std::int64_t j = lo; j <= std::min<std::int64_t>(left_cut, -1); ++j) {
        dl.push_back(static_cast<double>(-j));
        rl.push_back(std::abs(s.at(j) - s.left_tail));
    }
    for (std::int64_t j = std::max<std::int64_t>(right_cut, 1); j <= hi; ++j) {
        dr.push_back(static_cast<double>(j));
        rr.push_back(std::abs(s.at(j) - s.right_tail));
    }
    detail::localization_fit_side(dl, rl, out.rate_left, out.fit_rms_left, out.exponential_left);
    detail::localization_fit_side(dr, rr, out.rate_right, out.fit_rms_right, out.exponential_right);
    return out;
}

struct FamilyLipschitzReport {
    bool pass = false;
    double max_ratio = 0.0;      // sup_j |ubar^delta_j - ubar_j| / |delta| over members
    double fitted_C = 0.0;       // worst-member envelope |diff|/|delta| <= C e^{-c|j|}
    double fitted_c = 0.0;
    std::vector<double> anomalies; // deltas whose difference from the reference collapses
};

/// Checks |ubar^delta_j - ubar_j| <= C |delta| e^{-c|j|} across the family.
inline FamilyLipschitzReport family_lipschitz_check(const ProfileFamily& fam) {
    if (fam.members.size() < 3)
        throw std::invalid_argument("family_lipschitz_check: need at least 3 members");
    FamilyLipschitzReport rep;
    rep.fitted_c = std::numeric_limits<double>::infinity();
    for (const auto& m : fam.members) {
        if (m.delta == 0.0) continue;
        const TailedSeq d = diff_seq(m.seq, fam.reference().seq);
        double sup_ratio = 0.0;
        std::vector<double> xs, ys;
        for (std::size_t k = 0; k < d.values.size(); ++k) {
            const std::int64_t j = d.offset + static_cast<std::int64_t>(k);
            const double ratio = std::abs(d.values[k]) / std::abs(m.delta);
            sup_ratio = std::max(sup_ratio, ratio);
            if (ratio > 1e-300) {
                xs.push_back(std::abs(static_cast<double>(j)));
                ys.push_back(std::log(ratio));
            }
        }
        if (sup_ratio < 1e-3) {
            rep.anomalies.push_back(m.delta);
            continue;
        }
        rep.max_ratio = std::max(rep.max_ratio, sup_ratio);
        if (xs.size() >= 4) {
            const LineFit lf = fit_line(xs, ys);
            rep.fitted_C = std::max(rep.fitted_C, std::exp(lf.intercept));
            rep.fitted_c = std::min(rep.fitted_c, -lf.slope);
        }
    }
    rep.pass = rep.anomalies.empty() && rep.max_ratio < 1e3 && rep.fitted_c > 0.0;
    return rep;
}

/// Unique delta with M(delta) = mass(h): monotone bisection on the tabulated
/// mass function, refined by re-solving profiles at bisection midpoints.
inline double identify_delta(const ProfileFamily& fam, const TailedSeq& h, double mass_tol = 1e-10) {
    const double target = mass(h);
    if (std::abs(target) <= 1e-14) return 0.0; // M(0) = 0 exactly
    std::vector<double> deltas, masses;
    for (const auto& m : fam.members) {
        deltas.push_back(m.delta);
        masses.push_back(mass(diff_seq(m.seq, fam.reference().seq)));
    }
    for (std::size_t i = 1; i < masses.size(); ++i)
        if (masses[i] <= masses[i - 1])
            throw std::runtime_error("identify_delta: tabulated mass function is not increasing");
    if (target < masses.front() || target > masses.back())
        throw std::runtime_error("identify_delta: mass outside family range");
    std::size_t k = 1;
    while (masses[k] < target) ++k;
    double lo = deltas[k - 1], hi = deltas[k];
    double m_lo = masses[k - 1], m_hi = masses[k];
    const TailedSeq& ref = fam.reference().seq;
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Profile pm = solve_sdsp(fam.scheme, fam.shock, mid, fam.half_width, fam.tol);
        const double m_mid = mass(diff_seq(pm.seq, ref));
        if (std::abs(m_mid - target) <= mass_tol) return mid;
        if (m_mid < target) {
            lo = mid;
            m_lo = m_mid;
        } else {
            hi = mid;
            m_hi = m_mid;
        }
    }
    // linear interpolation on the final bracket
    return lo + (hi - lo) * (target - m_lo) / (m_hi - m_lo);
}

} // namespace dspstab
