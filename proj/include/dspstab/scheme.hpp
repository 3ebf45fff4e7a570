#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dspstab/seqcore.hpp"

namespace dspstab {

/// Conservative one-step explicit scheme
///   (N u)_j = u_j - nu (F(nu; u_{j-p+1..j+q}) - F(nu; u_{j-p..j+q-1})).
/// The numerical flux takes the p+q stencil states in index order.
struct SchemeSpec {
    int p = 1;
    int q = 1;
    double nu = 0.0;
    std::function<double(double)> flux;
    std::function<double(double)> flux_derivative;
    std::function<double(double, std::span<const double>)> numerical_flux;
    double state_lo = 0.0;
    double state_hi = 0.0;

    // the admissible state interval is open; boundary contact is rejected by a margin
    static constexpr double kBoundaryMargin = 1e-9;

    bool admissible(double u) const {
        return u >= state_lo + kBoundaryMargin && u <= state_hi - kBoundaryMargin;
    }
    int stencil_size() const { return p + q; }
};

/// Modified Lax-Friedrichs flux: F(nu; a, b) = (f(a)+f(b))/2 + D (a - b).
inline SchemeSpec make_mlf(double nu, double D, std::function<double(double)> flux,
                           std::function<double(double)> flux_derivative, double state_lo,
                           double state_hi) {
    if (!(nu > 0.0)) throw std::invalid_argument("make_mlf: nu must be positive");
    if (!(D > 0.0)) throw std::invalid_argument("make_mlf: D must be positive");
    if (!(state_lo < state_hi)) throw std::invalid_argument("make_mlf: empty state interval");
    SchemeSpec s;
    s.p = 1;
    s.q = 1;
    s.nu = nu;
    s.flux = flux;
    s.flux_derivative = std::move(flux_derivative);
    s.numerical_flux = [flux, D](double, std::span<const double> u) {
        return 0.5 * (flux(u[0]) + flux(u[1])) + D * (u[0] - u[1]);
    };
    s.state_lo = state_lo;
    s.state_hi = state_hi;
    return s;
}

inline std::function<double(double)> burgers_flux() {
    return [](double u) { return 0.5 * u * u; };
}
inline std::function<double(double)> burgers_flux_derivative() {
    return [](double u) { return u; };
}

/// One application of the evolution operator. Tails are fixed points by
/// consistency and are mapped to themselves exactly. The window widens by at
/// most q on the left and p on the right before canonicalization.
inline TailedSeq evolve(const SchemeSpec& s, const TailedSeq& u, double trim_tol = kCanonicalTrimTol) {
    if (!s.admissible(u.left_tail) || !s.admissible(u.right_tail))
        throw std::runtime_error("evolve: state escaped U (tail value)");
    for (std::size_t k = 0; k < u.values.size(); ++k)
        if (!s.admissible(u.values[k]))
            throw std::runtime_error("evolve: state escaped U at index " +
                                     std::to_string(u.offset + static_cast<std::int64_t>(k)));

    const int p = s.p, q = s.q, m = p + q;
    TailedSeq out;
    out.left_tail = u.left_tail;
    out.right_tail = u.right_tail;
    // an empty window is a pure step at u.offset; the update is nontrivial only
    // where the stencil straddles the transition
    out.offset = u.offset - q;
    out.values.assign(u.values.size() + static_cast<std::size_t>(p + q), 0.0);
    const std::int64_t out_lo = out.offset;
    const std::int64_t out_hi = out.offset + static_cast<std::int64_t>(out.values.size()) - 1;

    // flux at interface i uses states u_{i-p..i+q-1}; reuse exact tail fluxes so
    // differences of all-tail stencils cancel to exactly zero
    std::vector<double> stencil(static_cast<std::size_t>(m));
    auto flux_at = [&](std::int64_t i) {
        for (int k = 0; k < m; ++k) stencil[static_cast<std::size_t>(k)] = u.at(i - p + k);
        return s.numerical_flux(s.nu, stencil);
    };
    std::vector<double> g(static_cast<std::size_t>(out_hi - out_lo + 2));
    for (std::int64_t i = out_lo; i <= out_hi + 1; ++i)
        g[static_cast<std::size_t>(i - out_lo)] = flux_at(i);
    for (std::int64_t j = out_lo; j <= out_hi; ++j) {
        const std::size_t k = static_cast<std::size_t>(j - out_lo);
        out.values[k] = u.at(j) - s.nu * (g[k + 1] - g[k]);
    }
    return canonicalized(std::move(out), trim_tol);
}

struct CheckReport {
    bool pass = false;
    double worst_value = 0.0;   // residual or margin, operation-specific
    double worst_state = 0.0;
    std::string detail;
};

namespace detail {

inline std::vector<double> sample_states(const SchemeSpec& s, int n_samples) {
    const double lo = s.state_lo + SchemeSpec::kBoundaryMargin;
    const double hi = s.state_hi - SchemeSpec::kBoundaryMargin;
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i)
        xs.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_samples - 1));
    return xs;
}

} // namespace detail

/// max_u |F(nu; u,...,u) - f(u)| over sampled states; pass iff <= 1e-12.
inline CheckReport check_consistency(const SchemeSpec& s, int n_samples = 1001) {
    if (n_samples < 2) throw std::invalid_argument("check_consistency: n_samples >= 2");
    CheckReport rep;
    std::vector<double> stencil(static_cast<std::size_t>(s.stencil_size()));
    for (double u : detail::sample_states(s, n_samples)) {
        std::fill(stencil.begin(), stencil.end(), u);
        const double r = std::abs(s.numerical_flux(s.nu, stencil) - s.flux(u));
        if (r > rep.worst_value) {
            rep.worst_value = r;
            rep.worst_state = u;
        }
    }
    rep.pass = rep.worst_value <= 1e-12;
    return rep;
}

/// CFL condition -q < nu f'(u) < p over sampled states.
inline CheckReport check_cfl(const SchemeSpec& s, int n_samples = 1001) {
    if (n_samples < 2) throw std::invalid_argument("check_cfl: n_samples >= 2");
    CheckReport rep;
    rep.pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (double u : detail::sample_states(s, n_samples)) {
        const double c = s.nu * s.flux_derivative(u);
        const double margin = std::min(static_cast<double>(s.p) - c, c + static_cast<double>(s.q));
        if (margin < worst_margin) {
            worst_margin = margin;
            rep.worst_state = u;
        }
        if (!(c > -static_cast<double>(s.q) && c < static_cast<double>(s.p))) rep.pass = false;
    }
    rep.worst_value = worst_margin;
    return rep;
}

/// Rankine-Hugoniot residual and Lax condition for a candidate shock.
struct ShockPair {
    double u_minus = 0.0;
    double u_plus = 0.0;
    double rh_residual = 0.0;
    bool lax_ok = false;
};

inline ShockPair shock_pair(const SchemeSpec& s, double u_minus, double u_plus) {
    if (!s.admissible(u_minus) || !s.admissible(u_plus))
        throw std::invalid_argument("shock_pair: state outside U");
    ShockPair sp;
    sp.u_minus = u_minus;
    sp.u_plus = u_plus;
    sp.rh_residual = s.flux(u_minus) - s.flux(u_plus);
    sp.lax_ok = s.flux_derivative(u_plus) < 0.0 && 0.0 < s.flux_derivative(u_minus);
    return sp;
}

} // namespace dspstab
