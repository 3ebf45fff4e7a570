#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dspstab {

/// Doubly-infinite real sequence stored as a finite window plus constant
/// left/right tails. Entry j equals values[j - offset] inside the window,
/// left_tail for j < offset and right_tail for j >= offset + size.
struct TailedSeq {
    std::int64_t offset = 0;
    std::vector<double> values;
    double left_tail = 0.0;
    double right_tail = 0.0;

    std::int64_t lo() const { return offset; }
    std::int64_t hi() const { return offset + static_cast<std::int64_t>(values.size()) - 1; }
    bool empty_window() const { return values.empty(); }

    double at(std::int64_t j) const {
        if (j < offset) return left_tail;
        const std::int64_t k = j - offset;
        if (k >= static_cast<std::int64_t>(values.size())) return right_tail;
        return values[static_cast<std::size_t>(k)];
    }

    bool compact() const { return left_tail == 0.0 && right_tail == 0.0; }
};

constexpr double kCanonicalTrimTol = 1e-14;

inline void validate_finite(const TailedSeq& s) {
    if (!std::isfinite(s.left_tail) || !std::isfinite(s.right_tail))
        throw std::invalid_argument("TailedSeq: non-finite tail");
    for (double v : s.values)
        if (!std::isfinite(v)) throw std::invalid_argument("TailedSeq: non-finite entry");
}

/// Trim window edges that agree with the tails to within tol; entries removed
/// this way are snapped to the exact tail value by becoming implicit.
inline TailedSeq canonicalized(TailedSeq s, double tol = kCanonicalTrimTol) {
    std::size_t b = 0, e = s.values.size();
    while (b < e && std::abs(s.values[b] - s.left_tail) <= tol) ++b;
    while (e > b && std::abs(s.values[e - 1] - s.right_tail) <= tol) --e;
    if (b > 0 || e < s.values.size()) {
        s.values = std::vector<double>(s.values.begin() + static_cast<std::ptrdiff_t>(b),
                                       s.values.begin() + static_cast<std::ptrdiff_t>(e));
        s.offset += static_cast<std::int64_t>(b);
    }
    return s;
}

inline TailedSeq make_dirac(std::int64_t j0, double value = 1.0) {
    return TailedSeq{j0, {value}, 0.0, 0.0};
}

inline TailedSeq make_constant(double c) { return TailedSeq{0, {}, c, c}; }

/// Step datum: left value for j < j_transition, right value from j_transition on.
inline TailedSeq make_step(double left, double right, std::int64_t j_transition) {
    return TailedSeq{j_transition, {}, left, right};
}

struct WeightedNormSpec {
    enum class Kind { l1, linf };
    Kind r = Kind::l1;
    double gamma = 0.0;
};

inline WeightedNormSpec norm_l1(double gamma) { return {WeightedNormSpec::Kind::l1, gamma}; }
inline WeightedNormSpec norm_linf(double gamma) { return {WeightedNormSpec::Kind::linf, gamma}; }

inline double polynomial_weight(std::int64_t j, double gamma) {
    return gamma == 0.0 ? 1.0 : std::pow(1.0 + std::abs(static_cast<double>(j)), gamma);
}

/// || (1+|j|)^gamma h_j ||_{l^r} for compact h, r in {1, inf}.
inline double weighted_norm(const TailedSeq& h, const WeightedNormSpec& spec) {
    if (!h.compact()) throw std::invalid_argument("weighted_norm: non-summable sequence (nonzero tails)");
    if (!(spec.gamma >= 0.0) || !std::isfinite(spec.gamma))
        throw std::invalid_argument("weighted_norm: gamma must be finite and >= 0");
    double acc = 0.0;
    for (std::size_t k = 0; k < h.values.size(); ++k) {
        const std::int64_t j = h.offset + static_cast<std::int64_t>(k);
        const double term = polynomial_weight(j, spec.gamma) * std::abs(h.values[k]);
        if (spec.r == WeightedNormSpec::Kind::l1)
            acc += term;
        else
            acc = std::max(acc, term);
    }
    return acc;
}

/// Exact finite sum over the window of a compact sequence.
inline double mass(const TailedSeq& h) {
    if (!h.compact()) throw std::invalid_argument("mass: non-summable sequence (nonzero tails)");
    double s = 0.0;
    for (double v : h.values) s += v;
    return s;
}

/// (shift h)_j = h_{j+1}; tails preserved.
inline TailedSeq shift(TailedSeq h) {
    h.offset -= 1;
    return h;
}

/// Inverse of shift: (unshift h)_j = h_{j-1}.
inline TailedSeq unshift(TailedSeq h) {
    h.offset += 1;
    return h;
}

namespace detail {

// Combined index range over which pointwise arithmetic can differ from pure
// tail arithmetic. One extra cell on each side covers pure-step sequences,
// whose empty window still marks a transition at `offset`.
inline bool union_window(const TailedSeq& a, const TailedSeq& b, std::int64_t& lo, std::int64_t& hi) {
    const bool a_const = a.empty_window() && a.left_tail == a.right_tail;
    const bool b_const = b.empty_window() && b.left_tail == b.right_tail;
    if (a_const && b_const) return false;
    lo = std::numeric_limits<std::int64_t>::max();
    hi = std::numeric_limits<std::int64_t>::min();
    if (!a_const) {
        lo = std::min(lo, a.offset - 1);
        hi = std::max(hi, a.offset + static_cast<std::int64_t>(a.values.size()));
    }
    if (!b_const) {
        lo = std::min(lo, b.offset - 1);
        hi = std::max(hi, b.offset + static_cast<std::int64_t>(b.values.size()));
    }
    return true;
}

} // namespace detail

/// Pointwise a - b; tails subtract, window edges near the tail difference are
/// snapped to the exact tail.
inline TailedSeq diff_seq(const TailedSeq& a, const TailedSeq& b, double trim_tol = kCanonicalTrimTol) {
    TailedSeq out;
    out.left_tail = a.left_tail - b.left_tail;
    out.right_tail = a.right_tail - b.right_tail;
    std::int64_t lo = 0, hi = -1;
    if (!detail::union_window(a, b, lo, hi)) return out;
    out.offset = lo;
    out.values.resize(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t j = lo; j <= hi; ++j)
        out.values[static_cast<std::size_t>(j - lo)] = a.at(j) - b.at(j);
    return canonicalized(std::move(out), trim_tol);
}

/// Pointwise a + b; tails add.
inline TailedSeq add_seq(const TailedSeq& a, const TailedSeq& b, double trim_tol = kCanonicalTrimTol) {
    TailedSeq out;
    out.left_tail = a.left_tail + b.left_tail;
    out.right_tail = a.right_tail + b.right_tail;
    std::int64_t lo = 0, hi = -1;
    if (!detail::union_window(a, b, lo, hi)) return out;
    out.offset = lo;
    out.values.resize(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t j = lo; j <= hi; ++j)
        out.values[static_cast<std::size_t>(j - lo)] = a.at(j) + b.at(j);
    return canonicalized(std::move(out), trim_tol);
}

inline TailedSeq scale_seq(TailedSeq a, double c) {
    a.left_tail *= c;
    a.right_tail *= c;
    for (double& v : a.values) v *= c;
    return a;
}

inline double sup_norm(const TailedSeq& h) {
    double m = std::max(std::abs(h.left_tail), std::abs(h.right_tail));
    for (double v : h.values) m = std::max(m, std::abs(v));
    return m;
}

// --- CSV serialization: rows `j,value`, tails in a header comment line ---

inline void write_seq_csv(std::ostream& os, const TailedSeq& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", s.left_tail);
    os << "# left_tail=" << buf;
    std::snprintf(buf, sizeof buf, "%.17g", s.right_tail);
    os << " right_tail=" << buf << "\n";
    os << "j,value\n";
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", s.values[k]);
        os << (s.offset + static_cast<std::int64_t>(k)) << "," << buf << "\n";
    }
}

inline TailedSeq read_seq_csv(std::istream& is) {
    TailedSeq out;
    std::string line;
    bool have_offset = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto lt = line.find("left_tail=");
            const auto rt = line.find("right_tail=");
            if (lt != std::string::npos) out.left_tail = std::stod(line.substr(lt + 10));
            if (rt != std::string::npos) out.right_tail = std::stod(line.substr(rt + 11));
            continue;
        }
        if (line.rfind("j,", 0) == 0) continue; // header row
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("sequence CSV: malformed row");
        const std::int64_t j = std::stoll(line.substr(0, comma));
        const double v = std::stod(line.substr(comma + 1));
        if (!have_offset) {
            out.offset = j;
            have_offset = true;
        }
        if (j != out.offset + static_cast<std::int64_t>(out.values.size()))
            throw std::runtime_error("sequence CSV: non-contiguous indices");
        out.values.push_back(v);
    }
    return out;
}

} // namespace dspstab
