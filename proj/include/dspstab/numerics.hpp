#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dspstab {

using complex_t = std::complex<double>;

// ---------------------------------------------------------------------------
// Least-squares line fit y ~ intercept + slope * x.
// ---------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    std::size_t n = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit out;
    out.slope = (n * sxy - sx * sy) / det;
    out.intercept = (sy - out.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - out.intercept - out.slope * x[i];
        ss += r * r;
    }
    out.rms_residual = std::sqrt(ss / n);
    out.n = x.size();
    return out;
}

// ---------------------------------------------------------------------------
// Decay-exponent fit of a norm time series: exponent of norm ~ C / n^e.
//
// Entries at or below the floating-point resolution floor carry no rate
// information, so the fit window is restricted to resolvable magnitudes.
// The leading fraction of the series is dropped as transient.
// ---------------------------------------------------------------------------

struct DecayFit {
    double exponent = 0.0;   // positive = decay
    double intercept = 0.0;
    std::size_t points_used = 0;
    bool degenerate = false; // fewer than 4 resolvable points
    double floor_used = 0.0;
};

inline DecayFit fit_decay_exponent(const std::vector<double>& n_list,
                                   const std::vector<double>& norms,
                                   double drop_fraction = 0.10,
                                   double floor = -1.0) {
    if (n_list.size() != norms.size() || n_list.size() < 4)
        throw std::invalid_argument("fit_decay_exponent: need at least 4 samples");
    double peak = 0.0;
    for (double v : norms) peak = std::max(peak, v);
    if (floor < 0.0) floor = std::max(1e-13, 1e-10 * peak);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < norms.size(); ++i) {
        if (norms[i] > floor && n_list[i] > 0.0) {
            lx.push_back(std::log(n_list[i]));
            ly.push_back(std::log(norms[i]));
        }
    }
    DecayFit out;
    out.floor_used = floor;
    // the transient fraction is dropped from the resolvable range
    const std::size_t skip = static_cast<std::size_t>(std::ceil(drop_fraction * static_cast<double>(lx.size())));
    if (skip > 0 && skip < lx.size()) {
        lx.erase(lx.begin(), lx.begin() + static_cast<std::ptrdiff_t>(skip));
        ly.erase(ly.begin(), ly.begin() + static_cast<std::ptrdiff_t>(skip));
    }
    out.points_used = lx.size();
    if (lx.size() < 4) {
        out.degenerate = true;
        return out;
    }
    const LineFit lf = fit_line(lx, ly);
    out.exponent = -lf.slope;
    out.intercept = lf.intercept;
    return out;
}

// ---------------------------------------------------------------------------
// Tanh-sinh quadrature on [a, b] for complex-valued integrands.
// ---------------------------------------------------------------------------

inline complex_t tanh_sinh(const std::function<complex_t(double)>& f, double a, double b,
                           double abs_tol = 1e-11, int max_level = 12) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    const double t_max = 3.8; // abscissae past this are within eps of the endpoints
    auto node = [&](double t, double& x, double& w) {
        const double s = 0.5 * M_PI * std::sinh(t);
        const double c = std::cosh(s);
        x = std::tanh(s);
        w = 0.5 * M_PI * std::cosh(t) / (c * c);
    };
    double h = 1.0;
    double x0, w0;
    node(0.0, x0, w0);
    complex_t sum = f(mid + half * x0) * w0;
    for (double t = h; t <= t_max; t += h) {
        double x, w;
        node(t, x, w);
        if (w < 1e-300) break;
        sum += (f(mid + half * x) + f(mid - half * x)) * w;
    }
    complex_t prev = sum * half * h;
    for (int level = 1; level <= max_level; ++level) {
        // new nodes at odd multiples of the refined step
        const double hh = h / 2.0;
        for (double t = hh; t <= t_max; t += h) {
            double x, w;
            node(t, x, w);
            if (w < 1e-300) break;
            if (1.0 - std::abs(x) > 0.0) {
                sum += (f(mid + half * x) + f(mid - half * x)) * w;
            }
        }
        h = hh;
        const complex_t cur = sum * half * h;
        if (level >= 3 && std::abs(cur - prev) <= abs_tol) return cur;
        prev = cur;
    }
    throw std::runtime_error("quadrature non-convergence");
}

// ---------------------------------------------------------------------------
// Complex least squares via modified Gram-Schmidt QR (tall skinny systems).
// ---------------------------------------------------------------------------

inline std::vector<complex_t> solve_least_squares(std::vector<std::vector<complex_t>> cols,
                                                  std::vector<complex_t> rhs) {
    const std::size_t m = rhs.size(), k = cols.size();
    for (const auto& c : cols)
        if (c.size() != m) throw std::invalid_argument("solve_least_squares: ragged columns");
    std::vector<std::vector<complex_t>> q(k);
    std::vector<std::vector<complex_t>> r(k, std::vector<complex_t>(k, 0.0));
    for (std::size_t j = 0; j < k; ++j) {
        auto v = cols[j];
        for (std::size_t i = 0; i < j; ++i) {
            complex_t dot = 0.0;
            for (std::size_t t = 0; t < m; ++t) dot += std::conj(q[i][t]) * v[t];
            r[i][j] = dot;
            for (std::size_t t = 0; t < m; ++t) v[t] -= dot * q[i][t];
        }
        double nrm = 0.0;
        for (const auto& z : v) nrm += std::norm(z);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) throw std::runtime_error("solve_least_squares: rank deficient");
        r[j][j] = nrm;
        for (auto& z : v) z /= nrm;
        q[j] = std::move(v);
    }
    std::vector<complex_t> qtb(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t t = 0; t < m; ++t) qtb[i] += std::conj(q[i][t]) * rhs[t];
    std::vector<complex_t> x(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
        complex_t s = qtb[i];
        for (std::size_t j = i + 1; j < k; ++j) s -= r[i][j] * x[j];
        x[i] = s / r[i][i];
    }
    return x;
}

// ---------------------------------------------------------------------------
// Eigenvalues of a small complex upper-Hessenberg matrix: shifted QR with
// Givens rotations. Used for companion matrices of low-degree polynomials.
// ---------------------------------------------------------------------------

namespace detail {

// G = [[c, conj(s)], [-s, c]] with c real: G [f, g]^T = [r, 0]^T
inline void givens(complex_t f, complex_t g, double& c, complex_t& s) {
    if (g == complex_t(0.0)) {
        c = 1.0;
        s = 0.0;
        return;
    }
    if (f == complex_t(0.0)) {
        c = 0.0;
        s = std::conj(g) / std::abs(g);
        return;
    }
    const double d = std::sqrt(std::norm(f) + std::norm(g));
    c = std::abs(f) / d;
    s = (std::conj(f) / std::abs(f)) * g / d;
}

} // namespace detail

inline std::vector<complex_t> hessenberg_eigenvalues(std::vector<complex_t> h, int n) {
    auto H = [&](int r, int c) -> complex_t& { return h[static_cast<std::size_t>(r) * n + c]; };
    std::vector<complex_t> eig;
    int hi = n - 1;
    int guard = 0;
    std::vector<double> cs(n);
    std::vector<complex_t> sn(n);
    while (hi >= 0) {
        if (hi == 0) {
            eig.push_back(H(0, 0));
            break;
        }
        int lo = hi;
        while (lo > 0 &&
               std::abs(H(lo, lo - 1)) >
                   1e-15 * (std::abs(H(lo - 1, lo - 1)) + std::abs(H(lo, lo)) + 1e-300))
            --lo;
        if (lo == hi) {
            eig.push_back(H(hi, hi));
            --hi;
            continue;
        }
        if (lo == hi - 1) {
            const complex_t a = H(lo, lo), b = H(lo, hi), c = H(hi, lo), d = H(hi, hi);
            const complex_t tr = a + d;
            const complex_t disc = std::sqrt(tr * tr - 4.0 * (a * d - b * c));
            eig.push_back(0.5 * (tr + disc));
            eig.push_back(0.5 * (tr - disc));
            hi = lo - 1;
            continue;
        }
        if (++guard > 500 * n) throw std::runtime_error("root-finder non-convergence");
        // Wilkinson shift: eigenvalue of trailing 2x2 nearest H(hi,hi)
        const complex_t a = H(hi - 1, hi - 1), b = H(hi - 1, hi), c = H(hi, hi - 1), d = H(hi, hi);
        const complex_t tr = a + d;
        const complex_t disc = std::sqrt(tr * tr - 4.0 * (a * d - b * c));
        const complex_t e1 = 0.5 * (tr + disc), e2 = 0.5 * (tr - disc);
        const complex_t sigma = std::abs(e1 - d) < std::abs(e2 - d) ? e1 : e2;
        for (int i = lo; i <= hi; ++i) H(i, i) -= sigma;
        // QR sweep: rows, then RQ: columns
        for (int i = lo; i < hi; ++i) {
            detail::givens(H(i, i), H(i + 1, i), cs[i], sn[i]);
            for (int col = i; col <= hi; ++col) {
                const complex_t t1 = H(i, col), t2 = H(i + 1, col);
                H(i, col) = cs[i] * t1 + std::conj(sn[i]) * t2;
                H(i + 1, col) = -sn[i] * t1 + cs[i] * t2;
            }
        }
        for (int i = lo; i < hi; ++i) {
            const int top = lo;
            for (int row = top; row <= std::min(i + 1, hi); ++row) {
                const complex_t t1 = H(row, i), t2 = H(row, i + 1);
                H(row, i) = cs[i] * t1 + sn[i] * t2;
                H(row, i + 1) = -std::conj(sn[i]) * t1 + cs[i] * t2;
            }
        }
        for (int i = lo; i <= hi; ++i) H(i, i) += sigma;
    }
    return eig;
}

/// Roots of c[0] + c[1] z + ... + c[deg] z^deg, c[deg] != 0.
inline std::vector<complex_t> polynomial_roots(const std::vector<complex_t>& coeffs) {
    int deg = static_cast<int>(coeffs.size()) - 1;
    while (deg > 0 && std::abs(coeffs[deg]) == 0.0) --deg;
    if (deg < 1) throw std::invalid_argument("polynomial_roots: degree < 1");
    std::vector<complex_t> h(static_cast<std::size_t>(deg) * deg, 0.0);
    for (int i = 0; i < deg; ++i) h[static_cast<std::size_t>(i) * deg + deg - 1] = -coeffs[i] / coeffs[deg];
    for (int i = 1; i < deg; ++i) h[static_cast<std::size_t>(i) * deg + i - 1] = 1.0;
    return hessenberg_eigenvalues(std::move(h), deg);
}

// ---------------------------------------------------------------------------
// Dense LU solve with partial pivoting (small truncated-operator systems).
// ---------------------------------------------------------------------------

struct LuFactors {
    int n = 0;
    std::vector<double> lu;
    std::vector<int> piv;
};

inline LuFactors lu_factor(std::vector<double> a, int n) {
    LuFactors f{n, std::move(a), std::vector<int>(n)};
    auto A = [&](int r, int c) -> double& { return f.lu[static_cast<std::size_t>(r) * n + c]; };
    for (int k = 0; k < n; ++k) {
        int pr = k;
        for (int r = k + 1; r < n; ++r)
            if (std::abs(A(r, k)) > std::abs(A(pr, k))) pr = r;
        f.piv[k] = pr;
        if (pr != k)
            for (int c = 0; c < n; ++c) std::swap(A(k, c), A(pr, c));
        if (A(k, k) == 0.0) throw std::runtime_error("lu_factor: singular matrix");
        for (int r = k + 1; r < n; ++r) {
            A(r, k) /= A(k, k);
            const double m = A(r, k);
            for (int c = k + 1; c < n; ++c) A(r, c) -= m * A(k, c);
        }
    }
    return f;
}

inline void lu_solve(const LuFactors& f, std::vector<double>& x) {
    const int n = f.n;
    auto A = [&](int r, int c) { return f.lu[static_cast<std::size_t>(r) * n + c]; };
    for (int k = 0; k < n; ++k)
        if (f.piv[k] != k) std::swap(x[k], x[f.piv[k]]);
    for (int r = 1; r < n; ++r)
        for (int c = 0; c < r; ++c) x[r] -= A(r, c) * x[c];
    for (int r = n - 1; r >= 0; --r) {
        for (int c = r + 1; c < n; ++c) x[r] -= A(r, c) * x[c];
        x[r] /= A(r, r);
    }
}

// ---------------------------------------------------------------------------
// Deterministic RNG: fixed mapping from the engine's 64-bit output so that
// seeded runs are bit-identical across platforms.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        // inclusive range; modulo bias immaterial for test-scale ranges
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<std::int64_t>(eng_() % span);
    }

private:
    std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------------
// Bounded worker-pool parallel loop. DSPSTAB_THREADS caps the worker count.
// Each index writes only its own outputs, so scheduling cannot change results.
// ---------------------------------------------------------------------------

inline unsigned max_threads() {
    if (const char* env = std::getenv("DSPSTAB_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

template <class Fn>
inline void parallel_for(std::size_t count, Fn&& fn) {
    const unsigned workers = std::min<std::size_t>(max_threads(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace dspstab
