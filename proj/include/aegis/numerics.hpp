#pragma once

/**
 * @file numerics.hpp
 * @brief One-dimensional quadrature, bounded scalar maximization, bracketed
 * root finding and central differences.
 *
 * Every integral in the library goes through integrate(): a globally adaptive
 * 7-point Gauss / 15-point Kronrod scheme. The interval with the largest
 * error estimate is bisected until the summed estimate drops below
 * max(abs_tol, rel_tol * |value|). Known kinks in the integrand (deductibles)
 * are passed as split points so the adaptive loop never has to hunt for them.
 */

#include <aegis/errors.hpp>

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aegis::numerics {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;

    void validate() const {
        if (!(abs_tol > 0.0)) throw InvariantError("QuadratureSpec: abs_tol must be > 0");
        if (!(rel_tol >= 0.0)) throw InvariantError("QuadratureSpec: rel_tol must be >= 0");
        if (max_subdivisions < 1) throw InvariantError("QuadratureSpec: max_subdivisions must be >= 1");
    }
};

struct OptimizeSpec {
    double x_tol = 1e-7;
    int max_iters = 500;

    void validate() const {
        if (!(x_tol > 0.0)) throw InvariantError("OptimizeSpec: x_tol must be > 0");
        if (max_iters < 1) throw InvariantError("OptimizeSpec: max_iters must be >= 1");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

struct MaximizeResult {
    double argmax = 0.0;
    double max_value = 0.0;
};

namespace detail {

// Gauss-Kronrod 15-point abscissae (descending, last is the centre) and weights.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// 7-point Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo;
    double hi;
    double value;
    double error;

    bool operator<(const Segment& other) const { return error < other.error; }
};

inline double checked(double y, double x) {
    if (!std::isfinite(y)) {
        throw DomainError("integrand is not finite at x = " + std::to_string(x));
    }
    return y;
}

// QUADPACK-style qk15 with the resasc-scaled error estimate.
template <class F>
Segment gauss_kronrod_15(F& f, double lo, double hi) {
    const double centre = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double abs_half = std::abs(half);

    const double fc = checked(static_cast<double>(f(centre)), centre);
    double res_g = fc * kGaussWeights[3];
    double res_k = fc * kKronrodWeights[7];
    double res_abs = std::abs(res_k);

    std::array<double, 7> f_left{};
    std::array<double, 7> f_right{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double a = centre - dx;
        const double b = centre + dx;
        f_left[j] = checked(static_cast<double>(f(a)), a);
        f_right[j] = checked(static_cast<double>(f(b)), b);
        const double sum = f_left[j] + f_right[j];
        res_k += kKronrodWeights[j] * sum;
        res_abs += kKronrodWeights[j] * (std::abs(f_left[j]) + std::abs(f_right[j]));
        if (j % 2 == 1) res_g += kGaussWeights[j / 2] * sum;
    }

    const double mean = 0.5 * res_k;
    double res_asc = kKronrodWeights[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        res_asc += kKronrodWeights[j] * (std::abs(f_left[j] - mean) + std::abs(f_right[j] - mean));
    }

    const double result = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    double err = std::abs((res_k - res_g) * half);
    if (res_asc != 0.0 && err != 0.0) {
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min();
    if (res_abs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * res_abs, err);
    return Segment{lo, hi, result, err};
}

}  // namespace detail

/// Integrate f over [lo, hi]. Interior points in `splits` become initial
/// segment boundaries; points outside (lo, hi) are ignored.
/// Throws NonConvergence (carrying the best estimate and its error bound)
/// when the subdivision budget runs out.
template <class F>
QuadratureResult integrate_with_error(F&& f, double lo, double hi, const QuadratureSpec& spec = {},
                                      std::span<const double> splits = {}) {
    spec.validate();
    if (!(lo <= hi)) throw DomainError("integrate: requires lo <= hi");
    if (lo == hi) return {};

    std::vector<double> edges{lo};
    for (double s : splits) {
        if (s > lo && s < hi) edges.push_back(s);
    }
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::priority_queue<detail::Segment> queue;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        auto seg = detail::gauss_kronrod_15(f, edges[i], edges[i + 1]);
        total += seg.value;
        total_err += seg.error;
        queue.push(seg);
    }

    int subdivisions = 0;
    auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
    while (total_err > tolerance()) {
        if (subdivisions >= spec.max_subdivisions) {
            throw NonConvergence("integrate: subdivision budget exhausted", total, total_err);
        }
        const detail::Segment worst = queue.top();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            throw NonConvergence("integrate: segment cannot be bisected further", total, total_err);
        }
        queue.pop();
        auto left = detail::gauss_kronrod_15(f, worst.lo, mid);
        auto right = detail::gauss_kronrod_15(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++subdivisions;
    }

    // Re-sum from the segments to shed the drift of the running updates.
    double value = 0.0;
    double error = 0.0;
    while (!queue.empty()) {
        value += queue.top().value;
        error += queue.top().error;
        queue.pop();
    }
    return {value, error, subdivisions};
}

template <class F>
double integrate(F&& f, double lo, double hi, const QuadratureSpec& spec = {},
                 std::span<const double> splits = {}) {
    return integrate_with_error(std::forward<F>(f), lo, hi, spec, splits).value;
}

/**
 * Maximize f on [lo, hi] with Brent's method (golden section steps refined by
 * successive parabolic interpolation). Concavity is not checked. The
 * endpoints are compared against the interior candidate afterwards so that
 * boundary optima come back exactly as lo or hi.
 */
template <class F>
MaximizeResult maximize_scalar(F&& f, double lo, double hi, const OptimizeSpec& spec = {}) {
    spec.validate();
    if (!(lo < hi)) throw DomainError("maximize_scalar: requires lo < hi");

    constexpr double golden = 0.3819660112501051;  // (3 - sqrt 5) / 2
    constexpr double sqrt_eps = 1.4901161193847656e-08;
    auto g = [&](double x) { return -static_cast<double>(f(x)); };

    double a = lo;
    double b = hi;
    double x = a + golden * (b - a);
    double w = x;
    double v = x;
    double fx = g(x);
    double fw = fx;
    double fv = fx;
    double d = 0.0;
    double e = 0.0;

    int iter = 0;
    for (;; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol = sqrt_eps * std::abs(x) + spec.x_tol / 3.0;
        const double tol2 = 2.0 * tol;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
        if (iter >= spec.max_iters) {
            throw NonConvergence("maximize_scalar: iteration budget exhausted", x, 0.5 * (b - a));
        }

        bool use_golden = true;
        if (std::abs(e) > tol) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_prev = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol : -tol;
                use_golden = false;
            }
        }
        if (use_golden) {
            e = (x < m) ? b - x : a - x;
            d = golden * e;
        }

        const double u = (std::abs(d) >= tol) ? x + d : x + (d > 0.0 ? tol : -tol);
        const double fu = g(u);
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }

    MaximizeResult best{x, -fx};
    const double f_lo = static_cast<double>(f(lo));
    const double f_hi = static_cast<double>(f(hi));
    if (f_lo >= best.max_value) best = {lo, f_lo};
    if (f_hi > best.max_value) best = {hi, f_hi};
    return best;
}

/// Root of f on [lo, hi]; f(lo) and f(hi) must have opposite signs (or one
/// of them be zero). TOMS 748 bracketing, terminated when the bracket is
/// narrower than x_tol.
template <class F>
double find_root(F&& f, double lo, double hi, const OptimizeSpec& spec = {}) {
    spec.validate();
    const double f_lo = f(lo);
    if (f_lo == 0.0) return lo;
    const double f_hi = f(hi);
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0.0) == (f_hi > 0.0)) throw DomainError("find_root: endpoints do not bracket a root");

    std::uintmax_t iters = static_cast<std::uintmax_t>(spec.max_iters);
    const double x_tol = spec.x_tol;
    auto done = [x_tol](double a, double b) { return std::abs(b - a) <= x_tol; };
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, done, iters);
    if (!done(a, b)) {
        throw NonConvergence("find_root: iteration budget exhausted", 0.5 * (a + b), 0.5 * (b - a));
    }
    return 0.5 * (a + b);
}

/// Symmetric difference quotient (f(x+h) - f(x-h)) / 2h.
template <class F>
double central_diff(F&& f, double x, double h) {
    if (!(h > 0.0)) throw DomainError("central_diff: h must be > 0");
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace aegis::numerics
