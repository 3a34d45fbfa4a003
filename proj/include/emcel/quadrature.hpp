#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace emcel::quad {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Options {
    double rel_tol = 1e-10;
    double abs_floor = 1e-300;
    std::size_t max_intervals = 600;
};

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

// 15-point Kronrod abscissae on [-1, 1] (positive half, descending) and the
// embedded 7-point Gauss weights at the odd positions.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

}  // namespace detail

/// One Gauss-Kronrod 7/15 pass on a finite [a, b]. The endpoints themselves
/// are never sampled, so integrable endpoint singularities are tolerated.
template <class F>
Estimate gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * detail::kWgk[7];
    double gauss = fc * detail::kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = hw * detail::kXgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        kron += detail::kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += detail::kWg[j / 2] * (f1 + f2);
    }
    return {kron * hw, std::abs((kron - gauss) * hw)};
}

/// Globally adaptive Gauss-Kronrod on a finite interval: bisect the segment
/// with the largest error estimate until the summed error meets the relative
/// tolerance or the segment budget runs out.
template <class F>
double adaptive(F&& f, double a, double b, const Options& opt = {}) {
    if (!(b > a)) return 0.0;
    std::priority_queue<detail::Segment> heap;
    const Estimate first = gk15(f, a, b);
    if (!std::isfinite(first.value)) return first.value != first.value ? kInf : first.value;
    heap.push({a, b, first.value, first.error});
    double total = first.value;
    double err = first.error;
    while (err > std::max(opt.rel_tol * std::abs(total), opt.abs_floor) &&
           heap.size() < opt.max_intervals) {
        const detail::Segment s = heap.top();
        const double mid = 0.5 * (s.a + s.b);
        if (!(mid > s.a && mid < s.b)) break;
        heap.pop();
        const Estimate l = gk15(f, s.a, mid);
        const Estimate r = gk15(f, mid, s.b);
        if (!std::isfinite(l.value) || !std::isfinite(r.value)) return kInf;
        total += l.value + r.value - s.value;
        err += l.error + r.error - s.error;
        heap.push({s.a, mid, l.value, l.error});
        heap.push({mid, s.b, r.value, r.error});
    }
    // Re-sum to shed the drift of the running total.
    double sum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        heap.pop();
    }
    return sum;
}

/// Break points that split [a, b] at 0 and geometrically (ratio 2, from
/// magnitude 1 outward) so that an integrand concentrated near the origin is
/// not missed on an interval spanning many binary orders of magnitude.
std::vector<double> wide_split_points(double a, double b);

/// adaptive() applied piecewise over wide_split_points().
template <class F>
double regular(F&& f, double a, double b, const Options& opt = {}) {
    if (!(b > a)) return 0.0;
    const std::vector<double> pts = wide_split_points(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        sum += adaptive(f, pts[i], pts[i + 1], opt);
        if (sum == kInf) return kInf;
    }
    return sum;
}

enum class End { lower, upper };

namespace detail {

template <class F>
double toward_lower(F&& f, double a, double b, const Options& opt) {
    const bool infinite = std::isinf(a);
    if (!infinite && std::isinf(b)) return kInf;  // caller contract: one special end
    const double w = infinite ? std::max(1.0, std::abs(b)) : (b - a);

    double sum = 0.0;
    double prev = -1.0;
    double rho = 1.0;
    int nondecreasing_run = 0;
    double outer = b;
    for (int k = 1;; ++k) {
        double inner;
        if (infinite) {
            inner = b - w * (std::ldexp(1.0, k) - 1.0);
            if (!(std::abs(inner) < 1e300)) return prev == 0.0 ? sum : kInf;
        } else {
            inner = a + std::ldexp(w, -k);
            if (!(inner > a) || !(inner < outer)) break;
        }
        const double c = regular(f, inner, outer, opt);
        if (!std::isfinite(c)) return kInf;
        sum += c;
        outer = inner;
        if (prev >= 0.0) {
            nondecreasing_run = (c >= prev && c > 0.0) ? nondecreasing_run + 1 : 0;
            if (nondecreasing_run >= 32) return kInf;
            if (sum > 0.0) {
                rho = prev > 0.0 ? c / prev : (c > 0.0 ? 1.0 : 0.0);
                if (rho < 1.0) {
                    const double tail = c * rho / (1.0 - rho);
                    if (tail <= opt.rel_tol * sum) return sum;
                }
            }
        }
        prev = c;
    }
    // Resolution floor of a finite endpoint reached: close with the geometric
    // tail if the pieces still decay, otherwise call it divergent.
    if (sum == 0.0 || prev <= 0.0) return sum;
    if (rho < 0.999) return sum + prev * rho / (1.0 - rho);
    return kInf;
}

}  // namespace detail

/// Integral over [a, b] where the `end` side may be infinite or carry a
/// possibly non-integrable singularity of a nonnegative integrand. The range
/// is cut into dyadic pieces shrinking toward (or growing out to) that end;
/// the partial sums are accepted once the geometric tail estimate drops under
/// the tolerance. Returns +inf when the pieces stop decaying.
template <class F>
double toward_end(F&& f, double a, double b, End end, const Options& opt = {}) {
    if (!(b > a)) return 0.0;
    if (end == End::lower) return detail::toward_lower(f, a, b, opt);
    // Mirror so that the special end is the lower one.
    auto g = [&f](double u) { return f(-u); };
    return detail::toward_lower(g, -b, -a, opt);
}

}  // namespace emcel::quad
