#include "emcel/scale.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace emcel {

ScaleSolver::ScaleSolver(const SpeedMeasure& m, double h, double eps_root)
    : ScaleSolver(m, effective_bounds(m, h, eps_root), eps_root) {}

ScaleSolver::ScaleSolver(const SpeedMeasure& m, const EffectiveBounds& bounds, double eps_root)
    : m_(&m), bounds_(bounds), eps_root_(eps_root > 0.0 ? eps_root : default_eps_root(m.interval())) {
    if (!(bounds_.h > 0.0)) throw std::invalid_argument("scale factor needs h > 0");
}

double ScaleSolver::half_triangular(double y, double a) const {
    const StateInterval& I = m_->interval();
    if (a <= 0.0) return 0.0;
    if (y - a < I.l || y + a > I.r) return kInf;
    return 0.5 * m_->triangular_integral(y, a);
}

bool ScaleSolver::in_root_region(double y) const {
    return y > bounds_.l_h + eps_root_ && y < bounds_.r_h - eps_root_;
}

double ScaleSolver::operator()(double y) const {
    const StateInterval& I = m_->interval();
    if (std::isnan(y) || !I.in_closure(y)) throw std::domain_error("scale factor: y outside the state space");
    if (y == I.l || y == I.r) return 0.0;
    if (y <= bounds_.l_h + eps_root_) return y - I.l;
    if (y >= bounds_.r_h - eps_root_) return I.r - y;
    return root(y);
}

double ScaleSolver::root(double y, double seed) const {
    const StateInterval& I = m_->interval();
    const double h = bounds_.h;
    const double a_max = std::min(y - I.l, I.r - y);  // a_I(y), possibly +inf
    if (!(a_max > 0.0)) throw std::domain_error("scale factor root: y must lie in (l, r)");

    if (!(seed > 0.0)) {
        const double d = std::min(std::sqrt(h), 0.5 * a_max);
        const double loc = m_->mass(y - d, y + d, false, false) / (2.0 * d);
        seed = (loc > 0.0 && std::isfinite(loc)) ? std::sqrt(2.0 * h / loc) : d;
    }
    seed = std::min(seed, 0.5 * a_max);

    // Bracket [lo, hi] with phi(lo) < h <= phi(hi).
    double lo = 0.0;
    double hi = seed;
    double f_hi = half_triangular(y, hi);
    for (int guard = 0; f_hi < h; ++guard) {
        if (guard > 4000) throw std::runtime_error(fmt::format("scale factor root: no bracket at y = {}", y));
        lo = hi;
        hi = std::isfinite(a_max) ? 0.5 * (hi + a_max) : 2.0 * hi;
        if (!(hi > lo)) {
            hi = a_max;
            break;
        }
        f_hi = half_triangular(y, hi);
    }

    // Newton on the convex-in-a map, kept inside the bracket. Newton approaches
    // the root from one side, so close the bracket with a probe once it stalls.
    double a = hi;
    for (int it = 0; it < 400; ++it) {
        const double tol = eps_root_ * std::min(1.0, hi);
        if (hi - lo <= tol) break;
        const double f = half_triangular(y, a) - h;
        if (f == 0.0) return a;
        if (f > 0.0) hi = a;
        else lo = a;
        if (hi - lo <= tol) break;
        const double slope = 0.5 * m_->mass(y - a, y + a, false, false);
        double next = a - f / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (std::abs(next - a) <= 0.5 * tol) {
            const double probe = f > 0.0 ? next - tol : next + tol;
            if (probe > lo && probe < hi) {
                if (half_triangular(y, probe) >= h) hi = probe;
                else lo = probe;
            }
            next = std::clamp(next, lo, hi);
            if (hi - lo <= 2.0 * tol) return next;
        }
        a = next;
    }
    return 0.5 * (lo + hi);
}

double scale_factor(const SpeedMeasure& m, const EffectiveBounds& bounds, double y, double h,
                    double eps_root) {
    EffectiveBounds b = bounds;
    b.h = h;
    return ScaleSolver(m, b, eps_root)(y);
}

namespace {

void check_window(const SpeedMeasure& m, double y, double a) {
    if (!(a > 0.0)) throw std::domain_error("scale derivative: a must be positive");
    if (!m.interval().in_interior(y - a) || !m.interval().in_interior(y + a))
        throw std::domain_error("scale derivative: y +- a must lie in (l, r)");
}

}  // namespace

double right_derivative(const SpeedMeasure& m, double y, double a) {
    check_window(m, y, a);
    const double left = m.mass(y - a, y, false, true);
    const double right = m.mass(y, y + a, false, true);
    if (std::isinf(left) || std::isinf(right)) return 1.0;
    const double total = left + right;
    if (!(total > 0.0)) throw std::domain_error("scale derivative: zero mass window");
    return (left - right) / total;
}

double left_derivative(const SpeedMeasure& m, double y, double a) {
    check_window(m, y, a);
    const double left = m.mass(y - a, y, true, false);
    const double right = m.mass(y, y + a, true, false);
    if (std::isinf(left) || std::isinf(right)) return 1.0;
    const double total = left + right;
    if (!(total > 0.0)) throw std::domain_error("scale derivative: zero mass window");
    return (left - right) / total;
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::bisection: return "bisection";
        case Method::ode: return "ode";
        case Method::boundary_formula: return "boundary-formula";
    }
    return "?";
}

void write_csv(const ScaleTable& table, std::ostream& out) {
    out << "y,a,method\n";
    for (std::size_t i = 0; i < table.size(); ++i)
        out << fmt::format("{:.17g},{:.17g},{}\n", table.grid[i], table.values[i], to_string(table.method[i]));
}

namespace {

void check_grid(const ScaleSolver& solver, std::span<const double> grid) {
    const StateInterval& I = solver.interval();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::isnan(grid[i]) || !I.in_closure(grid[i]))
            throw std::domain_error(fmt::format("scale table: grid point {} outside the state space", grid[i]));
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("scale table: grid must be strictly increasing");
    }
}

ScaleTable empty_table(const ScaleSolver& solver, std::span<const double> grid) {
    ScaleTable t;
    t.h = solver.h();
    t.grid.assign(grid.begin(), grid.end());
    t.values.assign(grid.size(), 0.0);
    t.method.assign(grid.size(), Method::boundary_formula);
    return t;
}

void fill_point(const ScaleSolver& solver, ScaleTable& t, std::size_t i) {
    const double y = t.grid[i];
    if (solver.in_root_region(y)) {
        t.values[i] = solver.root(y);
        t.method[i] = Method::bisection;
    } else {
        t.values[i] = solver(y);
        t.method[i] = Method::boundary_formula;
    }
}

}  // namespace

ScaleTable scale_table_serial(const ScaleSolver& solver, std::span<const double> grid) {
    check_grid(solver, grid);
    ScaleTable t = empty_table(solver, grid);
    for (std::size_t i = 0; i < t.size(); ++i) fill_point(solver, t, i);
    return t;
}

ScaleTable scale_table(const ScaleSolver& solver, std::span<const double> grid, TableMode mode) {
    check_grid(solver, grid);
    ScaleTable t = empty_table(solver, grid);
    const auto n = static_cast<std::ptrdiff_t>(t.size());
    if (mode == TableMode::bisect_all) {
#pragma omp parallel for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < n; ++i) fill_point(solver, t, static_cast<std::size_t>(i));
        return t;
    }

    // Interior points form one contiguous run of the increasing grid.
    std::size_t first = t.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (solver.in_root_region(t.grid[i])) {
            first = std::min(first, i);
            last = i;
        } else {
            t.values[i] = solver(t.grid[i]);
        }
    }
    if (first == t.size()) return t;
    const std::size_t anchor = first + (last - first) / 2;
    const double y0 = t.grid[anchor];
    const double a0 = solver.root(y0);
    const ScaleTable inner =
        propagate_ode(solver, y0, a0, std::span<const double>(t.grid).subspan(first, last - first + 1));
    for (std::size_t i = first; i <= last; ++i) {
        t.values[i] = inner.values[i - first];
        t.method[i] = i == anchor ? Method::bisection : Method::ode;
    }
    t.reprojections = inner.reprojections;
    return t;
}

double euler_scale(const std::function<double(double)>& eta, const StateInterval& I, double h, double y) {
    if (!I.in_interior(y)) return 0.0;
    return std::abs(eta(y)) * std::sqrt(h);
}

std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
        throw std::invalid_argument("grid needs finite lo <= hi and step > 0");
    const double span = (hi - lo) / step;
    const auto n = static_cast<std::size_t>(std::floor(span * (1.0 + 1e-9) + 1e-9)) + 1;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + static_cast<double>(i) * step;
    if (n > 1 && std::abs(g.back() - hi) <= 1e-9 * std::max(1.0, std::abs(hi))) g.back() = hi;
    return g;
}

}  // namespace emcel
