#include "emcel/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace emcel {

nlohmann::json to_json(const PropertyReport& r) {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : r.evidence) ev.push_back({{"input", e.input}, {"observed", e.observed}, {"bound", e.bound}});
    nlohmann::json j = {{"name", r.name},
                        {"passed", r.passed},
                        {"inconclusive", r.inconclusive},
                        {"worst_violation", r.worst_violation},
                        {"tolerance", r.tolerance},
                        {"checked", r.checked},
                        {"violations", r.violations},
                        {"evidence", ev}};
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

ReportBuilder::ReportBuilder(std::string name, double tolerance, std::size_t keep) : keep_(keep) {
    r_.name = std::move(name);
    r_.tolerance = tolerance;
}

void ReportBuilder::add(std::string input, double observed, double bound, double violation) {
    ++r_.checked;
    if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
    r_.worst_violation = std::max(r_.worst_violation, violation);
    if (violation > r_.tolerance) ++r_.violations;
    worst_.push_back({violation, Evidence{std::move(input), observed, bound}});
    std::stable_sort(worst_.begin(), worst_.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (worst_.size() > keep_) worst_.pop_back();
}

void ReportBuilder::note(std::string text) { r_.notes.push_back(std::move(text)); }

PropertyReport ReportBuilder::finish() const {
    PropertyReport r = r_;
    for (const auto& w : worst_) r.evidence.push_back(w.second);
    r.passed = r.worst_violation <= r.tolerance;
    return r;
}

// ---- asymptotic orders -------------------------------------------------

namespace {

struct Fit {
    double slope;
    double intercept;
};

Fit least_squares(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

double root_at(const SpeedMeasure& m, double y, double h) {
    const ScaleSolver s(m, h);
    if (!s.in_root_region(y))
        throw std::invalid_argument(fmt::format("y = {} is not inside (l_h, r_h) for h = {}", y, h));
    return s.root(y);
}

}  // namespace

OrderEstimate estimate_order(const SpeedMeasure& m, double y, std::span<const double> h_seq) {
    if (h_seq.size() < 4) throw std::invalid_argument("estimate_order needs at least 4 step sizes");
    for (std::size_t i = 1; i < h_seq.size(); ++i)
        if (!(h_seq[i] < h_seq[i - 1])) throw std::invalid_argument("estimate_order: h_seq must decrease strictly");
    OrderEstimate est;
    est.y = y;
    est.h_seq.assign(h_seq.begin(), h_seq.end());
    std::vector<double> lx;
    std::vector<double> ly;
    for (double h : h_seq) {
        const double a = root_at(m, y, h);
        est.a_seq.push_back(a);
        lx.push_back(std::log(h));
        ly.push_back(std::log(a));
    }
    est.degenerate = std::all_of(est.a_seq.begin(), est.a_seq.end(), [&](double a) { return a == est.a_seq[0]; });
    if (est.degenerate) {
        est.slope = 0.0;
        est.intercept_const = est.a_seq[0];
        return est;
    }
    est.slope = least_squares(lx, ly).slope;
    const std::size_t k = lx.size() - 4;
    const Fit tail = least_squares(std::span<const double>(lx).subspan(k), std::span<const double>(ly).subspan(k));
    est.intercept_const = std::exp(tail.intercept);
    return est;
}

std::vector<double> decade_sequence(double h_max, double h_min, int per_decade) {
    if (!(h_max > 0.0) || !(h_min > 0.0) || h_min > h_max || per_decade < 1)
        throw std::invalid_argument("decade_sequence: need 0 < h_min <= h_max");
    std::vector<double> seq;
    for (int k = 0;; ++k) {
        const double h = h_max * std::pow(10.0, -static_cast<double>(k) / per_decade);
        if (h < h_min * (1.0 - 1e-9)) break;
        seq.push_back(h);
    }
    return seq;
}

PropertyReport atom_limit_check(const SpeedMeasure& m, double y, double h_min, double rel_tol) {
    const double w = m.atom_at(y);
    if (!(w > 0.0)) throw std::invalid_argument(fmt::format("atom_limit_check: no atom at {}", y));
    const double limit = 2.0 / w;
    ReportBuilder rb(fmt::format("atom-limit@{}", y), rel_tol, 16);
    const auto hs = decade_sequence(1e-2, h_min);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double ratio = root_at(m, y, hs[i]) / hs[i];
        const bool last = i + 1 == hs.size();
        rb.add_lazy([&] { return fmt::format("h={:g}", hs[i]); }, ratio, limit,
               last ? std::abs(ratio / limit - 1.0) : -std::numeric_limits<double>::infinity());
    }
    rb.note("only the smallest h is judged; the rest show the approach to 2/m({y})");
    return rb.finish();
}

PropertyReport power_mean_limit(const SpeedMeasure& m, double y, double eta_left, double eta_right, double h_min,
                                double rel_tol, double h_max) {
    const double el = std::abs(eta_left);
    const double er = std::abs(eta_right);
    const double inv = (std::isinf(el) ? 0.0 : 1.0 / (el * el)) + (std::isinf(er) ? 0.0 : 1.0 / (er * er));
    if (!(inv > 0.0)) throw std::invalid_argument("power_mean_limit: both one-sided limits are infinite");
    const double limit = std::sqrt(2.0 / inv);
    const double lo = std::min(el, er);
    const double hi = std::max(el, er);
    ReportBuilder rb(fmt::format("power-mean-limit@{}", y), rel_tol, 32);
    const auto hs = decade_sequence(h_max, h_min);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double ratio = root_at(m, y, hs[i]) / std::sqrt(hs[i]);
        const std::string tag = fmt::format("h={:g}", hs[i]);
        rb.add(tag + " sandwich-low", ratio, lo, (lo - ratio) / lo);
        if (std::isfinite(hi)) rb.add(tag + " sandwich-high", ratio, hi, (ratio - hi) / hi);
        if (i + 1 == hs.size()) rb.add(tag + " limit", ratio, limit, std::abs(ratio / limit - 1.0));
    }
    return rb.finish();
}

// ---- table properties --------------------------------------------------

PropertyReport check_comparison(const ScaleTable& t, const StateInterval& I, const EffectiveBounds& b, double tol) {
    ReportBuilder rb("comparison", tol);
    rb.note("y+a strictly increasing on (l, r_h) and constant on [r_h, r); "
            "y-a constant on (l, l_h] and strictly increasing on (l_h, r)");
    // A non-positive increment where strict increase is required always fails.
    const double strict_fail = std::nextafter(tol, std::numeric_limits<double>::infinity());
    auto strict = [&](double d) { return d > 0.0 ? -d : strict_fail - d; };
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double y0 = t.grid[i];
        const double y1 = t.grid[i + 1];
        const double up = (y1 + t.values[i + 1]) - (y0 + t.values[i]);
        const double dn = (y1 - t.values[i + 1]) - (y0 - t.values[i]);
        auto tag = [&](const char* what) { return [=] { return fmt::format("[{:.17g}, {:.17g}] {}", y0, y1, what); }; };
        rb.add_lazy(tag("y+a"), up, 0.0, -up);
        rb.add_lazy(tag("y-a"), dn, 0.0, -dn);
        const bool in_I = y0 > I.l && y1 < I.r;
        if (in_I && y1 < b.r_h) rb.add_lazy(tag("y+a strict"), up, 0.0, strict(up));
        if (in_I && y0 >= b.r_h) rb.add_lazy(tag("y+a constant"), up, 0.0, std::abs(up));
        if (in_I && y1 <= b.l_h) rb.add_lazy(tag("y-a constant"), dn, 0.0, std::abs(dn));
        if (in_I && y0 > b.l_h) rb.add_lazy(tag("y-a strict"), dn, 0.0, strict(dn));
    }
    return rb.finish();
}

PropertyReport check_lipschitz(const ScaleTable& t, double tol) {
    ReportBuilder rb("lipschitz", tol);
    const std::size_t n = t.size();
    if (n <= 4096) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = std::abs(t.values[j] - t.values[i]);
                const double dy = t.grid[j] - t.grid[i];
                rb.add_lazy([&] { return fmt::format("({:.17g}, {:.17g})", t.grid[i], t.grid[j]); }, d, dy, d - dy);
            }
        }
    } else {
        rb.note("large grid: consecutive pairs only (they bound every pair by the triangle inequality)");
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double d = std::abs(t.values[i + 1] - t.values[i]);
            const double dy = t.grid[i + 1] - t.grid[i];
            rb.add_lazy([&] { return fmt::format("({:.17g}, {:.17g})", t.grid[i], t.grid[i + 1]); }, d, dy, d - dy);
        }
    }
    return rb.finish();
}

PropertyReport check_growth(const ScaleTable& t, double C0, const std::function<double(double)>& g, double tol) {
    ReportBuilder rb("growth", tol);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double y = t.grid[i];
        const double a = t.values[i];
        const double lin = C0 + std::abs(y);
        rb.add_lazy([&] { return fmt::format("y={:.17g} linear", y); }, a, lin, a - lin);
        if (g) {
            const double bound = std::sqrt(2.0 * g(C0 + 2.0 * std::abs(y)) * t.h);
            rb.add_lazy([&] { return fmt::format("y={:.17g} sqrt(2 g h)", y); }, a, bound, a - bound);
        }
    }
    return rb.finish();
}

PropertyReport check_root_residual(const ScaleSolver& solver, const ScaleTable& t, double tol) {
    ReportBuilder rb("root-residual", tol);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!solver.in_root_region(t.grid[i])) continue;
        const double r = std::abs(solver.half_triangular(t.grid[i], t.values[i]) - solver.h());
        rb.add_lazy([&] { return fmt::format("y={:.17g}", t.grid[i]); }, r, tol, r);
    }
    return rb.finish();
}

PropertyReport check_sandwich(const ScaleSolver& solver, const ScaleTable& t, double tol) {
    ReportBuilder rb("sandwich", tol);
    const SpeedMeasure& m = solver.measure();
    const double two_h = 2.0 * solver.h();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double y = t.grid[i];
        if (!solver.in_root_region(y)) continue;
        const double a = t.values[i];
        double lower = 0.0;
        for (double lam : {0.0, 0.25, 0.5, 0.75})
            lower = std::max(lower, (1.0 - lam) * m.mass(y - lam * a, y + lam * a, true, true));
        lower *= a;
        const double upper = a * m.mass(y - a, y + a, false, false);
        rb.add_lazy([&] { return fmt::format("y={:.17g} lower", y); }, lower, two_h, (lower - two_h) / two_h);
        rb.add_lazy([&] { return fmt::format("y={:.17g} upper", y); }, upper, two_h, (two_h - upper) / two_h);
    }
    return rb.finish();
}

PropertyReport check_h_monotonicity(const SpeedMeasure& m, std::span<const double> ys, std::span<const double> h_seq,
                                    double tol) {
    ReportBuilder rb("h-monotonicity", tol);
    std::vector<ScaleSolver> solvers;
    for (double h : h_seq) solvers.emplace_back(m, h);
    for (double y : ys) {
        if (!m.interval().in_interior(y)) continue;
        double prev = solvers.empty() ? 0.0 : solvers[0](y);
        for (std::size_t k = 1; k < solvers.size(); ++k) {
            const double a = solvers[k](y);
            // h_seq decreases, so a must not increase.
            rb.add_lazy([&] { return fmt::format("y={:.17g} h={:g}->{:g}", y, h_seq[k - 1], h_seq[k]); }, a, prev,
                        a - prev);
            prev = a;
        }
    }
    return rb.finish();
}

PropertyReport check_uniform_vanishing(const SpeedMeasure& m, std::span<const double> grid, double M,
                                       std::span<const double> h_seq, double fraction) {
    ReportBuilder rb("uniform-vanishing", 1e-12);
    std::vector<double> sups;
    for (double h : h_seq) {
        const ScaleSolver s(m, h);
        double sup = 0.0;
        for (double y : grid)
            if (std::abs(y) <= M && m.interval().in_closure(y)) sup = std::max(sup, s(y));
        sups.push_back(sup);
    }
    for (std::size_t k = 1; k < sups.size(); ++k)
        rb.add_lazy([&] { return fmt::format("sup at h={:g} vs h={:g}", h_seq[k], h_seq[k - 1]); }, sups[k],
                    sups[k - 1],
               sups[k] - sups[k - 1]);
    if (!sups.empty())
        rb.add("final sup vs first", sups.back(), fraction * sups.front(), sups.back() - fraction * sups.front());
    return rb.finish();
}

PropertyReport check_derivatives(const ScaleSolver& solver, std::span<const double> ys, double eps, double tol) {
    ReportBuilder rb("derivative-consistency", tol);
    const SpeedMeasure& m = solver.measure();
    const auto& bp = m.breakpoints();
    std::size_t skipped = 0;
    for (double y : ys) {
        if (!solver.in_root_region(y - eps) || !solver.in_root_region(y + eps)) continue;
        const double a = solver.root(y);
        const double margin = 4.0 * eps;
        const bool near_kink = std::any_of(bp.begin(), bp.end(), [&](double p) {
            return std::abs(p - y) < margin || std::abs(p - (y - a)) < margin || std::abs(p - (y + a)) < margin;
        });
        if (near_kink) {
            ++skipped;
            continue;
        }
        const double fd = (solver.root(y + eps) - solver.root(y - eps)) / (2.0 * eps);
        const double rd = right_derivative(m, y, a);
        const double ld = left_derivative(m, y, a);
        rb.add_lazy([&] { return fmt::format("y={:.17g} right", y); }, fd, rd, std::abs(fd - rd));
        rb.add_lazy([&] { return fmt::format("y={:.17g} left", y); }, fd, ld, std::abs(fd - ld));
    }
    rb.note(fmt::format("{} points skipped near kinks", skipped));
    return rb.finish();
}

PropertyReport check_ode_equivalence(const ScaleSolver& solver, std::span<const double> grid, double tol) {
    ReportBuilder rb("ode-equivalence", tol);
    const ScaleTable bis = scale_table(solver, grid, TableMode::bisect_all);
    const ScaleTable ode = scale_table(solver, grid, TableMode::ode_hybrid);
    for (std::size_t i = 0; i < bis.size(); ++i) {
        if (!solver.in_root_region(bis.grid[i])) continue;
        const double rel = std::abs(ode.values[i] - bis.values[i]) / bis.values[i];
        rb.add_lazy([&] { return fmt::format("y={:.17g}", bis.grid[i]); }, ode.values[i], bis.values[i], rel);
    }
    rb.note(fmt::format("{} re-projections", ode.reprojections));
    return rb.finish();
}

namespace {

std::vector<double> thin_out(std::span<const double> v, std::size_t k) {
    std::vector<double> out;
    if (v.empty()) return out;
    const std::size_t stride = std::max<std::size_t>(1, v.size() / k);
    for (std::size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
    return out;
}

}  // namespace

std::vector<PropertyReport> scale_property_suite(const SpeedMeasure& m, double h, std::span<const double> grid) {
    const ScaleSolver solver(m, h);
    const double eps = solver.eps_root();
    const ScaleTable table = scale_table(solver, grid, TableMode::bisect_all);
    std::vector<PropertyReport> out;
    out.push_back(check_comparison(table, m.interval(), solver.bounds(), 2.0 * eps));
    out.push_back(check_lipschitz(table, 2.0 * eps));
    const double y0 = probe_point(m.interval());
    const double C0 = std::abs(y0) + solver(y0);
    out.push_back(check_growth(table, C0, nullptr, 2.0 * eps));
    out.push_back(check_root_residual(solver, table, 1e-9 * h));
    out.push_back(check_sandwich(solver, table));
    out.push_back(check_derivatives(solver, thin_out(grid, 200)));

    std::vector<double> inner;
    for (double y : grid)
        if (solver.in_root_region(y)) inner.push_back(y);
    out.push_back(check_ode_equivalence(solver, inner));

    const std::vector<double> hs = {h, h / 4.0, h / 16.0, h / 64.0};
    const auto ys = thin_out(grid, 25);
    out.push_back(check_h_monotonicity(m, ys, hs, 2.0 * eps));
    double M = 0.0;
    for (double y : grid)
        if (std::isfinite(y)) M = std::max(M, std::abs(y));
    const std::vector<double> hv = {h, h / 10.0, h / 100.0, h / 1000.0};
    out.push_back(check_uniform_vanishing(m, thin_out(grid, 200), M, hv));
    for (const Atom& at : m.atoms()) out.push_back(atom_limit_check(m, at.location));
    return out;
}

// ---- Monte Carlo ---------------------------------------------------------

double MeanEstimate::half_width(double z) const {
    return n > 0 ? z * stddev / std::sqrt(static_cast<double>(n)) : 0.0;
}

MeanEstimate mean_estimate(std::span<const double> values) {
    MeanEstimate e;
    e.n = values.size();
    if (e.n == 0) return e;
    e.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(e.n);
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.stddev = e.n > 1 ? std::sqrt(ss / static_cast<double>(e.n - 1)) : 0.0;
    return e;
}

namespace {

// Tabulated scale that keeps its measure alive.
class OwningTabulated final : public ScaleFunction {
public:
    OwningTabulated(std::shared_ptr<const SpeedMeasure> m, double h, double lo, double hi, double step)
        : m_(std::move(m)), t_(ScaleSolver(*m_, h), lo, hi, step) {}
    double operator()(double y) const override { return t_(y); }
    double exact(double y) const override { return t_.exact(y); }
    const StateInterval& interval() const override { return t_.interval(); }
    const EffectiveBounds& bounds() const override { return t_.bounds(); }

private:
    std::shared_ptr<const SpeedMeasure> m_;
    TabulatedScale t_;
};

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t k) { return seed + 0x9E3779B97F4A7C15ull * (k + 1); }

}  // namespace

ScaleFactory tabulated_factory(std::shared_ptr<const SpeedMeasure> m, double lo, double hi, std::size_t nodes) {
    const StateInterval I = m->interval();
    lo = std::max(lo, I.l);
    hi = std::min(hi, I.r);
    const double step = (hi - lo) / static_cast<double>(std::max<std::size_t>(nodes, 2) - 1);
    return [m, lo, hi, step](double h) -> std::unique_ptr<ScaleFunction> {
        return std::make_unique<OwningTabulated>(m, h, lo, hi, step);
    };
}

std::vector<double> terminal_values(const SimResult& r) {
    std::vector<double> v;
    v.reserve(r.size());
    for (const auto& p : r.paths) v.push_back(p.terminal());
    return v;
}

namespace {

MeanEstimate estimate_f(const SimConfig& cfg, const ScaleFunction& scale, const std::function<double(double)>& f) {
    SimConfig c = cfg;
    c.record = Record::terminal;
    const SimResult r = simulate_chain(c, scale);
    std::vector<double> v = terminal_values(r);
    for (double& x : v) x = f(x);
    return mean_estimate(v);
}

}  // namespace

WeakErrorEstimate weak_error(const SimConfig& cfg, const ScaleFunction& scale, const std::function<double(double)>& f,
                             double reference) {
    WeakErrorEstimate w;
    w.estimate = estimate_f(cfg, scale, f);
    w.reference.mean = reference;
    w.error = w.estimate.mean - reference;
    w.half_width = w.estimate.half_width();
    return w;
}

WeakErrorEstimate weak_error(const SimConfig& cfg, const ScaleFactory& factory,
                             const std::function<double(double)>& f) {
    WeakErrorEstimate w;
    const auto coarse = factory(cfg.h);
    w.estimate = estimate_f(cfg, *coarse, f);
    SimConfig fine = cfg;
    fine.h = cfg.h / 64.0;
    fine.n_paths = cfg.n_paths * 16;
    fine.seed = derived_seed(cfg.seed, 0);
    const auto fine_scale = factory(fine.h);
    w.reference = estimate_f(fine, *fine_scale, f);
    w.error = w.estimate.mean - w.reference.mean;
    const double z = 1.959963984540054;
    w.half_width = z * std::sqrt(std::pow(w.estimate.stddev, 2) / static_cast<double>(w.estimate.n) +
                                 std::pow(w.reference.stddev, 2) / static_cast<double>(w.reference.n));
    return w;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_noise(std::size_t n1, std::size_t n2) {
    return 1.36 * std::sqrt(1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
}

SelfConvergence self_convergence(const ScaleFactory& factory, const SimConfig& base,
                                 const std::function<double(double)>& f, std::span<const double> h_seq, double h_ref) {
    SelfConvergence sc;
    sc.h_seq.assign(h_seq.begin(), h_seq.end());
    sc.h_ref = h_ref;
    auto sample = [&](double h, std::uint64_t k) {
        SimConfig c = base;
        c.h = h;
        c.seed = derived_seed(base.seed, k);
        c.record = Record::terminal;
        const auto scale = factory(h);
        std::vector<double> v = terminal_values(simulate_chain(c, *scale));
        for (double& x : v) x = f(x);
        return v;
    };
    const std::vector<double> ref = sample(h_ref, h_seq.size());
    sc.noise = ks_noise(base.n_paths, base.n_paths);
    for (std::size_t k = 0; k < h_seq.size(); ++k) sc.distances.push_back(ks_distance(sample(h_seq[k], k), ref));

    ReportBuilder rb("ks-self-convergence", 0.0, 16);
    rb.note(fmt::format("reference h = {:g}, KS noise level {:.6g}", h_ref, sc.noise));
    for (std::size_t k = 0; k < sc.distances.size(); ++k) {
        const double d = sc.distances[k];
        if (k == 0) {
            rb.add_lazy([&] { return fmt::format("h={:g}", h_seq[k]); }, d, sc.noise,
                        -std::numeric_limits<double>::infinity());
        } else {
            const double bound = sc.distances[k - 1] - sc.noise;
            rb.add_lazy([&] { return fmt::format("h={:g}", h_seq[k]); }, d, bound, d - bound);
        }
    }
    sc.report = rb.finish();
    if (!sc.distances.empty() && sc.distances.front() <= sc.noise) {
        sc.report.inconclusive = true;
        sc.report.passed = false;
        sc.report.notes.push_back("distances are within sampling noise; increase n_paths");
    }
    return sc;
}

}  // namespace emcel
