#include "emcel/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "emcel/rng.hpp"

namespace emcel {

TabulatedScale::TabulatedScale(const ScaleSolver& solver, double lo, double hi, double step, TableMode mode)
    : solver_(solver) {
    const StateInterval& I = solver_.interval();
    lo_ = std::max(lo, I.l);
    hi_ = std::min(hi, I.r);
    step_ = step;
    if (!(hi_ > lo_)) throw std::invalid_argument("tabulated scale: empty window");
    std::vector<double> nodes = make_grid(lo_, hi_, step);
    const EffectiveBounds& b = solver_.bounds();
    for (double e : {b.l_h, b.r_h})
        if (e > lo_ && e < hi_) nodes.push_back(e);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    table_ = scale_table(solver_, nodes, mode);
}

double TabulatedScale::operator()(double y) const {
    if (!(y >= lo_ && y <= hi_) || !solver_.in_root_region(y)) return solver_(y);
    const auto& g = table_.grid;
    auto it = std::upper_bound(g.begin(), g.end(), y);
    if (it == g.end()) return table_.values.back();
    if (it == g.begin()) return table_.values.front();
    const auto j = static_cast<std::size_t>(it - g.begin());
    const double w = (y - g[j - 1]) / (g[j] - g[j - 1]);
    return (1.0 - w) * table_.values[j - 1] + w * table_.values[j];
}

std::size_t SimConfig::steps() const {
    if (!(h > 0.0) || !(T >= 0.0)) throw std::invalid_argument("simulation needs h > 0 and T >= 0");
    const double ratio = T / h;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(ratio));
}

namespace {

// Rounding slack when a boundary formula sends the state onto an endpoint.
double snap_tol(double e, double state) { return 1e-12 * std::max({1.0, std::abs(e), std::abs(state)}); }

// Lands `next` on an endpoint it overshot by rounding only.
bool snap(const StateInterval& I, double state, double& next) {
    if (next <= I.l && std::isfinite(I.l) && I.l - next <= snap_tol(I.l, state)) {
        next = I.l;
        return true;
    }
    if (next >= I.r && std::isfinite(I.r) && next - I.r <= snap_tol(I.r, state)) {
        next = I.r;
        return true;
    }
    return I.in_interior(next);
}

}  // namespace

StepResult step(const ScaleFunction& scale, double state, int xi) {
    const StateInterval& I = scale.interval();
    if (state <= I.l) return {I.l, state < I.l};
    if (state >= I.r) return {I.r, state > I.r};
    const EffectiveBounds& b = scale.bounds();
    if (xi < 0 && state <= b.l_h) return {I.l, false};
    if (xi > 0 && state >= b.r_h) return {I.r, false};
    double next = state + xi * scale(state);
    if (snap(I, state, next)) return {next, false};
    next = state + xi * scale.exact(state);
    if (snap(I, state, next)) return {next, false};
    return {std::clamp(next, I.l, I.r), !I.in_closure(next)};
}

namespace {

struct PathOut {
    ChainPath path;
    ExitRecord exit;
};

// Sets up the record and returns the number of steps.
std::size_t start_path(const SimConfig& cfg, ChainPath& p) {
    const std::size_t k_max = cfg.steps();
    p.h = cfg.h;
    p.k_max = k_max;
    if (cfg.record == Record::full || k_max == 0) {
        p.stride = 1;
        p.states.reserve(k_max + 1);
    } else {
        p.stride = k_max;
    }
    p.states.push_back(cfg.y0);
    return k_max;
}

void finish_path(const SimConfig& cfg, ChainPath& p, double x) {
    if (cfg.record == Record::terminal && p.k_max > 0) p.states.push_back(x);
}

void note_absorption(const StateInterval& I, double x, std::size_t k, double h, ChainPath& p, ExitRecord& e) {
    if (p.absorbed_at) return;
    if (x == I.l && std::isfinite(I.l)) {
        p.absorbed_at = Absorption{Side::left, k};
        e.H_l = static_cast<double>(k) * h;
    } else if (x == I.r && std::isfinite(I.r)) {
        p.absorbed_at = Absorption{Side::right, k};
        e.H_r = static_cast<double>(k) * h;
    }
}

PathOut run_chain_path(const SimConfig& cfg, const ScaleFunction& scale, std::size_t id) {
    PathOut out;
    ChainPath& p = out.path;
    const std::size_t k_max = start_path(cfg, p);
    const StateInterval& I = scale.interval();
    SignStream xi(cfg.seed, id);
    double x = cfg.y0;
    for (std::size_t k = 0; k < k_max; ++k) {
        if (!p.absorbed_at) {
            const StepResult r = step(scale, x, xi(k));
            x = r.state;
            p.escaped = p.escaped || r.escaped;
            note_absorption(I, x, k + 1, cfg.h, p, out.exit);
        } else if (cfg.record == Record::terminal) {
            break;  // frozen from here on
        }
        if (cfg.record == Record::full) p.states.push_back(x);
    }
    finish_path(cfg, p, x);
    const EffectiveBounds& b = scale.bounds();
    const bool reachable = b.l_h > I.l || b.r_h < I.r;
    out.exit.censored = !p.absorbed_at && reachable;
    return out;
}

PathOut run_euler_path(const SimConfig& cfg, const StateInterval& I, std::size_t id) {
    PathOut out;
    ChainPath& p = out.path;
    const std::size_t k_max = start_path(cfg, p);
    SignStream xi(cfg.seed, id);
    double x = cfg.y0;
    for (std::size_t k = 0; k < k_max; ++k) {
        const int s = xi(k);
        if (!p.absorbed_at && !p.exploded) {
            const double next = x + s * euler_scale(cfg.eta, I, cfg.h, x);
            if (!std::isfinite(next) || std::abs(next) > 1e300) {
                p.exploded = true;
            } else if (!I.in_closure(next)) {
                p.escaped = true;
                x = std::clamp(next, I.l, I.r);
            } else {
                x = next;
            }
            note_absorption(I, x, k + 1, cfg.h, p, out.exit);
        }
        if (cfg.record == Record::full) p.states.push_back(x);
    }
    finish_path(cfg, p, x);
    out.exit.censored = !p.absorbed_at && (std::isfinite(I.l) || std::isfinite(I.r));
    return out;
}

void check_config(const SimConfig& cfg, const StateInterval& I) {
    if (!I.in_interior(cfg.y0)) throw std::invalid_argument("simulation: y0 must lie in (l, r)");
    (void)cfg.steps();
}

SimResult collect(std::vector<PathOut>&& outs) {
    SimResult r;
    r.paths.reserve(outs.size());
    r.exits.reserve(outs.size());
    for (auto& o : outs) {
        r.paths.push_back(std::move(o.path));
        r.exits.push_back(o.exit);
    }
    return r;
}

}  // namespace

SimResult simulate_chain(const SimConfig& cfg, const ScaleFunction& scale) {
    check_config(cfg, scale.interval());
    std::vector<PathOut> outs(cfg.n_paths);
    const auto n = static_cast<std::ptrdiff_t>(cfg.n_paths);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        outs[static_cast<std::size_t>(i)] = run_chain_path(cfg, scale, static_cast<std::size_t>(i));
    return collect(std::move(outs));
}

SimResult simulate_chain_serial(const SimConfig& cfg, const ScaleFunction& scale) {
    check_config(cfg, scale.interval());
    std::vector<PathOut> outs(cfg.n_paths);
    for (std::size_t i = 0; i < cfg.n_paths; ++i) outs[i] = run_chain_path(cfg, scale, i);
    return collect(std::move(outs));
}

SimResult simulate_euler(const SimConfig& cfg, const StateInterval& I) {
    check_config(cfg, I);
    if (!cfg.eta) throw std::invalid_argument("Euler scheme needs eta");
    std::vector<PathOut> outs(cfg.n_paths);
    const auto n = static_cast<std::ptrdiff_t>(cfg.n_paths);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        outs[static_cast<std::size_t>(i)] = run_euler_path(cfg, I, static_cast<std::size_t>(i));
    return collect(std::move(outs));
}

double interpolate(const ChainPath& path, double t) {
    if (path.stride != 1 || path.states.size() != path.k_max + 1)
        throw std::domain_error("interpolate: path was not recorded at every step");
    const double t_max = static_cast<double>(path.k_max) * path.h;
    if (!(t >= 0.0) || t > t_max * (1.0 + 1e-12)) throw std::domain_error("interpolate: t outside [0, k_max h]");
    const double u = t / path.h;
    auto k = static_cast<std::size_t>(std::floor(u));
    if (k >= path.k_max) return path.states.back();
    const double w = u - static_cast<double>(k);
    return path.states[k] + w * (path.states[k + 1] - path.states[k]);
}

void write_paths_csv(const SimResult& r, std::ostream& out, std::size_t thin) {
    thin = std::max<std::size_t>(thin, 1);
    out << "path_id,k,t,state\n";
    for (std::size_t i = 0; i < r.paths.size(); ++i) {
        const ChainPath& p = r.paths[i];
        for (std::size_t j = 0; j < p.states.size(); ++j) {
            if (j % thin != 0 && j + 1 != p.states.size()) continue;
            const std::size_t k = j * p.stride;
            out << fmt::format("{},{},{:.17g},{:.17g}\n", i, k, static_cast<double>(k) * p.h, p.states[j]);
        }
    }
}

void write_exits_csv(const SimResult& r, std::ostream& out) {
    out << "path_id,H_l,H_r,censored\n";
    for (std::size_t i = 0; i < r.exits.size(); ++i) {
        const ExitRecord& e = r.exits[i];
        out << fmt::format("{},{:.17g},{:.17g},{}\n", i, e.H_l, e.H_r, e.censored ? 1 : 0);
    }
}

}  // namespace emcel
