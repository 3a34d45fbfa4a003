#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "emcel/scale.hpp"

namespace emcel {

PropagationError::PropagationError(double y, const std::string& what)
    : std::runtime_error(fmt::format("ODE propagation failed at y = {:.17g}: {}", y, what)), y_(y) {}

namespace {

// Which of y, y - a(y), y + a(y) meets a breakpoint.
enum class EventKind { at_y, lower_edge, upper_edge };

struct Event {
    EventKind kind;
    double p;
    bool operator==(const Event& o) const { return kind == o.kind && p == o.p; }
};

class Propagator {
public:
    Propagator(const ScaleSolver& solver, const OdeOptions& opt)
        : s_(solver), m_(solver.measure()), opt_(opt), tol_resid_(opt.tol_resid_rel * solver.h()) {}

    std::size_t reprojections = 0;

    // Moves (y, a) to `target` in direction dir = +1 or -1.
    void advance(double& y, double& a, double target, int dir) {
        std::vector<Event> done;  // events already handled at the current y
        while (y != target) {
            // Substeps are capped relative to a, which sets the scale on
            // which the field varies.
            const double cap = std::max(opt_.max_step_rel, 0.0) * a;
            const double stop = (cap > 0.0 && std::abs(target - y) > cap) ? y + dir * cap : target;
            const double dy = stop - y;
            const Event* chosen = nullptr;
            Event best{};
            double y_event = stop;
            double a_event = 0.0;
            const double reach = std::abs(dy);
            for (double p : m_.breakpoints()) {
                for (EventKind kind : {EventKind::at_y, EventKind::lower_edge, EventKind::upper_edge}) {
                    const Event ev{kind, p};
                    if (std::find(done.begin(), done.end(), ev) != done.end()) continue;
                    double ye;
                    double ae;
                    if (!locate(ev, y, a, stop, dir, reach, ye, ae)) continue;
                    if (dir * (ye - y_event) < 0.0 || (chosen == nullptr && ye == y_event)) {
                        best = ev;
                        chosen = &best;
                        y_event = ye;
                        a_event = ae;
                    }
                }
            }
            if (chosen != nullptr) {
                if (y_event != y) done.clear();
                done.push_back(best);
                y = y_event;
                a = a_event;
            } else {
                a = rk4(y, a, dy, dir);
                y = stop;
            }
            validate(y, a);
        }
    }

    // Re-solve the root equation when the residual has drifted.
    void correct(double y, double& a) {
        const double resid = std::abs(s_.half_triangular(y, a) - s_.h());
        if (resid > tol_resid_) {
            a = s_.root(y, a);
            ++reprojections;
        }
    }

    int n_corr() const { return std::max(1, opt_.n_corr); }

private:
    double field(double y, double a, int dir) const {
        if (!(a > 0.0)) throw PropagationError(y, "scale factor vanished");
        if (!m_.interval().in_interior(y - a) || !m_.interval().in_interior(y + a))
            throw PropagationError(y, "window y +- a left the interior");
        return dir > 0 ? right_derivative(m_, y, a) : left_derivative(m_, y, a);
    }

    double rk4(double y, double a, double dy, int dir) const {
        // The field is one-sided at the start point; sample it just inside the
        // step so a breakpoint sitting exactly on y or y +- a is seen from the
        // correct side.
        const double nudge = std::min(0.5 * std::abs(dy), 1e-12 * (1.0 + std::abs(y) + a));
        const double k1 = field(y + dir * nudge, a, dir);
        const double k2 = field(y + 0.5 * dy, a + 0.5 * dy * k1, dir);
        const double k3 = field(y + 0.5 * dy, a + 0.5 * dy * k2, dir);
        const double k4 = field(y + dy, a + dy * k3, dir);
        return a + dy * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }

    void validate(double y, double a) const {
        if (!(a > 0.0) || !std::isfinite(a)) throw PropagationError(y, "scale factor vanished");
        if (!m_.interval().in_interior(y - a) || !m_.interval().in_interior(y + a))
            throw PropagationError(y, "window y +- a left the interior");
    }

    // Sign function whose zero in y marks the event: the root residual with
    // the window pinned to the breakpoint.
    double indicator(const Event& ev, double y) const {
        switch (ev.kind) {
            case EventKind::lower_edge: return s_.half_triangular(y, std::max(y - ev.p, 0.0)) - s_.h();
            case EventKind::upper_edge: return s_.half_triangular(y, std::max(ev.p - y, 0.0)) - s_.h();
            case EventKind::at_y: return y - ev.p;
        }
        return 0.0;
    }

    // Finds where the event happens within the step from y to target, if it
    // does. The Lipschitz bound |a'| <= 1 limits the candidates.
    bool locate(const Event& ev, double y, double a, double target, int dir, double reach, double& ye,
                double& ae) const {
        const double p = ev.p;
        switch (ev.kind) {
            case EventKind::at_y:
                if (!(dir * (p - y) > 0.0 && dir * (target - p) >= 0.0)) return false;
                ye = p;
                ae = s_.root(p, a);
                return true;
            case EventKind::lower_edge:
                if (!(dir * (p - (y - a)) > 0.0 && dir * (p - (y - a)) <= 2.0 * reach)) return false;
                break;
            case EventKind::upper_edge:
                if (!(dir * (p - (y + a)) > 0.0 && dir * (p - (y + a)) <= 2.0 * reach)) return false;
                break;
        }
        const double f0 = indicator(ev, y);
        const double f1 = indicator(ev, target);
        if (!(f0 != 0.0 && (f1 == 0.0 || (f0 < 0.0) != (f1 < 0.0)))) return false;
        double lo = y;
        double hi = target;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            const double fm = indicator(ev, mid);
            if (fm != 0.0 && (fm < 0.0) == (f0 < 0.0)) lo = mid;
            else hi = mid;
        }
        ye = hi;
        ae = ev.kind == EventKind::lower_edge ? ye - p : p - ye;
        return ae > 0.0;
    }

    const ScaleSolver& s_;
    const SpeedMeasure& m_;
    OdeOptions opt_;
    double tol_resid_;
};

}  // namespace

ScaleTable propagate_ode(const ScaleSolver& solver, double y0, double a0, std::span<const double> grid,
                         const OdeOptions& opt) {
    ScaleTable t;
    t.h = solver.h();
    t.grid.assign(grid.begin(), grid.end());
    t.values.assign(grid.size(), 0.0);
    t.method.assign(grid.size(), Method::ode);
    if (grid.empty()) return t;
    if (!(a0 > 0.0)) throw std::invalid_argument("propagate_ode: a0 must be positive");
    if (y0 < grid.front() || y0 > grid.back())
        throw std::invalid_argument("propagate_ode: y0 outside the grid span");
    for (double y : grid) {
        if (!(y > solver.bounds().l_h && y < solver.bounds().r_h))
            throw std::domain_error("propagate_ode: grid must lie inside (l_h, r_h)");
    }

    Propagator prop(solver, opt);
    const auto split = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), y0) - grid.begin());

    // Forward over grid points >= y0.
    {
        double y = y0;
        double a = a0;
        int steps = 0;
        for (std::size_t i = split; i < grid.size(); ++i) {
            prop.advance(y, a, grid[i], +1);
            if (++steps % prop.n_corr() == 0) prop.correct(y, a);
            t.values[i] = a;
        }
    }
    // Backward over grid points < y0.
    {
        double y = y0;
        double a = a0;
        int steps = 0;
        for (std::size_t i = split; i-- > 0;) {
            prop.advance(y, a, grid[i], -1);
            if (++steps % prop.n_corr() == 0) prop.correct(y, a);
            t.values[i] = a;
        }
    }
    t.reprojections = prop.reprojections;
    return t;
}

}  // namespace emcel
