#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "emcel/boundary.hpp"
#include "emcel/measure.hpp"

namespace emcel {

/// Pointwise EMCEL scale factor for one measure and one h. Holds a reference
/// to the measure, which must outlive the solver.
class ScaleSolver {
public:
    /// eps_root <= 0 selects default_eps_root().
    ScaleSolver(const SpeedMeasure& m, double h, double eps_root = 0.0);
    ScaleSolver(const SpeedMeasure& m, const EffectiveBounds& bounds, double eps_root = 0.0);

    const SpeedMeasure& measure() const { return *m_; }
    const StateInterval& interval() const { return m_->interval(); }
    double h() const { return bounds_.h; }
    const EffectiveBounds& bounds() const { return bounds_; }
    double eps_root() const { return eps_root_; }

    /// Scale factor at y in the closure of I; throws std::domain_error outside.
    double operator()(double y) const;

    /// True when y is handled by the root equation rather than by the
    /// boundary formulas (a margin of eps_root is kept from l_h and r_h).
    bool in_root_region(double y) const;

    /// Root of (1/2) G(y, a) = h in (0, a_I(y)); `seed` > 0 is a starting guess.
    double root(double y, double seed = 0.0) const;

    /// (1/2) G(y, a); +inf when the window leaves the closure of I.
    double half_triangular(double y, double a) const;

private:
    const SpeedMeasure* m_;
    EffectiveBounds bounds_;
    double eps_root_;
};

double scale_factor(const SpeedMeasure& m, const EffectiveBounds& bounds, double y, double h,
                    double eps_root = 0.0);

/// [m((y-a, y]) - m((y, y+a])] / m((y-a, y+a]).
double right_derivative(const SpeedMeasure& m, double y, double a);
/// [m([y-a, y)) - m([y, y+a))] / m([y-a, y+a)).
double left_derivative(const SpeedMeasure& m, double y, double a);

enum class Method { bisection, ode, boundary_formula };
std::string_view to_string(Method m);

struct ScaleTable {
    double h = 0.0;
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<Method> method;
    std::size_t reprojections = 0;

    std::size_t size() const { return grid.size(); }
};

/// CSV with header `y,a,method`, 17 significant digits.
void write_csv(const ScaleTable& table, std::ostream& out);

enum class TableMode { bisect_all, ode_hybrid };

/// Tabulate the scale factor on an increasing grid inside the closure of I.
/// Boundary regions use the closed formulas; interior points use one root
/// solve each (bisect_all, evaluated in parallel) or one anchor root solve
/// followed by ODE propagation (ode_hybrid).
ScaleTable scale_table(const ScaleSolver& solver, std::span<const double> grid, TableMode mode);

/// Single-threaded bisect_all reference.
ScaleTable scale_table_serial(const ScaleSolver& solver, std::span<const double> grid);

struct OdeOptions {
    int n_corr = 16;                // steps between residual checks
    double tol_resid_rel = 1e-9;    // residual tolerance, relative to h
    double max_step_rel = 0.05;     // largest substep, relative to a
};

class PropagationError : public std::runtime_error {
public:
    PropagationError(double y, const std::string& what);
    double y() const { return y_; }

private:
    double y_;
};

/// Integrates the derivative formulas from (y0, a0) over an increasing grid
/// inside (l_h, r_h), forward with the right derivative and backward with the
/// left derivative, splitting steps where y or y +- a crosses a breakpoint of
/// the measure.
ScaleTable propagate_ode(const ScaleSolver& solver, double y0, double a0,
                         std::span<const double> grid, const OdeOptions& opt = {});

/// |eta(y)| sqrt(h) inside (l, r), 0 elsewhere.
double euler_scale(const std::function<double(double)>& eta, const StateInterval& I, double h,
                   double y);

/// lo, lo + step, ... up to hi (inclusive within a relative slack of 1e-9).
std::vector<double> make_grid(double lo, double hi, double step);

}  // namespace emcel
