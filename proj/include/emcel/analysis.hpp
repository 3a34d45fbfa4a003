#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "emcel/scale.hpp"
#include "emcel/simulate.hpp"

namespace emcel {

struct Evidence {
    std::string input;
    double observed = 0.0;
    double bound = 0.0;
};

/// Outcome of one property check. worst_violation is the largest amount by
/// which an observation overshot its bound (negative when every observation
/// has slack); passed == (worst_violation <= tolerance) unless inconclusive.
struct PropertyReport {
    std::string name;
    bool passed = true;
    bool inconclusive = false;
    double worst_violation = -std::numeric_limits<double>::infinity();
    double tolerance = 0.0;
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::vector<Evidence> evidence;
    std::vector<std::string> notes;
};

nlohmann::json to_json(const PropertyReport& r);

/// Accumulates observations and keeps the worst few as evidence.
class ReportBuilder {
public:
    ReportBuilder(std::string name, double tolerance, std::size_t keep = 8);
    /// `violation` is how far the observation overshoots its bound.
    void add(std::string input, double observed, double bound, double violation);
    /// Same, with the label built only when the entry is kept as evidence.
    template <class Label>
    void add_lazy(Label&& label, double observed, double bound, double violation) {
        if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
        if (worst_.size() < keep_ || violation > worst_.back().first) {
            add(label(), observed, bound, violation);
        } else {
            ++r_.checked;
            if (violation > r_.tolerance) ++r_.violations;
        }
    }
    void note(std::string text);
    PropertyReport finish() const;

private:
    PropertyReport r_;
    std::size_t keep_;
    std::vector<std::pair<double, Evidence>> worst_;
};

// ---- asymptotic orders -------------------------------------------------

struct OrderEstimate {
    double y = 0.0;
    std::vector<double> h_seq;
    std::vector<double> a_seq;
    double slope = 0.0;            // least squares over the whole sequence
    double intercept_const = 0.0;  // exp(intercept), fitted on the 4 smallest h
    bool degenerate = false;       // all scale factors equal
};

OrderEstimate estimate_order(const SpeedMeasure& m, double y, std::span<const double> h_seq);

/// 10^-2, 10^-3, ... down to h_min (inclusive).
std::vector<double> decade_sequence(double h_max, double h_min, int per_decade = 1);

PropertyReport atom_limit_check(const SpeedMeasure& m, double y, double h_min = 1e-8, double rel_tol = 1e-2);

/// Limit of a / sqrt(h) at a point where |eta| has one-sided limits (either may
/// be +inf), plus the sandwich between the smaller and the larger one.
PropertyReport power_mean_limit(const SpeedMeasure& m, double y, double eta_left, double eta_right,
                                double h_min = 1e-8, double rel_tol = 1e-2, double h_max = 1e-4);

// ---- table properties --------------------------------------------------

/// Monotonicity of y + a and y - a, with the strict and constant regions.
PropertyReport check_comparison(const ScaleTable& table, const StateInterval& I, const EffectiveBounds& b,
                                double tol);
PropertyReport check_lipschitz(const ScaleTable& table, double tol);
/// a <= C0 + |y|, and a <= sqrt(2 g(C0 + 2|y|) h) when g is supplied.
PropertyReport check_growth(const ScaleTable& table, double C0, const std::function<double(double)>& g,
                            double tol);
/// |G/2 - h| at the root-region grid points.
PropertyReport check_root_residual(const ScaleSolver& solver, const ScaleTable& table, double tol);
/// a sup_lambda (1 - lambda) m([y - lambda a, y + lambda a]) <= 2h <= a m((y - a, y + a)),
/// lambda in {0, 1/4, 1/2, 3/4}; tol is relative to 2h.
PropertyReport check_sandwich(const ScaleSolver& solver, const ScaleTable& table, double tol = 1e-8);
/// h -> a_h(y) nondecreasing for each y.
PropertyReport check_h_monotonicity(const SpeedMeasure& m, std::span<const double> ys,
                                    std::span<const double> h_seq, double tol);
/// sup of a_h over the grid points in [-M, M] decreases along a decreasing h
/// sequence and ends below `fraction` of its first value.
PropertyReport check_uniform_vanishing(const SpeedMeasure& m, std::span<const double> grid, double M,
                                       std::span<const double> h_seq, double fraction = 0.5);
/// Central differences of the root solution against the derivative formulas,
/// skipping points within `eps` of a kink.
PropertyReport check_derivatives(const ScaleSolver& solver, std::span<const double> ys, double eps = 1e-5,
                                 double tol = 1e-3);
/// ode_hybrid against bisect_all on the grid, relative discrepancy.
PropertyReport check_ode_equivalence(const ScaleSolver& solver, std::span<const double> grid,
                                     double tol = 1e-6);

/// Comparison, Lipschitz, growth, residual, sandwich, derivative, ODE, h
/// monotonicity and uniform vanishing checks on one measure and grid, plus
/// the atom limit at each atom.
std::vector<PropertyReport> scale_property_suite(const SpeedMeasure& m, double h, std::span<const double> grid);

// ---- Monte Carlo ---------------------------------------------------------

struct MeanEstimate {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
    /// Half-width of the normal confidence interval for quantile z.
    double half_width(double z = 1.959963984540054) const;
};

MeanEstimate mean_estimate(std::span<const double> values);

using ScaleFactory = std::function<std::unique_ptr<ScaleFunction>(double h)>;

/// Tabulated scale functions over [lo, hi] with `nodes` grid points.
ScaleFactory tabulated_factory(std::shared_ptr<const SpeedMeasure> m, double lo, double hi,
                               std::size_t nodes = 16000);

std::vector<double> terminal_values(const SimResult& r);

struct WeakErrorEstimate {
    MeanEstimate estimate;
    MeanEstimate reference;  // n = 0 for an analytic reference
    double error = 0.0;      // estimate - reference
    double half_width = 0.0; // 95% half-width of the difference
};

/// E f(X_T) against an analytic value.
WeakErrorEstimate weak_error(const SimConfig& cfg, const ScaleFunction& scale, const std::function<double(double)>& f,
                             double reference);
/// E f(X_T) against the same estimator at h/64 with 16 times the paths.
WeakErrorEstimate weak_error(const SimConfig& cfg, const ScaleFactory& factory, const std::function<double(double)>& f);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::vector<double> a, std::vector<double> b);

/// 1.36 sqrt(1/n1 + 1/n2), the 95% critical value.
double ks_noise(std::size_t n1, std::size_t n2);

struct SelfConvergence {
    std::vector<double> h_seq;
    std::vector<double> distances;
    double h_ref = 0.0;
    double noise = 0.0;
    PropertyReport report;
};

/// KS distances of f(X_T) at each h against an h_ref run; passes when every
/// distance exceeds the next by more than the KS noise level. Reported as
/// inconclusive when the first distance is already within noise.
SelfConvergence self_convergence(const ScaleFactory& factory, const SimConfig& base,
                                 const std::function<double(double)>& f, std::span<const double> h_seq, double h_ref);

}  // namespace emcel
