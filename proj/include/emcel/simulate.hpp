#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "emcel/scale.hpp"

namespace emcel {

/// Scale factor as seen by the chain.
class ScaleFunction {
public:
    virtual ~ScaleFunction() = default;
    /// Fast evaluation (may interpolate).
    virtual double operator()(double y) const = 0;
    /// Root-solver evaluation, used as a fallback.
    virtual double exact(double y) const = 0;
    virtual const StateInterval& interval() const = 0;
    virtual const EffectiveBounds& bounds() const = 0;
};

class ExactScale final : public ScaleFunction {
public:
    explicit ExactScale(const ScaleSolver& solver) : solver_(solver) {}
    double operator()(double y) const override { return solver_(y); }
    double exact(double y) const override { return solver_(y); }
    const StateInterval& interval() const override { return solver_.interval(); }
    const EffectiveBounds& bounds() const override { return solver_.bounds(); }

private:
    ScaleSolver solver_;
};

/// Piecewise-linear interpolation of a scale table with nodes spaced `step`
/// apart over [lo, hi] (clipped to the closure of I, with l_h and r_h added as
/// nodes). Boundary regions use the closed formulas; states outside the
/// window fall back to the root solver.
class TabulatedScale final : public ScaleFunction {
public:
    TabulatedScale(const ScaleSolver& solver, double lo, double hi, double step,
                   TableMode mode = TableMode::bisect_all);
    double operator()(double y) const override;
    double exact(double y) const override { return solver_(y); }
    const StateInterval& interval() const override { return solver_.interval(); }
    const EffectiveBounds& bounds() const override { return solver_.bounds(); }
    const ScaleTable& table() const { return table_; }

private:
    ScaleSolver solver_;
    ScaleTable table_;
    double lo_;
    double hi_;
    double step_;
};

enum class Scheme { emcel, euler };
enum class Record { full, terminal };

struct SimConfig {
    double h = 0.01;
    double T = 1.0;
    double y0 = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::emcel;
    std::function<double(double)> eta;  // required for Scheme::euler
    Record record = Record::full;

    /// ceil(T / h), with a relative slack of 1e-9 for round ratios.
    std::size_t steps() const;
};

struct Absorption {
    Side side;
    std::size_t step;
};

struct ChainPath {
    double h = 0.0;
    /// Recorded states; every `stride`-th step (stride 1 for full records,
    /// k_max for terminal records, which hold the initial and final state).
    std::vector<double> states;
    std::size_t stride = 1;
    std::size_t k_max = 0;
    std::optional<Absorption> absorbed_at;
    bool escaped = false;   // a raw step left the closure of I
    bool exploded = false;  // Euler state overflowed and was frozen

    double terminal() const { return states.back(); }
};

struct ExitRecord {
    double H_l = kInf;
    double H_r = kInf;
    /// No absorption observed before the horizon although an endpoint is
    /// reachable.
    bool censored = false;
};

struct SimResult {
    std::vector<ChainPath> paths;
    std::vector<ExitRecord> exits;
    std::size_t size() const { return paths.size(); }
};

struct StepResult {
    double state;
    bool escaped;
};

/// One chain step from `state` with sign xi.
StepResult step(const ScaleFunction& scale, double state, int xi);

/// EMCEL chain, parallel over paths. Output is bit-identical to the serial
/// version for any thread count.
SimResult simulate_chain(const SimConfig& cfg, const ScaleFunction& scale);
SimResult simulate_chain_serial(const SimConfig& cfg, const ScaleFunction& scale);

/// Weak Euler scheme with scale factor |eta| sqrt(h) on the state space I.
SimResult simulate_euler(const SimConfig& cfg, const StateInterval& I);

/// Linear interpolation of a full record at time t in [0, k_max h].
double interpolate(const ChainPath& path, double t);

/// CSV `path_id,k,t,state`, keeping every `thin`-th recorded state plus the last.
void write_paths_csv(const SimResult& r, std::ostream& out, std::size_t thin = 1);
/// CSV `path_id,H_l,H_r,censored`.
void write_exits_csv(const SimResult& r, std::ostream& out);

}  // namespace emcel
