#pragma once

#include "emcel/measure.hpp"

namespace emcel {

struct BoundarySpec {
    Side side = Side::left;
    bool accessible = false;
    bool absorbing = false;  // accessible endpoints are absorbing
};

/// l_h and r_h: the scale factor solves the root equation on (l_h, r_h) and
/// reaches the nearest endpoint outside of it.
struct EffectiveBounds {
    double h = 0.0;
    double l_h = -kInf;
    double r_h = kInf;
};

/// 1e-12 * max(1, |l|, |r|) over the finite endpoints.
double default_eps_root(const StateInterval& I);

/// Interior point used to evaluate the Feller moments: 0 if it lies in (l, r),
/// otherwise the midpoint of a canonical finite clipping of the interval.
double probe_point(const StateInterval& I);

/// Feller's test for the endpoint on `side`.
BoundarySpec classify(const SpeedMeasure& m, Side side);

/// l_h (side = left) or r_h (side = right) for step parameter h.
/// eps_root <= 0 selects default_eps_root().
double effective_bound(const SpeedMeasure& m, double h, Side side, double eps_root = 0.0);

EffectiveBounds effective_bounds(const SpeedMeasure& m, double h, double eps_root = 0.0);

}  // namespace emcel
