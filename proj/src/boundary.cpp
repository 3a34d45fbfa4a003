#include "emcel/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emcel {

double default_eps_root(const StateInterval& I) {
    double s = 1.0;
    if (std::isfinite(I.l)) s = std::max(s, std::abs(I.l));
    if (std::isfinite(I.r)) s = std::max(s, std::abs(I.r));
    return 1e-12 * s;
}

double probe_point(const StateInterval& I) {
    if (I.in_interior(0.0)) return 0.0;
    const double lo = std::isfinite(I.l) ? I.l : I.r - 2.0;
    const double hi = std::isfinite(I.r) ? I.r : I.l + 2.0;
    return 0.5 * (lo + hi);
}

BoundarySpec classify(const SpeedMeasure& m, Side side) {
    BoundarySpec spec;
    spec.side = side;
    const double e = m.interval().endpoint(side);
    spec.accessible = std::isfinite(e) && std::isfinite(m.boundary_moment(side, probe_point(m.interval())));
    spec.absorbing = spec.accessible;
    return spec;
}

double effective_bound(const SpeedMeasure& m, double h, Side side, double eps_root) {
    if (!(h > 0.0)) throw std::invalid_argument("effective_bound: h must be positive");
    const StateInterval& I = m.interval();
    if (eps_root <= 0.0) eps_root = default_eps_root(I);
    const double e = I.endpoint(side);
    if (std::isinf(e)) return e;
    if (!classify(m, side).accessible) return e;
    const double sign = side == Side::left ? 1.0 : -1.0;
    const double cap = 0.5 * (I.r - I.l);  // +inf when the other end is infinite

    // Half the triangular integral over the window of half-width a touching e.
    auto phi = [&](double a) { return 0.5 * m.triangular_integral(e + sign * a, a); };

    double lo = 0.0;
    double hi;
    if (std::isfinite(cap)) {
        if (phi(cap) < h) return e + sign * cap;  // inf of the empty set
        hi = cap;
    } else {
        hi = std::max(std::sqrt(h), 1e-3);
        int guard = 0;
        while (phi(hi) < h) {
            lo = hi;
            hi *= 2.0;
            if (++guard > 2000 || !std::isfinite(hi))
                throw std::runtime_error("effective_bound: failed to bracket the boundary root");
        }
    }
    while (hi - lo > eps_root) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if (phi(mid) >= h) hi = mid;
        else lo = mid;
    }
    return e + sign * hi;
}

EffectiveBounds effective_bounds(const SpeedMeasure& m, double h, double eps_root) {
    EffectiveBounds b;
    b.h = h;
    b.l_h = effective_bound(m, h, Side::left, eps_root);
    b.r_h = effective_bound(m, h, Side::right, eps_root);
    return b;
}

}  // namespace emcel
