#include "emcel/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "emcel/quadrature.hpp"

namespace emcel {

void StateInterval::validate() const {
    if (std::isnan(l) || std::isnan(r) || !(l < r))
        throw std::invalid_argument("state interval requires l < r");
    if ((std::isinf(l) && l_in_I) || (std::isinf(r) && r_in_I))
        throw std::invalid_argument("an infinite endpoint cannot belong to the state space");
}

SpeedMeasure::SpeedMeasure(StateInterval interval, std::vector<DensityPiece> pieces,
                           std::vector<Atom> atoms, double quad_tol)
    : interval_(interval), pieces_(std::move(pieces)), atoms_(std::move(atoms)),
      quad_tol_(quad_tol) {
    interval_.validate();
    if (!(quad_tol_ > 0.0)) throw std::invalid_argument("quad_tol must be positive");
    if (pieces_.empty()) throw std::invalid_argument("speed measure needs at least one density piece");
    if (pieces_.front().lo != interval_.l || pieces_.back().hi != interval_.r)
        throw std::invalid_argument("density pieces must cover the whole interior (l, r)");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        if (!(p.lo < p.hi)) throw std::invalid_argument("density piece needs lo < hi");
        if (!p.density) throw std::invalid_argument("density piece without a density");
        if (i + 1 < pieces_.size() && p.hi != pieces_[i + 1].lo)
            throw std::invalid_argument("density pieces must be contiguous");
    }
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const auto& at = atoms_[i];
        if (!interval_.in_interior(at.location))
            throw std::invalid_argument("atom must lie strictly inside (l, r)");
        if (!(at.mass > 0.0) || !std::isfinite(at.mass))
            throw std::invalid_argument("atom mass must be positive and finite");
        if (i > 0 && atoms_[i - 1].location == at.location)
            throw std::invalid_argument("duplicate atom location");
    }
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) breakpoints_.push_back(pieces_[i].hi);
    for (const auto& at : atoms_) breakpoints_.push_back(at.location);
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

double SpeedMeasure::atom_at(double y) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), y,
                               [](const Atom& a, double v) { return a.location < v; });
    return (it != atoms_.end() && it->location == y) ? it->mass : 0.0;
}

template <class Weight>
double SpeedMeasure::density_integral(double a, double b, Weight&& weight) const {
    const quad::Options opt{.rel_tol = quad_tol_};
    double total = 0.0;
    for (const auto& p : pieces_) {
        const double lo = std::max(a, p.lo);
        const double hi = std::min(b, p.hi);
        if (!(lo < hi)) continue;
        auto f = [&](double u) { return p.density(u) * weight(u); };
        const bool at_l = lo == interval_.l;
        const bool at_r = hi == interval_.r;
        double v;
        if (!at_l && !at_r) {
            v = quad::regular(f, lo, hi, opt);
        } else if (at_l && !at_r) {
            v = quad::toward_end(f, lo, hi, quad::End::lower, opt);
        } else if (!at_l && at_r) {
            v = quad::toward_end(f, lo, hi, quad::End::upper, opt);
        } else {
            double c;
            if (std::isfinite(lo) && std::isfinite(hi)) c = 0.5 * (lo + hi);
            else if (std::isfinite(hi)) c = hi - std::max(1.0, std::abs(hi));
            else if (std::isfinite(lo)) c = lo + std::max(1.0, std::abs(lo));
            else c = 0.0;
            v = quad::toward_end(f, lo, c, quad::End::lower, opt);
            if (v != kInf) v += quad::toward_end(f, c, hi, quad::End::upper, opt);
        }
        total += v;
        if (total == kInf) return kInf;
    }
    return total;
}

double SpeedMeasure::mass(double a, double b, bool include_a, bool include_b) const {
    if (std::isnan(a) || std::isnan(b) || a > b)
        throw std::domain_error("mass: malformed interval (a > b)");
    if (a < interval_.l || b > interval_.r)
        throw std::domain_error("mass: interval outside the state space");
    double total = 0.0;
    if (a < b) {
        for (const auto& p : pieces_) {
            const double lo = std::max(a, p.lo);
            const double hi = std::min(b, p.hi);
            if (!(lo < hi)) continue;
            double v = p.closed_mass ? p.closed_mass(lo, hi) : std::nan("");
            if (std::isnan(v)) v = density_integral(lo, hi, [](double) { return 1.0; });
            total += v;
        }
    }
    for (const auto& at : atoms_) {
        const double x = at.location;
        if (x < a || x > b) continue;
        if (a == b) {
            if (include_a && include_b) total += at.mass;
            continue;
        }
        if ((x > a && x < b) || (x == a && include_a) || (x == b && include_b)) total += at.mass;
    }
    return total;
}

double SpeedMeasure::triangular_integral(double y, double a) const {
    if (!(a > 0.0)) return 0.0;
    const double lo = y - a;
    const double hi = y + a;
    if (lo < interval_.l || hi > interval_.r)
        throw std::domain_error("triangular_integral: y +- a outside the state space");
    double total = 0.0;
    bool all_closed = true;
    for (const auto& p : pieces_) {
        if (std::max(lo, p.lo) < std::min(hi, p.hi) && !(p.closed_mass && p.closed_first_moment)) {
            all_closed = false;
            break;
        }
    }
    double closed = std::nan("");
    if (all_closed) {
        closed = 0.0;
        for (const auto& p : pieces_) {
            const double s = std::max(lo, p.lo);
            const double e = std::min(hi, p.hi);
            if (!(s < e)) continue;
            closed += a * p.closed_mass(s, e) - p.closed_first_moment(s, e, y);
        }
    }
    if (std::isfinite(closed)) {
        total = std::max(closed, 0.0);
    } else {
        total = density_integral(lo, y, [lo](double u) { return u - lo; });
        if (total != kInf) total += density_integral(y, hi, [hi](double u) { return hi - u; });
    }
    for (const auto& at : atoms_) {
        if (at.location > lo && at.location < hi) total += at.mass * (a - std::abs(at.location - y));
    }
    return total;
}

double SpeedMeasure::boundary_moment(Side side, double y) const {
    if (!interval_.in_interior(y)) throw std::domain_error("boundary_moment: y must lie in (l, r)");
    const double e = interval_.endpoint(side);
    if (std::isinf(e)) return kInf;
    const double lo = side == Side::left ? e : y;
    const double hi = side == Side::left ? y : e;
    double total = 0.0;
    bool all_closed = true;
    for (const auto& p : pieces_) {
        if (std::max(lo, p.lo) < std::min(hi, p.hi) && !p.closed_first_moment) {
            all_closed = false;
            break;
        }
    }
    double closed = std::nan("");
    if (all_closed) {
        closed = 0.0;
        for (const auto& p : pieces_) {
            const double s = std::max(lo, p.lo);
            const double t = std::min(hi, p.hi);
            if (s < t) closed += p.closed_first_moment(s, t, e);
        }
    }
    if (!std::isnan(closed)) {
        total = closed;
    } else {
        total = density_integral(lo, hi, [e](double u) { return std::abs(u - e); });
    }
    for (const auto& at : atoms_) {
        if (at.location > lo && at.location < hi) total += at.mass * std::abs(at.location - e);
    }
    return total;
}

SpeedMeasure SpeedMeasure::quadrature_only() const {
    std::vector<DensityPiece> pieces = pieces_;
    for (auto& p : pieces) {
        p.closed_mass = nullptr;
        p.closed_first_moment = nullptr;
    }
    return SpeedMeasure(interval_, std::move(pieces), atoms_, quad_tol_);
}

SpeedMeasure SpeedMeasure::with_quad_tol(double tol) const {
    return SpeedMeasure(interval_, pieces_, atoms_, tol);
}

SpeedMeasure from_sde(std::function<double(double)> eta, StateInterval interval, double quad_tol,
                      std::span<const double> breakpoints) {
    interval.validate();
    std::vector<double> cuts;
    for (double b : breakpoints) {
        if (interval.in_interior(b)) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto density = [eta = std::move(eta)](double x) {
        const double e = eta(x);
        return 2.0 / (e * e);
    };
    std::vector<DensityPiece> pieces;
    double lo = interval.l;
    for (double c : cuts) {
        pieces.push_back({lo, c, density, nullptr, nullptr});
        lo = c;
    }
    pieces.push_back({lo, interval.r, density, nullptr, nullptr});
    return SpeedMeasure(interval, std::move(pieces), {}, quad_tol);
}

DensityPiece constant_piece(double lo, double hi, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("constant density must be positive");
    DensityPiece p;
    p.lo = lo;
    p.hi = hi;
    p.density = [c](double) { return c; };
    p.closed_mass = [c](double a, double b) {
        if (std::isinf(a) || std::isinf(b)) return kInf;
        return c * (b - a);
    };
    p.closed_first_moment = [c](double a, double b, double x) {
        if (std::isinf(a) || std::isinf(b)) return kInf;
        if (x <= a) return c * 0.5 * ((b - x) * (b - x) - (a - x) * (a - x));
        if (x >= b) return c * 0.5 * ((x - a) * (x - a) - (x - b) * (x - b));
        return c * 0.5 * ((x - a) * (x - a) + (b - x) * (b - x));
    };
    return p;
}

}  // namespace emcel
