#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace emcel {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Side { left, right };

/// State space I with interior (l, r); endpoints may be infinite. An infinite
/// endpoint never belongs to I.
struct StateInterval {
    double l = -kInf;
    double r = kInf;
    bool l_in_I = false;
    bool r_in_I = false;

    static StateInterval real_line() { return {}; }
    static StateInterval closed(double l, double r) { return {l, r, true, true}; }

    /// Throws std::invalid_argument when l >= r or an infinite endpoint is marked in I.
    void validate() const;
    bool in_closure(double y) const { return y >= l && y <= r; }
    bool in_interior(double y) const { return y > l && y < r; }
    double endpoint(Side s) const { return s == Side::left ? l : r; }
};

using Density = std::function<double(double)>;
/// Closed-form m((a, b)) of a piece's density part.
using ClosedMass = std::function<double(double, double)>;
/// Closed-form integral over (a, b) of |u - c| m(du).
using ClosedFirstMoment = std::function<double(double, double, double)>;

/// Absolutely continuous part of m on (lo, hi).
struct DensityPiece {
    double lo = 0.0;
    double hi = 0.0;
    Density density;
    ClosedMass closed_mass;
    ClosedFirstMoment closed_first_moment;
};

struct Atom {
    double location = 0.0;
    double mass = 0.0;
};

/// Speed measure on the interior of the state space: a finite list of density
/// pieces covering (l, r) plus finitely many atoms. Immutable once built; every
/// query is a pure function and can be shared across threads.
///
/// +inf is an ordinary return value for masses and moments whose range touches
/// an endpoint where m is not finite.
class SpeedMeasure {
public:
    static constexpr double kDefaultQuadTol = 1e-10;

    SpeedMeasure(StateInterval interval, std::vector<DensityPiece> pieces,
                 std::vector<Atom> atoms = {}, double quad_tol = kDefaultQuadTol);

    const StateInterval& interval() const { return interval_; }
    const std::vector<DensityPiece>& pieces() const { return pieces_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    double quad_tol() const { return quad_tol_; }

    /// Interior piece boundaries and atom locations, sorted and deduplicated.
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    /// m({y}).
    double atom_at(double y) const;

    /// m of the interval between a and b with the requested endpoint inclusion.
    /// Requires l <= a <= b <= r; a > b throws std::domain_error.
    double mass(double a, double b, bool include_a, bool include_b) const;

    /// G(y, a): integral of (a - |u - y|) over (y - a, y + a).
    double triangular_integral(double y, double a) const;

    /// Feller moment: integral of (u - l) over (l, y) for the left side, of
    /// (r - u) over (y, r) for the right side. +inf for an infinite endpoint.
    double boundary_moment(Side side, double y) const;

    /// Same measure with the closed-form shortcuts dropped, so every integral
    /// goes through quadrature.
    SpeedMeasure quadrature_only() const;
    SpeedMeasure with_quad_tol(double tol) const;

private:
    // Integral of weight(u) * density(u) over (a, b), a <= b, piece by piece.
    template <class Weight>
    double density_integral(double a, double b, Weight&& weight) const;

    StateInterval interval_;
    std::vector<DensityPiece> pieces_;
    std::vector<Atom> atoms_;
    double quad_tol_;
    std::vector<double> breakpoints_;
};

/// Speed measure 2 / eta^2 dx of the driftless SDE dY = eta(Y) dW. `breakpoints`
/// (interior points where eta jumps) split the density into separate pieces.
SpeedMeasure from_sde(std::function<double(double)> eta, StateInterval interval,
                      double quad_tol = SpeedMeasure::kDefaultQuadTol,
                      std::span<const double> breakpoints = {});

/// Piece with constant density c on (lo, hi), closed forms included.
DensityPiece constant_piece(double lo, double hi, double c);

}  // namespace emcel
