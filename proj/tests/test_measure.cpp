#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "emcel/measure.hpp"

using namespace emcel;

namespace {

SpeedMeasure bm() { return SpeedMeasure(StateInterval::real_line(), {constant_piece(-kInf, kInf, 2.0)}); }

SpeedMeasure sticky(double w = 1.0) {
    return SpeedMeasure(StateInterval::real_line(), {constant_piece(-kInf, kInf, 2.0)}, {{0.0, w}});
}

// Composite midpoint rule, used as an independent oracle.
template <class F>
double midpoint(F f, double a, double b, int n = 200000) {
    const double dx = (b - a) / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += f(a + (i + 0.5) * dx);
    return s * dx;
}

}  // namespace

TEST_CASE("mass of constant density") { CHECK(bm().mass(-1.0, 1.0, true, false) == doctest::Approx(4.0)); }

TEST_CASE("mass counts an atom according to endpoint inclusion") {
    const auto m = sticky();
    CHECK(m.mass(0.0, 1.0, true, true) == doctest::Approx(3.0));
    CHECK(m.mass(0.0, 1.0, false, true) == doctest::Approx(2.0));
    CHECK(m.mass(-1.0, 0.0, false, true) == doctest::Approx(3.0));
    CHECK(m.mass(-1.0, 0.0, false, false) == doctest::Approx(2.0));
    CHECK(m.mass(0.0, 0.0, true, true) == doctest::Approx(1.0));
    CHECK(m.mass(0.0, 0.0, true, false) == 0.0);
    CHECK(m.atom_at(0.0) == 1.0);
    CHECK(m.atom_at(0.5) == 0.0);
}

TEST_CASE("mass rejects malformed ranges") {
    CHECK_THROWS_AS(bm().mass(1.0, -1.0, true, true), std::domain_error);
    const SpeedMeasure half({0.0, kInf, true, false}, {constant_piece(0.0, kInf, 2.0)});
    CHECK_THROWS_AS(half.mass(-1.0, 1.0, true, true), std::domain_error);
}

TEST_CASE("mass toward an infinite end is +inf") {
    CHECK(bm().mass(0.0, kInf, true, false) == kInf);
    const SpeedMeasure q = bm().quadrature_only();
    CHECK(q.mass(0.0, kInf, true, false) == kInf);
}

TEST_CASE("triangular integral: closed form, quadrature and midpoint oracle agree") {
    // BM: G(y, a) = 2 a^2.
    CHECK(bm().triangular_integral(0.3, 0.2) == doctest::Approx(0.08).epsilon(1e-14));
    CHECK(bm().quadrature_only().triangular_integral(0.3, 0.2) == doctest::Approx(0.08).epsilon(1e-12));
    // Sticky at the atom: 2 a^2 + a.
    CHECK(sticky().triangular_integral(0.0, 0.1) == doctest::Approx(0.12).epsilon(1e-14));
    // Smooth density against an independent midpoint rule.
    const auto m = from_sde([](double x) { return std::cosh(x); }, StateInterval::real_line());
    const double y = 0.7;
    const double a = 1.3;
    const double oracle = midpoint([&](double u) { return (a - std::abs(u - y)) * 2.0 / std::pow(std::cosh(u), 2); },
                                   y - a, y + a);
    CHECK(m.triangular_integral(y, a) == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("triangular integral handles a density vanishing at the window centre") {
    // eta = 1/|x|: density 2 x^2, G(0, a) = a^4 / 3.
    const auto m = from_sde([](double x) { return 1.0 / std::abs(x); }, StateInterval::real_line());
    CHECK(m.triangular_integral(0.0, 0.5) == doctest::Approx(std::pow(0.5, 4) / 3.0).epsilon(1e-10));
}

TEST_CASE("boundary moments") {
    const SpeedMeasure half({0.0, kInf, true, false}, {constant_piece(0.0, kInf, 2.0)});
    CHECK(half.boundary_moment(Side::left, 1.0) == doctest::Approx(1.0));
    CHECK(half.quadrature_only().boundary_moment(Side::left, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(half.boundary_moment(Side::right, 1.0) == kInf);
    // m = 2 x^-3 dx on (0, inf): divergent moment at 0.
    const SpeedMeasure cubic({0.0, kInf, false, false},
                             {DensityPiece{0.0, kInf, [](double x) { return 2.0 / (x * x * x); }, nullptr, nullptr}});
    CHECK(cubic.boundary_moment(Side::left, 1.0) == kInf);
    // Integrable singularity of the density: 1/sqrt(u) on (0, 1), moment = 2/3.
    const SpeedMeasure sing({0.0, 1.0, true, true},
                            {DensityPiece{0.0, 1.0, [](double x) { return 1.0 / std::sqrt(x); }, nullptr, nullptr}});
    CHECK(sing.boundary_moment(Side::left, 1.0 - 1e-15) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK_THROWS_AS(half.boundary_moment(Side::left, 0.0), std::domain_error);
}

TEST_CASE("from_sde builds 2 / eta^2 and splits at breakpoints") {
    const double cut[] = {0.0};
    const auto two = from_sde([](double x) { return x <= 0 ? 2.0 : 1.0; }, StateInterval::real_line(),
                              SpeedMeasure::kDefaultQuadTol, cut);
    REQUIRE(two.pieces().size() == 2);
    CHECK(two.pieces()[0].density(-1.0) == doctest::Approx(0.5));
    CHECK(two.pieces()[1].density(1.0) == doctest::Approx(2.0));
    CHECK(two.atoms().empty());
    const auto inv = from_sde([](double x) { return 1.0 / std::abs(x); }, StateInterval::real_line());
    CHECK(inv.pieces()[0].density(3.0) == doctest::Approx(18.0));
    const auto one = from_sde([](double) { return 1.0; }, StateInterval::real_line());
    CHECK(one.pieces()[0].density(-7.0) == doctest::Approx(2.0));
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(SpeedMeasure(StateInterval::real_line(), {}), std::invalid_argument);
    CHECK_THROWS_AS(SpeedMeasure(StateInterval::real_line(), {constant_piece(-kInf, 0.0, 1.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        SpeedMeasure(StateInterval::real_line(), {constant_piece(-kInf, 0.0, 1.0), constant_piece(1.0, kInf, 1.0)}),
        std::invalid_argument);
    CHECK_THROWS_AS(SpeedMeasure(StateInterval::closed(0.0, 1.0), {constant_piece(0.0, 1.0, 1.0)}, {{0.0, 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(SpeedMeasure(StateInterval::real_line(), {constant_piece(-kInf, kInf, 1.0)}, {{0.0, -1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(StateInterval({0.0, kInf, false, true}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(StateInterval({1.0, 0.0, false, false}).validate(), std::invalid_argument);
}

TEST_CASE("breakpoints merge piece boundaries and atoms") {
    const SpeedMeasure m(StateInterval::real_line(), {constant_piece(-kInf, 0.0, 1.0), constant_piece(0.0, kInf, 2.0)},
                         {{0.0, 1.0}, {-1.0, 0.5}});
    REQUIRE(m.breakpoints().size() == 2);
    CHECK(m.breakpoints()[0] == -1.0);
    CHECK(m.breakpoints()[1] == 0.0);
}
