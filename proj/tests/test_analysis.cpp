#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "emcel/analysis.hpp"

using namespace emcel;

namespace {

SpeedMeasure bm() { return SpeedMeasure(StateInterval::real_line(), {constant_piece(-kInf, kInf, 2.0)}); }

SpeedMeasure sticky(double w = 1.0) {
    return SpeedMeasure(StateInterval::real_line(), {constant_piece(-kInf, kInf, 2.0)}, {{0.0, w}});
}

SpeedMeasure two_media() {
    return SpeedMeasure(StateInterval::real_line(),
                        {constant_piece(-kInf, 0.0, 0.5), constant_piece(0.0, kInf, 2.0)});
}

SpeedMeasure cosh_measure() {
    return from_sde([](double x) { return std::cosh(x); }, StateInterval::real_line());
}

}  // namespace

TEST_CASE("order estimates") {
    const auto hs = decade_sequence(1e-2, 1e-8);
    REQUIRE(hs.size() == 7);
    SUBCASE("atom: order 1, constant 2 / mass") {
        const auto e = estimate_order(sticky(), 0.0, hs);
        CHECK(e.slope == doctest::Approx(1.0).epsilon(2e-2));
        CHECK(e.intercept_const == doctest::Approx(2.0).epsilon(1e-3));
    }
    SUBCASE("Brownian motion: order 1/2, constant 1") {
        const auto e = estimate_order(bm(), 0.0, hs);
        CHECK(e.slope == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(e.intercept_const == doctest::Approx(1.0).epsilon(1e-8));
        CHECK_FALSE(e.degenerate);
    }
    SUBCASE("eta = 1/|x| at 0: order 1/4, constant 6^(1/4)") {
        const auto m = from_sde([](double x) { return 1.0 / std::abs(x); }, StateInterval::real_line());
        const auto e = estimate_order(m, 0.0, hs);
        CHECK(e.slope == doctest::Approx(0.25).epsilon(1e-7));
        CHECK(e.intercept_const == doctest::Approx(std::pow(6.0, 0.25)).epsilon(1e-6));
    }
    SUBCASE("input validation") {
        const std::vector<double> few{1e-2, 1e-3};
        CHECK_THROWS_AS(estimate_order(bm(), 0.0, few), std::invalid_argument);
        const std::vector<double> up{1e-4, 1e-3, 1e-2, 1e-1};
        CHECK_THROWS_AS(estimate_order(bm(), 0.0, up), std::invalid_argument);
    }
}

TEST_CASE("decade sequence") {
    const auto s = decade_sequence(1e-2, 1e-4, 2);
    REQUIRE(s.size() == 5);
    CHECK(s[1] == doctest::Approx(1e-2 / std::sqrt(10.0)));
    CHECK(s.back() == doctest::Approx(1e-4));
}

TEST_CASE("atom limit") {
    CHECK(atom_limit_check(sticky(1.0), 0.0).passed);
    const auto heavy = atom_limit_check(sticky(5.0), 0.0);
    CHECK(heavy.passed);
    REQUIRE_FALSE(heavy.evidence.empty());
    CHECK(heavy.evidence.front().bound == doctest::Approx(0.4));
    CHECK_THROWS_AS(atom_limit_check(bm(), 0.0), std::invalid_argument);
}

TEST_CASE("power mean limit") {
    const auto r = power_mean_limit(two_media(), 0.0, 2.0, 1.0);
    CHECK(r.passed);
    bool found = false;
    for (const auto& e : r.evidence) {
        if (e.input.find("limit") != std::string::npos) {
            found = true;
            CHECK(e.bound == doctest::Approx(std::sqrt(8.0 / 5.0)));
            CHECK(e.observed == doctest::Approx(std::sqrt(8.0 / 5.0)).epsilon(1e-6));
        }
    }
    CHECK(found);
    CHECK(power_mean_limit(cosh_measure(), 1.0, std::cosh(1.0), std::cosh(1.0)).passed);
    // A wrong limit is caught.
    CHECK_FALSE(power_mean_limit(two_media(), 0.0, 1.0, 1.0).passed);
}

TEST_CASE("comparison and Lipschitz checks with negative controls") {
    const auto m = cosh_measure();
    const ScaleSolver s(m, 0.01);
    const auto grid = make_grid(-6.0, 6.0, 0.01);
    auto t = scale_table(s, grid, TableMode::bisect_all);
    const double tol = 2.0 * s.eps_root();
    CHECK(check_comparison(t, m.interval(), s.bounds(), tol).passed);
    CHECK(check_lipschitz(t, tol).passed);

    const auto b = bm();
    const ScaleSolver sb(b, 0.01);
    auto tb = scale_table(sb, grid, TableMode::bisect_all);
    CHECK(check_comparison(tb, b.interval(), sb.bounds(), tol).passed);

    tb.values[600] += 2.0 * 0.01;
    const auto bad_cmp = check_comparison(tb, b.interval(), sb.bounds(), tol);
    CHECK_FALSE(bad_cmp.passed);
    REQUIRE_FALSE(bad_cmp.evidence.empty());
    // The bumped point is y = 0; the worst evidence names an interval ending or starting there.
    const std::string& where = bad_cmp.evidence.front().input;
    CHECK((where.rfind("[-0.0099", 0) == 0 || where.rfind("[0, ", 0) == 0));
    const auto bad_lip = check_lipschitz(tb, tol);
    CHECK_FALSE(bad_lip.passed);
    CHECK(bad_lip.worst_violation == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("comparison requires strict increase where the chain moves") {
    ScaleTable t;
    t.h = 0.01;
    t.grid = {0.0, 0.1, 0.2};
    t.values = {0.1, 0.0, 0.1};  // y - a constant at the first pair: strict failure
    t.method.assign(3, Method::bisection);
    const auto r = check_comparison(t, StateInterval::real_line(), {0.01, -kInf, kInf}, 0.0);
    CHECK_FALSE(r.passed);
    CHECK(r.violations > 0);
}

TEST_CASE("growth bounds") {
    const auto grid = make_grid(-5.0, 5.0, 0.05);
    SUBCASE("Brownian motion with g = 1/2") {
        const auto m = bm();
        const ScaleSolver s(m, 0.01);
        const auto t = scale_table(s, grid, TableMode::bisect_all);
        CHECK(check_growth(t, s(0.0), [](double) { return 0.5; }, 1e-12).passed);
        CHECK_FALSE(check_growth(t, s(0.0), [](double) { return 0.4; }, 1e-12).passed);
    }
    SUBCASE("cosh SDE with g = cosh^2 / 2") {
        const auto m = cosh_measure();
        const ScaleSolver s(m, 0.01);
        const auto t = scale_table(s, grid, TableMode::bisect_all);
        const double C0 = s(0.0);
        CHECK(check_growth(t, C0, [](double x) { return 0.5 * std::pow(std::cosh(x), 2); }, 1e-12).passed);
    }
}

TEST_CASE("residual, sandwich, derivative and ODE checks pass on the sticky measure") {
    const auto m = sticky(0.3);
    const ScaleSolver s(m, 1e-3);
    const auto grid = make_grid(-1.0, 1.0, 0.01);
    const auto t = scale_table(s, grid, TableMode::bisect_all);
    CHECK(check_root_residual(s, t, 1e-9 * 1e-3).passed);
    CHECK(check_sandwich(s, t).passed);
    CHECK(check_derivatives(s, grid).passed);
    CHECK(check_ode_equivalence(s, grid).passed);
}

TEST_CASE("h monotonicity and uniform vanishing") {
    const auto m = two_media();
    const std::vector<double> ys{-1.0, 0.0, 0.5};
    const std::vector<double> hs{1e-2, 1e-3, 1e-4};
    CHECK(check_h_monotonicity(m, ys, hs, 0.0).passed);
    const std::vector<double> up{1e-4, 1e-3};
    CHECK_FALSE(check_h_monotonicity(m, ys, up, 0.0).passed);
    const auto grid = make_grid(-2.0, 2.0, 0.1);
    CHECK(check_uniform_vanishing(m, grid, 2.0, hs).passed);
}

TEST_CASE("full suite passes on two media") {
    const auto grid = make_grid(-2.0, 2.0, 0.02);
    for (const auto& r : scale_property_suite(two_media(), 0.01, grid)) {
        CAPTURE(r.name);
        CHECK(r.passed);
    }
}

TEST_CASE("report builder keeps the worst evidence") {
    ReportBuilder rb("demo", 0.5, 2);
    rb.add("a", 1.0, 0.0, 0.1);
    rb.add("b", 1.0, 0.0, 0.9);
    rb.add("c", 1.0, 0.0, 0.3);
    rb.add_lazy([] { return std::string("d"); }, 1.0, 0.0, 0.05);
    const auto r = rb.finish();
    CHECK_FALSE(r.passed);
    CHECK(r.checked == 4);
    CHECK(r.violations == 1);
    CHECK(r.worst_violation == 0.9);
    REQUIRE(r.evidence.size() == 2);
    CHECK(r.evidence[0].input == "b");
    CHECK(r.evidence[1].input == "c");
    const auto j = to_json(r);
    for (const char* key : {"name", "passed", "inconclusive", "worst_violation", "tolerance", "checked", "violations",
                            "evidence"})
        CHECK(j.contains(key));
}

TEST_CASE("Monte Carlo identities") {
    const auto m = bm();
    const ExactScale s(ScaleSolver(m, 0.01));
    SimConfig c;
    c.h = 0.01;
    c.T = 1.0;
    c.n_paths = 20000;
    c.seed = 17;
    const auto mean = weak_error(c, s, [](double x) { return x; }, 0.0);
    CHECK(std::abs(mean.error) <= 4.0 * mean.estimate.stddev / std::sqrt(20000.0));
    const auto var = weak_error(c, s, [](double x) { return x * x; }, 1.0);
    CHECK(std::abs(var.error) <= 4.0 * var.estimate.stddev / std::sqrt(20000.0));

    const auto st = sticky();
    const TabulatedScale ts(ScaleSolver(st, 0.01), -6.0, 6.0, 0.001);
    c.y0 = 0.3;
    const auto mart = weak_error(c, ts, [](double x) { return x; }, 0.3);
    CHECK(std::abs(mart.error) <= 4.0 * mart.estimate.stddev / std::sqrt(20000.0));
}

TEST_CASE("weak error against a finer oracle") {
    auto m = std::make_shared<const SpeedMeasure>(bm());
    SimConfig c;
    c.h = 0.04;
    c.T = 1.0;
    c.n_paths = 2000;
    c.seed = 3;
    const auto w = weak_error(c, tabulated_factory(m, -8.0, 8.0, 4001), [](double x) { return x * x; });
    CHECK(w.reference.n == 32000);
    CHECK(std::abs(w.error) <= 4.0 * w.half_width / 1.96);
}

TEST_CASE("mean estimate") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto e = mean_estimate(v);
    CHECK(e.mean == 2.5);
    CHECK(e.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(e.half_width() == doctest::Approx(1.959963984540054 * std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(mean_estimate({}).n == 0);
}

TEST_CASE("KS statistic") {
    CHECK(ks_distance({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
    CHECK(ks_distance({0.0, 1.0}, {2.0, 3.0}) == 1.0);
    CHECK(ks_distance({0.0, 2.0}, {1.0, 3.0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(ks_distance({}, {1.0}), std::invalid_argument);
    CHECK(ks_noise(100, 100) == doctest::Approx(1.36 * std::sqrt(0.02)));
    // Same law: the distance stays within the noise band most of the time.
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    std::vector<double> a(4000);
    std::vector<double> b(4000);
    for (auto& x : a) x = z(rng);
    for (auto& x : b) x = z(rng);
    CHECK(ks_distance(a, b) < ks_noise(4000, 4000));
    for (auto& x : b) x += 0.5;
    CHECK(ks_distance(a, b) > ks_noise(4000, 4000));
}

TEST_CASE("self-convergence with too few paths is inconclusive") {
    auto m = std::make_shared<const SpeedMeasure>(bm());
    SimConfig c;
    c.T = 1.0;
    c.n_paths = 20;
    c.seed = 1;
    const std::vector<double> hs{1.0 / 50, 1.0 / 200};
    const auto sc = self_convergence(tabulated_factory(m, -8.0, 8.0, 2001), c, [](double x) { return x; }, hs,
                                     1.0 / 800);
    CHECK(sc.report.inconclusive);
    CHECK_FALSE(sc.report.passed);
    CHECK(sc.distances.size() == 2);
}
