#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "emcel/rng.hpp"
#include "emcel/simulate.hpp"

using namespace emcel;

namespace {

SpeedMeasure bm() { return SpeedMeasure(StateInterval::real_line(), {constant_piece(-kInf, kInf, 2.0)}); }

SpeedMeasure sticky() {
    return SpeedMeasure(StateInterval::real_line(), {constant_piece(-kInf, kInf, 2.0)}, {{0.0, 1.0}});
}

SpeedMeasure two_media() {
    return SpeedMeasure(StateInterval::real_line(),
                        {constant_piece(-kInf, 0.0, 0.5), constant_piece(0.0, kInf, 2.0)});
}

SpeedMeasure unit_box() {
    return SpeedMeasure(StateInterval::closed(-1.0, 1.0), {constant_piece(-1.0, 1.0, 2.0)});
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("sign stream is random access and roughly fair") {
    SignStream a(42, 3);
    SignStream b(42, 3);
    int sum = 0;
    for (std::uint64_t k = 0; k < 100000; ++k) sum += a(k);
    CHECK(std::abs(sum) < 5 * std::sqrt(100000.0));
    CHECK(b(99999) == a(99999));
    CHECK(b(5) == a(5));
    SignStream other(43, 3);
    int agree = 0;
    for (std::uint64_t k = 0; k < 1000; ++k) agree += other(k) == a(k);
    CHECK(agree > 400);
    CHECK(agree < 600);
}

TEST_CASE("single steps") {
    const auto m = bm();
    const ExactScale s(ScaleSolver(m, 0.04));
    CHECK(step(s, 0.0, +1).state == doctest::Approx(0.2).epsilon(1e-12));
    const auto st = sticky();
    const ExactScale ss(ScaleSolver(st, 0.01));
    CHECK(step(ss, 0.0, -1).state == doctest::Approx(-0.01925824).epsilon(1e-6));
    const auto box = unit_box();
    const ExactScale sb(ScaleSolver(box, 0.01));
    CHECK(step(sb, -1.0, +1).state == -1.0);
    CHECK(step(sb, 1.0, -1).state == 1.0);
    // Boundary region: the step lands exactly on the endpoint.
    CHECK(step(sb, -0.95, -1).state == -1.0);
    CHECK_FALSE(step(sb, -0.95, -1).escaped);
}

TEST_CASE("SimConfig step count") {
    SimConfig c;
    c.h = 0.1;
    c.T = 1.0;
    CHECK(c.steps() == 10);
    c.T = 1.05;
    CHECK(c.steps() == 11);
    c.h = 1.0 / 400;
    c.T = 1.0;
    CHECK(c.steps() == 400);
}

TEST_CASE("zero paths give an empty result") {
    const auto m = bm();
    const ExactScale s(ScaleSolver(m, 0.01));
    SimConfig c;
    c.n_paths = 0;
    CHECK(simulate_chain(c, s).size() == 0);
}

TEST_CASE("interpolation") {
    ChainPath p;
    p.h = 0.04;
    p.states = {0.0, 0.2, 0.0};
    p.k_max = 2;
    CHECK(interpolate(p, 0.04) == 0.2);
    CHECK(interpolate(p, 0.06) == doctest::Approx(0.1));
    CHECK(interpolate(p, 0.25 * 0.04) == doctest::Approx(0.05));
    CHECK(interpolate(p, 0.08) == 0.0);
    CHECK_THROWS_AS(interpolate(p, -0.01), std::domain_error);
    CHECK_THROWS_AS(interpolate(p, 0.09), std::domain_error);
    ChainPath term = p;
    term.states = {0.0, 0.0};
    term.stride = 2;
    CHECK_THROWS_AS(interpolate(term, 0.04), std::domain_error);
}

TEST_CASE("parallel simulation is bit-identical to the serial reference") {
    const auto m = sticky();
    const ScaleSolver solver(m, 1.0 / 100);
    const TabulatedScale s(solver, -3.0, 3.0, 0.001);
    SimConfig c;
    c.h = 0.01;
    c.T = 1.0;
    c.n_paths = 500;
    c.seed = 99;
    const auto par = simulate_chain(c, s);
    const auto ser = simulate_chain_serial(c, s);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
        REQUIRE(par.paths[i].states.size() == ser.paths[i].states.size());
        for (std::size_t k = 0; k < par.paths[i].states.size(); ++k)
            CHECK(par.paths[i].states[k] == ser.paths[i].states[k]);
    }
    // Same seed again: identical; different seed: different.
    const auto again = simulate_chain(c, s);
    CHECK(again.paths[7].states == par.paths[7].states);
    c.seed = 100;
    CHECK(simulate_chain(c, s).paths[7].states != par.paths[7].states);
}

TEST_CASE("absorption and containment on a bounded interval") {
    const auto m = unit_box();
    const ScaleSolver solver(m, 1.0 / 100);
    const TabulatedScale s(solver, -1.0, 1.0, 0.001);
    SimConfig c;
    c.h = 0.01;
    c.T = 5.0;
    c.n_paths = 200;
    c.seed = 5;
    const auto r = simulate_chain(c, s);
    std::size_t absorbed = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto& p = r.paths[i];
        CHECK_FALSE(p.escaped);
        CHECK_FALSE(p.exploded);
        for (double x : p.states) CHECK((x >= -1.0 && x <= 1.0));
        if (p.absorbed_at) {
            ++absorbed;
            const double end = p.absorbed_at->side == Side::left ? -1.0 : 1.0;
            for (std::size_t k = p.absorbed_at->step; k < p.states.size(); ++k) CHECK(p.states[k] == end);
            const double H = p.absorbed_at->step * c.h;
            if (p.absorbed_at->side == Side::left) CHECK(r.exits[i].H_l == doctest::Approx(H));
            else CHECK(r.exits[i].H_r == doctest::Approx(H));
            CHECK_FALSE(r.exits[i].censored);
        } else {
            CHECK(r.exits[i].censored);
        }
    }
    CHECK(absorbed > 150);
}

TEST_CASE("paths driven by the same signs never cross") {
    const auto m = sticky();
    const ScaleSolver solver(m, 0.01);
    const TabulatedScale s(solver, -4.0, 4.0, 0.0005);
    SimConfig lo_cfg;
    lo_cfg.h = 0.01;
    lo_cfg.T = 2.0;
    lo_cfg.n_paths = 50;
    lo_cfg.seed = 11;
    lo_cfg.y0 = -0.013;
    SimConfig hi_cfg = lo_cfg;
    hi_cfg.y0 = 0.004;
    const auto lo = simulate_chain(lo_cfg, s);
    const auto hi = simulate_chain(hi_cfg, s);
    // Paths coalesce at the sticky point; once they agree to the last ulp,
    // rounding may swap them by that much.
    const double roundoff = 1e-15;
    bool ordered = true;
    std::size_t merged = 0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        for (std::size_t k = 0; k < lo.paths[i].states.size(); ++k)
            if (lo.paths[i].states[k] > hi.paths[i].states[k] + roundoff) ordered = false;
        merged += std::abs(lo.paths[i].terminal() - hi.paths[i].terminal()) <= roundoff;
    }
    CHECK(ordered);
    CHECK(merged > 0);
}

TEST_CASE("Euler with unit eta coincides with the chain for Brownian motion") {
    const auto m = bm();
    const ExactScale s(ScaleSolver(m, 0.01));
    SimConfig c;
    c.h = 0.01;
    c.T = 1.0;
    c.n_paths = 20;
    c.seed = 3;
    const auto chain = simulate_chain(c, s);
    c.scheme = Scheme::euler;
    c.eta = [](double) { return 1.0; };
    const auto euler = simulate_euler(c, StateInterval::real_line());
    for (std::size_t i = 0; i < chain.size(); ++i)
        for (std::size_t k = 0; k < chain.paths[i].states.size(); ++k)
            CHECK(euler.paths[i].states[k] == doctest::Approx(chain.paths[i].states[k]).epsilon(1e-12));
}

TEST_CASE("two media: one step from the interface differs between schemes") {
    const double h = 0.01;
    const auto m = two_media();
    const ExactScale s(ScaleSolver(m, h));
    CHECK(step(s, 0.0, +1).state == doctest::Approx(std::sqrt(8.0 * h / 5.0)).epsilon(1e-11));
    const auto eta = [](double x) { return x < 0.0 ? 2.0 : 1.0; };
    SimConfig c;
    c.h = h;
    c.T = h;
    c.n_paths = 64;
    c.scheme = Scheme::euler;
    c.eta = eta;
    const auto r = simulate_euler(c, StateInterval::real_line());
    for (const auto& p : r.paths) CHECK(std::abs(p.terminal()) == doctest::Approx(std::sqrt(h)));
    CHECK(euler_scale(eta, StateInterval::real_line(), h, -0.5) == doctest::Approx(2.0 * std::sqrt(h)));
}

TEST_CASE("Euler explosion and clamping are flagged") {
    SimConfig c;
    c.h = 0.01;
    c.T = 6.0;
    c.n_paths = 100;
    c.seed = 7;
    c.scheme = Scheme::euler;
    c.eta = [](double x) { return std::cosh(x); };
    const auto r = simulate_euler(c, StateInterval::real_line());
    std::size_t exploded = 0;
    for (const auto& p : r.paths) {
        if (p.exploded) {
            ++exploded;
            CHECK(std::isfinite(p.terminal()));
        }
    }
    CHECK(exploded > 0);

    c.eta = [](double) { return 1.0; };
    c.T = 10.0;
    c.n_paths = 50;
    const auto box = simulate_euler(c, {-0.15, 0.15, true, true});
    bool any_escaped = false;
    for (const auto& p : box.paths) {
        for (double x : p.states) CHECK((x >= -0.15 && x <= 0.15));
        any_escaped = any_escaped || p.escaped;
    }
    CHECK(any_escaped);
}

TEST_CASE("terminal records keep the endpoints only") {
    const auto m = bm();
    const ExactScale s(ScaleSolver(m, 0.01));
    SimConfig c;
    c.h = 0.01;
    c.T = 1.0;
    c.n_paths = 10;
    c.seed = 1;
    const auto full = simulate_chain(c, s);
    c.record = Record::terminal;
    const auto term = simulate_chain(c, s);
    for (std::size_t i = 0; i < full.size(); ++i) {
        REQUIRE(term.paths[i].states.size() == 2);
        CHECK(term.paths[i].stride == 100);
        CHECK(term.paths[i].terminal() == full.paths[i].terminal());
    }
}

TEST_CASE("CSV writers") {
    const auto m = unit_box();
    const ExactScale s(ScaleSolver(m, 0.25));
    SimConfig c;
    c.h = 0.25;
    c.T = 0.5;
    c.n_paths = 2;
    const auto r = simulate_chain(c, s);
    std::ostringstream paths;
    write_paths_csv(r, paths);
    std::istringstream in(paths.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "path_id,k,t,state");
    std::getline(in, line);
    CHECK(line == "0,0,0,0");
    std::ostringstream exits;
    write_exits_csv(r, exits);
    CHECK(exits.str().rfind("path_id,H_l,H_r,censored\n", 0) == 0);
}
