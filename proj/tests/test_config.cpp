#include <cmath>
#include <string>

#include <doctest.h>

#include "emcel/config.hpp"

using namespace emcel;

namespace {

std::string config_dir() { return EMCEL_CONFIG_DIR; }

ConfigError error_of(const std::string& text) {
    try {
        (void)parse_measure_config(text, "t.json");
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a ConfigError");
    return ConfigError("", 0, 0, "");
}

}  // namespace

TEST_CASE("shipped sample configs load") {
    for (const char* name :
         {"brownian.json", "two_media.json", "sticky.json", "half_line.json", "cosh.json", "absorbed_interval.json"}) {
        CAPTURE(name);
        const auto cfg = load_measure_config(config_dir() + "/" + name);
        REQUIRE(cfg.measure);
        CHECK(cfg.warnings.empty());
    }
}

TEST_CASE("sticky config: density plus atom") {
    const auto cfg = load_measure_config(config_dir() + "/sticky.json");
    CHECK(cfg.measure->atom_at(0.0) == 1.0);
    CHECK(cfg.measure->mass(-1.0, 1.0, true, true) == doctest::Approx(5.0));
}

TEST_CASE("eta pieces become 2 / eta^2 and expose eta") {
    const auto cfg = load_measure_config(config_dir() + "/two_media.json");
    CHECK(cfg.measure->mass(-1.0, 0.0, true, true) == doctest::Approx(0.5));
    CHECK(cfg.measure->mass(0.0, 1.0, true, true) == doctest::Approx(2.0));
    REQUIRE(cfg.eta);
    CHECK(cfg.eta(-1.0) == 2.0);
    CHECK(cfg.eta(1.0) == 1.0);
}

TEST_CASE("expression densities") {
    const auto cfg = parse_measure_config(R"j({"interval": {"l": "-inf", "r": "inf"},
        "pieces": [{"eta": "cosh(x)"}]})j");
    CHECK(cfg.measure->mass(0.0, 1.0, true, true) == doctest::Approx(2.0 * std::tanh(1.0)).epsilon(1e-9));
    CHECK(cfg.eta(2.0) == doctest::Approx(std::cosh(2.0)));
}

TEST_CASE("JSON syntax errors report line and column") {
    const auto e = error_of("{\n  \"interval\": {\"l\": 0,, \"r\": 1}\n}");
    CHECK(e.line() == 2);
    CHECK(e.column() == 23);
    CHECK(std::string(e.what()).rfind("t.json:2:23:", 0) == 0);
}

TEST_CASE("expression errors point inside the string") {
    const auto e = error_of("{\"interval\": {\"l\": \"-inf\", \"r\": \"inf\"},\n\"pieces\": [{\"density\": \"2 * foo(x)\"}]}");
    CHECK(e.line() == 2);
    // Column of the f in foo; the opening quote of the value is at column 24.
    CHECK(e.column() == 29);
}

TEST_CASE("semantic errors") {
    CHECK_THROWS_AS(parse_measure_config(R"({"pieces": [{"density": 1}]})"), ConfigError);
    CHECK_THROWS_AS(parse_measure_config(R"({"interval": {"l": 1, "r": 0}, "pieces": [{"density": 1}]})"), ConfigError);
    CHECK_THROWS_AS(parse_measure_config(R"({"interval": {"l": 0, "r": 1}, "pieces": [{"density": -1}]})"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_measure_config(R"({"interval": {"l": 0, "r": 1}, "pieces": [{"density": 1, "eta": 1}]})"),
        ConfigError);
    CHECK_THROWS_AS(parse_measure_config(R"({"interval": {"l": 0, "r": 1}, "pieces": [{"lo": 0, "hi": 0.5, "density": 1}]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_measure_config(
                        R"({"interval": {"l": 0, "r": 1}, "pieces": [{"density": 1}], "atoms": [{"location": 0, "mass": 1}]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_measure_config(R"({"interval": {"l": 0, "r": 1}, "pieces": [{"eta": 0}]})"), ConfigError);
    CHECK_THROWS_AS(load_measure_config("/nonexistent/x.json"), ConfigError);
}

TEST_CASE("declared endpoint membership disagreeing with Feller's test warns") {
    // Density 2 on [0, inf) makes 0 accessible; declaring it outside I only warns.
    const auto cfg = parse_measure_config(
        R"({"interval": {"l": 0, "r": "inf", "l_in_I": false}, "pieces": [{"density": 2}]})");
    REQUIRE(cfg.warnings.size() == 1);
    CHECK(cfg.warnings[0].find("accessible") != std::string::npos);
}
