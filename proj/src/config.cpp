#include "emcel/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "emcel/boundary.hpp"
#include "emcel/expression.hpp"

namespace emcel {

ConfigError::ConfigError(std::string origin, std::size_t line, std::size_t column, const std::string& msg)
    : std::runtime_error(line > 0 ? fmt::format("{}:{}:{}: {}", origin, line, column, msg)
                                  : fmt::format("{}: {}", origin, msg)),
      line_(line), column_(column) {}

namespace {

using nlohmann::json;

struct Position {
    std::size_t line = 0;
    std::size_t column = 0;
};

Position position_of(std::string_view text, std::size_t offset) {
    Position p{1, 1};
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++p.line;
            p.column = 1;
        } else {
            ++p.column;
        }
    }
    return p;
}

class Reader {
public:
    Reader(std::string_view text, std::string origin) : text_(text), origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& msg, std::string_view near = {}, std::size_t extra = 0) const {
        Position p;
        if (!near.empty()) {
            const std::size_t at = text_.find(near);
            if (at != std::string_view::npos) p = position_of(text_, at + extra);
        }
        throw ConfigError(origin_, p.line, p.column, msg);
    }

    double number(const json& j, const std::string& what) const {
        if (j.is_number()) return j.get<double>();
        if (j.is_string()) {
            const std::string s = j.get<std::string>();
            if (s == "inf" || s == "+inf") return kInf;
            if (s == "-inf") return -kInf;
        }
        fail(fmt::format("{} must be a number or \"inf\"/\"-inf\"", what), "\"" + key_of(what) + "\"");
    }

    bool boolean(const json& obj, const char* key, bool fallback) const {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_boolean()) fail(fmt::format("{} must be true or false", key), fmt::format("\"{}\"", key));
        return obj[key].get<bool>();
    }

    Expression expression(const json& j, const std::string& what) const {
        std::string src;
        if (j.is_number()) src = fmt::format("{:.17g}", j.get<double>());
        else if (j.is_string()) src = j.get<std::string>();
        else fail(fmt::format("{} must be an expression string or a number", what), "\"" + key_of(what) + "\"");
        try {
            return Expression::parse(src);
        } catch (const ExpressionError& e) {
            // Point at the offending character inside the JSON string literal.
            const std::string quoted = json(src).dump();
            fail(fmt::format("{}: {}", what, e.what()), quoted, e.column());
        }
    }

private:
    static std::string key_of(const std::string& what) {
        const auto dot = what.find_last_of('.');
        std::string k = dot == std::string::npos ? what : what.substr(dot + 1);
        const auto br = k.find('[');
        return br == std::string::npos ? k : k.substr(0, br);
    }

    std::string_view text_;
    std::string origin_;
};

}  // namespace

MeasureConfig parse_measure_config(std::string_view text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const Position p = position_of(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string msg = e.what();
        if (const auto at = msg.find("syntax error"); at != std::string::npos) msg = msg.substr(at);
        throw ConfigError(origin, p.line, p.column, msg);
    }
    Reader rd(text, origin);
    if (!doc.is_object()) rd.fail("config must be a JSON object");

    if (!doc.contains("interval") || !doc["interval"].is_object())
        rd.fail("missing object \"interval\"", "{");
    const json& iv = doc["interval"];
    StateInterval I;
    if (!iv.contains("l") || !iv.contains("r")) rd.fail("interval needs \"l\" and \"r\"", "\"interval\"");
    I.l = rd.number(iv["l"], "interval.l");
    I.r = rd.number(iv["r"], "interval.r");
    I.l_in_I = rd.boolean(iv, "l_in_I", std::isfinite(I.l));
    I.r_in_I = rd.boolean(iv, "r_in_I", std::isfinite(I.r));
    try {
        I.validate();
    } catch (const std::invalid_argument& e) {
        rd.fail(e.what(), "\"interval\"");
    }

    double quad_tol = SpeedMeasure::kDefaultQuadTol;
    if (doc.contains("quad_tol")) {
        quad_tol = rd.number(doc["quad_tol"], "quad_tol");
        if (!(quad_tol > 0.0) || !std::isfinite(quad_tol)) rd.fail("quad_tol must be positive", "\"quad_tol\"");
    }

    if (!doc.contains("pieces") || !doc["pieces"].is_array() || doc["pieces"].empty())
        rd.fail("missing non-empty array \"pieces\"", "{");
    std::vector<DensityPiece> pieces;
    struct EtaPiece {
        double lo, hi;
        std::shared_ptr<const Expression> expr;
    };
    std::vector<EtaPiece> eta_pieces;
    bool all_eta = true;
    for (std::size_t i = 0; i < doc["pieces"].size(); ++i) {
        const json& pj = doc["pieces"][i];
        const std::string tag = fmt::format("pieces[{}]", i);
        if (!pj.is_object()) rd.fail(tag + " must be an object", "\"pieces\"");
        DensityPiece p;
        p.lo = pj.contains("lo") ? rd.number(pj["lo"], tag + ".lo") : (i == 0 ? I.l : kInf);
        p.hi = pj.contains("hi") ? rd.number(pj["hi"], tag + ".hi") : (i + 1 == doc["pieces"].size() ? I.r : -kInf);
        const bool has_density = pj.contains("density");
        const bool has_eta = pj.contains("eta");
        if (has_density == has_eta) rd.fail(tag + " needs exactly one of \"density\" or \"eta\"", "\"pieces\"");
        auto expr = std::make_shared<const Expression>(
            rd.expression(has_density ? pj["density"] : pj["eta"], tag + (has_density ? ".density" : ".eta")));
        if (has_density) {
            all_eta = false;
            if (expr->is_constant()) {
                const double c = (*expr)(0.0);
                if (!(c > 0.0) || !std::isfinite(c)) rd.fail(tag + ".density must be positive", "\"density\"");
                p = constant_piece(p.lo, p.hi, c);
            } else {
                p.density = [expr](double x) { return (*expr)(x); };
            }
        } else {
            eta_pieces.push_back({p.lo, p.hi, expr});
            if (expr->is_constant()) {
                const double e = (*expr)(0.0);
                if (!(e != 0.0) || !std::isfinite(e)) rd.fail(tag + ".eta must be nonzero", "\"eta\"");
                p = constant_piece(p.lo, p.hi, 2.0 / (e * e));
            } else {
                p.density = [expr](double x) {
                    const double e = (*expr)(x);
                    return 2.0 / (e * e);
                };
            }
        }
        pieces.push_back(std::move(p));
    }

    std::vector<Atom> atoms;
    if (doc.contains("atoms")) {
        if (!doc["atoms"].is_array()) rd.fail("\"atoms\" must be an array", "\"atoms\"");
        for (std::size_t i = 0; i < doc["atoms"].size(); ++i) {
            const json& aj = doc["atoms"][i];
            const std::string tag = fmt::format("atoms[{}]", i);
            if (!aj.is_object() || !aj.contains("location") || !aj.contains("mass"))
                rd.fail(tag + " needs \"location\" and \"mass\"", "\"atoms\"");
            atoms.push_back({rd.number(aj["location"], tag + ".location"), rd.number(aj["mass"], tag + ".mass")});
        }
    }

    MeasureConfig cfg;
    try {
        cfg.measure = std::make_shared<const SpeedMeasure>(I, std::move(pieces), std::move(atoms), quad_tol);
    } catch (const std::invalid_argument& e) {
        rd.fail(e.what(), "\"pieces\"");
    }
    if (all_eta) {
        cfg.eta = [eta_pieces](double x) {
            for (const auto& p : eta_pieces)
                if (x > p.lo && x <= p.hi) return (*p.expr)(x);
            return eta_pieces.front().lo >= x ? (*eta_pieces.front().expr)(x) : (*eta_pieces.back().expr)(x);
        };
    }
    for (Side side : {Side::left, Side::right}) {
        const bool declared = side == Side::left ? I.l_in_I : I.r_in_I;
        const double e = I.endpoint(side);
        if (!std::isfinite(e)) continue;
        const bool accessible = classify(*cfg.measure, side).accessible;
        if (declared != accessible) {
            cfg.warnings.push_back(fmt::format(
                "{} endpoint {} is {} by Feller's test but {}_in_I = {}", side == Side::left ? "left" : "right", e,
                accessible ? "accessible" : "inaccessible", side == Side::left ? "l" : "r", declared));
        }
    }
    return cfg;
}

MeasureConfig load_measure_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, 0, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_measure_config(ss.str(), path.string());
}

}  // namespace emcel
