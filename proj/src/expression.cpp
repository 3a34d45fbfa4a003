#include "emcel/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

namespace emcel {

ExpressionError::ExpressionError(std::size_t column, const std::string& what)
    : std::runtime_error("column " + std::to_string(column) + ": " + what), column_(column) {}

namespace {

using Op = Expression::Op;
using Instr = Expression::Instr;

struct FuncName {
    std::string_view name;
    Op op;
};
constexpr std::array<FuncName, 9> kFunctions = {{{"abs", Op::abs},
                                                 {"exp", Op::exp},
                                                 {"log", Op::log},
                                                 {"sqrt", Op::sqrt},
                                                 {"cosh", Op::cosh},
                                                 {"sinh", Op::sinh},
                                                 {"tanh", Op::tanh},
                                                 {"cos", Op::cos},
                                                 {"sin", Op::sin}}};

// Recursive-descent parser emitting postfix code.
class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    std::vector<Instr> run() {
        expr();
        skip_ws();
        if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return std::move(code_);
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ExpressionError(pos_ + 1, msg); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= s_.size()) fail(std::string("expected '") + c + "' before end of input");
            fail(std::string("expected '") + c + "'");
        }
    }

    void expr() {
        term();
        for (;;) {
            if (accept('+')) { term(); code_.push_back({Op::add, 0.0}); }
            else if (accept('-')) { term(); code_.push_back({Op::sub, 0.0}); }
            else return;
        }
    }
    void term() {
        unary();
        for (;;) {
            if (accept('*')) { unary(); code_.push_back({Op::mul, 0.0}); }
            else if (accept('/')) { unary(); code_.push_back({Op::div, 0.0}); }
            else return;
        }
    }
    void unary() {
        if (accept('-')) {
            unary();
            code_.push_back({Op::neg, 0.0});
        } else if (accept('+')) {
            unary();
        } else {
            power();
        }
    }
    void power() {
        primary();
        if (accept('^')) {
            unary();
            code_.push_back({Op::pow, 0.0});
        }
    }
    void primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (accept('(')) {
            expr();
            expect(')');
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            const std::string_view id = s_.substr(start, pos_ - start);
            if (id == "x") {
                code_.push_back({Op::var, 0.0});
                return;
            }
            if (id == "pi") {
                code_.push_back({Op::constant, std::numbers::pi});
                return;
            }
            if (id == "e") {
                code_.push_back({Op::constant, std::numbers::e});
                return;
            }
            for (const auto& f : kFunctions) {
                if (f.name == id) {
                    expect('(');
                    expr();
                    expect(')');
                    code_.push_back({f.op, 0.0});
                    return;
                }
            }
            pos_ = start;
            fail("unknown identifier '" + std::string(id) + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
    void number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) { ++pos_; ++n; }
            return n;
        };
        std::size_t n = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) fail("malformed number");
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (digits() == 0) fail("malformed exponent");
        }
        double v = 0.0;
        const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != s_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        code_.push_back({Op::constant, v});
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::vector<Instr> code_;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
    Expression e;
    e.text_ = std::string(text);
    e.program_ = Parser(e.text_).run();
    std::size_t depth = 0;
    for (const auto& in : e.program_) {
        switch (in.op) {
            case Op::constant:
            case Op::var: ++depth; break;
            case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow: --depth; break;
            default: break;
        }
        e.max_depth_ = std::max(e.max_depth_, depth);
    }
    return e;
}

bool Expression::is_constant() const {
    for (const auto& in : program_)
        if (in.op == Op::var) return false;
    return true;
}

double Expression::operator()(double x) const {
    constexpr std::size_t kSmall = 32;
    std::array<double, kSmall> small{};
    std::vector<double> big;
    double* st = small.data();
    if (max_depth_ > kSmall) {
        big.resize(max_depth_);
        st = big.data();
    }
    std::size_t n = 0;
    for (const auto& in : program_) {
        switch (in.op) {
            case Op::constant: st[n++] = in.value; break;
            case Op::var: st[n++] = x; break;
            case Op::add: --n; st[n - 1] += st[n]; break;
            case Op::sub: --n; st[n - 1] -= st[n]; break;
            case Op::mul: --n; st[n - 1] *= st[n]; break;
            case Op::div: --n; st[n - 1] /= st[n]; break;
            case Op::pow: --n; st[n - 1] = std::pow(st[n - 1], st[n]); break;
            case Op::neg: st[n - 1] = -st[n - 1]; break;
            case Op::abs: st[n - 1] = std::abs(st[n - 1]); break;
            case Op::exp: st[n - 1] = std::exp(st[n - 1]); break;
            case Op::log: st[n - 1] = std::log(st[n - 1]); break;
            case Op::sqrt: st[n - 1] = std::sqrt(st[n - 1]); break;
            case Op::cosh: st[n - 1] = std::cosh(st[n - 1]); break;
            case Op::sinh: st[n - 1] = std::sinh(st[n - 1]); break;
            case Op::tanh: st[n - 1] = std::tanh(st[n - 1]); break;
            case Op::cos: st[n - 1] = std::cos(st[n - 1]); break;
            case Op::sin: st[n - 1] = std::sin(st[n - 1]); break;
        }
    }
    return st[0];
}

}  // namespace emcel
