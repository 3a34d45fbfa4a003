#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace emcel {

/// Syntax error in a density expression; `column` is 1-based.
class ExpressionError : public std::runtime_error {
public:
    ExpressionError(std::size_t column, const std::string& what);
    std::size_t column() const { return column_; }

private:
    std::size_t column_;
};

/// Compiled closed-form expression in one variable `x` (grammar in
/// docs/measure-config.md). Evaluation runs a small postfix program and is
/// safe to call concurrently.
class Expression {
public:
    static Expression parse(std::string_view text);

    double operator()(double x) const;
    const std::string& text() const { return text_; }
    /// True when the expression does not reference x.
    bool is_constant() const;

    enum class Op : unsigned char { constant, var, add, sub, mul, div, pow, neg,
                                    abs, exp, log, sqrt, cosh, sinh, tanh, cos, sin };
    struct Instr {
        Op op;
        double value;
    };

private:
    std::string text_;
    std::vector<Instr> program_;
    std::size_t max_depth_ = 0;
};

}  // namespace emcel
