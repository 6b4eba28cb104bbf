#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "tpfem/errors.hpp"

namespace tpfem {

/// Syntax error with the offending position in the input text.
struct ParseError : ConfigError {
    std::size_t position;
    ParseError(const std::string& what, std::size_t pos)
        : ConfigError(what + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

/// Expression over the grammar
///   expr := number | x | eps | -expr | expr (+|-|*|/|^) expr
///         | (sin|cos|exp|log|sqrt)(expr) | (expr)
/// with ^ binding tighter than unary minus, then * /, then + -; ^ is
/// right-associative, the rest left-associative.
///
/// Immutable; nodes are shared between an expression and its derivatives.
class Expression {
public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    enum class Kind { Number, VarX, VarEps, Neg, Add, Sub, Mul, Div, Pow, Call };
    enum class Fn { Sin, Cos, Exp, Log, Sqrt };

    struct Node {
        Kind kind;
        double number = 0.0;  // Kind::Number
        Fn fn = Fn::Sin;      // Kind::Call
        NodePtr a = nullptr, b = nullptr;
    };

    Expression() = default;
    explicit Expression(NodePtr root) : root_(std::move(root)) {}

    static Expression parse(std::string_view text);
    static Expression number(double v);
    static Expression var_x();
    static Expression var_eps();

    bool empty() const { return root_ == nullptr; }
    const NodePtr& root() const { return root_; }

    double eval(double x, double eps) const;

    /// Symbolic derivative with respect to x (eps is a constant).
    Expression derivative() const;

    /// Canonical fully-parenthesized form; parse(to_string()) reproduces the
    /// same tree.
    std::string to_string() const;

    friend bool operator==(const Expression& a, const Expression& b);

    friend Expression operator+(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a, const Expression& b);
    friend Expression operator*(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a);
    static Expression call(Fn fn, const Expression& arg);

private:
    NodePtr root_;
};

}  // namespace tpfem
