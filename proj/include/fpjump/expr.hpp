#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace fpjump {

/// Immutable scalar expression in one variable `x`.
///
/// Grammar (lowest to highest precedence):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?          right associative
///     primary := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
///     func    := sin | cos | exp | abs | sqrt | tanh
///
/// so `-x^2` is `-(x^2)` and `2^-1` is `2^(-1)`. Copies share the tree; an
/// Expr can be evaluated concurrently from any number of threads.
class Expr {
public:
    enum class Kind { Number, Variable, Pi, Negate, Add, Subtract, Multiply, Divide, Power, Function };
    enum class Func { Sin, Cos, Exp, Abs, Sqrt, Tanh };

    /// Throws ParseError (with byte offset) on syntax errors and unknown identifiers.
    static Expr parse(std::string_view source);

    /// Throws DomainError on division by zero, sqrt of a negative number,
    /// non-integer power of a negative base, or a non-finite result.
    double eval(double x) const;

    /// Fully parenthesised text that parses back to an identical tree.
    std::string to_string() const;

    /// Structural equality of the trees (literals compared bitwise).
    friend bool operator==(const Expr& a, const Expr& b);

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

    std::shared_ptr<const Node> root_;
};

}  // namespace fpjump
