#include "fpjump/expr.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "fpjump/error.hpp"

namespace fpjump {

struct Expr::Node {
    Kind kind;
    double value = 0.0;
    Func func = Func::Sin;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct FuncName {
    std::string_view name;
    Expr::Func func;
};

constexpr std::array<FuncName, 6> kFunctions{{
    {"sin", Expr::Func::Sin},
    {"cos", Expr::Func::Cos},
    {"exp", Expr::Func::Exp},
    {"abs", Expr::Func::Abs},
    {"sqrt", Expr::Func::Sqrt},
    {"tanh", Expr::Func::Tanh},
}};

NodePtr make_leaf(Expr::Kind kind, double value = 0.0) {
    return std::make_shared<const Expr::Node>(Expr::Node{kind, value, Expr::Func::Sin, nullptr, nullptr});
}

NodePtr make_unary(Expr::Kind kind, NodePtr arg, Expr::Func func = Expr::Func::Sin) {
    return std::make_shared<const Expr::Node>(Expr::Node{kind, 0.0, func, std::move(arg), nullptr});
}

NodePtr make_binary(Expr::Kind kind, NodePtr lhs, NodePtr rhs) {
    return std::make_shared<const Expr::Node>(Expr::Node{kind, 0.0, Expr::Func::Sin, std::move(lhs), std::move(rhs)});
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse_all() {
        NodePtr root = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) {
            throw ParseError("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
        }
        return root;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = make_binary(Expr::Kind::Add, lhs, parse_term());
            } else if (accept('-')) {
                lhs = make_binary(Expr::Kind::Subtract, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = make_binary(Expr::Kind::Multiply, lhs, parse_unary());
            } else if (accept('/')) {
                lhs = make_binary(Expr::Kind::Divide, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make_unary(Expr::Kind::Negate, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) return make_binary(Expr::Kind::Power, base, parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), value,
                                         std::chars_format::general);
        if (ec != std::errc()) throw ParseError("malformed number", start);
        pos_ = static_cast<std::size_t>(ptr - src_.data());
        if (!std::isfinite(value)) throw ParseError("number out of range", start);
        return make_leaf(Expr::Kind::Number, value);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name == "x") return make_leaf(Expr::Kind::Variable);
        if (name == "pi") return make_leaf(Expr::Kind::Pi);
        for (const auto& f : kFunctions) {
            if (f.name == name) {
                expect('(');
                NodePtr arg = parse_expr();
                expect(')');
                return make_unary(Expr::Kind::Function, arg, f.func);
            }
        }
        throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
    return v;
}

double int_power(double base, std::int64_t n) {
    const bool negative = n < 0;
    std::uint64_t m = negative ? static_cast<std::uint64_t>(-n) : static_cast<std::uint64_t>(n);
    double result = 1.0;
    for (std::uint64_t i = 0; i < m; ++i) result *= base;
    if (negative) {
        if (result == 0.0) throw DomainError("zero raised to a negative power");
        result = 1.0 / result;
    }
    return result;
}

double power(double base, double exponent) {
    constexpr double kMaxRepeated = 64.0;
    if (exponent == std::trunc(exponent) && std::abs(exponent) <= kMaxRepeated) {
        return checked(int_power(base, static_cast<std::int64_t>(exponent)), "power");
    }
    if (base > 0.0) return checked(std::exp(exponent * std::log(base)), "power");
    if (base == 0.0) {
        if (exponent > 0.0) return 0.0;
        throw DomainError("zero raised to a non-positive power");
    }
    if (exponent == std::trunc(exponent)) {
        // large integer exponent of a negative base
        const double magnitude = std::exp(exponent * std::log(-base));
        const bool odd = std::fmod(exponent, 2.0) != 0.0;
        return checked(odd ? -magnitude : magnitude, "power");
    }
    throw DomainError("negative base raised to a non-integer power");
}

double eval_node(const Expr::Node& n, double x) {
    switch (n.kind) {
        case Expr::Kind::Number: return n.value;
        case Expr::Kind::Variable: return x;
        case Expr::Kind::Pi: return std::numbers::pi;
        case Expr::Kind::Negate: return -eval_node(*n.lhs, x);
        case Expr::Kind::Add: return checked(eval_node(*n.lhs, x) + eval_node(*n.rhs, x), "addition");
        case Expr::Kind::Subtract: return checked(eval_node(*n.lhs, x) - eval_node(*n.rhs, x), "subtraction");
        case Expr::Kind::Multiply: return checked(eval_node(*n.lhs, x) * eval_node(*n.rhs, x), "multiplication");
        case Expr::Kind::Divide: {
            const double num = eval_node(*n.lhs, x);
            const double den = eval_node(*n.rhs, x);
            if (den == 0.0) throw DomainError("division by zero");
            return checked(num / den, "division");
        }
        case Expr::Kind::Power: return power(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
        case Expr::Kind::Function: {
            const double a = eval_node(*n.lhs, x);
            switch (n.func) {
                case Expr::Func::Sin: return std::sin(a);
                case Expr::Func::Cos: return std::cos(a);
                case Expr::Func::Exp: return checked(std::exp(a), "exp");
                case Expr::Func::Abs: return std::abs(a);
                case Expr::Func::Sqrt:
                    if (a < 0.0) throw DomainError("sqrt of a negative number");
                    return std::sqrt(a);
                case Expr::Func::Tanh: return std::tanh(a);
            }
        }
    }
    throw InternalError("unhandled expression node");
}

void print_node(const Expr::Node& n, std::string& out) {
    switch (n.kind) {
        case Expr::Kind::Number: {
            std::array<char, 64> buf{};
            auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
            out.append(buf.data(), ptr);
            return;
        }
        case Expr::Kind::Variable: out += 'x'; return;
        case Expr::Kind::Pi: out += "pi"; return;
        case Expr::Kind::Negate:
            out += "(-";
            print_node(*n.lhs, out);
            out += ')';
            return;
        case Expr::Kind::Function:
            for (const auto& f : kFunctions) {
                if (f.func == n.func) out += f.name;
            }
            out += '(';
            print_node(*n.lhs, out);
            out += ')';
            return;
        default: break;
    }
    char op = '+';
    switch (n.kind) {
        case Expr::Kind::Add: op = '+'; break;
        case Expr::Kind::Subtract: op = '-'; break;
        case Expr::Kind::Multiply: op = '*'; break;
        case Expr::Kind::Divide: op = '/'; break;
        case Expr::Kind::Power: op = '^'; break;
        default: throw InternalError("unhandled expression node");
    }
    out += '(';
    print_node(*n.lhs, out);
    out += ' ';
    out += op;
    out += ' ';
    print_node(*n.rhs, out);
    out += ')';
}

bool same_tree(const Expr::Node* a, const Expr::Node* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    if (a->kind == Expr::Kind::Number && std::bit_cast<std::uint64_t>(a->value) != std::bit_cast<std::uint64_t>(b->value)) {
        return false;
    }
    if (a->kind == Expr::Kind::Function && a->func != b->func) return false;
    return same_tree(a->lhs.get(), b->lhs.get()) && same_tree(a->rhs.get(), b->rhs.get());
}

}  // namespace

Expr Expr::parse(std::string_view source) {
    Parser parser(source);
    return Expr(parser.parse_all());
}

double Expr::eval(double x) const { return eval_node(*root_, x); }

std::string Expr::to_string() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

bool operator==(const Expr& a, const Expr& b) { return same_tree(a.root_.get(), b.root_.get()); }

}  // namespace fpjump
