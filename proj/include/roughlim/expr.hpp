#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace roughlim {

/// Tiny arithmetic expression language used by custom space definitions:
/// operators + - * / ^, functions abs/max/min/pow, variables x and y,
/// numeric literals. Parsed once, evaluated many times.
struct Expr {
    enum class Op { Const, VarX, VarY, Add, Sub, Mul, Div, Neg, Abs, Max, Min, Pow };
    Op op = Op::Const;
    double value = 0.0;
    std::shared_ptr<const Expr> a, b;
};

using ExprPtr = std::shared_ptr<const Expr>;

inline ExprPtr make_expr(Expr::Op op, ExprPtr a = nullptr, ExprPtr b = nullptr, double v = 0.0) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->value = v;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

inline ExprPtr expr_const(double v) { return make_expr(Expr::Op::Const, nullptr, nullptr, v); }
inline ExprPtr expr_x() { return make_expr(Expr::Op::VarX); }
inline ExprPtr expr_y() { return make_expr(Expr::Op::VarY); }

inline double eval(const Expr& e, double x, double y) {
    using Op = Expr::Op;
    switch (e.op) {
        case Op::Const: return e.value;
        case Op::VarX: return x;
        case Op::VarY: return y;
        case Op::Add: return eval(*e.a, x, y) + eval(*e.b, x, y);
        case Op::Sub: return eval(*e.a, x, y) - eval(*e.b, x, y);
        case Op::Mul: return eval(*e.a, x, y) * eval(*e.b, x, y);
        case Op::Div: return eval(*e.a, x, y) / eval(*e.b, x, y);
        case Op::Neg: return -eval(*e.a, x, y);
        case Op::Abs: return std::abs(eval(*e.a, x, y));
        case Op::Max: return std::max(eval(*e.a, x, y), eval(*e.b, x, y));
        case Op::Min: return std::min(eval(*e.a, x, y), eval(*e.b, x, y));
        case Op::Pow: return std::pow(eval(*e.a, x, y), eval(*e.b, x, y));
    }
    return 0.0;
}

namespace detail {

struct ExprParser {
    std::string_view src;
    std::size_t pos = 0;
    // var names enabled for this parse; custom spaces use {x,y}, rules use {k}
    bool allow_xy = true;
    bool allow_k = false;

    explicit ExprParser(std::string_view s, bool xy = true, bool k = false)
        : src(s), allow_xy(xy), allow_k(k) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("expression error at offset " + std::to_string(pos) +
                                    ": " + what + " in \"" + std::string(src) + "\"");
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) { ++pos; return true; }
        return false;
    }
    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    ExprPtr parse() {
        auto e = additive();
        skip_ws();
        if (pos != src.size()) fail("trailing input");
        return e;
    }

    ExprPtr additive() {
        auto lhs = multiplicative();
        for (;;) {
            if (eat('+')) lhs = make_expr(Expr::Op::Add, lhs, multiplicative());
            else if (eat('-')) lhs = make_expr(Expr::Op::Sub, lhs, multiplicative());
            else return lhs;
        }
    }

    ExprPtr multiplicative() {
        auto lhs = unary();
        for (;;) {
            if (eat('*')) lhs = make_expr(Expr::Op::Mul, lhs, unary());
            else if (eat('/')) lhs = make_expr(Expr::Op::Div, lhs, unary());
            else return lhs;
        }
    }

    ExprPtr unary() {
        if (eat('-')) return make_expr(Expr::Op::Neg, unary());
        return power();
    }

    ExprPtr power() {
        auto base = primary();
        if (eat('^')) return make_expr(Expr::Op::Pow, base, unary()); // right associative
        return base;
    }

    ExprPtr primary() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of input");
        const char c = src[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return ident();
        if (eat('(')) {
            auto e = additive();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        fail("unexpected character");
    }

    ExprPtr number() {
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.' ||
                src[pos] == 'e' || src[pos] == 'E' ||
                ((src[pos] == '+' || src[pos] == '-') && pos > start &&
                 (src[pos - 1] == 'e' || src[pos - 1] == 'E'))))
            ++pos;
        try {
            return expr_const(std::stod(std::string(src.substr(start, pos - start))));
        } catch (const std::exception&) {
            fail("bad numeric literal");
        }
    }

    ExprPtr ident() {
        std::size_t start = pos;
        while (pos < src.size() && std::isalpha(static_cast<unsigned char>(src[pos]))) ++pos;
        const std::string name(src.substr(start, pos - start));
        if (name == "x" && allow_xy) return expr_x();
        if (name == "y" && allow_xy) return expr_y();
        if (name == "k" && allow_k) return make_expr(Expr::Op::VarX); // rank rides the x slot
        if (name == "abs") return call1(Expr::Op::Abs);
        if (name == "max") return call2(Expr::Op::Max);
        if (name == "min") return call2(Expr::Op::Min);
        if (name == "pow") return call2(Expr::Op::Pow);
        fail("unknown identifier '" + name + "'");
    }

    ExprPtr call1(Expr::Op op) {
        if (!eat('(')) fail("expected '('");
        auto a = additive();
        if (!eat(')')) fail("expected ')'");
        return make_expr(op, a);
    }

    ExprPtr call2(Expr::Op op) {
        if (!eat('(')) fail("expected '('");
        auto a = additive();
        if (!eat(',')) fail("expected ','");
        auto b = additive();
        if (!eat(')')) fail("expected ')'");
        return make_expr(op, a, b);
    }
};

} // namespace detail

/// Parse a two-variable expression over x and y, e.g. "min(x,y)" or "abs(x-y)+1".
inline ExprPtr parse_space_expr(std::string_view s) {
    return detail::ExprParser(s, /*xy=*/true, /*k=*/false).parse();
}

/// Parse a single-variable expression over the rank k (used by point rules;
/// the classifier in sequence.hpp restricts it to the supported rule forms).
inline ExprPtr parse_rank_expr(std::string_view s) {
    return detail::ExprParser(s, /*xy=*/false, /*k=*/true).parse();
}

} // namespace roughlim
