#ifndef ROOTITER_EXPR_HPP
#define ROOTITER_EXPR_HPP

#include <cctype>
#include <memory>
#include <string>
#include <string_view>

#include "rootiter/bigreal.hpp"
#include "rootiter/errors.hpp"

namespace rootiter {

// Differentiable expression tree over one variable x.  Nodes are immutable
// and shared; differentiate() is closed over this node set.
enum class ExprKind { Number, Var, Neg, Exp, Sin, Cos, Ln, Add, Sub, Mul, Div, Pow };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind;
    std::string literal; // Number: decimal text
    long exponent = 0;   // Pow: integer exponent
    ExprPtr a, b;
};

namespace exprs {

inline ExprPtr number(std::string text) {
    return std::make_shared<Expr>(Expr{ExprKind::Number, std::move(text), 0, nullptr, nullptr});
}
inline ExprPtr number(long v) { return number(std::to_string(v)); }
inline ExprPtr var() { return std::make_shared<Expr>(Expr{ExprKind::Var, "", 0, nullptr, nullptr}); }
inline ExprPtr unary(ExprKind k, ExprPtr a) {
    return std::make_shared<Expr>(Expr{k, "", 0, std::move(a), nullptr});
}
inline ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b) {
    return std::make_shared<Expr>(Expr{k, "", 0, std::move(a), std::move(b)});
}
inline ExprPtr pow(ExprPtr base, long n) {
    return std::make_shared<Expr>(Expr{ExprKind::Pow, "", n, std::move(base), nullptr});
}

inline bool is_number(const ExprPtr& e, long v) {
    return e->kind == ExprKind::Number && e->literal == std::to_string(v);
}

// Light algebraic cleanup so derivative trees stay small and printable.
inline ExprPtr add(ExprPtr a, ExprPtr b) {
    if (is_number(a, 0)) return b;
    if (is_number(b, 0)) return a;
    return binary(ExprKind::Add, std::move(a), std::move(b));
}
inline ExprPtr sub(ExprPtr a, ExprPtr b) {
    if (is_number(b, 0)) return a;
    if (is_number(a, 0)) return unary(ExprKind::Neg, std::move(b));
    return binary(ExprKind::Sub, std::move(a), std::move(b));
}
inline ExprPtr mul(ExprPtr a, ExprPtr b) {
    if (is_number(a, 0) || is_number(b, 0)) return number(0);
    if (is_number(a, 1)) return b;
    if (is_number(b, 1)) return a;
    return binary(ExprKind::Mul, std::move(a), std::move(b));
}
inline ExprPtr div(ExprPtr a, ExprPtr b) {
    if (is_number(a, 0)) return number(0);
    if (is_number(b, 1)) return a;
    return binary(ExprKind::Div, std::move(a), std::move(b));
}
inline ExprPtr powr(ExprPtr base, long n) {
    if (n == 0) return number(1);
    if (n == 1) return base;
    return pow(std::move(base), n);
}

} // namespace exprs

namespace detail {

// Recursive-descent parser for:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' factor)?
//   base   := NUMBER | 'x' | '-' base | FUNC '(' expr ')' | '(' expr ')'
class ExprParser {
  public:
    explicit ExprParser(std::string_view src) : src_(src) {}

    ExprPtr parse() {
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != src_.size()) throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

  private:
    ExprPtr expr() {
        ExprPtr e = term();
        for (;;) {
            skip_ws();
            if (accept('+'))
                e = exprs::binary(ExprKind::Add, e, term());
            else if (accept('-'))
                e = exprs::binary(ExprKind::Sub, e, term());
            else
                return e;
        }
    }

    ExprPtr term() {
        ExprPtr e = factor();
        for (;;) {
            skip_ws();
            if (accept('*'))
                e = exprs::binary(ExprKind::Mul, e, factor());
            else if (accept('/'))
                e = exprs::binary(ExprKind::Div, e, factor());
            else
                return e;
        }
    }

    ExprPtr factor() {
        ExprPtr b = base();
        skip_ws();
        if (accept('^')) {
            std::size_t at = pos_;
            ExprPtr e = factor(); // right-associative
            return exprs::pow(b, const_int(e, at));
        }
        return b;
    }

    ExprPtr base() {
        skip_ws();
        if (pos_ >= src_.size()) throw SyntaxError("unexpected end of input", pos_);
        char c = src_[pos_];
        // '-' binds below '^': -x^2 is -(x^2)
        if (accept('-')) return exprs::unary(ExprKind::Neg, factor());
        if (accept('(')) {
            ExprPtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t at = pos_;
            std::string name;
            while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_])))
                name += src_[pos_++];
            if (name == "x") return exprs::var();
            ExprKind k;
            if (name == "exp")
                k = ExprKind::Exp;
            else if (name == "sin")
                k = ExprKind::Sin;
            else if (name == "cos")
                k = ExprKind::Cos;
            else if (name == "ln")
                k = ExprKind::Ln;
            else
                throw UnknownIdentifier("unknown identifier '" + name + "'", at);
            expect('(');
            ExprPtr arg = expr();
            expect(')');
            return exprs::unary(k, arg);
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
    }

    ExprPtr number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        return exprs::number(std::string(src_.substr(start, pos_ - start)));
    }

    // Exponents must fold to an exact integer (integer literals, unary minus,
    // and nested integer powers); anything else has no total derivative rule.
    long const_int(const ExprPtr& e, std::size_t at) {
        switch (e->kind) {
            case ExprKind::Number: {
                if (e->literal.find('.') != std::string::npos)
                    throw SyntaxError("non-integer exponent", at);
                return std::stol(e->literal);
            }
            case ExprKind::Neg: return -const_int(e->a, at);
            case ExprKind::Pow: {
                long b = const_int(e->a, at), r = 1;
                for (long i = 0; i < e->exponent; ++i) r *= b;
                return r;
            }
            default: throw SyntaxError("exponent must be an integer constant", at);
        }
    }

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
        if (!accept(c)) throw SyntaxError(std::string("expected '") + c + "'", pos_);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline ExprPtr parse_expression(std::string_view src) { return detail::ExprParser(src).parse(); }

inline BigReal evaluate_expr(const ExprPtr& e, const BigReal& x) {
    const PrecisionContext ctx = x.context();
    switch (e->kind) {
        case ExprKind::Number: return parse_decimal(e->literal, ctx);
        case ExprKind::Var: return x;
        case ExprKind::Neg: return -evaluate_expr(e->a, x);
        case ExprKind::Exp: return exp(evaluate_expr(e->a, x));
        case ExprKind::Sin: return sin(evaluate_expr(e->a, x));
        case ExprKind::Cos: return cos(evaluate_expr(e->a, x));
        case ExprKind::Ln: return ln(evaluate_expr(e->a, x));
        case ExprKind::Add: return evaluate_expr(e->a, x) + evaluate_expr(e->b, x);
        case ExprKind::Sub: return evaluate_expr(e->a, x) - evaluate_expr(e->b, x);
        case ExprKind::Mul: return evaluate_expr(e->a, x) * evaluate_expr(e->b, x);
        case ExprKind::Div: return evaluate_expr(e->a, x) / evaluate_expr(e->b, x);
        case ExprKind::Pow: return pow_int(evaluate_expr(e->a, x), e->exponent);
    }
    throw Error("unreachable");
}

inline ExprPtr differentiate(const ExprPtr& e) {
    using namespace exprs;
    switch (e->kind) {
        case ExprKind::Number: return number(0);
        case ExprKind::Var: return number(1);
        case ExprKind::Neg: return sub(number(0), differentiate(e->a));
        case ExprKind::Exp: return mul(differentiate(e->a), unary(ExprKind::Exp, e->a));
        case ExprKind::Sin: return mul(differentiate(e->a), unary(ExprKind::Cos, e->a));
        case ExprKind::Cos:
            return sub(number(0), mul(differentiate(e->a), unary(ExprKind::Sin, e->a)));
        case ExprKind::Ln: return div(differentiate(e->a), e->a);
        case ExprKind::Add: return add(differentiate(e->a), differentiate(e->b));
        case ExprKind::Sub: return sub(differentiate(e->a), differentiate(e->b));
        case ExprKind::Mul:
            return add(mul(differentiate(e->a), e->b), mul(e->a, differentiate(e->b)));
        case ExprKind::Div:
            return div(sub(mul(differentiate(e->a), e->b), mul(e->a, differentiate(e->b))),
                       powr(e->b, 2));
        case ExprKind::Pow:
            return mul(number(e->exponent), mul(powr(e->a, e->exponent - 1), differentiate(e->a)));
    }
    throw Error("unreachable");
}

namespace detail {

inline int precedence(ExprKind k) {
    switch (k) {
        case ExprKind::Add:
        case ExprKind::Sub: return 1;
        case ExprKind::Mul:
        case ExprKind::Div: return 2;
        case ExprKind::Neg: return 3;
        case ExprKind::Pow: return 4;
        default: return 5; // atoms and function calls
    }
}

inline void print(const ExprPtr& e, std::string& out, int parent_prec, bool right_operand) {
    int prec = precedence(e->kind);
    bool parens = prec < parent_prec ||
                  (prec == parent_prec && right_operand && prec <= 2); // -, / left-assoc
    if (parens) out += '(';
    switch (e->kind) {
        case ExprKind::Number: out += e->literal; break;
        case ExprKind::Var: out += 'x'; break;
        case ExprKind::Neg:
            out += '-';
            print(e->a, out, 3, false);
            break;
        case ExprKind::Exp:
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Ln: {
            out += e->kind == ExprKind::Exp   ? "exp"
                   : e->kind == ExprKind::Sin ? "sin"
                   : e->kind == ExprKind::Cos ? "cos"
                                              : "ln";
            out += '(';
            print(e->a, out, 0, false);
            out += ')';
            break;
        }
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Div: {
            char op = e->kind == ExprKind::Add   ? '+'
                      : e->kind == ExprKind::Sub ? '-'
                      : e->kind == ExprKind::Mul ? '*'
                                                 : '/';
            print(e->a, out, prec, false);
            out += op;
            print(e->b, out, prec, true);
            break;
        }
        case ExprKind::Pow:
            print(e->a, out, 5, false); // any non-atomic base needs parens
            out += '^';
            out += std::to_string(e->exponent);
            break;
    }
    if (parens) out += ')';
}

} // namespace detail

inline std::string to_string(const ExprPtr& e) {
    std::string out;
    detail::print(e, out, 0, false);
    return out;
}

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a->kind != b->kind || a->literal != b->literal || a->exponent != b->exponent) return false;
    if (static_cast<bool>(a->a) != static_cast<bool>(b->a)) return false;
    if (static_cast<bool>(a->b) != static_cast<bool>(b->b)) return false;
    if (a->a && !equal(a->a, b->a)) return false;
    if (a->b && !equal(a->b, b->b)) return false;
    return true;
}

} // namespace rootiter

#endif
