#pragma once

#include "selfsim/errors.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace selfsim {

/// Small arithmetic grammar for matrix and flux entries:
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := ('+' | '-') unary | power
///   power  := atom ('^' unary)?
///   atom   := number | variable | '(' expr ')'
/// Variables are names from a caller-supplied list (e.g. u1, u2).
class Expression {
public:
    Expression() : root_(constant(0.0)) {}

    static Expression parse(const std::string& text, const std::vector<std::string>& variables) {
        Parser p{text, variables, 0};
        Expression e;
        e.root_ = p.expr();
        p.skip();
        if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
        e.text_ = text;
        return e;
    }

    double operator()(std::span<const double> x) const { return eval(*root_, x); }

    /// Symbolic partial derivative with respect to variable k.
    Expression derivative(std::size_t k) const {
        Expression e;
        e.root_ = diff(root_, k);
        e.text_ = "d(" + text_ + ")/dx" + std::to_string(k + 1);
        return e;
    }

    const std::string& text() const { return text_; }

private:
    enum class Op { constant, variable, neg, add, sub, mul, div, pow };
    struct Node {
        Op op;
        double value = 0.0;
        std::size_t var = 0;
        std::shared_ptr<const Node> a, b;
    };
    using NodePtr = std::shared_ptr<const Node>;

    static NodePtr constant(double v) { return std::make_shared<Node>(Node{Op::constant, v, 0, nullptr, nullptr}); }
    static NodePtr variable(std::size_t k) { return std::make_shared<Node>(Node{Op::variable, 0.0, k, nullptr, nullptr}); }
    static NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
        return std::make_shared<Node>(Node{op, 0.0, 0, std::move(a), std::move(b)});
    }
    static bool is_const(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }

    // Light folding keeps derivative trees small.
    static NodePtr add(NodePtr a, NodePtr b) {
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        return make(Op::add, std::move(a), std::move(b));
    }
    static NodePtr sub(NodePtr a, NodePtr b) {
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return make(Op::neg, std::move(b));
        return make(Op::sub, std::move(a), std::move(b));
    }
    static NodePtr mul(NodePtr a, NodePtr b) {
        if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        return make(Op::mul, std::move(a), std::move(b));
    }
    static NodePtr div(NodePtr a, NodePtr b) {
        if (is_const(a, 0.0)) return constant(0.0);
        if (is_const(b, 1.0)) return a;
        return make(Op::div, std::move(a), std::move(b));
    }

    static double eval(const Node& n, std::span<const double> x) {
        switch (n.op) {
        case Op::constant: return n.value;
        case Op::variable: return x[n.var];
        case Op::neg: return -eval(*n.a, x);
        case Op::add: return eval(*n.a, x) + eval(*n.b, x);
        case Op::sub: return eval(*n.a, x) - eval(*n.b, x);
        case Op::mul: return eval(*n.a, x) * eval(*n.b, x);
        case Op::div: return eval(*n.a, x) / eval(*n.b, x);
        case Op::pow: return std::pow(eval(*n.a, x), eval(*n.b, x));
        }
        return 0.0;
    }

    static bool depends_on(const NodePtr& n, std::size_t k) {
        if (!n) return false;
        if (n->op == Op::variable) return n->var == k;
        return depends_on(n->a, k) || depends_on(n->b, k);
    }

    static NodePtr diff(const NodePtr& n, std::size_t k) {
        switch (n->op) {
        case Op::constant: return constant(0.0);
        case Op::variable: return constant(n->var == k ? 1.0 : 0.0);
        case Op::neg: {
            auto d = diff(n->a, k);
            return is_const(d, 0.0) ? d : make(Op::neg, d);
        }
        case Op::add: return add(diff(n->a, k), diff(n->b, k));
        case Op::sub: return sub(diff(n->a, k), diff(n->b, k));
        case Op::mul: return add(mul(diff(n->a, k), n->b), mul(n->a, diff(n->b, k)));
        case Op::div:
            return div(sub(mul(diff(n->a, k), n->b), mul(n->a, diff(n->b, k))), mul(n->b, n->b));
        case Op::pow: {
            if (!depends_on(n->b, k)) {
                // g f^(g-1) f'
                auto g = n->b;
                return mul(mul(g, make(Op::pow, n->a, sub(g, constant(1.0)))), diff(n->a, k));
            }
            throw SolverError(ErrorCode::config_error, "derivative of a variable exponent is not supported");
        }
        }
        return constant(0.0);
    }

    struct Parser {
        const std::string& s;
        const std::vector<std::string>& vars;
        std::size_t pos;

        [[noreturn]] void fail(const std::string& msg) const {
            throw SolverError(ErrorCode::config_error,
                              "expression '" + s + "' at column " + std::to_string(pos + 1) + ": " + msg);
        }
        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        NodePtr expr() {
            NodePtr lhs = term();
            for (;;) {
                if (accept('+')) lhs = make(Op::add, lhs, term());
                else if (accept('-')) lhs = make(Op::sub, lhs, term());
                else return lhs;
            }
        }
        NodePtr term() {
            NodePtr lhs = unary();
            for (;;) {
                if (accept('*')) lhs = make(Op::mul, lhs, unary());
                else if (accept('/')) lhs = make(Op::div, lhs, unary());
                else return lhs;
            }
        }
        NodePtr unary() {
            if (accept('-')) return make(Op::neg, unary());
            if (accept('+')) return unary();
            return power();
        }
        NodePtr power() {
            NodePtr base = atom();
            if (accept('^')) return make(Op::pow, base, unary());
            return base;
        }
        NodePtr atom() {
            skip();
            if (pos >= s.size()) fail("unexpected end of expression");
            if (accept('(')) {
                NodePtr e = expr();
                if (!accept(')')) fail("expected ')'");
                return e;
            }
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(s.substr(pos), &used);
                } catch (const std::exception&) {
                    fail("bad number");
                }
                pos += used;
                return constant(v);
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t end = pos;
                while (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_')) ++end;
                const std::string name = s.substr(pos, end - pos);
                for (std::size_t k = 0; k < vars.size(); ++k)
                    if (vars[k] == name) {
                        pos = end;
                        return variable(k);
                    }
                fail("unknown variable '" + name + "'");
            }
            fail("unexpected '" + std::string(1, c) + "'");
        }
    };

    NodePtr root_;
    std::string text_;
};

/// Names x1..xn with the given prefix.
inline std::vector<std::string> variable_names(const std::string& prefix, std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t k = 1; k <= n; ++k) v.push_back(prefix + std::to_string(k));
    return v;
}

} // namespace selfsim
