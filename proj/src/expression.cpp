#include "phifem/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace phifem {

namespace {

enum class Op {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sqrt,
    Ln,
    Exp,
    Abs,
    Sin,
    Cos,
};

} // namespace

struct Expression::Node {
    Op op = Op::Constant;
    double value = 0.0;     // Constant
    std::size_t slot = 0;   // Variable
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;

    double eval(std::span<const double> v) const {
        switch (op) {
        case Op::Constant: return value;
        case Op::Variable: return v[slot];
        case Op::Add: return lhs->eval(v) + rhs->eval(v);
        case Op::Sub: return lhs->eval(v) - rhs->eval(v);
        case Op::Mul: return lhs->eval(v) * rhs->eval(v);
        case Op::Div: return lhs->eval(v) / rhs->eval(v);
        case Op::Pow: return std::pow(lhs->eval(v), rhs->eval(v));
        case Op::Neg: return -lhs->eval(v);
        case Op::Sqrt: return std::sqrt(lhs->eval(v));
        case Op::Ln: return std::log(lhs->eval(v));
        case Op::Exp: return std::exp(lhs->eval(v));
        case Op::Abs: return std::fabs(lhs->eval(v));
        case Op::Sin: return std::sin(lhs->eval(v));
        case Op::Cos: return std::cos(lhs->eval(v));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) {
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Constant;
    n->value = v;
    return n;
}

NodePtr make_var(std::size_t slot) {
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Variable;
    n->slot = slot;
    return n;
}

NodePtr make_unary(Op op, NodePtr a) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(a);
    return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

class Parser {
public:
    Parser(std::string_view text, std::span<const std::string> vars)
        : text_(text), vars_(vars) {}

    NodePtr run() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != text_.size()) {
            fail("unexpected trailing input");
        }
        return e;
    }

private:
    std::string_view text_;
    std::span<const std::string> vars_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string &what) const {
        throw ConfigParseError("expression error at offset " +
                               std::to_string(pos_) + " in \"" +
                               std::string(text_) + "\": " + what);
    }

    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr e = term();
        for (;;) {
            if (consume('+')) {
                e = make_binary(Op::Add, e, term());
            } else if (consume('-')) {
                e = make_binary(Op::Sub, e, term());
            } else {
                return e;
            }
        }
    }

    NodePtr term() {
        NodePtr e = unary();
        for (;;) {
            if (consume('*')) {
                e = make_binary(Op::Mul, e, unary());
            } else if (consume('/')) {
                e = make_binary(Op::Div, e, unary());
            } else {
                return e;
            }
        }
    }

    NodePtr unary() {
        if (consume('-')) {
            return make_unary(Op::Neg, unary());
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (consume('^')) {
            return make_binary(Op::Pow, base, unary());
        }
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= text_.size()) {
            fail("expected a value");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!consume(')')) {
                fail("missing ')'");
            }
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            return identifier();
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const char *begin = text_.data() + pos_;
        char *end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) {
            fail("malformed number");
        }
        pos_ += static_cast<std::size_t>(end - begin);
        return make_const(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name(text_.substr(start, pos_ - start));

        if (peek() == '(') {
            Op op;
            if (name == "sqrt") {
                op = Op::Sqrt;
            } else if (name == "ln") {
                op = Op::Ln;
            } else if (name == "exp") {
                op = Op::Exp;
            } else if (name == "abs") {
                op = Op::Abs;
            } else if (name == "sin") {
                op = Op::Sin;
            } else if (name == "cos") {
                op = Op::Cos;
            } else {
                fail("unknown function '" + name + "'");
            }
            consume('(');
            NodePtr arg = expr();
            if (!consume(')')) {
                fail("missing ')' after argument of " + name);
            }
            return make_unary(op, arg);
        }

        if (name == "pi") {
            return make_const(std::numbers::pi);
        }
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i] == name) {
                return make_var(i);
            }
        }
        fail("unknown identifier '" + name + "'");
    }
};

} // namespace

Expression Expression::parse(std::string_view text,
                             std::span<const std::string> variables) {
    Parser p(text, variables);
    Expression e;
    e.node_ = p.run();
    e.text_ = std::string(text);
    e.n_vars_ = variables.size();
    return e;
}

double Expression::eval(std::span<const double> values) const {
    return node_->eval(values);
}

} // namespace phifem
