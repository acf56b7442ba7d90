#pragma once

#include "phifem/errors.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phifem {

// A small arithmetic expression language used for user-supplied scalar
// functions (phi evaluators, reaction terms, right-hand sides):
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          (right associative)
//   atom   := number | name | name '(' expr ')' | '(' expr ')'
//
// Functions: sqrt, ln, exp, abs, sin, cos.  Constant: pi.  Variables are
// restricted to a caller-supplied list; anything else is a parse error.
//
// Parsed expressions are immutable and cheap to copy; evaluation takes the
// variable values in the same order as the variable list given to parse().
class Expression {
public:
    Expression() = default;

    static Expression parse(std::string_view text,
                            std::span<const std::string> variables);

    double eval(std::span<const double> values) const;

    // Convenience for single-variable expressions.
    double eval1(double v) const { return eval(std::span<const double>(&v, 1)); }

    const std::string &text() const { return text_; }
    bool empty() const { return node_ == nullptr; }

    struct Node;

private:
    std::shared_ptr<const Node> node_;
    std::string text_;
    std::size_t n_vars_ = 0;
};

} // namespace phifem
