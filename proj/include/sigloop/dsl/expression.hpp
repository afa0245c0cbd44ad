#ifndef SIGLOOP_DSL_EXPRESSION_HPP
#define SIGLOOP_DSL_EXPRESSION_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sigloop/dsl/dual.hpp"

namespace sigloop::dsl {

enum class NodeKind { number, symbol, add, sub, mul, div, neg, pow, call };

enum class Func { sqrt, abs, sgn, sin, cos, tan, arctan, exp, log, min, max };

struct Node {
    NodeKind kind;
    double number = 0.0;   // NodeKind::number
    int symbol = -1;       // NodeKind::symbol, index into the symbol list
    double exponent = 0.0; // NodeKind::pow, constant real exponent
    Func func = Func::sqrt;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

using NodePtr = std::shared_ptr<const Node>;

// An immutable scalar expression over a fixed list of symbols.  Evaluation
// never returns NaN or infinities; ill-defined points raise DomainError and
// kinks raise NonDifferentiable when a derivative is actually requested.
class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string& source,
                            const std::vector<std::string>& symbols);

    bool valid() const { return root_ != nullptr; }

    double evaluate(std::span<const double> point) const;

    // Value plus one partial derivative per symbol.
    Dual evaluate_with_gradient(std::span<const double> point) const;

    // Canonical serialization; parse(print()) reproduces the tree.
    std::string print() const;

    // True when no symbol occurs in the tree.
    bool is_constant() const;

    // Structural equality (numbers compared exactly).
    bool equals(const Expression& other) const;

    const std::vector<std::string>& symbols() const { return *symbols_; }
    const NodePtr& root() const { return root_; }

private:
    Expression(NodePtr root, std::shared_ptr<const std::vector<std::string>> symbols)
        : root_(std::move(root)), symbols_(std::move(symbols)) {}

    NodePtr root_;
    std::shared_ptr<const std::vector<std::string>> symbols_;
};

}  // namespace sigloop::dsl

#endif
