#include "sigloop/dsl/expression.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "sigloop/errors.hpp"

namespace sigloop::dsl {

namespace {

// --- lexer -----------------------------------------------------------------

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
    Tok kind;
    std::size_t pos;
    double number = 0.0;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
        tok_.pos = i_;
        if (i_ >= src_.size()) {
            tok_.kind = Tok::end;
            return;
        }
        char c = src_[i_];
        switch (c) {
            case '+': tok_.kind = Tok::plus; ++i_; return;
            case '-': tok_.kind = Tok::minus; ++i_; return;
            case '*': tok_.kind = Tok::star; ++i_; return;
            case '/': tok_.kind = Tok::slash; ++i_; return;
            case '^': tok_.kind = Tok::caret; ++i_; return;
            case '(': tok_.kind = Tok::lparen; ++i_; return;
            case ')': tok_.kind = Tok::rparen; ++i_; return;
            case ',': tok_.kind = Tok::comma; ++i_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
                ++j;
            tok_.kind = Tok::ident;
            tok_.text = src_.substr(i_, j - i_);
            i_ = j;
            return;
        }
        throw SyntaxError(i_, std::string("unexpected character '") + c + "'");
    }

    void lex_number() {
        std::size_t j = i_;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
        if (j < src_.size() && src_[j] == '.') {
            ++j;
            while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
        }
        if (j < src_.size() && (src_[j] == 'e' || src_[j] == 'E')) {
            std::size_t k = j + 1;
            if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
            if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
                ++k;
                while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) ++k;
                j = k;
            }
        }
        const std::string text = src_.substr(i_, j - i_);
        tok_.kind = Tok::number;
        tok_.number = std::strtod(text.c_str(), nullptr);
        tok_.text = text;
        i_ = j;
    }

    const std::string& src_;
    std::size_t i_ = 0;
    Token tok_;
};

// --- parser ----------------------------------------------------------------

struct FuncInfo {
    const char* name;
    Func func;
    int arity;
};

constexpr FuncInfo kFuncs[] = {
    {"sqrt", Func::sqrt, 1}, {"abs", Func::abs, 1},   {"sgn", Func::sgn, 1},
    {"sin", Func::sin, 1},   {"cos", Func::cos, 1},   {"tan", Func::tan, 1},
    {"arctan", Func::arctan, 1}, {"exp", Func::exp, 1}, {"log", Func::log, 1},
    {"min", Func::min, 2},   {"max", Func::max, 2},
};

const FuncInfo* find_func(const std::string& name) {
    for (const auto& f : kFuncs)
        if (name == f.name) return &f;
    return nullptr;
}

NodePtr make_number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::number;
    n->number = v;
    return n;
}

bool tree_has_symbol(const Node* n) {
    if (!n) return false;
    if (n->kind == NodeKind::symbol) return true;
    return tree_has_symbol(n->a.get()) || tree_has_symbol(n->b.get());
}

double eval_plain(const Node* n, std::span<const double> point);

class Parser {
public:
    Parser(const std::string& src, const std::vector<std::string>& symbols)
        : lex_(src), symbols_(symbols) {}

    NodePtr run() {
        NodePtr e = expr();
        const Token& t = lex_.peek();
        if (t.kind != Tok::end)
            throw SyntaxError(t.pos, "unexpected trailing input");
        return e;
    }

private:
    NodePtr expr() {
        NodePtr left = term();
        while (lex_.peek().kind == Tok::plus || lex_.peek().kind == Tok::minus) {
            Token op = lex_.take();
            NodePtr right = term();
            auto n = std::make_shared<Node>();
            n->kind = op.kind == Tok::plus ? NodeKind::add : NodeKind::sub;
            n->a = left;
            n->b = right;
            left = n;
        }
        return left;
    }

    NodePtr term() {
        NodePtr left = factor();
        while (lex_.peek().kind == Tok::star || lex_.peek().kind == Tok::slash) {
            Token op = lex_.take();
            NodePtr right = factor();
            auto n = std::make_shared<Node>();
            n->kind = op.kind == Tok::star ? NodeKind::mul : NodeKind::div;
            n->a = left;
            n->b = right;
            left = n;
        }
        return left;
    }

    NodePtr factor() {
        bool negate = false;
        if (lex_.peek().kind == Tok::minus) {
            lex_.take();
            negate = true;
        }
        NodePtr base = atom();
        if (lex_.peek().kind == Tok::caret) {
            Token caret = lex_.take();
            base = power(base, caret.pos);
        }
        if (negate) {
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::neg;
            n->a = base;
            base = n;
        }
        return base;
    }

    // Exponents are constant reals; a parenthesized constant expression such
    // as (1/2) or a possibly negated number is folded at parse time.
    NodePtr power(NodePtr base, std::size_t caret_pos) {
        NodePtr exp_tree;
        bool neg_exp = false;
        if (lex_.peek().kind == Tok::minus) {
            lex_.take();
            neg_exp = true;
        }
        exp_tree = atom();
        if (tree_has_symbol(exp_tree.get()))
            throw SyntaxError(caret_pos, "exponent must be a constant");
        double e = eval_plain(exp_tree.get(), {});
        if (neg_exp) e = -e;
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::pow;
        n->a = std::move(base);
        n->exponent = e;
        return n;
    }

    NodePtr atom() {
        Token t = lex_.take();
        switch (t.kind) {
            case Tok::number:
                return make_number(t.number);
            case Tok::lparen: {
                NodePtr e = expr();
                expect(Tok::rparen, "expected ')'");
                return e;
            }
            case Tok::ident: {
                if (lex_.peek().kind == Tok::lparen) return call(t);
                for (std::size_t i = 0; i < symbols_.size(); ++i) {
                    if (symbols_[i] == t.text) {
                        auto n = std::make_shared<Node>();
                        n->kind = NodeKind::symbol;
                        n->symbol = static_cast<int>(i);
                        return n;
                    }
                }
                throw UnknownSymbol(t.text, t.pos);
            }
            default:
                throw SyntaxError(t.pos, "expected a number, symbol, or '('");
        }
    }

    NodePtr call(const Token& name) {
        const FuncInfo* info = find_func(name.text);
        if (!info) throw UnknownSymbol(name.text, name.pos);
        expect(Tok::lparen, "expected '('");
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::call;
        n->func = info->func;
        n->a = expr();
        if (info->arity == 2) {
            expect(Tok::comma, "expected ','");
            n->b = expr();
        }
        expect(Tok::rparen, "expected ')'");
        return n;
    }

    void expect(Tok kind, const char* msg) {
        Token t = lex_.take();
        if (t.kind != kind) throw SyntaxError(t.pos, msg);
    }

    Lexer lex_;
    const std::vector<std::string>& symbols_;
};

// --- evaluation ------------------------------------------------------------

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double eval_plain(const Node* n, std::span<const double> point) {
    switch (n->kind) {
        case NodeKind::number: return n->number;
        case NodeKind::symbol: return point[static_cast<std::size_t>(n->symbol)];
        case NodeKind::add: return eval_plain(n->a.get(), point) + eval_plain(n->b.get(), point);
        case NodeKind::sub: return eval_plain(n->a.get(), point) - eval_plain(n->b.get(), point);
        case NodeKind::mul: return eval_plain(n->a.get(), point) * eval_plain(n->b.get(), point);
        case NodeKind::div: {
            double a = eval_plain(n->a.get(), point);
            double b = eval_plain(n->b.get(), point);
            if (b == 0.0) throw DomainError("division by zero");
            return a / b;
        }
        case NodeKind::neg: return -eval_plain(n->a.get(), point);
        case NodeKind::pow: {
            double a = eval_plain(n->a.get(), point);
            double c = n->exponent;
            if (a < 0.0 && c != std::floor(c))
                throw DomainError("negative base with non-integer exponent");
            if (a == 0.0 && c < 0.0) throw DomainError("zero base with negative exponent");
            return std::pow(a, c);
        }
        case NodeKind::call: {
            double a = eval_plain(n->a.get(), point);
            switch (n->func) {
                case Func::sqrt:
                    if (a < 0.0) throw DomainError("sqrt of a negative value");
                    return std::sqrt(a);
                case Func::abs: return std::fabs(a);
                case Func::sgn: return sgn(a);
                case Func::sin: return std::sin(a);
                case Func::cos: return std::cos(a);
                case Func::tan: return std::tan(a);
                case Func::arctan: return std::atan(a);
                case Func::exp: return std::exp(a);
                case Func::log:
                    if (a <= 0.0) throw DomainError("log of a non-positive value");
                    return std::log(a);
                case Func::min: return std::min(a, eval_plain(n->b.get(), point));
                case Func::max: return std::max(a, eval_plain(n->b.get(), point));
            }
            break;
        }
    }
    throw DomainError("malformed expression tree");
}

bool same_partials(const Dual& a, const Dual& b) {
    for (int i = 0; i < a.size(); ++i)
        if (a.partial(i) != b.partial(i)) return false;
    return true;
}

Dual eval_dual(const Node* n, std::span<const double> point) {
    const int dim = static_cast<int>(point.size());
    switch (n->kind) {
        case NodeKind::number: return Dual::constant(n->number, dim);
        case NodeKind::symbol:
            return Dual::variable(point[static_cast<std::size_t>(n->symbol)], dim, n->symbol);
        case NodeKind::add: return eval_dual(n->a.get(), point) + eval_dual(n->b.get(), point);
        case NodeKind::sub: return eval_dual(n->a.get(), point) - eval_dual(n->b.get(), point);
        case NodeKind::mul: return eval_dual(n->a.get(), point) * eval_dual(n->b.get(), point);
        case NodeKind::div: {
            Dual a = eval_dual(n->a.get(), point);
            Dual b = eval_dual(n->b.get(), point);
            if (b.value() == 0.0) throw DomainError("division by zero");
            return a / b;
        }
        case NodeKind::neg: return -eval_dual(n->a.get(), point);
        case NodeKind::pow: {
            Dual a = eval_dual(n->a.get(), point);
            double c = n->exponent;
            double av = a.value();
            if (av < 0.0 && c != std::floor(c))
                throw DomainError("negative base with non-integer exponent");
            if (av == 0.0 && c < 0.0) throw DomainError("zero base with negative exponent");
            double v = std::pow(av, c);
            if (!a.has_partials() || c == 0.0) return Dual::constant(v, dim);
            if (av == 0.0) {
                if (c > 1.0) return Dual::chain(a, v, 0.0);
                if (c == 1.0) return a;
                throw NonDifferentiable("d/dx x^" + std::to_string(c) + " at x = 0");
            }
            return Dual::chain(a, v, c * std::pow(av, c - 1.0));
        }
        case NodeKind::call: {
            Dual a = eval_dual(n->a.get(), point);
            double av = a.value();
            bool live = a.has_partials();
            switch (n->func) {
                case Func::sqrt: {
                    if (av < 0.0) throw DomainError("sqrt of a negative value");
                    double v = std::sqrt(av);
                    if (!live) return Dual::constant(v, dim);
                    if (av == 0.0) throw NonDifferentiable("d/dx sqrt at x = 0");
                    return Dual::chain(a, v, 0.5 / v);
                }
                case Func::abs:
                    if (!live) return Dual::constant(std::fabs(av), dim);
                    if (av == 0.0) throw NonDifferentiable("d/dx abs at x = 0");
                    return Dual::chain(a, std::fabs(av), sgn(av));
                case Func::sgn:
                    if (!live) return Dual::constant(sgn(av), dim);
                    if (av == 0.0) throw NonDifferentiable("d/dx sgn at x = 0");
                    return Dual::chain(a, sgn(av), 0.0);
                case Func::sin: return Dual::chain(a, std::sin(av), std::cos(av));
                case Func::cos: return Dual::chain(a, std::cos(av), -std::sin(av));
                case Func::tan: {
                    double c = std::cos(av);
                    return Dual::chain(a, std::tan(av), 1.0 / (c * c));
                }
                case Func::arctan:
                    return Dual::chain(a, std::atan(av), 1.0 / (1.0 + av * av));
                case Func::exp: {
                    double v = std::exp(av);
                    return Dual::chain(a, v, v);
                }
                case Func::log:
                    if (av <= 0.0) throw DomainError("log of a non-positive value");
                    return Dual::chain(a, std::log(av), 1.0 / av);
                case Func::min:
                case Func::max: {
                    Dual b = eval_dual(n->b.get(), point);
                    bool take_a = n->func == Func::min ? av <= b.value() : av >= b.value();
                    if (av == b.value() && !same_partials(a, b))
                        throw NonDifferentiable("min/max tie with distinct branch derivatives");
                    return take_a ? a : b;
                }
            }
            break;
        }
    }
    throw DomainError("malformed expression tree");
}

// --- printing --------------------------------------------------------------

std::string print_number(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void print_node(const Node* n, const std::vector<std::string>& symbols, std::string& out) {
    switch (n->kind) {
        case NodeKind::number: out += print_number(n->number); return;
        case NodeKind::symbol: out += symbols[static_cast<std::size_t>(n->symbol)]; return;
        case NodeKind::add:
        case NodeKind::sub:
        case NodeKind::mul:
        case NodeKind::div: {
            const char* op = n->kind == NodeKind::add   ? " + "
                             : n->kind == NodeKind::sub ? " - "
                             : n->kind == NodeKind::mul ? " * "
                                                        : " / ";
            out += '(';
            print_node(n->a.get(), symbols, out);
            out += op;
            print_node(n->b.get(), symbols, out);
            out += ')';
            return;
        }
        case NodeKind::neg:
            out += '-';
            if (n->a->kind == NodeKind::number || n->a->kind == NodeKind::symbol ||
                n->a->kind == NodeKind::call || n->a->kind == NodeKind::pow) {
                print_node(n->a.get(), symbols, out);
            } else {
                out += '(';
                print_node(n->a.get(), symbols, out);
                out += ')';
            }
            return;
        case NodeKind::pow: {
            bool wrap = !(n->a->kind == NodeKind::number || n->a->kind == NodeKind::symbol ||
                          n->a->kind == NodeKind::call);
            if (wrap && (n->a->kind == NodeKind::neg || n->a->kind == NodeKind::pow)) out += '(';
            print_node(n->a.get(), symbols, out);
            if (wrap && (n->a->kind == NodeKind::neg || n->a->kind == NodeKind::pow)) out += ')';
            out += '^';
            out += print_number(n->exponent);
            return;
        }
        case NodeKind::call: {
            for (const auto& f : kFuncs) {
                if (f.func == n->func) {
                    out += f.name;
                    break;
                }
            }
            out += '(';
            print_node(n->a.get(), symbols, out);
            if (n->b) {
                out += ", ";
                print_node(n->b.get(), symbols, out);
            }
            out += ')';
            return;
        }
    }
}

bool node_equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case NodeKind::number: return a->number == b->number;
        case NodeKind::symbol: return a->symbol == b->symbol;
        case NodeKind::pow:
            return a->exponent == b->exponent && node_equal(a->a.get(), b->a.get());
        case NodeKind::call:
            if (a->func != b->func) return false;
            [[fallthrough]];
        default:
            return node_equal(a->a.get(), b->a.get()) && node_equal(a->b.get(), b->b.get());
    }
}

}  // namespace

Expression Expression::parse(const std::string& source,
                             const std::vector<std::string>& symbols) {
    Parser parser(source, symbols);
    NodePtr root = parser.run();
    return Expression(std::move(root),
                      std::make_shared<const std::vector<std::string>>(symbols));
}

double Expression::evaluate(std::span<const double> point) const {
    if (point.size() != symbols_->size())
        throw InvalidArgument("point dimension does not match symbol count");
    double v = eval_plain(root_.get(), point);
    if (!std::isfinite(v)) throw DomainError("non-finite expression value");
    return v;
}

Dual Expression::evaluate_with_gradient(std::span<const double> point) const {
    if (point.size() != symbols_->size())
        throw InvalidArgument("point dimension does not match symbol count");
    if (point.size() > static_cast<std::size_t>(kMaxDim))
        throw InvalidArgument("more symbols than supported partial slots");
    Dual d = eval_dual(root_.get(), point);
    if (!std::isfinite(d.value())) throw DomainError("non-finite expression value");
    for (int i = 0; i < d.size(); ++i)
        if (!std::isfinite(d.partial(i))) throw DomainError("non-finite expression derivative");
    return d;
}

std::string Expression::print() const {
    std::string out;
    print_node(root_.get(), *symbols_, out);
    return out;
}

bool Expression::is_constant() const { return !tree_has_symbol(root_.get()); }

bool Expression::equals(const Expression& other) const {
    return node_equal(root_.get(), other.root_.get());
}

}  // namespace sigloop::dsl
