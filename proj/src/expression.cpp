#include "conelab/expression.hpp"

#include <algorithm>
#include <cctype>
#include <numbers>

namespace conelab {
namespace {

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

NodePtr constant(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
}

bool has_variable(const Node& n) {
    if (n.op == Op::Var) return true;
    if (n.lhs && has_variable(*n.lhs)) return true;
    return n.rhs && has_variable(*n.rhs);
}

double fold(const Node& n) {
    auto lift = [](double c) { return c; };
    return detail::eval_node<double>(n, lift, static_cast<const double*>(nullptr));
}

class Parser {
public:
    Parser(std::string_view text, int dim) : s_(text), dim_(dim) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    int dim_;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what + " at position " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Op::Add, lhs, term());
            else if (accept('-')) lhs = make(Op::Sub, lhs, term());
            else return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Op::Mul, lhs, unary());
            else if (accept('/')) lhs = make(Op::Div, lhs, unary());
            else return lhs;
        }
    }
    NodePtr unary() {
        if (accept('-')) return make(Op::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }
    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) {
            NodePtr ex = unary();
            if (has_variable(*ex)) fail("exponent must be constant");
            auto n = std::make_shared<Node>();
            n->op = Op::Pow;
            n->value = fold(*ex);
            n->lhs = base;
            return n;
        }
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }
    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        const std::string tok(s_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) fail("malformed number '" + tok + "'");
            return constant(v);
        } catch (const std::logic_error&) {
            fail("malformed number '" + tok + "'");
        }
    }
    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        const std::string id(s_.substr(start, pos_ - start));
        if (id.size() > 1 && id[0] == 'x' && std::all_of(id.begin() + 1, id.end(), ::isdigit)) {
            const int k = std::stoi(id.substr(1));
            if (k < 1 || k > dim_) fail("coordinate " + id + " out of range for d=" + std::to_string(dim_));
            auto n = std::make_shared<Node>();
            n->op = Op::Var;
            n->index = k - 1;
            return n;
        }
        if (id == "x" && dim_ == 1) {
            auto n = std::make_shared<Node>();
            n->op = Op::Var;
            return n;
        }
        if (id == "pi") return constant(std::numbers::pi);
        Op op;
        if (id == "exp") op = Op::Exp;
        else if (id == "sin") op = Op::Sin;
        else if (id == "cos") op = Op::Cos;
        else if (id == "abs" || id == "sqrt" || id == "sign" || id == "max" || id == "min")
            fail("function '" + id + "' is not smooth and is not allowed");
        else
            fail("unknown identifier '" + id + "'");
        if (!accept('(')) fail("expected '(' after " + id);
        NodePtr arg = expr();
        if (!accept(')')) fail("expected ')'");
        return make(op, arg);
    }
};

bool affine_node(const Node& n) {
    switch (n.op) {
    case Op::Const:
    case Op::Var: return true;
    case Op::Add:
    case Op::Sub: return affine_node(*n.lhs) && affine_node(*n.rhs);
    case Op::Neg: return affine_node(*n.lhs);
    case Op::Mul:
        return (!has_variable(*n.lhs) && affine_node(*n.rhs)) || (!has_variable(*n.rhs) && affine_node(*n.lhs));
    case Op::Div: return !has_variable(*n.rhs) && affine_node(*n.lhs);
    case Op::Pow: return !has_variable(*n.lhs) || ((n.value == 1.0 || n.value == 0.0) && affine_node(*n.lhs));
    default: return !has_variable(n);
    }
}

}  // namespace

Expr parse_expression(std::string_view text, int dim) {
    if (dim < 1) throw ParseError("dimension must be positive");
    Parser p(text, dim);
    return Expr(p.parse(), dim, std::string(text));
}

bool is_affine(const Expr& e) { return affine_node(e.root()); }

}  // namespace conelab
