#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace conelab {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Second-order forward-mode jet: value, gradient and Hessian with respect to
// the d seeded coordinates.
struct Jet {
    double v = 0.0;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;

    Jet() = default;
    Jet(double value, Eigen::Index dim)
        : v(value), g(Eigen::VectorXd::Zero(dim)), h(Eigen::MatrixXd::Zero(dim, dim)) {}

    static Jet variable(double value, Eigen::Index dim, Eigen::Index index) {
        Jet j(value, dim);
        j.g(index) = 1.0;
        return j;
    }
    Eigen::Index dim() const { return g.size(); }
};

// Chain rule for a scalar function with derivatives f1 = f'(a.v), f2 = f''(a.v).
inline Jet chain(const Jet& a, double f0, double f1, double f2) {
    Jet r;
    r.v = f0;
    r.g = f1 * a.g;
    r.h = f1 * a.h + f2 * a.g * a.g.transpose();
    return r;
}

inline Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v + b.v;
    r.g = a.g + b.g;
    r.h = a.h + b.h;
    return r;
}
inline Jet operator-(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v - b.v;
    r.g = a.g - b.g;
    r.h = a.h - b.h;
    return r;
}
inline Jet operator-(const Jet& a) {
    Jet r;
    r.v = -a.v;
    r.g = -a.g;
    r.h = -a.h;
    return r;
}
inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v * b.v;
    r.g = a.g * b.v + b.g * a.v;
    r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
    return r;
}
inline Jet operator*(double s, const Jet& a) {
    Jet r;
    r.v = s * a.v;
    r.g = s * a.g;
    r.h = s * a.h;
    return r;
}
inline Jet operator+(const Jet& a, double s) {
    Jet r = a;
    r.v += s;
    return r;
}
inline Jet reciprocal(const Jet& a) {
    const double inv = 1.0 / a.v;
    return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

inline Jet exp(const Jet& a) {
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}
inline Jet sin(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return chain(a, s, c, -s);
}
inline Jet cos(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return chain(a, c, -s, -c);
}
inline Jet sqrt(const Jet& a) {
    const double r = std::sqrt(a.v);
    return chain(a, r, 0.5 / r, -0.25 / (r * a.v));
}
// Constant real exponent.
inline Jet pow(const Jet& a, double p) {
    const double f0 = std::pow(a.v, p);
    const double f1 = p * std::pow(a.v, p - 1.0);
    const double f2 = p * (p - 1.0) * std::pow(a.v, p - 2.0);
    return chain(a, f0, f1, f2);
}

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Sin, Cos };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::Const;
    double value = 0.0;  // constant value, or exponent for Pow
    int index = 0;       // coordinate index for Var
    NodePtr lhs, rhs;
};

// Immutable smooth scalar expression in the coordinates x1..xd.
class Expr {
public:
    Expr() = default;
    explicit Expr(NodePtr root, int dim, std::string source = {})
        : root_(std::move(root)), dim_(dim), source_(std::move(source)) {}

    const Node& root() const { return *root_; }
    int dim() const { return dim_; }
    const std::string& source() const { return source_; }
    bool valid() const { return static_cast<bool>(root_); }

private:
    NodePtr root_;
    int dim_ = 0;
    std::string source_;
};

// Grammar: numbers, x1..xd, pi, + - * / ^ (constant exponent), unary minus,
// parentheses, exp sin cos. Non-smooth functions are rejected.
Expr parse_expression(std::string_view text, int dim);

bool is_affine(const Expr& e);

namespace detail {

inline double ipow(double base, double p) {
    if (p == std::floor(p) && std::abs(p) <= 64) {
        int n = static_cast<int>(std::abs(p));
        double r = 1.0, b = base;
        while (n) {
            if (n & 1) r *= b;
            b *= b;
            n >>= 1;
        }
        return p < 0 ? 1.0 / r : r;
    }
    return std::pow(base, p);
}

template <typename Scalar, typename Lift>
Scalar eval_node(const Node& n, const Lift& lift, const Scalar* vars) {
    using std::cos;
    using std::exp;
    using std::sin;
    switch (n.op) {
    case Op::Const: return lift(n.value);
    case Op::Var: return vars[n.index];
    case Op::Add: return eval_node<Scalar>(*n.lhs, lift, vars) + eval_node<Scalar>(*n.rhs, lift, vars);
    case Op::Sub: return eval_node<Scalar>(*n.lhs, lift, vars) - eval_node<Scalar>(*n.rhs, lift, vars);
    case Op::Mul: return eval_node<Scalar>(*n.lhs, lift, vars) * eval_node<Scalar>(*n.rhs, lift, vars);
    case Op::Div: return eval_node<Scalar>(*n.lhs, lift, vars) / eval_node<Scalar>(*n.rhs, lift, vars);
    case Op::Neg: return -eval_node<Scalar>(*n.lhs, lift, vars);
    case Op::Pow: {
        Scalar b = eval_node<Scalar>(*n.lhs, lift, vars);
        if constexpr (std::is_same_v<Scalar, double>) {
            return ipow(b, n.value);
        } else {
            // Integer powers by repeated products keep negative bases exact.
            if (n.value == std::floor(n.value) && n.value >= 1 && n.value <= 16) {
                Scalar r = b;
                for (int k = 1; k < static_cast<int>(n.value); ++k) r = r * b;
                return r;
            }
            return pow(b, n.value);
        }
    }
    case Op::Exp: return exp(eval_node<Scalar>(*n.lhs, lift, vars));
    case Op::Sin: return sin(eval_node<Scalar>(*n.lhs, lift, vars));
    case Op::Cos: return cos(eval_node<Scalar>(*n.lhs, lift, vars));
    }
    throw std::logic_error("unknown expression node");
}

}  // namespace detail

inline double evaluate(const Expr& e, const Eigen::Ref<const Eigen::VectorXd>& x) {
    auto lift = [](double c) { return c; };
    return detail::eval_node<double>(e.root(), lift, x.data());
}

// Value, gradient and Hessian in one pass.
inline Jet evaluate_jet(const Expr& e, const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Eigen::Index d = x.size();
    std::vector<Jet> vars;
    vars.reserve(d);
    for (Eigen::Index i = 0; i < d; ++i) vars.push_back(Jet::variable(x(i), d, i));
    auto lift = [d](double c) { return Jet(c, d); };
    return detail::eval_node<Jet>(e.root(), lift, vars.data());
}

}  // namespace conelab
