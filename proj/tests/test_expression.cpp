#include "conelab/expression.hpp"

#include <doctest.h>

using namespace conelab;

TEST_SUITE("expression") {

TEST_CASE("arithmetic and precedence") {
    Eigen::VectorXd x(2);
    x << 2.0, -3.0;
    CHECK(evaluate(parse_expression("1 + 2*x1^2 - x2/4", 2), x) == doctest::Approx(9.75));
    CHECK(evaluate(parse_expression("-x1^2", 2), x) == doctest::Approx(-4.0));
    CHECK(evaluate(parse_expression("2^3^2", 2), x) == doctest::Approx(512.0));
    CHECK(evaluate(parse_expression("(x1 + x2)*(x1 - x2)", 2), x) == doctest::Approx(-5.0));
    CHECK(evaluate(parse_expression("sin(pi/2) + cos(0) + exp(0)", 2), x) == doctest::Approx(3.0));
    CHECK(evaluate(parse_expression("x1^(1/2)", 2), x) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("single coordinate may be written x") {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.5);
    CHECK(evaluate(parse_expression("x^2 + x1", 1), x) == doctest::Approx(0.75));
}

TEST_CASE("rejects malformed and non-smooth input") {
    CHECK_THROWS_AS(parse_expression("abs(x)", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("sqrt(x)", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("max(x, 1)", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("x3", 2), ParseError);
    CHECK_THROWS_AS(parse_expression("x^x", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("(x + 1", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("x + ", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("", 1), ParseError);
    CHECK_THROWS_AS(parse_expression("2 x", 1), ParseError);
}

TEST_CASE("affinity detection") {
    CHECK(is_affine(parse_expression("2*x1 - x2/3 + 1", 2)));
    CHECK(is_affine(parse_expression("-(x1 + 4)", 2)));
    CHECK_FALSE(is_affine(parse_expression("x1*x2", 2)));
    CHECK_FALSE(is_affine(parse_expression("x1^2", 2)));
    CHECK_FALSE(is_affine(parse_expression("sin(x1)", 2)));
}

TEST_CASE("jet derivatives agree with finite differences") {
    const char* exprs[] = {"sin(x1)*exp(x2) + x3^3/7", "x1/(2 + cos(x2*x3))", "(x1 - x2)^4 - 3*x1*x3",
                           "exp(-x1^2 - x2^2/2) * x3"};
    Eigen::VectorXd x(3);
    x << 0.3, -0.8, 1.1;
    const double h = 1e-5;
    for (const char* s : exprs) {
        const Expr e = parse_expression(s, 3);
        const Jet J = evaluate_jet(e, x);
        CHECK(J.v == doctest::Approx(evaluate(e, x)).epsilon(1e-14));
        for (int i = 0; i < 3; ++i) {
            Eigen::VectorXd d = Eigen::VectorXd::Zero(3);
            d(i) = h;
            const double fd = (evaluate(e, x + d) - evaluate(e, x - d)) / (2 * h);
            CHECK(std::abs(fd - J.g(i)) <= 1e-6 * std::max(1.0, std::abs(J.g(i))));
            const Eigen::VectorXd fdh = (evaluate_jet(e, x + d).g - evaluate_jet(e, x - d).g) / (2 * h);
            CHECK((fdh - J.h.col(i)).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, J.h.norm()));
        }
        CHECK((J.h - J.h.transpose()).norm() <= 1e-12);
    }
}

}
