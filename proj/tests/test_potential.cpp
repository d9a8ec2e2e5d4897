#include "conelab/potential.hpp"
#include "properties.hpp"

#include <doctest.h>

using namespace conelab;

TEST_SUITE("potential") {

TEST_CASE("value of V_S + |g| F") {
    const auto P = make_potential(2, "x1^2", "3", {"x1 - 1", "x2"});
    const Eigen::Vector2d x(4.0, 4.0);
    CHECK(eval_V(P, x) == doctest::Approx(16.0 + 3.0 * 5.0));
    CHECK(constraint_norm(P, x) == doctest::Approx(5.0));
    CHECK(P.p() == 2);
    CHECK(P.g_affine());
}

TEST_CASE("gradient finite-difference property") { CHECK(props::gradient_fd_error() <= 1e-6); }

TEST_CASE("gradient and Hessian refuse the singular set") {
    const auto P = make_potential(1, "0", "1", {"x"});
    CHECK_THROWS_AS(grad_V(P, props::v1(0.0)), SingularEvaluation);
    CHECK_THROWS_AS(grad_V(P, props::v1(5e-11)), SingularEvaluation);
    CHECK_THROWS_AS(hess_V(P, props::v1(0.0)), HessianUndefined);
    CHECK(grad_V(P, props::v1(1e-8))(0) == doctest::Approx(1.0));
}

TEST_CASE("one-sided forces for V = -|x|") {
    const auto P = make_potential(1, "0", "-1", {"x"});
    CHECK(grad_V_one_sided(P, props::v1(0.0), props::v1(1.0))(0) == doctest::Approx(-1.0));
    CHECK(grad_V_one_sided(P, props::v1(0.0), props::v1(-1.0))(0) == doctest::Approx(1.0));
}

TEST_CASE("dimension checks") {
    CHECK_THROWS_AS(make_potential(1, "0", "1", {"x", "x"}), DimensionMismatch);
    CHECK_THROWS_AS(make_potential(2, "x3", "1", {"x1"}), ParseError);
    const auto P = make_potential(2, "0", "1", {"x1"});
    CHECK_THROWS_AS(eval_V(P, props::v1(0.0)), DimensionMismatch);
}

TEST_CASE("json round trip") {
    const nlohmann::json j = {{"d", 2}, {"V_S", "x1*x2"}, {"F", "-1"}, {"g", {"x1", "x2 - x1^2"}}, {"name", "test"}};
    const auto P = potential_from_json(j);
    const auto Q = potential_from_json(potential_to_json(P));
    const Eigen::Vector2d x(0.3, -0.6);
    CHECK(eval_V(P, x) == eval_V(Q, x));
    CHECK(Q.name == "test");
    CHECK_FALSE(P.g_affine());
    const auto S = potential_from_json({{"d", 1}, {"V_S", "0"}, {"F", "1"}, {"g", "x"}});
    CHECK(S.p() == 1);
    CHECK_THROWS(potential_from_json({{"d", 1}, {"F", "1"}, {"g", "x"}}));
}

TEST_CASE("projection and geometry") {
    const auto P = make_potential(2, "x1 + x2", "2", {"x1 - x2^2"});
    const Eigen::VectorXd s = project_to_singular_set(P, Eigen::Vector2d(0.7, 0.4));
    CHECK(constraint_norm(P, s) <= 1e-12);
    const auto G = singular_geometry(P, s);
    CHECK(G.p() == 1);
    CHECK((G.tangent_projector * G.jacobian.transpose()).norm() <= 1e-12);
    CHECK((G.tangent_projector * G.tangent_projector - G.tangent_projector).norm() <= 1e-12);
    CHECK(G.op_norm == doctest::Approx(2.0 * G.jacobian.norm()));
    CHECK_THROWS_AS(singular_geometry(P, Eigen::Vector2d(1.0, 0.0)), NotOnSingularSet);
    const auto R = make_potential(2, "0", "1", {"x1^2 + x2^2"});
    CHECK_THROWS_AS(singular_geometry(R, Eigen::Vector2d::Zero()), RankDeficient);
}

}
