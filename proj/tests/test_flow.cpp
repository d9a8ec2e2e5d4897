#include "conelab/flow.hpp"
#include "properties.hpp"

#include <doctest.h>

using namespace conelab;
using props::v1;

TEST_SUITE("flow") {

TEST_CASE("harmonic oscillator forward and backward") {
    const auto P = make_potential(1, "x^2/2", "0", {"x"});
    const auto fwd = integrate_exterior(P, PhasePoint{v1(1.0), v1(0.0), 0.0}, 2.0);
    CHECK(fwd.samples.back().x(0) == doctest::Approx(std::cos(2.0)).epsilon(1e-10));
    CHECK(fwd.samples.back().xi(0) == doctest::Approx(-std::sin(2.0)).epsilon(1e-10));
    const auto bwd = integrate_exterior(P, PhasePoint{v1(1.0), v1(0.0), 0.0}, -1.0);
    CHECK(bwd.t_begin() == doctest::Approx(-1.0));
    CHECK(bwd.t_end() == doctest::Approx(0.0));
    CHECK(bwd.samples.front().x(0) == doctest::Approx(std::cos(1.0)).epsilon(1e-10));
    for (std::size_t i = 1; i < bwd.samples.size(); ++i) CHECK(bwd.samples[i].t > bwd.samples[i - 1].t);
}

TEST_CASE("transversal crossing of V = |x| follows the kinked parabolas") {
    const auto P = make_potential(1, "0", "1", {"x"});
    const auto tr = integrate_exterior(P, PhasePoint{v1(-1.0), v1(1.0), 0.0}, 2.0);
    REQUIRE(tr.crossings.size() == 1);
    const double tc = std::sqrt(3.0) - 1.0;
    CHECK(tr.crossings[0] == doctest::Approx(tc).epsilon(1e-10));
    CHECK(tr.events.empty());
    const double u = 2.0 - tc;
    CHECK(std::abs(tr.samples.back().x(0) - (std::sqrt(3.0) * u - 0.5 * u * u)) <= 1e-8);
    CHECK(std::abs(tr.samples.back().xi(0) - (std::sqrt(3.0) - u)) <= 1e-8);
    // Interpolated state on the first parabola.
    const PhasePoint s = state_at(P, tr, 0.5);
    CHECK(s.x(0) == doctest::Approx(-1.0 + 0.5 + 0.125).epsilon(1e-8));
    CHECK_THROWS_AS(state_at(P, tr, 2.5), std::out_of_range);
}

TEST_CASE("arrival at the apex of V = -|x| with branch limit 1") {
    const auto P = make_potential(1, "0", "-1", {"x"});
    const auto tr = integrate_exterior(P, PhasePoint{v1(0.5), v1(-1.0), 0.0}, 2.0);
    REQUIRE(tr.events.size() == 1);
    const auto& ev = tr.events[0];
    CHECK(std::abs(ev.t0 - 1.0) <= 1e-6);
    CHECK(std::abs(ev.sigma(0)) <= 1e-9);
    CHECK(ev.side == EventSide::Incoming);
    REQUIRE(ev.rho_limit);
    CHECK(std::abs((*ev.rho_limit)(0) - 1.0) <= 0.02);
    CHECK(tr.t_end() == doctest::Approx(ev.t0));
}

TEST_CASE("rho diagnostic on the closed-form parabola") {
    const auto P = make_potential(1, "0", "-1", {"x"});
    const auto tr = integrate_exterior(P, PhasePoint{v1(0.5), v1(-1.0), 0.0}, 2.0);
    const double t0 = tr.events[0].t0;
    const auto D = rho_diagnostic(P, tr, t0, -0.2, -0.02);
    REQUIRE(D.limit);
    CHECK(std::abs((*D.limit)(0) - 1.0) <= 1e-3);
    CHECK_FALSE(D.asymptotic);
    CHECK_THROWS_AS(rho_diagnostic(P, tr, t0, -0.1, 0.1), WindowContainsEvent);
}

TEST_CASE("branch launch recovers the root and rejects non-roots") {
    const auto P = make_potential(1, "2*x", "1", {"x"});
    BranchLaunchOptions o;
    o.backward = true;
    o.t_end = 0.5;
    const auto tr = launch_branch(P, v1(0.0), v1(-1.0), o);
    REQUIRE(!tr.events.empty());
    REQUIRE(tr.events.front().rho_limit);
    CHECK(std::abs((*tr.events.front().rho_limit)(0) + 1.0) <= 0.02);
    CHECK_THROWS_AS(launch_branch(P, v1(0.0), v1(-3.0), o), NotABranchRoot);
}

TEST_CASE("shooting sweep hits the isolated 3-D root") {
    const auto P = props::worked_examples()[5];
    const auto hits = shooting_sweep(P, Eigen::VectorXd::Zero(3), 64);
    bool found = false;
    for (const auto& h : hits)
        if (h.rho_limit && ((*h.rho_limit) - Eigen::Vector3d(2.5, 0, 0)).norm() <= 0.05) found = true;
    CHECK(found);
}

TEST_CASE("insider flow stays on the singular set") {
    const auto P = make_potential(2, "x1^2/2", "1", {"x2"});
    Eigen::Vector2d x(1.0, 0.0), xi(0.5, 0.0);
    const auto tr = integrate_insider(P, PhasePoint{x, xi, 0.0}, 1.0);
    CHECK(tr.samples.back().x(0) == doctest::Approx(std::cos(1.0) + 0.5 * std::sin(1.0)).epsilon(1e-9));
    CHECK(std::abs(tr.samples.back().x(1)) <= 1e-12);
    CHECK_THROWS_AS(integrate_insider(P, PhasePoint{x, Eigen::Vector2d(0.0, 1.0), 0.0}, 1.0), LeftManifold);
    CHECK_THROWS_AS(integrate_insider(P, PhasePoint{Eigen::Vector2d(1.0, 0.1), xi, 0.0}, 1.0), LeftManifold);
}

TEST_CASE("exports") {
    const auto P = make_potential(1, "0", "-1", {"x"});
    const auto tr = integrate_exterior(P, PhasePoint{v1(0.5), v1(-1.0), 0.0}, 2.0);
    const std::string csv = trajectory_csv(tr);
    CHECK(csv.rfind("t,x1,xi1,segment_tag\n", 0) == 0);
    const auto j = events_json(tr);
    CHECK(j.dump().find("t0") != std::string::npos);
}

}
