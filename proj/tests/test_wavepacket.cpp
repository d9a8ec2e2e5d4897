#include "conelab/wavepacket.hpp"
#include "properties.hpp"

#include <doctest.h>

using namespace conelab;
using props::v1;

namespace {

double y_variance(const PacketProfile& p) {
    const double dy = p.y(1) - p.y(0);
    double m = 0.0, s = 0.0;
    for (Eigen::Index j = 0; j < p.y.size(); ++j) {
        m += std::norm(p.v(j));
        s += std::norm(p.v(j)) * p.y(j) * p.y(j);
    }
    return s * dy / (m * dy);
}

// (1/eps) int_0^t R_s(y) ds by composite Simpson on a fine grid.
double phase_quadrature(double t, double y, double eta, double eps) {
    const auto P = make_potential(1, "0", "-1", {"x"});
    const double se = std::sqrt(eps);
    auto R = [&](double s) {
        const PhasePoint st = crossing_state(eta, s);
        const double x = st.x(0);
        // V'(x) on the side the trajectory occupies; at the apex it is the side being entered.
        const double side = x != 0.0 ? x : eta * (s != 0.0 ? s : t);
        const double slope = side > 0 ? -1.0 : 1.0;
        return eval_V(P, v1(x + se * y)) - eval_V(P, v1(x)) - se * slope * y;
    };
    const int n = 200000;
    const double h = t / n;
    double acc = R(0.0) + R(t);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * R(i * h);
    return acc * h / 3.0 / eps;
}

}  // namespace

TEST_SUITE("wavepacket") {

TEST_CASE("action along the harmonic orbit") {
    const auto P = make_potential(1, "x^2/2", "0", {"x"});
    const auto tr = integrate_exterior(P, PhasePoint{v1(1.0), v1(0.0), 0.0}, 1.5);
    const auto S = action(tr, P);
    for (double t : {0.1, 0.7, 1.2345, 1.5}) CHECK(std::abs(S.at(t) + std::sin(2 * t) / 4) <= 1e-9);
}

TEST_CASE("Gaussian width law in the harmonic profile equation") {
    const auto P = make_potential(1, "x^2/2", "0", {"x"});
    const auto tr = integrate_exterior(P, PhasePoint{v1(1.0), v1(0.0), 0.0}, 1.0);
    const double w = 2.0;
    const auto v0 = sample_profile(gaussian_profile(w));
    const std::vector<double> ts = {0.25, 0.5, 1.0};
    const auto trace = propagate_profile(v0, tr, P, 1e-3, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double c = std::cos(ts[i]), s = std::sin(ts[i]);
        const double exact = 0.5 * w * w * c * c + 0.5 / (w * w) * s * s;
        CHECK(std::abs(y_variance(trace[i]) - exact) <= 1e-6);
        CHECK(trace[i].norm() == doctest::Approx(v0.norm()).epsilon(1e-10));
    }
}

TEST_CASE("assembled packet matches the quantum solution for a quadratic potential") {
    const double eps = 1.0 / 64;
    const GridSpec g = props::small_grid(2048);
    const auto P = make_potential(1, "x^2/2", "0", {"x"});
    const auto a = gaussian_profile(1.5);
    const auto psi = init_concentrated_state(g, eps, a, v1(1.0), v1(0.0));
    const auto q = propagate(psi, P, 1.0, eps / 20, {1.0});
    const auto tr = integrate_exterior(P, PhasePoint{v1(1.0), v1(0.0), 0.0}, 1.0);
    const auto v = propagate_profile(sample_profile(a), tr, P, eps / 20, {1.0});
    const PhasePoint st = state_at(P, tr, 1.0);
    const auto phi = assemble_packet(v[0], st.x, st.xi, action(tr, P).at(1.0), eps, g);
    CHECK((phi.values - q[0].values).norm() * std::sqrt(g.dx()) <= 1e-5);
    CHECK(error_functional(v, tr, P, eps) == doctest::Approx(0.0));
}

TEST_CASE("remainder is positive for an anharmonic term") {
    const auto P = make_potential(1, "x^2/2 + x^4/10", "0", {"x"});
    const auto v = sample_profile(gaussian_profile(1.0));
    CHECK(remainder_norm(v, v1(1.0), P, 1.0 / 64) > 0.0);
}

TEST_CASE("free evolution is unitary and composes") {
    const auto v = sample_profile(bump_profile(-1.0, 2.0));
    const auto a = free_profile(free_profile(v, 0.3), 0.4);
    const auto b = free_profile(v, 0.7);
    CHECK(a.norm() == doctest::Approx(v.norm()).epsilon(1e-12));
    CHECK((a.v - b.v).norm() <= 1e-12 * v.v.norm());
    CHECK(b.t == doctest::Approx(0.7));
}

TEST_CASE("crossing trajectory and action") {
    const double eta = -0.5;
    for (double t : {-0.7, -0.2, 0.0, 0.3, 0.9}) {
        const auto s = crossing_state(eta, t);
        const double sg = t >= 0 ? -1.0 : 1.0;
        CHECK(s.x(0) == doctest::Approx(eta * t + sg * t * t / 2));
        // dS/dt = xi^2/2 - V(x) with V = -|x|.
        const double h = 1e-6;
        const double dS = (crossing_action(eta, t + h) - crossing_action(eta, t - h)) / (2 * h);
        CHECK(dS == doctest::Approx(0.5 * s.xi(0) * s.xi(0) + std::abs(s.x(0))).epsilon(1e-6));
    }
}

TEST_CASE("crossing phase matches quadrature") {
    const double eps = 1.0 / 256, eta = -0.5;
    for (double t : {-0.3, -0.05, 0.02, 0.1, 0.4})
        for (double y : {-1.5, -0.4, 0.3, 1.2}) {
            CAPTURE(t);
            CAPTURE(y);
            const double exact = phase_quadrature(t, y, eta, eps);
            CHECK(std::abs(crossing_phase(t, y, eta, eps) - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
        }
    // Saturated value for a particle that has crossed: -y^2/|eta|.
    CHECK(crossing_phase(0.5, 1.0, eta, 1e-8) == doctest::Approx(-1.0 / 0.5).epsilon(1e-3));
}

TEST_CASE("scheme exponents") {
    CHECK(feasible_k(0.3, 0.0) == 2);
    CHECK(feasible_k(0.3, 0.05) == 5);
    CHECK_THROWS_AS(feasible_k(0.5, 0.05), SchemeInfeasible);
    CrossingScheme s;
    s.alpha = 0.3;
    s.beta = 0.05;
    s.k = 5;
    CHECK_NOTHROW(s.validate());
    s.k = 2;
    CHECK_THROWS_AS(s.validate(), SchemeInfeasible);
    s.k = 5;
    s.alpha = 0.25;
    CHECK_THROWS_AS(s.validate(), SchemeInfeasible);
    s.alpha = 0.3;
    s.eta = 0.5;
    CHECK_THROWS_AS(s.validate(), SchemeInfeasible);
    CHECK(CrossingScheme{-1.0, 0.05, 0.3, 5}.eta_eps(1.0 / 256) == doctest::Approx(-std::pow(256.0, -0.05)));
}

TEST_CASE("crossing profiles are continuous at the switching time") {
    CrossingScheme s;
    const double eps = 1.0 / 256;
    const double tau = s.tau(eps);
    const auto tr = crossing_profile(gaussian_profile(1.0), s, eps, {tau, tau + 1e-9, -tau, -tau - 1e-9});
    CHECK((tr[0].v - tr[1].v).norm() <= 1e-6 * tr[0].v.norm());
    CHECK((tr[2].v - tr[3].v).norm() <= 1e-6 * tr[2].v.norm());
}

TEST_CASE("assembly guards the boundary") {
    const GridSpec g = props::small_grid(512, 2.0);
    const auto v = sample_profile(gaussian_profile(1.0));
    CHECK_THROWS_AS(assemble_packet(v, v1(1.95), v1(0.0), 0.0, 1.0 / 16, g), ProfileClipped);
}

}
