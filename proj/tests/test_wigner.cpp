#include "conelab/harness.hpp"
#include "conelab/wigner.hpp"
#include "properties.hpp"

#include <doctest.h>

#include <numbers>

using namespace conelab;
using props::v1;

TEST_SUITE("wigner") {

TEST_CASE("coherent state matches the Gaussian closed form") {
    const double eps = 1.0 / 64;
    const GridSpec g = props::small_grid();
    const double x0 = 0.3, xi0 = -0.9;
    const auto psi = init_concentrated_state(g, eps, gaussian_profile(1.0), v1(x0), v1(xi0));
    const auto W = wigner_transform(psi, 4);
    double err = 0.0;
    for (Eigen::Index r = 0; r < W.W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.W.cols(); ++c) {
            const double dx = W.x(r) - x0, dk = W.xi(c) - xi0;
            const double exact = std::exp(-(dx * dx + dk * dk) / eps) / (std::numbers::pi * eps);
            err = std::max(err, std::abs(W.W(r, c) - exact));
        }
    CHECK(err * std::numbers::pi * eps <= 1e-6);
}

TEST_CASE("marginal property") { CHECK(props::wigner_marginal_error() <= 1e-6); }

TEST_CASE("even states have point-symmetric Wigner functions") {
    const double eps = 1.0 / 64;
    const GridSpec g = props::small_grid(512);
    const auto psi = init_concentrated_state(g, eps, named_profile("even"), v1(0.0), v1(0.0));
    const auto W = wigner_transform(psi, 1);
    const int N = g.n;
    double err = 0.0;
    for (int r = 1; r < N; ++r)
        for (int c = 1; c < N; ++c) err = std::max(err, std::abs(W.W(r, c) - W.W(N - r, N - c)));
    CHECK(err <= 1e-9 * W.W.cwiseAbs().maxCoeff());
}

TEST_CASE("pairing reproduces normalization and first moments") {
    const double eps = 1.0 / 64;
    const GridSpec g = props::small_grid();
    const auto psi = init_concentrated_state(g, eps, named_profile("70_30"), v1(0.2), v1(0.5));
    const auto o = observables(psi);
    CHECK(pair_observable(psi, [](double, double) { return 1.0; }, 1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(pair_observable(psi, [](double x, double) { return x; }, 1) - o.position_mean(0)) <= 1e-6);
    CHECK(std::abs(pair_observable(psi, [](double, double k) { return k; }, 1) - o.momentum_mean(0)) <= 1e-6);
}

TEST_CASE("right half-plane pairing recovers the rebound weight") {
    const double eps = 1.0 / 64;
    const GridSpec g = props::small_grid(4096, 6.0);
    const auto P = make_potential(1, "0", "-1", {"x"});
    const auto psi = init_concentrated_state(g, eps, named_profile("70_30"), v1(0.0), v1(0.0));
    const auto s = propagate(psi, P, 1.0, eps / 20, {1.0});
    const double p = pair_observable(s.back(), [](double x, double) { return 0.5 * (1.0 + std::tanh(x / 0.02)); });
    CHECK(std::abs(p - 0.7) <= 0.02);
}

TEST_CASE("Liouville pairing property") { CHECK(props::liouville_pairing_defect() <= 0.05); }

TEST_CASE("Husimi density is normalized and peaks at the packet centre") {
    const double eps = 1.0 / 64;
    const GridSpec g = props::small_grid();
    const auto psi = init_concentrated_state(g, eps, gaussian_profile(1.0), v1(-0.5), v1(1.25));
    const auto Q = husimi_transform(psi, 1);
    CHECK(Q.total() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(Q.W.minCoeff() >= 0.0);
    const auto pk = locate_peak(Q, 0.0);
    CHECK(std::abs(pk.x + 0.5) <= g.dx());
    CHECK(std::abs(pk.xi - 1.25) <= Q.dxi());
}

TEST_CASE("two separated packets raise the multi-peak flag") {
    const double eps = 1.0 / 256;
    const GridSpec g = props::small_grid(2048);
    auto a = init_concentrated_state(g, eps, gaussian_profile(1.0), v1(-1.0), v1(-1.0));
    const auto b = init_concentrated_state(g, eps, gaussian_profile(1.0), v1(1.0), v1(1.0));
    a.values = (a.values + b.values) / std::sqrt(2.0);
    const auto tr = peak_track({a});
    REQUIRE(tr.size() == 1);
    CHECK(tr[0].multi_peak);
    REQUIRE(tr[0].second_peak);
    CHECK(std::abs(std::abs(tr[0].x) - 1.0) <= 5 * std::sqrt(eps));
    CHECK(std::abs(std::abs(tr[0].second_peak->first) - 1.0) <= 5 * std::sqrt(eps));
    PeakOptions right;
    right.half_plane = 1;
    const auto pr = locate_peak(husimi_transform(a, 16, 6.0), 0.0, right);
    CHECK(pr.x == doctest::Approx(1.0).epsilon(0.05));
    CHECK(pr.xi == doctest::Approx(1.0).epsilon(0.05));
    CHECK(pr.window_mass == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("cut function profile") {
    CHECK(cut_function(0.0) == 1.0);
    CHECK(cut_function(0.5) == 1.0);
    CHECK(cut_function(-0.75) == doctest::Approx(0.5));
    CHECK(cut_function(1.0) == 0.0);
    double prev = 1.0;
    for (double r = 0.5; r <= 1.0; r += 0.01) {
        CHECK(cut_function(r) <= prev + 1e-15);
        prev = cut_function(r);
    }
}

TEST_CASE("zone masses form a partition") {
    const double eps = 1.0 / 64;
    const GridSpec g = props::small_grid();
    const auto psi = init_concentrated_state(g, eps, gaussian_profile(1.0), v1(0.0), v1(0.0));
    const auto z = zone_masses(psi, std::pow(eps, -0.25), 0.5);
    CHECK(z.inner + z.middle + z.outer == doctest::Approx(1.0).epsilon(1e-9));
    const auto far = init_concentrated_state(g, eps, gaussian_profile(1.0), v1(2.0), v1(0.0));
    const auto zf = zone_masses(far, 2.0, 0.3);
    CHECK(zf.inner <= 1e-9);
    CHECK(zf.middle <= 1e-9);
    CHECK(zf.outer == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(zone_masses(psi, 100.0, 0.5), ScaleOrderViolation);
}

TEST_CASE("inner zone captures the packet as eps decreases") {
    double prev = 0.0;
    for (double eps : {1.0 / 64, 1.0 / 256}) {
        const auto psi =
            init_concentrated_state(props::small_grid(4096), eps, gaussian_profile(1.0), v1(0.0), v1(0.0));
        const double inner = zone_masses(psi, std::pow(eps, -0.6), 0.5).inner;  // eps R = eps^0.4 >> sqrt(eps)
        CHECK(inner > prev);
        prev = inner;
    }
}

TEST_CASE("empirical sphere measure") {
    const double eps = 1.0 / 256;
    const GridSpec g = props::small_grid(4096);
    const double w = std::pow(eps, 0.4);
    const auto psi = init_concentrated_state(g, eps, named_profile("70_30"), v1(0.0), v1(0.0));
    const auto nu = empirical_nu(psi, w);
    CHECK(std::abs(nu.plus - 0.7) <= 0.05);
    CHECK(std::abs(nu.minus - 0.3) <= 0.05);
    const auto far = init_concentrated_state(g, eps, gaussian_profile(1.0), v1(3 * w), v1(0.0));
    const auto nf = empirical_nu(far, w);
    CHECK(nf.minus <= 1e-12);  // Gaussian tail exp(-(3w)^2 / eps)
}

TEST_CASE("csv export") {
    const auto psi = init_concentrated_state(props::small_grid(64), 1.0 / 16, gaussian_profile(1.0), v1(0.0), v1(0.0));
    CHECK(wigner_csv(wigner_transform(psi, 8)).rfind("x,xi,W\n", 0) == 0);
}

}
