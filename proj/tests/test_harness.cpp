#include "conelab/harness.hpp"

#include <doctest.h>

#include <filesystem>

using namespace conelab;
using nlohmann::json;

namespace {

json tiny_static() {
    return {{"experiment", "static_cone"},
            {"eps", {1.0 / 32, 1.0 / 64}},
            {"grid", {{"d", 1}, {"half_width", 4}, {"n", 1024}}},
            {"T", 0.25},
            {"output_dir", "unused"}};
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("FNV-1a reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(config_hash(json{{"a", 1}}) == config_hash(json::parse(R"({"a":1})")));
    CHECK(config_hash(json{{"a", 1}}) != config_hash(json{{"a", 2}}));
}

TEST_CASE("config validation") {
    CHECK_NOTHROW(parse_config(tiny_static()));
    auto bad = [](json j) { CHECK_THROWS_AS(parse_config(j), ConfigError); };
    json j = tiny_static();
    j["colour"] = "blue";
    bad(j);
    j = tiny_static();
    j["experiment"] = "teleport";
    bad(j);
    j = tiny_static();
    j["eps"] = {0.0};
    bad(j);
    j = tiny_static();
    j["eps"] = json::array();
    bad(j);
    j = tiny_static();
    j["grid"]["n"] = 1000;
    bad(j);
    j = tiny_static();
    j["potential"] = {{"d", 2}, {"V_S", "0"}, {"F", "1"}, {"g", "x1"}};
    bad(j);
    j = tiny_static();
    j["thresholds"] = {{"no_such_rule", 1}};
    bad(j);
    j = tiny_static();
    j["dt_factor"] = -1;
    bad(j);
    j = tiny_static();
    j["potential_file"] = "/nonexistent/potential.json";
    bad(j);
    json c = {{"experiment", "crossing"}, {"scheme", {{"alpha", 0.2}}}};
    bad(c);
    c = {{"experiment", "crossing"}, {"scheme", {{"beta", 0.2}}}};
    bad(c);
}

TEST_CASE("defaults and threshold overrides") {
    const auto cfg = parse_config({{"experiment", "rebound"}, {"thresholds", {{"weight_tol", 0.1}}}});
    CHECK(cfg.eps.size() == 3);
    CHECK(cfg.grid.n == 8192);
    CHECK(cfg.dt_factor == 0.05);
    CHECK(cfg.thresholds["weight_tol"] == 0.1);
    CHECK(cfg.thresholds["track_factor"] == 5.0);
    REQUIRE(cfg.potential);
    CHECK(eval_V(*cfg.potential, Eigen::VectorXd::Constant(1, 2.0)) == -2.0);
}

TEST_CASE("metric tables round-trip exactly") {
    std::vector<MetricRow> rows = {{"a", 1.0 / 3, -0.125, "m", 0.1 + 0.2}, {"b", 1e-300, 1e300, "n", -5e-324}};
    const auto back = parse_metrics_csv(metrics_csv(rows));
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].case_id == rows[i].case_id);
        CHECK(back[i].eps == rows[i].eps);
        CHECK(back[i].t == rows[i].t);
        CHECK(back[i].metric == rows[i].metric);
        CHECK(back[i].value == rows[i].value);
    }
    CHECK_THROWS_AS(parse_metrics_csv("case,eps,t,metric,value\nx,1,2\n"), ConfigError);
}

TEST_CASE("identical configs give bit-identical metrics and recomputable rules") {
    const auto cfg = parse_config(tiny_static());
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    CHECK(metrics_csv(a.metrics) == metrics_csv(b.metrics));
    CHECK(a.config_hash == b.config_hash);

    const auto dir = std::filesystem::temp_directory_path() / "conelab_harness_test";
    std::filesystem::remove_all(dir);
    write_record(a, dir.string());
    const auto r = read_record(dir.string());
    CHECK(metrics_csv(r.metrics) == metrics_csv(a.metrics));
    const auto again = evaluate_rules(r.experiment, r.metrics, r.config["thresholds"]);
    REQUIRE(again.size() == a.rules.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].name == a.rules[i].name);
        CHECK(again[i].passed == a.rules[i].passed);
        CHECK(again[i].value == a.rules[i].value);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("rules react to the metric table") {
    std::vector<MetricRow> rows = {
        {"even", 0.01, 0.0, "pos_mean", 0.0},  {"even", 0.01, 0.0, "mom_mean", 0.0},
        {"even", 0.01, 0.0, "parity_residual", 0.0}, {"even", 0.01, 0.0, "nu_plus", 0.5},
        {"even", 0.01, 0.0, "nu_minus", 0.5},  {"even", 0.01, 1.0, "window_mass", 0.9},
        {"even", 0.001, 1.0, "window_mass", 0.95},
    };
    auto rules = evaluate_rules("static_cone", rows, json::object());
    REQUIRE(rules.size() == 3);
    for (const auto& r : rules) CHECK(r.passed);
    rows.back().value = 0.85;
    rows[3].value = 0.6;
    rules = evaluate_rules("static_cone", rows, json::object());
    CHECK_FALSE(rules[1].passed);
    CHECK_FALSE(rules[2].passed);
}

TEST_CASE("slope rule fits a log-log line") {
    std::vector<MetricRow> rows;
    for (double e : {1.0 / 64, 1.0 / 128, 1.0 / 256}) rows.push_back({"quartic", e, 1.0, "max_error", 3 * std::pow(e, 0.5)});
    auto r = evaluate_rules("packet_convergence", rows, json::object());
    REQUIRE(r.size() == 1);
    CHECK(r[0].value == doctest::Approx(0.5));
    CHECK(r[0].passed);
    for (auto& row : rows) row.value = std::pow(row.eps, 0.9);
    CHECK_FALSE(evaluate_rules("packet_convergence", rows, json::object())[0].passed);
}

TEST_CASE("named profiles carry the intended weights") {
    CHECK(right_mass_fraction(named_profile("all_right")) == doctest::Approx(1.0));
    CHECK(right_mass_fraction(named_profile("even")) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(right_mass_fraction(named_profile("70_30")) == doctest::Approx(0.7).epsilon(1e-6));
    const double w1 = right_mass_fraction(named_profile("random_split", 1));
    CHECK(w1 == doctest::Approx(right_mass_fraction(named_profile("random_split", 1))));
    CHECK(w1 >= 0.2);
    CHECK(w1 <= 0.8);
    CHECK_THROWS_AS(named_profile("zigzag"), ConfigError);
}

}
