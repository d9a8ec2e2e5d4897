#include "conelab/classify.hpp"
#include "conelab/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace conelab;

namespace {

void print_rules(const std::vector<RuleResult>& rules) {
    for (const auto& r : rules)
        std::printf("%-4s %-40s value=%-14.6g threshold=%-12.6g %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.value, r.threshold, r.detail.c_str());
}

bool all_pass(const std::vector<RuleResult>& rules) {
    for (const auto& r : rules)
        if (!r.passed) return false;
    return true;
}

int cmd_run(const std::string& path, const std::string& out_override) {
    ExperimentConfig cfg = load_config(path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    std::cerr << "running " << cfg.experiment << " (config " << config_hash(cfg.raw) << ")\n";
    const ResultRecord rec = run_experiment(cfg);
    write_record(rec, cfg.output_dir);
    print_rules(rec.rules);
    std::cout << "wrote " << cfg.output_dir << "\n";
    return rec.passed() ? 0 : 1;
}

int cmd_classify(const std::string& path, bool sweep, int per_dim, double half_width) {
    const ConicalPotential P = load_potential(path);
    const Eigen::VectorXd sigma = project_to_singular_set(P, Eigen::VectorXd::Zero(P.d));
    if (!sweep) {
        std::cout << to_json(classify_point(P, sigma)).dump(2) << "\n";
        return 0;
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : singular_set_samples(P, sigma, per_dim, half_width)) {
        try {
            out.push_back(to_json(classify_point(P, s)));
        } catch (const std::runtime_error& e) {
            nlohmann::json err = {{"sigma", std::vector<double>(s.data(), s.data() + s.size())}, {"error", e.what()}};
            out.push_back(err);
        }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_report(const std::string& dir) {
    const ResultRecord stored = read_record(dir);
    const nlohmann::json th = stored.config.value("thresholds", nlohmann::json::object());
    const auto rules = evaluate_rules(stored.experiment, stored.metrics, th);
    std::cout << stored.experiment << " (config " << stored.config_hash << ", " << stored.metrics.size()
              << " metric rows)\n";
    print_rules(rules);
    bool consistent = rules.size() == stored.rules.size();
    for (std::size_t i = 0; consistent && i < rules.size(); ++i)
        consistent = rules[i].name == stored.rules[i].name && rules[i].passed == stored.rules[i].passed;
    if (!consistent) std::cout << "note: recomputed rules differ from the stored record\n";
    return all_pass(rules) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semiclassical dynamics on conical potentials"};
    app.set_version_flag("--version", std::string(code_version()));
    app.require_subcommand(1);

    std::string config, out_dir;
    auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    run->add_option("config", config, "Experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", out_dir, "Override the output directory");

    std::string potential;
    bool sweep = false;
    int per_dim = 5;
    double half_width = 1.0;
    auto* cls = app.add_subcommand("classify", "Classify points of the singular set");
    cls->add_option("potential", potential, "Potential JSON")->required()->check(CLI::ExistingFile);
    cls->add_flag("--sweep", sweep, "Classify a tangential grid of points instead of one");
    cls->add_option("--per-dim", per_dim, "Sweep points per tangent direction")->check(CLI::PositiveNumber);
    cls->add_option("--half-width", half_width, "Sweep half width")->check(CLI::PositiveNumber);

    std::string results;
    auto* rep = app.add_subcommand("report", "Recompute pass/fail from a results directory");
    rep->add_option("dir", results, "Results directory")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config, out_dir);
        if (*cls) return cmd_classify(potential, sweep, per_dim, half_width);
        if (*rep) return cmd_report(results);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
