#pragma once

#include "conelab/quantum.hpp"
#include "conelab/wavepacket.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace conelab {

inline const char* code_version() { return CONELAB_VERSION; }

struct MetricRow {
    std::string case_id;
    double eps = 0.0;
    double t = 0.0;
    std::string metric;
    double value = 0.0;
};

struct RuleResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ResultRecord {
    std::string experiment;
    std::vector<MetricRow> metrics;
    std::vector<RuleResult> rules;
    nlohmann::json events = nlohmann::json::object();
    nlohmann::json config;
    std::string config_hash;
    nlohmann::json timings = nlohmann::json::object();

    bool passed() const;
};

struct ExperimentConfig {
    std::string experiment;
    std::vector<double> eps;
    GridSpec grid;
    double dt_factor = 0.05;  // dt = dt_factor * eps
    double T = 1.0;
    std::optional<ConicalPotential> potential;
    CrossingScheme scheme;
    double delta = 0.1;
    std::string output_dir;
    std::uint64_t seed = 0;
    nlohmann::json thresholds;  // defaults merged with overrides
    nlohmann::json params;      // experiment-specific knobs
    nlohmann::json raw;
};

const std::vector<std::string>& experiment_ids();
nlohmann::json default_thresholds(const std::string& experiment);

// Throws ConfigError with a readable message on any schema violation.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& s);
std::string config_hash(const nlohmann::json& j);

ResultRecord run_experiment(const ExperimentConfig& cfg);

ResultRecord run_rebound(const ExperimentConfig& cfg);
ResultRecord run_crossing(const ExperimentConfig& cfg);
ResultRecord run_smooth_transport(const ExperimentConfig& cfg);
ResultRecord run_static_cone(const ExperimentConfig& cfg);
ResultRecord run_classification_suite(const ExperimentConfig& cfg);
ResultRecord run_packet_convergence(const ExperimentConfig& cfg);

// Pass/fail from the metric table and thresholds only.
std::vector<RuleResult> evaluate_rules(const std::string& experiment, const std::vector<MetricRow>& metrics,
                                       const nlohmann::json& thresholds);

std::string metrics_csv(const std::vector<MetricRow>& rows);
std::vector<MetricRow> parse_metrics_csv(const std::string& text);

void write_record(const ResultRecord& rec, const std::string& dir);
ResultRecord read_record(const std::string& dir);

// Named initial profiles: all_right, even, 70_30, gaussian, random_split (uses seed).
Profile named_profile(const std::string& name, std::uint64_t seed = 0);
// Fraction of |a|^2 on y > 0.
double right_mass_fraction(const Profile& a);

}  // namespace conelab
