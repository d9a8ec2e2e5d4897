// Runs every shipped experiment config plus the property measurements and
// prints one PASS/FAIL line per acceptance criterion.

#include "conelab/harness.hpp"
#include "properties.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

using namespace conelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream why;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            why << "[" << what << "] ";
        }
    }
};

int failures = 0;

void report(const std::string& id, const std::string& title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.ok = false;
        o.why << "exception: " << e.what();
    }
    if (!o.ok) ++failures;
    std::printf("%s %s %s%s%s\n", o.ok ? "PASS" : "FAIL", id.c_str(), title.c_str(), o.ok ? "" : " :: ",
                o.why.str().c_str());
    std::fflush(stdout);
}

ResultRecord run_config(const std::string& name) {
    ExperimentConfig cfg = load_config((fs::path(CONELAB_SOURCE_DIR) / "configs" / (name + ".json")).string());
    cfg.output_dir = (fs::path("acceptance_results") / name).string();
    ResultRecord rec = run_experiment(cfg);
    write_record(rec, cfg.output_dir);
    for (const auto& r : rec.rules)
        std::printf("  %-4s %-36s value=%-12.5g threshold=%-10.5g %s\n", r.passed ? "ok" : "bad", r.name.c_str(),
                    r.value, r.threshold, r.detail.c_str());
    return rec;
}

// Every rule whose name starts with prefix must pass; at least one must exist.
void require_rules(Outcome& o, const ResultRecord& rec, const std::string& prefix) {
    int n = 0;
    for (const auto& r : rec.rules)
        if (r.name.rfind(prefix, 0) == 0) {
            ++n;
            o.require(r.passed, r.name);
        }
    o.require(n > 0, "no rules named " + prefix);
}

// Rules recomputed from the stored table must reproduce the stored verdicts.
void require_recomputable(Outcome& o, const std::string& name) {
    const ResultRecord stored = read_record((fs::path("acceptance_results") / name).string());
    const auto again = evaluate_rules(stored.experiment, stored.metrics, stored.config["thresholds"]);
    bool same = again.size() == stored.rules.size();
    for (std::size_t i = 0; same && i < again.size(); ++i)
        same = again[i].name == stored.rules[i].name && again[i].passed == stored.rules[i].passed;
    o.require(same, "rules not recomputable from metrics.csv");
}

void require_time(Outcome& o, const nlohmann::json& timings, const std::string& key, double limit) {
    const double s = timings.value(key, INFINITY);
    std::ostringstream what;
    what << key << " took " << s << " s, limit " << limit << " s";
    std::printf("  time %s = %.3f s (limit %.0f s)\n", key.c_str(), s, limit);
    o.require(s < limit, what.str());
}

}  // namespace

int main() {
    const ResultRecord cls = run_config("classify_suite");
    report("AC1", "golden classifications of the worked examples within 1 s", [&](Outcome& o) {
        require_rules(o, cls, "classify.golden_");
        require_time(o, cls.timings, "golden", 1.0);
        require_recomputable(o, "classify_suite");
    });
    report("AC2", "disputed examples adjudicated by flow and shooting oracles within 10 s", [&](Outcome& o) {
        require_rules(o, cls, "classify.adjudicated_");
        require_time(o, cls.timings, "total", 10.0);
    });

    const ResultRecord reb = run_config("rebound");
    report("AC3", "rebound weights, two-peak tracks and error decrease; under 120 s per eps", [&](Outcome& o) {
        require_rules(o, reb, "rebound.");
        for (const auto& [k, v] : reb.timings.items()) require_time(o, reb.timings, k, 120.0);
        require_recomputable(o, "rebound");
    });

    const ResultRecord crs = run_config("crossing");
    report("AC4", "crossing track, left mass, crossing time and beta trend", [&](Outcome& o) {
        require_rules(o, crs, "crossing.");
        require_recomputable(o, "crossing");
    });

    const ResultRecord pkt = run_config("packet_convergence");
    report("AC5", "packet error scaling, quadratic floor and cone trend; under 300 s total", [&](Outcome& o) {
        require_rules(o, pkt, "packet_convergence.");
        double total = 0.0;
        for (const auto& [k, v] : pkt.timings.items()) total += v.get<double>();
        std::printf("  time total = %.3f s (limit 300 s)\n", total);
        o.require(total < 300.0, "packet_convergence exceeded 300 s");
        require_recomputable(o, "packet_convergence");
    });

    const ResultRecord smo = run_config("smooth_transport");
    report("AC6", "smooth transport follows the Hamiltonian flow", [&](Outcome& o) {
        require_rules(o, smo, "smooth_transport.");
        require_recomputable(o, "smooth_transport");
    });

    const ResultRecord sta = run_config("static_cone");
    report("AC7", "static cone parity, even split and retention trend", [&](Outcome& o) {
        require_rules(o, sta, "static_cone.");
        require_recomputable(o, "static_cone");
    });

    report("AC8", "property suites: marginals, unitarity, energy, gradients, root residuals, Liouville", [&](Outcome& o) {
        auto check = [&](const char* name, double value, double tol) {
            std::printf("  %-24s %.3e (tol %.0e)\n", name, value, tol);
            o.require(value <= tol, name);
        };
        check("wigner_marginals", props::wigner_marginal_error(), 1e-6);
        check("unitarity", props::unitarity_error(), 1e-9);
        check("energy_drift", props::energy_drift(), 1e-6);
        check("gradient_fd", props::gradient_fd_error(), 1e-6);
        check("root_residual", props::branch_root_residual(), 1e-10);
        check("liouville_pairing", props::liouville_pairing_defect(), 0.05);
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
