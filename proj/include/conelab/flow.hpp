#pragma once

#include "conelab/potential.hpp"

#include <optional>
#include <string>
#include <vector>

namespace conelab {

struct PhasePoint {
    Eigen::VectorXd x;
    Eigen::VectorXd xi;
    double t = 0.0;
};

enum class SegmentTag { Exterior, Insider, BranchSeed };
const char* to_string(SegmentTag tag);

enum class EventSide { Incoming, Outgoing };

struct SingularArrival {
    double t0 = 0.0;
    Eigen::VectorXd sigma;
    std::optional<Eigen::VectorXd> rho_limit;
    EventSide side = EventSide::Incoming;
    double residual = 0.0;  // |g| at the located state
};

struct Trajectory {
    std::vector<PhasePoint> samples;  // strictly increasing t
    std::vector<SegmentTag> tags;     // one per sample
    std::vector<SingularArrival> events;
    std::vector<double> crossings;    // transversal passages through the singular set

    double t_begin() const { return samples.front().t; }
    double t_end() const { return samples.back().t; }
};

struct IntegratorOptions {
    double step = 1e-3;
    double min_step = 1e-9;        // floor for the near-singular refinement
    double arrival_g_tol = 1e-9;
    double arrival_xi_tol = 1e-6;
    double event_time_tol = 1e-12;
    long max_steps = 50'000'000;
    bool rho_at_arrival = true;
};

// RK4 with refinement near the singular set, crossing location and arrival
// detection. t_end < start.t integrates backward; samples are returned in
// increasing time either way. Stops at the first arrival on the degenerate set.
Trajectory integrate_exterior(const ConicalPotential& P, const PhasePoint& start, double t_end,
                              const IntegratorOptions& opt = {});

// Motion on the singular set under the restricted smooth part. Throws
// LeftManifold if the state drifts off the set.
Trajectory integrate_insider(const ConicalPotential& P, const PhasePoint& start, double t_end,
                             const IntegratorOptions& opt = {});

struct BranchLaunchOptions {
    double seed_time = 1e-3;
    double t_end = 1.0;          // duration, measured from the launch point
    bool backward = false;
    bool require_root = true;    // throw NotABranchRoot if rho0 fails the branch equation
    IntegratorOptions integrator;
};

// Outgoing (or, backward, incoming) trajectory emanating from sigma with
// second-order normal displacement rho0 / 2 t^2.
Trajectory launch_branch(const ConicalPotential& P, const Eigen::VectorXd& sigma, const Eigen::VectorXd& rho0,
                         const BranchLaunchOptions& opt = {});

// Position and momentum at arbitrary t via cubic Hermite interpolation.
PhasePoint state_at(const ConicalPotential& P, const Trajectory& traj, double t);

struct RhoDiagnostic {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> rho;
    std::optional<Eigen::VectorXd> limit;
    bool asymptotic = false;  // |rho| collapsing with no stable limit
    double direction_drift = 0.0;
};

// rho(t) = 2/(t - t0)^2 grad g^+ g(x(t)) over [t0 + a, t0 + b] (a, b same sign),
// with Richardson extrapolation towards t0.
RhoDiagnostic rho_diagnostic(const ConicalPotential& P, const Trajectory& traj, double t0, double a, double b);

struct ShootingHit {
    Eigen::VectorXd start_direction;
    double arrival_time = 0.0;
    double miss = 0.0;                      // |x - sigma| at arrival
    std::optional<Eigen::VectorXd> rho_limit;
};

// Launch trajectories from distance r around sigma aimed at sigma with the
// energy-matched speed; report those that arrive.
std::vector<ShootingHit> shooting_sweep(const ConicalPotential& P, const Eigen::VectorXd& sigma, int directions = 64,
                                        double r = 0.05, double horizon = 2.0, const IntegratorOptions& opt = {});

std::string trajectory_csv(const Trajectory& traj);
nlohmann::json events_json(const Trajectory& traj);

}  // namespace conelab
