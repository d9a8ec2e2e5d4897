#pragma once

#include "conelab/flow.hpp"
#include "conelab/quantum.hpp"

#include <vector>

namespace conelab {

struct ProfileGridSpec {
    double half_width = 32.0;
    int n = 4096;

    double dy() const { return 2.0 * half_width / n; }
    Eigen::VectorXd axis() const;
};

// Profile v_t(y) on an eps-independent grid (1-D).
struct PacketProfile {
    Eigen::VectorXd y;
    Eigen::VectorXcd v;
    double t = 0.0;

    double norm() const { return std::sqrt(v.squaredNorm() * (y(1) - y(0))); }
};

PacketProfile sample_profile(const Profile& a, const ProfileGridSpec& spec = {}, double t = 0.0);

// Cumulative action S(t) = int (xi^2/2 - V) along the samples, S = 0 at the first sample.
struct ActionRecord {
    std::vector<double> t;
    std::vector<double> S;
    std::vector<double> L;  // integrand at the samples, used for Hermite interpolation

    double at(double time) const;
};
ActionRecord action(const Trajectory& traj, const ConicalPotential& P);

// Strang splitting of i v_t = -v_yy/2 + V''(x(t)) y^2 v / 2; returns profiles at
// the requested output times (ascending, within the trajectory's range).
std::vector<PacketProfile> propagate_profile(const PacketProfile& v0, const Trajectory& traj,
                                             const ConicalPotential& P, double dt,
                                             const std::vector<double>& output_times);

// Exact free evolution of a profile over a time span.
PacketProfile free_profile(const PacketProfile& v, double span);

// eps^{-1/4} v((x - x_t)/sqrt eps) exp(i[xi_t (x - x_t) + S]/eps); normalized when
// `normalize` is set. Throws ProfileClipped if mass reaches the boundary band.
WaveFunction assemble_packet(const PacketProfile& v, const Eigen::VectorXd& x_t, const Eigen::VectorXd& xi_t,
                             double S, double eps, const GridSpec& grid, bool normalize = true);

// int || R_s v_s / eps || ds over the trace (trapezoid in time).
double error_functional(const std::vector<PacketProfile>& trace, const Trajectory& traj, const ConicalPotential& P,
                        double eps);
// Integrand at a single time.
double remainder_norm(const PacketProfile& v, const Eigen::VectorXd& x_t, const ConicalPotential& P, double eps);

struct CrossingScheme {
    double eta = -0.5;
    double beta = 0.0;
    double alpha = 0.3;
    int k = 5;

    double eta_eps(double eps) const { return eta * std::pow(eps, beta); }
    double tau(double eps) const { return std::pow(eps, alpha); }
    // Throws SchemeInfeasible when the exponents violate the constraints.
    void validate() const;
};

// Smallest k <= 64 with k/2 - (k+1) alpha - (2k+3) beta > 0; throws SchemeInfeasible.
int feasible_k(double alpha, double beta);

// Trajectory x = eta t -+ t^2/2 through the apex of V = -|x| and its action.
PhasePoint crossing_state(double eta, double t);
double crossing_action(double eta, double t);

// Phase integral I(t, y) = (1/eps) int_0^t R_s(y) ds for V = -|x| along the crossing trajectory.
double crossing_phase(double t, double y, double eta, double eps);

// Profile trace: exact phase for |t| <= tau, free evolution beyond.
std::vector<PacketProfile> crossing_profile(const Profile& a, const CrossingScheme& scheme, double eps,
                                            const std::vector<double>& times, const ProfileGridSpec& spec = {});

}  // namespace conelab
