#pragma once

#include "conelab/potential.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace conelab {

using cplx = std::complex<double>;

// Periodic grid x_j = -L + j dx, dx = 2L/N, per axis.
struct GridSpec {
    int d = 1;
    double half_width = 4.0;
    int n = 8192;

    double dx() const { return 2.0 * half_width / n; }
    Eigen::Index size() const { return d == 1 ? n : static_cast<Eigen::Index>(n) * n; }
    double cell() const { return d == 1 ? dx() : dx() * dx(); }
    Eigen::VectorXd axis() const;
    Eigen::VectorXd wavenumbers() const;  // 2 pi / (2L) * signed index
    Eigen::VectorXd point(Eigen::Index flat) const;
    void validate() const;
};

// Flat storage; in 2-D index i * n + j addresses (x1 = axis[i], x2 = axis[j]).
struct WaveFunction {
    GridSpec grid;
    double eps = 1.0 / 64;
    Eigen::VectorXcd values;
    double t = 0.0;

    double norm() const { return std::sqrt(values.squaredNorm() * grid.cell()); }
};

using Profile = std::function<cplx(const Eigen::VectorXd&)>;

// C-infinity bump exp(-1/(1-u^2)) on [a, b] (1-D).
Profile bump_profile(double a, double b);
Profile gaussian_profile(double width = 1.0);
// Band-limited interpolation of samples on a uniform grid (zero outside).
Profile sampled_profile(const Eigen::VectorXd& y, const Eigen::VectorXcd& v);

// eps^{-d/4} a((x - x0)/sqrt(eps)) exp(i xi0.(x - x0)/eps), normalized on the grid.
// Throws ProfileClipped when the state reaches the boundary guard band.
WaveFunction init_concentrated_state(const GridSpec& grid, double eps, const Profile& a, const Eigen::VectorXd& x0,
                                     const Eigen::VectorXd& xi0);

Eigen::VectorXd potential_on_grid(const GridSpec& grid, const ConicalPotential& P);

// Precomputed Strang splitting for fixed (grid, eps, V, dt).
class StrangStepper {
public:
    StrangStepper(const GridSpec& grid, double eps, const ConicalPotential& P, double dt);
    void step(Eigen::VectorXcd& psi);
    double dt() const { return dt_; }

private:
    GridSpec grid_;
    double dt_;
    Eigen::VectorXcd half_phase_;
    Eigen::VectorXcd kinetic_;
    Eigen::FFT<double> fft_;
    Eigen::VectorXcd buf_, line_in_, line_out_;
};

WaveFunction step_strang(const WaveFunction& psi, const ConicalPotential& P, double dt);

struct PropagateOptions {
    double boundary_tol = 1e-6;
    int check_every = 8;
};

// Forward transform over all axes (unscaled).
void fft_forward(Eigen::FFT<double>& fft, const GridSpec& grid, const Eigen::VectorXcd& in, Eigen::VectorXcd& out);

// dt is shrunk so that a whole number of steps reaches t_end; snapshots are taken
// at the nearest step. Throws BoundaryMassExceeded if the guard band fills up.
std::vector<WaveFunction> propagate(WaveFunction psi, const ConicalPotential& P, double t_end, double dt,
                                    const std::vector<double>& snapshot_times, const PropagateOptions& opt = {});

double boundary_mass(const WaveFunction& psi);

struct Observables {
    Eigen::VectorXd position_mean;
    Eigen::VectorXd momentum_mean;
    Eigen::VectorXd position_variance;
};
Observables observables(const WaveFunction& psi);
double energy(const WaveFunction& psi, const ConicalPotential& P);

std::string snapshot_csv(const WaveFunction& psi);

}  // namespace conelab
