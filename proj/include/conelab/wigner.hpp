#pragma once

#include "conelab/quantum.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace conelab {

// Rows index subsampled x, columns ascending xi.
struct WignerField {
    Eigen::VectorXd x;
    Eigen::VectorXd xi;
    Eigen::MatrixXd W;
    double eps = 0.0;

    double dx() const { return x.size() > 1 ? x(1) - x(0) : 0.0; }
    double dxi() const { return xi.size() > 1 ? xi(1) - xi(0) : 0.0; }
    double total() const { return W.sum() * dx() * dxi(); }
};

// xi_limit crops the momentum axis to |xi| <= xi_limit (no crop when absent).
WignerField wigner_transform(const WaveFunction& psi, int x_subsample = 16,
                             std::optional<double> xi_limit = std::nullopt);

// Husimi density: W smoothed by the coherent-state Gaussian (variance eps/2 in
// x and xi). Nonnegative, so interference between separated lumps does not
// produce spurious maxima. Same axes as wigner_transform.
WignerField husimi_transform(const WaveFunction& psi, int x_subsample = 16,
                             std::optional<double> xi_limit = std::nullopt);

using Symbol = std::function<double(double x, double xi)>;
double pair_observable(const WignerField& W, const Symbol& a);
double pair_observable(const WaveFunction& psi, const Symbol& a, int x_subsample = 4);

enum class PeakField { Wigner, Husimi };

struct PeakOptions {
    int x_subsample = 16;
    PeakField field = PeakField::Husimi;
    double window_factor = 5.0;               // window half-width in units of sqrt(eps)
    std::optional<int> half_plane;            // +1: x > 0 only, -1: x < 0 only
    std::optional<double> xi_limit = 6.0;
};

struct PeakSample {
    double t = 0.0;
    double x = 0.0;
    double xi = 0.0;
    double window_mass = 0.0;
    bool multi_peak = false;
    std::optional<std::pair<double, double>> second_peak;
};

// The field selected by opt.field on opt's axes.
WignerField peak_field(const WaveFunction& psi, const PeakOptions& opt = {});
PeakSample locate_peak(const WignerField& W, double t, const PeakOptions& opt = {});
std::vector<PeakSample> peak_track(const std::vector<WaveFunction>& snapshots, const PeakOptions& opt = {});

// Quintic smoothstep cut: 1 on [0, 1/2], 0 on [1, inf).
double cut_function(double r);

struct ZoneMasses {
    double R = 0.0;
    double delta = 0.0;
    double inner = 0.0;
    double middle = 0.0;
    double outer = 0.0;
};
// Throws ScaleOrderViolation unless eps R < delta.
ZoneMasses zone_masses(const WaveFunction& psi, double R, double delta);

struct EmpiricalNu {
    double window = 0.0;
    double plus = 0.0;
    double minus = 0.0;
};
EmpiricalNu empirical_nu(const WaveFunction& psi, double window);

std::string wigner_csv(const WignerField& W);

}  // namespace conelab
