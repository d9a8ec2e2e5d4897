#pragma once

#include "conelab/potential.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace conelab {

inline constexpr double critical_tol = 1e-9;
inline constexpr double root_residual_tol = 1e-10;

enum class Regime { Subcritical, Critical, Supercritical };
enum class ContactLabel { NoContact, BranchesExist, ZeroRootsOnly, MixedRoots, MassForbidden };

const char* to_string(Regime r);
const char* to_string(ContactLabel l);

// A continuum of nonzero roots: center + radius * (cos, sin, ...) in the span of
// `basis` (orthonormal columns, ambient coordinates). Only arises when an
// eigenvalue of D_g is repeated.
struct RootManifold {
    Eigen::VectorXd center;
    Eigen::MatrixXd basis;   // d x m, image of the free unit sphere
    double radius = 0.0;
    std::vector<Eigen::VectorXd> samples;
};

struct BranchRoots {
    std::vector<Eigen::VectorXd> nonzero_roots;         // ambient normal vectors rho0
    std::vector<Eigen::VectorXd> zero_root_directions;  // unit vectors omega in constraint space
    std::vector<RootManifold> manifolds;

    bool empty() const { return nonzero_roots.empty() && zero_root_directions.empty() && manifolds.empty(); }
};

// |rho0 + d_rho V_S + F grad g^T grad g rho0 / |grad g rho0||
double branch_residual(const SingularPointGeometry& G, const Eigen::VectorXd& rho0);
// |F grad g^T omega + d_rho V_S|
double zero_root_residual(const SingularPointGeometry& G, const Eigen::VectorXd& omega);

// Complete enumeration of the branch equation by reduction to a secular equation
// in the eigenbasis of D_g.
BranchRoots solve_branch_equation(const SingularPointGeometry& G);

// Independent sampled solver (Newton from evenly spread starting directions).
// Used to cross-check solve_branch_equation.
BranchRoots solve_branch_equation_sampled(const SingularPointGeometry& G, int directions = 256);

Regime regime_of(const SingularPointGeometry& G);

struct MeanDirection {
    Eigen::VectorXd D;  // constraint space
    bool feasible = false;
};
// D = -(1/F) D_g^{-1} grad g d_rho V_S. Throws ZeroShapeOperator when F = 0.
MeanDirection mean_direction(const SingularPointGeometry& G);

// Atomic measure on S^0 = {+1, -1}.
struct SphereMeasure {
    double plus = 0.0;
    double minus = 0.0;
    double total() const { return plus + minus; }
};
// Mass split satisfying the p = 1 balance; zero when no nonnegative split exists.
SphereMeasure solve_nu_p1(const SingularPointGeometry& G, double total_mass);

struct ClassificationReport {
    Eigen::VectorXd sigma;
    Regime regime = Regime::Supercritical;
    double op_norm = 0.0;
    double norm_normal_grad = 0.0;
    BranchRoots roots;
    std::optional<Eigen::VectorXd> mean_direction;  // absent when F = 0
    bool nu_feasible = false;
    std::optional<SphereMeasure> nu;                // p = 1, unit mass
    ContactLabel label = ContactLabel::NoContact;
    double max_residual = 0.0;
};

ClassificationReport classify_point(const ConicalPotential& P, const Eigen::VectorXd& sigma);
nlohmann::json to_json(const ClassificationReport& r);

// Points on the singular set sampled on a tangential grid around `anchor`.
std::vector<Eigen::VectorXd> singular_set_samples(const ConicalPotential& P, const Eigen::VectorXd& anchor,
                                                  int per_dim = 5, double half_width = 1.0);

}  // namespace conelab
