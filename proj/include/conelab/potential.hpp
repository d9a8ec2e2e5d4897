#pragma once

#include "conelab/errors.hpp"
#include "conelab/expression.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace conelab {

inline constexpr double singular_tol = 1e-10;

// V(x) = V_S(x) + |g(x)| F(x), singular along {g = 0}.
struct ConicalPotential {
    int d = 1;
    Expr V_S;
    Expr F;
    std::vector<Expr> g;
    std::string name;

    int p() const { return static_cast<int>(g.size()); }
    bool g_affine() const;
};

ConicalPotential make_potential(int d, const std::string& V_S, const std::string& F,
                                const std::vector<std::string>& g, std::string name = {});
ConicalPotential potential_from_json(const nlohmann::json& j);
nlohmann::json potential_to_json(const ConicalPotential& P);
ConicalPotential load_potential(const std::string& path);

Eigen::VectorXd constraint(const ConicalPotential& P, const Eigen::VectorXd& x);
Eigen::MatrixXd constraint_jacobian(const ConicalPotential& P, const Eigen::VectorXd& x);  // p x d
double constraint_norm(const ConicalPotential& P, const Eigen::VectorXd& x);

double eval_V(const ConicalPotential& P, const Eigen::VectorXd& x);
// Throws SingularEvaluation within singular_tol of the singular set.
Eigen::VectorXd grad_V(const ConicalPotential& P, const Eigen::VectorXd& x);
// Throws HessianUndefined within singular_tol of the singular set.
Eigen::MatrixXd hess_V(const ConicalPotential& P, const Eigen::VectorXd& x);
// Force limit from one side of the singular set: g/|g| is replaced by the unit
// vector `side` in constraint space.
Eigen::VectorXd grad_V_one_sided(const ConicalPotential& P, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& side);

Eigen::VectorXd grad_VS(const ConicalPotential& P, const Eigen::VectorXd& x);

// Newton projection onto {g = 0}; exact in one step for affine g.
Eigen::VectorXd project_to_singular_set(const ConicalPotential& P, const Eigen::VectorXd& x,
                                        int max_iter = 50);

struct SingularPointGeometry {
    Eigen::VectorXd sigma;
    Eigen::MatrixXd jacobian;            // grad g, p x d
    Eigen::MatrixXd tangent_projector;   // onto ker grad g
    Eigen::VectorXd grad_VS;
    Eigen::VectorXd normal_grad_VS;      // (I - pi) grad V_S
    double F = 0.0;
    Eigen::MatrixXd D_g;                 // grad g grad g^T, p x p
    double op_norm = 0.0;                // |F| * sigma_max(grad g)
    double norm_normal_grad = 0.0;

    int d() const { return static_cast<int>(sigma.size()); }
    int p() const { return static_cast<int>(jacobian.rows()); }
};

// Throws NotOnSingularSet if |g(sigma)| > singular_tol, RankDeficient if grad g
// is not surjective.
SingularPointGeometry singular_geometry(const ConicalPotential& P, const Eigen::VectorXd& sigma);

}  // namespace conelab
