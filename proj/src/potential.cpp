#include "conelab/potential.hpp"

#include <fstream>
#include <sstream>

namespace conelab {

bool ConicalPotential::g_affine() const {
    for (const auto& gi : g)
        if (!is_affine(gi)) return false;
    return true;
}

ConicalPotential make_potential(int d, const std::string& V_S, const std::string& F,
                                const std::vector<std::string>& g, std::string name) {
    if (g.empty() || static_cast<int>(g.size()) > d)
        throw DimensionMismatch("need 1 <= p <= d constraint components");
    ConicalPotential P;
    P.d = d;
    P.V_S = parse_expression(V_S, d);
    P.F = parse_expression(F, d);
    for (const auto& gi : g) P.g.push_back(parse_expression(gi, d));
    P.name = std::move(name);
    return P;
}

ConicalPotential potential_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("potential must be a JSON object");
    for (const char* key : {"V_S", "F", "g", "d"})
        if (!j.contains(key)) throw ConfigError(std::string("potential is missing '") + key + "'");
    if (!j["d"].is_number_integer()) throw ConfigError("potential 'd' must be an integer");
    std::vector<std::string> g;
    if (j["g"].is_string()) g.push_back(j["g"].get<std::string>());
    else if (j["g"].is_array())
        for (const auto& e : j["g"]) g.push_back(e.get<std::string>());
    else
        throw ConfigError("potential 'g' must be a string or an array of strings");
    return make_potential(j["d"].get<int>(), j["V_S"].get<std::string>(), j["F"].get<std::string>(), g,
                          j.value("name", std::string{}));
}

nlohmann::json potential_to_json(const ConicalPotential& P) {
    nlohmann::json j;
    j["d"] = P.d;
    j["V_S"] = P.V_S.source();
    j["F"] = P.F.source();
    j["g"] = nlohmann::json::array();
    for (const auto& gi : P.g) j["g"].push_back(gi.source());
    if (!P.name.empty()) j["name"] = P.name;
    return j;
}

ConicalPotential load_potential(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open potential file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return potential_from_json(j);
}

Eigen::VectorXd constraint(const ConicalPotential& P, const Eigen::VectorXd& x) {
    Eigen::VectorXd r(P.p());
    for (int i = 0; i < P.p(); ++i) r(i) = evaluate(P.g[i], x);
    return r;
}

Eigen::MatrixXd constraint_jacobian(const ConicalPotential& P, const Eigen::VectorXd& x) {
    Eigen::MatrixXd J(P.p(), P.d);
    for (int i = 0; i < P.p(); ++i) J.row(i) = evaluate_jet(P.g[i], x).g.transpose();
    return J;
}

double constraint_norm(const ConicalPotential& P, const Eigen::VectorXd& x) { return constraint(P, x).norm(); }

double eval_V(const ConicalPotential& P, const Eigen::VectorXd& x) {
    if (x.size() != P.d) throw DimensionMismatch("point dimension does not match potential");
    return evaluate(P.V_S, x) + constraint_norm(P, x) * evaluate(P.F, x);
}

Eigen::VectorXd grad_VS(const ConicalPotential& P, const Eigen::VectorXd& x) { return evaluate_jet(P.V_S, x).g; }

Eigen::VectorXd grad_V(const ConicalPotential& P, const Eigen::VectorXd& x) {
    if (x.size() != P.d) throw DimensionMismatch("point dimension does not match potential");
    const Eigen::VectorXd gx = constraint(P, x);
    const double n = gx.norm();
    if (n <= singular_tol) throw SingularEvaluation("gradient requested on the singular set");
    const Eigen::MatrixXd J = constraint_jacobian(P, x);
    const Jet F = evaluate_jet(P.F, x);
    return evaluate_jet(P.V_S, x).g + n * F.g + F.v * J.transpose() * (gx / n);
}

Eigen::MatrixXd hess_V(const ConicalPotential& P, const Eigen::VectorXd& x) {
    if (x.size() != P.d) throw DimensionMismatch("point dimension does not match potential");
    Jet sq(0.0, P.d);
    for (const auto& gi : P.g) {
        Jet c = evaluate_jet(gi, x);
        sq = sq + c * c;
    }
    if (std::sqrt(sq.v) <= singular_tol) throw HessianUndefined("Hessian requested on the singular set");
    Jet V = evaluate_jet(P.V_S, x) + sqrt(sq) * evaluate_jet(P.F, x);
    return V.h;
}

Eigen::VectorXd grad_V_one_sided(const ConicalPotential& P, const Eigen::VectorXd& x, const Eigen::VectorXd& side) {
    if (side.size() != P.p()) throw DimensionMismatch("side direction must live in constraint space");
    const Eigen::MatrixXd J = constraint_jacobian(P, x);
    const Jet F = evaluate_jet(P.F, x);
    return evaluate_jet(P.V_S, x).g + constraint_norm(P, x) * F.g + F.v * J.transpose() * side.normalized();
}

Eigen::VectorXd project_to_singular_set(const ConicalPotential& P, const Eigen::VectorXd& x, int max_iter) {
    Eigen::VectorXd y = x;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd gy = constraint(P, y);
        if (gy.norm() <= 1e-15) break;
        const Eigen::MatrixXd J = constraint_jacobian(P, y);
        const Eigen::VectorXd step = J.transpose() * (J * J.transpose()).ldlt().solve(gy);
        y -= step;
        if (step.norm() <= 1e-16 * (1.0 + y.norm())) break;
    }
    return y;
}

SingularPointGeometry singular_geometry(const ConicalPotential& P, const Eigen::VectorXd& sigma) {
    if (sigma.size() != P.d) throw DimensionMismatch("point dimension does not match potential");
    if (constraint_norm(P, sigma) > singular_tol) throw NotOnSingularSet("point is not on the singular set");
    SingularPointGeometry G;
    G.sigma = sigma;
    G.jacobian = constraint_jacobian(P, sigma);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G.jacobian);
    const auto& sv = svd.singularValues();
    if (sv.size() < P.p() || sv(sv.size() - 1) <= 1e-9 * std::max(1.0, sv(0)))
        throw RankDeficient("constraint Jacobian is not surjective");
    G.D_g = G.jacobian * G.jacobian.transpose();
    const Eigen::MatrixXd normal = G.jacobian.transpose() * G.D_g.ldlt().solve(G.jacobian);
    G.tangent_projector = Eigen::MatrixXd::Identity(P.d, P.d) - normal;
    G.grad_VS = grad_VS(P, sigma);
    G.normal_grad_VS = normal * G.grad_VS;
    G.F = evaluate(P.F, sigma);
    G.op_norm = std::abs(G.F) * sv(0);
    G.norm_normal_grad = G.normal_grad_VS.norm();
    return G;
}

}  // namespace conelab
