#include "conelab/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace conelab {

const char* to_string(Regime r) {
    switch (r) {
    case Regime::Subcritical: return "SUBCRITICAL";
    case Regime::Critical: return "CRITICAL";
    case Regime::Supercritical: return "SUPERCRITICAL";
    }
    return "?";
}

const char* to_string(ContactLabel l) {
    switch (l) {
    case ContactLabel::NoContact: return "NoContact";
    case ContactLabel::BranchesExist: return "BranchesExist";
    case ContactLabel::ZeroRootsOnly: return "ZeroRootsOnly";
    case ContactLabel::MixedRoots: return "MixedRoots";
    case ContactLabel::MassForbidden: return "MassForbidden";
    }
    return "?";
}

double branch_residual(const SingularPointGeometry& G, const Eigen::VectorXd& rho0) {
    const Eigen::VectorXd u = G.jacobian * rho0;
    const double n = u.norm();
    if (n == 0.0) return std::numeric_limits<double>::infinity();
    return (rho0 + G.normal_grad_VS + G.F * G.jacobian.transpose() * (u / n)).norm();
}

double zero_root_residual(const SingularPointGeometry& G, const Eigen::VectorXd& omega) {
    return (G.F * G.jacobian.transpose() * omega + G.normal_grad_VS).norm();
}

namespace {

// Recover rho0 from a unit constraint-space direction.
Eigen::VectorXd rho_from_omega(const SingularPointGeometry& G, const Eigen::VectorXd& omega) {
    return -G.normal_grad_VS - G.F * G.jacobian.transpose() * omega;
}

double scale_of(const SingularPointGeometry& G) { return std::max({1.0, G.norm_normal_grad, G.op_norm}); }

void push_unique(std::vector<Eigen::VectorXd>& list, const Eigen::VectorXd& v, double tol) {
    for (const auto& w : list)
        if ((w - v).norm() <= tol) return;
    list.push_back(v);
}

struct Cluster {
    double lambda;
    double c_norm2;
    std::vector<int> idx;
};

// Roots of the convex function h on (lo, hi); hi may be infinite.
template <typename H>
std::vector<double> convex_roots(const H& h, double lo, bool lo_is_pole, double hi, double upper) {
    const bool infinite = !std::isfinite(hi);
    const double b = infinite ? upper : hi;
    // Golden-section search for the minimum.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, c = b;
    double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
    double f1 = h(x1), f2 = h(x2);
    for (int it = 0; it < 200 && (c - a) > 1e-15 * std::max(1.0, std::abs(c)); ++it) {
        if (f1 < f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - gr * (c - a);
            f1 = h(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (c - a);
            f2 = h(x2);
        }
    }
    const double nmin = 0.5 * (a + c);
    const double hmin = h(nmin);
    std::vector<double> roots;
    if (hmin > 1e-13) return roots;
    if (hmin >= -1e-13) {
        roots.push_back(nmin);
        return roots;
    }
    auto bisect = [&](double l, double r, bool increasing) {
        for (int it = 0; it < 300 && r - l > 0.0; ++it) {
            const double m = 0.5 * (l + r);
            if (m <= l || m >= r) break;
            const bool pos = h(m) > 0.0;
            if (pos == increasing) r = m;
            else l = m;
        }
        return 0.5 * (l + r);
    };
    // Left branch is decreasing from h(lo+) towards the minimum.
    if (lo_is_pole || h(lo) > 0.0) roots.push_back(bisect(lo, nmin, false));
    if (!infinite) roots.push_back(bisect(nmin, hi, true));
    return roots;
}

std::vector<Eigen::VectorXd> sphere_directions(int dim, int count) {
    std::vector<Eigen::VectorXd> out;
    if (dim == 1) {
        out.push_back(Eigen::VectorXd::Constant(1, 1.0));
        out.push_back(Eigen::VectorXd::Constant(1, -1.0));
        return out;
    }
    if (dim == 2) {
        for (int k = 0; k < count; ++k) {
            const double a = 2.0 * std::numbers::pi * k / count;
            out.push_back((Eigen::VectorXd(2) << std::cos(a), std::sin(a)).finished());
        }
        return out;
    }
    if (dim == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            out.push_back((Eigen::VectorXd(3) << r * std::cos(golden * k), r * std::sin(golden * k), z).finished());
        }
        return out;
    }
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> N;
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v(i) = N(rng);
        out.push_back(v.normalized());
    }
    return out;
}

}  // namespace

BranchRoots solve_branch_equation(const SingularPointGeometry& G) {
    BranchRoots out;
    const int p = G.p();
    const double scale = scale_of(G);
    const double dedupe = 1e-9 * scale;

    if (p == 1) {
        const Eigen::VectorXd a = G.jacobian.row(0).transpose();
        const double an = a.norm();
        const Eigen::VectorXd ahat = a / an;
        const double s = ahat.dot(G.normal_grad_VS);
        for (double sg : {1.0, -1.0}) {
            const double r = -s - G.F * an * sg;
            if (r * sg > 0.0) out.nonzero_roots.push_back(r * ahat);
            const Eigen::VectorXd w = Eigen::VectorXd::Constant(1, sg);
            if (zero_root_residual(G, w) <= critical_tol * scale) out.zero_root_directions.push_back(w);
        }
        return out;
    }

    const Eigen::VectorXd b = -G.jacobian * G.normal_grad_VS;
    if (std::abs(G.F) <= 1e-14) {
        if (b.norm() > dedupe) out.nonzero_roots.push_back(-G.normal_grad_VS);
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G.D_g);
    const Eigen::VectorXd lam = es.eigenvalues();
    const Eigen::MatrixXd Q = es.eigenvectors();
    const Eigen::VectorXd c = Q.transpose() * b;
    const double ctol = 1e-13 * std::max(1.0, b.norm());

    std::vector<Cluster> clusters;
    for (int i = 0; i < p; ++i) {
        if (!clusters.empty() && std::abs(lam(i) - clusters.back().lambda) <= 1e-10 * lam(p - 1)) {
            clusters.back().idx.push_back(i);
            clusters.back().c_norm2 += c(i) * c(i);
        } else {
            clusters.push_back({lam(i), c(i) * c(i), {i}});
        }
    }
    auto pole = [&](const Cluster& k) { return -G.F * k.lambda; };
    auto h = [&](double n) {
        double sum = -1.0;
        for (const auto& k : clusters)
            if (std::sqrt(k.c_norm2) > ctol) sum += k.c_norm2 / ((n - pole(k)) * (n - pole(k)));
        return sum;
    };
    auto omega_regular = [&](double n) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
        for (const auto& k : clusters)
            if (std::sqrt(k.c_norm2) > ctol)
                for (int i : k.idx) w(i) = c(i) / (n - pole(k));
        return w;
    };

    // Regular roots, interval by interval between positive poles.
    std::vector<double> poles;
    double csum = 0.0;
    for (const auto& k : clusters) {
        if (std::sqrt(k.c_norm2) <= ctol) continue;
        csum += std::sqrt(k.c_norm2);
        if (pole(k) > 0.0) poles.push_back(pole(k));
    }
    std::sort(poles.begin(), poles.end());
    if (csum > 0.0) {
        double lo = 0.0;
        bool lo_pole = false;
        double pmax = 0.0;
        for (const auto& k : clusters) pmax = std::max(pmax, std::abs(pole(k)));
        const double upper = pmax + 2.0 * csum + 1.0;
        std::vector<double> ns;
        for (std::size_t i = 0; i <= poles.size(); ++i) {
            const double hi = i < poles.size() ? poles[i] : std::numeric_limits<double>::infinity();
            for (double n : convex_roots(h, lo, lo_pole, hi, std::max(upper, lo + 1.0)))
                if (n > 1e-12 * scale) ns.push_back(n);
            if (i < poles.size()) {
                lo = poles[i];
                lo_pole = true;
            }
        }
        for (double n : ns) {
            Eigen::VectorXd w = omega_regular(n);
            // Snap the norm: rounding in n leaves |w| a hair off 1.
            w /= w.norm();
            push_unique(out.nonzero_roots, rho_from_omega(G, Q * w), dedupe);
        }
    }

    // Degenerate roots: n sits on a pole whose cluster carries no data.
    for (const auto& k : clusters) {
        if (std::sqrt(k.c_norm2) > ctol) continue;
        const double n = pole(k);
        if (n <= 1e-12 * scale) continue;
        const Eigen::VectorXd wp = omega_regular(n);
        const double r2 = 1.0 - wp.squaredNorm();
        if (r2 < -1e-12) continue;
        if (r2 <= 1e-12) {
            push_unique(out.nonzero_roots, rho_from_omega(G, Q * wp), dedupe);
            continue;
        }
        const double r = std::sqrt(r2);
        const int m = static_cast<int>(k.idx.size());
        Eigen::MatrixXd Qk(p, m);
        for (int j = 0; j < m; ++j) Qk.col(j) = Q.col(k.idx[j]);
        if (m == 1) {
            push_unique(out.nonzero_roots, rho_from_omega(G, Q * wp + r * Qk.col(0)), dedupe);
            push_unique(out.nonzero_roots, rho_from_omega(G, Q * wp - r * Qk.col(0)), dedupe);
            continue;
        }
        RootManifold M;
        M.center = rho_from_omega(G, Q * wp);
        M.basis = G.jacobian.transpose() * Qk / std::sqrt(k.lambda);
        M.radius = r * std::abs(G.F) * std::sqrt(k.lambda);
        for (const auto& u : sphere_directions(m, 64)) M.samples.push_back(rho_from_omega(G, Q * wp + r * Qk * u));
        out.manifolds.push_back(std::move(M));
    }

    // Zero roots: the only candidate direction is the mean direction.
    const MeanDirection md = mean_direction(G);
    if (std::abs(md.D.norm() - 1.0) <= critical_tol) {
        const Eigen::VectorXd w = md.D.normalized();
        if (zero_root_residual(G, w) <= critical_tol * scale) out.zero_root_directions.push_back(w);
    }
    return out;
}

BranchRoots solve_branch_equation_sampled(const SingularPointGeometry& G, int directions) {
    BranchRoots out;
    const int p = G.p();
    const Eigen::VectorXd b = -G.jacobian * G.normal_grad_VS;
    const double scale = scale_of(G);
    for (const auto& start : sphere_directions(p, directions)) {
        Eigen::VectorXd w = start;
        double n = (b - G.F * G.D_g * w).norm();
        bool ok = false;
        for (int it = 0; it < 100; ++it) {
            Eigen::VectorXd R(p + 1);
            R.head(p) = (n * Eigen::MatrixXd::Identity(p, p) + G.F * G.D_g) * w - b;
            R(p) = w.squaredNorm() - 1.0;
            if (R.norm() <= 1e-14 * scale) {
                ok = true;
                break;
            }
            Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(p + 1, p + 1);
            Jm.topLeftCorner(p, p) = n * Eigen::MatrixXd::Identity(p, p) + G.F * G.D_g;
            Jm.topRightCorner(p, 1) = w;
            Jm.bottomLeftCorner(1, p) = 2.0 * w.transpose();
            const Eigen::VectorXd step = Jm.completeOrthogonalDecomposition().solve(R);
            w -= step.head(p);
            n -= step(p);
            if (step.norm() <= 1e-15 * scale) {
                ok = true;
                break;
            }
        }
        if (!ok || !(n > 1e-9 * scale)) continue;
        w.normalize();
        const Eigen::VectorXd rho = rho_from_omega(G, w);
        if (branch_residual(G, rho) <= root_residual_tol * scale) push_unique(out.nonzero_roots, rho, 1e-6);
    }
    return out;
}

Regime regime_of(const SingularPointGeometry& G) {
    const double diff = G.op_norm - G.norm_normal_grad;
    if (std::abs(diff) <= critical_tol) return Regime::Critical;
    return diff < 0.0 ? Regime::Subcritical : Regime::Supercritical;
}

MeanDirection mean_direction(const SingularPointGeometry& G) {
    if (std::abs(G.F) <= 1e-14) throw ZeroShapeOperator("shape function vanishes at the singular point");
    MeanDirection md;
    md.D = -(1.0 / G.F) * G.D_g.ldlt().solve(G.jacobian * G.normal_grad_VS);
    md.feasible = md.D.norm() <= 1.0 + critical_tol;
    return md;
}

SphereMeasure solve_nu_p1(const SingularPointGeometry& G, double total_mass) {
    if (G.p() != 1) throw DimensionMismatch("solve_nu_p1 requires a codimension-one singular set");
    const Eigen::VectorXd a = G.jacobian.row(0).transpose();
    const double an = a.norm();
    const double s = a.dot(G.normal_grad_VS) / an;
    const double f = G.F * an;
    SphereMeasure nu;
    if (std::abs(f) <= 1e-14) {
        if (std::abs(s) <= 1e-14) throw ZeroShapeOperator("mass split is undetermined when F and the normal force vanish");
        return nu;
    }
    const double plus = (f - s) * total_mass / (2.0 * f);
    const double minus = (f + s) * total_mass / (2.0 * f);
    const double tol = 1e-12 * std::max(1.0, std::abs(total_mass));
    if (plus < -tol || minus < -tol) return nu;
    nu.plus = std::max(0.0, plus);
    nu.minus = std::max(0.0, minus);
    return nu;
}

ClassificationReport classify_point(const ConicalPotential& P, const Eigen::VectorXd& sigma) {
    const SingularPointGeometry G = singular_geometry(P, sigma);
    ClassificationReport r;
    r.sigma = sigma;
    r.regime = regime_of(G);
    r.op_norm = G.op_norm;
    r.norm_normal_grad = G.norm_normal_grad;
    r.roots = solve_branch_equation(G);
    for (const auto& rho : r.roots.nonzero_roots) r.max_residual = std::max(r.max_residual, branch_residual(G, rho));
    for (const auto& M : r.roots.manifolds)
        for (const auto& rho : M.samples) r.max_residual = std::max(r.max_residual, branch_residual(G, rho));
    for (const auto& w : r.roots.zero_root_directions)
        r.max_residual = std::max(r.max_residual, zero_root_residual(G, w));

    try {
        const MeanDirection md = mean_direction(G);
        r.mean_direction = md.D;
        r.nu_feasible = md.feasible;
    } catch (const ZeroShapeOperator&) {
        r.nu_feasible = G.norm_normal_grad <= critical_tol;
    }
    if (G.p() == 1) {
        try {
            r.nu = solve_nu_p1(G, 1.0);
        } catch (const ZeroShapeOperator&) {
        }
    }

    const bool nonzero = !r.roots.nonzero_roots.empty() || !r.roots.manifolds.empty();
    const bool zero = !r.roots.zero_root_directions.empty();
    if (nonzero && zero) r.label = ContactLabel::MixedRoots;
    else if (nonzero) r.label = ContactLabel::BranchesExist;
    else if (zero) r.label = r.regime == Regime::Subcritical ? ContactLabel::MassForbidden : ContactLabel::ZeroRootsOnly;
    else r.label = ContactLabel::NoContact;
    return r;
}

namespace {
nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
}  // namespace

nlohmann::json to_json(const ClassificationReport& r) {
    nlohmann::json j;
    j["sigma"] = vec_json(r.sigma);
    j["regime"] = to_string(r.regime);
    j["label"] = to_string(r.label);
    j["op_norm"] = r.op_norm;
    j["norm_normal_grad"] = r.norm_normal_grad;
    j["nonzero_roots"] = nlohmann::json::array();
    for (const auto& v : r.roots.nonzero_roots) j["nonzero_roots"].push_back(vec_json(v));
    j["zero_root_directions"] = nlohmann::json::array();
    for (const auto& v : r.roots.zero_root_directions) j["zero_root_directions"].push_back(vec_json(v));
    j["root_manifolds"] = nlohmann::json::array();
    for (const auto& M : r.roots.manifolds) {
        nlohmann::json m;
        m["center"] = vec_json(M.center);
        m["radius"] = M.radius;
        m["basis"] = nlohmann::json::array();
        for (int c = 0; c < M.basis.cols(); ++c) m["basis"].push_back(vec_json(M.basis.col(c)));
        j["root_manifolds"].push_back(m);
    }
    j["mean_direction"] = r.mean_direction ? vec_json(*r.mean_direction) : nlohmann::json(nullptr);
    j["nu_feasible"] = r.nu_feasible;
    if (r.nu) j["nu_p1"] = {{"plus", r.nu->plus}, {"minus", r.nu->minus}};
    j["max_residual"] = r.max_residual;
    return j;
}

std::vector<Eigen::VectorXd> singular_set_samples(const ConicalPotential& P, const Eigen::VectorXd& anchor,
                                                  int per_dim, double half_width) {
    const Eigen::VectorXd s0 = project_to_singular_set(P, anchor);
    const int k = P.d - P.p();
    if (k == 0 || per_dim <= 1) return {s0};
    const Eigen::MatrixXd J = constraint_jacobian(P, s0);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    Eigen::MatrixXd T = lu.kernel();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(T);
    T = qr.householderQ() * Eigen::MatrixXd::Identity(P.d, k);
    std::vector<Eigen::VectorXd> out;
    std::vector<int> idx(k, 0);
    for (;;) {
        Eigen::VectorXd off = Eigen::VectorXd::Zero(P.d);
        for (int i = 0; i < k; ++i) off += T.col(i) * (-half_width + 2.0 * half_width * idx[i] / (per_dim - 1));
        out.push_back(project_to_singular_set(P, s0 + off));
        int i = 0;
        while (i < k && ++idx[i] == per_dim) idx[i++] = 0;
        if (i == k) break;
    }
    return out;
}

}  // namespace conelab
