#include "conelab/flow.hpp"

#include "conelab/classify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace conelab {

const char* to_string(SegmentTag tag) {
    switch (tag) {
    case SegmentTag::Exterior: return "exterior";
    case SegmentTag::Insider: return "insider";
    case SegmentTag::BranchSeed: return "branch_seed";
    }
    return "?";
}

namespace {

// Acceleration -grad V; exactly on the singular set the side is chosen by the normal
// velocity in the direction of integration.
Eigen::VectorXd force(const ConicalPotential& P, const Eigen::VectorXd& x, const Eigen::VectorXd& xi, double dir) {
    const Eigen::VectorXd g = constraint(P, x);
    if (g.norm() > singular_tol) return -grad_V(P, x);
    // Inside the tolerance band the state still sits on a definite side.
    if (g.norm() > 0.0) return -grad_V_one_sided(P, x, g.normalized());
    const Eigen::VectorXd u = dir * (constraint_jacobian(P, x) * xi);
    if (u.norm() <= 1e-14) throw SingularEvaluation("state on the singular set with no normal velocity");
    return -grad_V_one_sided(P, x, u.normalized());
}

PhasePoint rk4(const ConicalPotential& P, const PhasePoint& y, double h) {
    const double dir = h >= 0 ? 1.0 : -1.0;
    const Eigen::VectorXd k1x = y.xi;
    const Eigen::VectorXd k1v = force(P, y.x, y.xi, dir);
    const Eigen::VectorXd x2 = y.x + 0.5 * h * k1x, v2 = y.xi + 0.5 * h * k1v;
    const Eigen::VectorXd k2v = force(P, x2, v2, dir);
    const Eigen::VectorXd x3 = y.x + 0.5 * h * v2, v3 = y.xi + 0.5 * h * k2v;
    const Eigen::VectorXd k3v = force(P, x3, v3, dir);
    const Eigen::VectorXd x4 = y.x + h * v3, v4 = y.xi + h * k3v;
    const Eigen::VectorXd k4v = force(P, x4, v4, dir);
    PhasePoint r;
    r.x = y.x + h / 6.0 * (k1x + 2.0 * v2 + 2.0 * v3 + v4);
    r.xi = y.xi + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    r.t = y.t + h;
    return r;
}

// d/dt (|g|^2 / 2) in the direction of integration.
double approach_rate(const ConicalPotential& P, const PhasePoint& y, double dir) {
    return dir * constraint(P, y.x).dot(constraint_jacobian(P, y.x) * y.xi);
}

bool arrived(const ConicalPotential& P, const PhasePoint& y, const IntegratorOptions& opt) {
    return constraint_norm(P, y.x) <= opt.arrival_g_tol &&
           (constraint_jacobian(P, y.x) * y.xi).norm() <= opt.arrival_xi_tol;
}

int sign_of(double v) { return (v > 0) - (v < 0); }

void finish_backward(Trajectory& tr) {
    std::reverse(tr.samples.begin(), tr.samples.end());
    std::reverse(tr.tags.begin(), tr.tags.end());
    std::sort(tr.crossings.begin(), tr.crossings.end());
}

}  // namespace

Trajectory integrate_exterior(const ConicalPotential& P, const PhasePoint& start, double t_end,
                              const IntegratorOptions& opt) {
    if (start.x.size() != P.d || start.xi.size() != P.d) throw DimensionMismatch("phase point dimension mismatch");
    Trajectory tr;
    const double dir = t_end >= start.t ? 1.0 : -1.0;
    PhasePoint y = start;
    tr.samples.push_back(y);
    tr.tags.push_back(SegmentTag::Exterior);
    const bool scalar_g = P.p() == 1;
    const double t_eps = 1e-13 * std::max(1.0, std::abs(t_end));

    auto record_arrival = [&](const PhasePoint& ya) {
        SingularArrival ev;
        const Eigen::VectorXd g = constraint(P, ya.x);
        const double rate = g.dot(constraint_jacobian(P, ya.x) * ya.xi);
        ev.t0 = ya.t;
        if (rate != 0.0) {
            const double corr = 2.0 * g.squaredNorm() / rate;
            if (std::abs(corr) <= 1e-3) ev.t0 = ya.t - corr;
        }
        ev.sigma = project_to_singular_set(P, ya.x);
        ev.side = dir > 0 ? EventSide::Incoming : EventSide::Outgoing;
        ev.residual = g.norm();
        if (ya.t != tr.samples.back().t) {
            tr.samples.push_back(ya);
            tr.tags.push_back(SegmentTag::Exterior);
        }
        tr.events.push_back(ev);
    };

    long steps = 0;
    while (dir * (t_end - y.t) > t_eps) {
        if (++steps > opt.max_steps) throw StepSizeUnderflow("step budget exhausted");
        if (arrived(P, y, opt)) {
            record_arrival(y);
            break;
        }
        double h = dir * std::min(opt.step, std::abs(t_end - y.t));
        const double gn = constraint_norm(P, y.x);
        const double speed = y.xi.norm();
        while (gn < 10.0 * std::abs(h) * speed && std::abs(h) > opt.min_step) h *= 0.5;

        PhasePoint y1;
        try {
            y1 = rk4(P, y, h);
        } catch (const SingularEvaluation&) {
            // A stage landed on the set with no normal motion: shrink and retry.
            double hs = h;
            bool ok = false;
            while (std::abs(hs) > 1e-3 * opt.min_step) {
                hs *= 0.5;
                try {
                    y1 = rk4(P, y, hs);
                    ok = true;
                    break;
                } catch (const SingularEvaluation&) {
                }
            }
            if (!ok) {
                if (constraint_norm(P, y.x) <= 10 * opt.arrival_g_tol) {
                    record_arrival(y);
                    break;
                }
                throw StepSizeUnderflow("cannot advance past a singular evaluation");
            }
            h = hs;
        }

        const Eigen::VectorXd g0 = constraint(P, y.x), g1 = constraint(P, y1.x);
        const bool crossed = scalar_g && sign_of(g0(0)) != 0 && sign_of(g1(0)) != sign_of(g0(0));
        bool turned = false;
        if (!crossed && std::min(g0.norm(), g1.norm()) < 100.0 * std::abs(h) * std::max(speed, 1e-300)) {
            turned = approach_rate(P, y, dir) < 0.0 && approach_rate(P, y1, dir) >= 0.0;
        }

        if (crossed || turned) {
            // Bisect a single substep from y on the event predicate.
            auto past = [&](const PhasePoint& z) {
                if (crossed) return sign_of(constraint(P, z.x)(0)) != sign_of(g0(0));
                return approach_rate(P, z, dir) >= 0.0;
            };
            double lo = 0.0, hi = h;
            PhasePoint zhi = y1;
            while (std::abs(hi - lo) > opt.event_time_tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                PhasePoint z = rk4(P, y, mid);
                if (past(z)) {
                    hi = mid;
                    zhi = z;
                } else {
                    lo = mid;
                }
            }
            PhasePoint zlo = lo == 0.0 ? y : rk4(P, y, lo);
            if (arrived(P, zlo, opt) || arrived(P, zhi, opt)) {
                record_arrival(arrived(P, zlo, opt) ? zlo : zhi);
                break;
            }
            if (crossed) {
                // Resume from the first state on the far side.
                y = zhi;
                tr.crossings.push_back(y.t);
                tr.samples.push_back(y);
                tr.tags.push_back(SegmentTag::Exterior);
                continue;
            }
        }
        y = y1;
        tr.samples.push_back(y);
        tr.tags.push_back(SegmentTag::Exterior);
    }
    if (dir < 0) finish_backward(tr);

    if (opt.rho_at_arrival) {
        for (auto& ev : tr.events) {
            const double span = std::abs(ev.t0 - (dir > 0 ? tr.t_begin() : tr.t_end()));
            const double far = std::min(0.1, 0.5 * span);
            if (far <= 1e-6) continue;
            const double s = dir > 0 ? -1.0 : 1.0;
            try {
                ev.rho_limit = rho_diagnostic(P, tr, ev.t0, s * far / 8.0, s * far).limit;
            } catch (const std::exception&) {
            }
        }
    }
    return tr;
}

Trajectory integrate_insider(const ConicalPotential& P, const PhasePoint& start, double t_end,
                             const IntegratorOptions& opt) {
    if (start.x.size() != P.d || start.xi.size() != P.d) throw DimensionMismatch("phase point dimension mismatch");
    if (constraint_norm(P, start.x) > 1e-8) throw LeftManifold("insider flow must start on the singular set");
    auto proj = [&](const Eigen::VectorXd& x) {
        const Eigen::MatrixXd J = constraint_jacobian(P, x);
        return Eigen::MatrixXd(Eigen::MatrixXd::Identity(P.d, P.d) -
                               J.transpose() * (J * J.transpose()).ldlt().solve(J));
    };
    if ((constraint_jacobian(P, start.x) * start.xi).norm() > 1e-8 * std::max(1.0, start.xi.norm()))
        throw LeftManifold("insider flow needs tangential momentum");

    const bool affine = P.g_affine();
    const Eigen::MatrixXd pi0 = proj(start.x);
    auto rhs = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& xi, Eigen::VectorXd& dx, Eigen::VectorXd& dxi) {
        const Eigen::MatrixXd pi = affine ? pi0 : proj(x);
        dx = pi * xi;
        dxi = -pi * grad_VS(P, x);
    };

    Trajectory tr;
    const double dir = t_end >= start.t ? 1.0 : -1.0;
    PhasePoint y = start;
    tr.samples.push_back(y);
    tr.tags.push_back(SegmentTag::Insider);
    while (dir * (t_end - y.t) > 1e-13 * std::max(1.0, std::abs(t_end))) {
        const double h = dir * std::min(opt.step, std::abs(t_end - y.t));
        Eigen::VectorXd a1, b1, a2, b2, a3, b3, a4, b4;
        rhs(y.x, y.xi, a1, b1);
        rhs(y.x + 0.5 * h * a1, y.xi + 0.5 * h * b1, a2, b2);
        rhs(y.x + 0.5 * h * a2, y.xi + 0.5 * h * b2, a3, b3);
        rhs(y.x + h * a3, y.xi + h * b3, a4, b4);
        PhasePoint z;
        z.x = y.x + h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
        z.xi = y.xi + h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4);
        z.t = y.t + h;
        if (constraint_norm(P, z.x) > 1e-6) throw LeftManifold("insider state drifted off the singular set");
        if (!affine) {
            z.x = project_to_singular_set(P, z.x);
            z.xi = proj(z.x) * z.xi;
        }
        y = z;
        tr.samples.push_back(y);
        tr.tags.push_back(SegmentTag::Insider);
    }
    if (dir < 0) finish_backward(tr);
    return tr;
}

Trajectory launch_branch(const ConicalPotential& P, const Eigen::VectorXd& sigma, const Eigen::VectorXd& rho0,
                         const BranchLaunchOptions& opt) {
    const SingularPointGeometry G = singular_geometry(P, sigma);
    if (opt.require_root) {
        const double scale = std::max({1.0, G.norm_normal_grad, G.op_norm});
        if (branch_residual(G, rho0) > 1e-8 * scale) throw NotABranchRoot("rho0 does not solve the branch equation");
    }
    const double tau = opt.seed_time;
    const double s = opt.backward ? -1.0 : 1.0;
    PhasePoint seed;
    seed.x = sigma + 0.5 * tau * tau * rho0;
    seed.xi = s * tau * rho0;
    seed.t = s * tau;
    if (constraint_norm(P, seed.x) <= singular_tol) throw SeedInsideSingularTol("branch seed is inside the singular tolerance");

    IntegratorOptions io = opt.integrator;
    io.rho_at_arrival = false;
    Trajectory tr = integrate_exterior(P, seed, s * opt.t_end, io);

    PhasePoint origin;
    origin.x = sigma;
    origin.xi = Eigen::VectorXd::Zero(P.d);
    origin.t = 0.0;
    if (opt.backward) {
        tr.samples.push_back(origin);
        tr.tags.push_back(SegmentTag::BranchSeed);
    } else {
        tr.samples.insert(tr.samples.begin(), origin);
        tr.tags.insert(tr.tags.begin(), SegmentTag::BranchSeed);
    }

    SingularArrival ev;
    ev.t0 = 0.0;
    ev.sigma = sigma;
    ev.side = opt.backward ? EventSide::Incoming : EventSide::Outgoing;
    ev.residual = 0.0;
    const double far = std::min(0.04, 0.5 * opt.t_end);
    if (far / 4.0 > tau) {
        try {
            ev.rho_limit = rho_diagnostic(P, tr, 0.0, s * far / 4.0, s * far).limit;
        } catch (const std::exception&) {
        }
    }
    tr.events.insert(tr.events.begin(), ev);
    return tr;
}

PhasePoint state_at(const ConicalPotential& P, const Trajectory& tr, double t) {
    const auto& S = tr.samples;
    if (S.empty() || t < S.front().t - 1e-14 || t > S.back().t + 1e-14)
        throw std::out_of_range("time outside trajectory range");
    auto it = std::upper_bound(S.begin(), S.end(), t, [](double v, const PhasePoint& q) { return v < q.t; });
    std::size_t i1 = static_cast<std::size_t>(it - S.begin());
    if (i1 == 0) i1 = 1;
    if (i1 >= S.size()) i1 = S.size() - 1;
    const PhasePoint& a = S[i1 - 1];
    const PhasePoint& b = S[i1];
    const double h = b.t - a.t;
    if (h <= 0.0) return a;
    const double u = std::clamp((t - a.t) / h, 0.0, 1.0);
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    PhasePoint r;
    r.t = t;
    r.x = h00 * a.x + h10 * h * a.xi + h01 * b.x + h11 * h * b.xi;
    try {
        const Eigen::VectorXd fa = force(P, a.x, a.xi, 1.0), fb = force(P, b.x, b.xi, -1.0);
        r.xi = h00 * a.xi + h10 * h * fa + h01 * b.xi + h11 * h * fb;
    } catch (const SingularEvaluation&) {
        r.xi = (1 - u) * a.xi + u * b.xi;
    }
    return r;
}

RhoDiagnostic rho_diagnostic(const ConicalPotential& P, const Trajectory& tr, double t0, double a, double b) {
    if (a * b <= 0.0) throw WindowContainsEvent("diagnostic window must lie on one side of the event");
    const double s = b > 0 ? 1.0 : -1.0;
    double near = std::min(std::abs(a), std::abs(b)), far = std::max(std::abs(a), std::abs(b));
    const double lo = std::min(t0 + s * near, t0 + s * far), hi = std::max(t0 + s * near, t0 + s * far);
    for (const auto& ev : tr.events)
        if (ev.t0 > lo && ev.t0 < hi) throw WindowContainsEvent("another singular event lies inside the window");
    for (double c : tr.crossings)
        if (c > lo && c < hi) throw WindowContainsEvent("a crossing lies inside the window");

    auto rho = [&](double t) {
        const Eigen::VectorXd x = state_at(P, tr, t).x;
        const Eigen::MatrixXd J = constraint_jacobian(P, x);
        const Eigen::VectorXd g = constraint(P, x);
        const double dt = t - t0;
        return Eigen::VectorXd(2.0 / (dt * dt) * (J.transpose() * (J * J.transpose()).ldlt().solve(g)));
    };

    RhoDiagnostic out;
    const int n = 16;
    for (int k = 0; k < n; ++k) {
        const double off = far * std::pow(near / far, static_cast<double>(k) / (n - 1));
        out.t.push_back(t0 + s * off);
        out.rho.push_back(rho(t0 + s * off));
    }
    const Eigen::VectorXd A0 = rho(t0 + s * far), A1 = rho(t0 + s * far / 2), A2 = rho(t0 + s * far / 4);
    const Eigen::VectorXd R1 = 2 * A1 - A0, R2 = 2 * A2 - A1;
    out.limit = Eigen::VectorXd((4 * R2 - R1) / 3.0);

    const Eigen::VectorXd& rf = out.rho.front();
    const Eigen::VectorXd& rn = out.rho.back();
    if (rf.norm() > 0 && rn.norm() > 0)
        out.direction_drift = std::acos(std::clamp(rf.normalized().dot(rn.normalized()), -1.0, 1.0));
    double rmax = 0.0;
    for (const auto& r : out.rho) rmax = std::max(rmax, r.norm());
    out.asymptotic = rn.norm() < 0.25 * rf.norm() && out.limit->norm() < 0.1 * rmax;
    return out;
}

std::vector<ShootingHit> shooting_sweep(const ConicalPotential& P, const Eigen::VectorXd& sigma, int directions,
                                        double r, double horizon, const IntegratorOptions& opt) {
    std::vector<Eigen::VectorXd> dirs;
    const int d = P.d;
    if (d == 1) {
        dirs = {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -1.0)};
    } else if (d == 2) {
        for (int k = 0; k < directions; ++k) {
            const double a = 2 * std::numbers::pi * k / directions;
            dirs.push_back((Eigen::VectorXd(2) << std::cos(a), std::sin(a)).finished());
        }
    } else {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < directions; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / directions;
            const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
            Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
            v(0) = z;
            v(1) = rr * std::cos(golden * k);
            v(2) = rr * std::sin(golden * k);
            dirs.push_back(v);
        }
        // Coordinate axes are where closed-form branches tend to live.
        for (int i = 0; i < d; ++i)
            for (double sg : {1.0, -1.0}) dirs.push_back(sg * Eigen::VectorXd::Unit(d, i));
    }
    const double V0 = eval_V(P, sigma);
    std::vector<ShootingHit> hits;
    for (const auto& w : dirs) {
        PhasePoint st;
        st.x = sigma + r * w;
        const double dV = V0 - eval_V(P, st.x);
        if (dV <= 0.0) continue;
        st.xi = -std::sqrt(2.0 * dV) * w;
        st.t = 0.0;
        Trajectory tr;
        try {
            tr = integrate_exterior(P, st, horizon, opt);
        } catch (const std::exception&) {
            continue;
        }
        if (tr.events.empty()) continue;
        ShootingHit hit;
        hit.start_direction = w;
        hit.arrival_time = tr.events.front().t0;
        hit.miss = (tr.events.front().sigma - sigma).norm();
        hit.rho_limit = tr.events.front().rho_limit;
        hits.push_back(hit);
    }
    return hits;
}

std::string trajectory_csv(const Trajectory& tr) {
    std::ostringstream os;
    os << std::setprecision(17);
    const int d = tr.samples.empty() ? 0 : static_cast<int>(tr.samples.front().x.size());
    os << "t";
    for (int i = 1; i <= d; ++i) os << ",x" << i;
    for (int i = 1; i <= d; ++i) os << ",xi" << i;
    os << ",segment_tag\n";
    for (std::size_t k = 0; k < tr.samples.size(); ++k) {
        const auto& s = tr.samples[k];
        os << s.t;
        for (int i = 0; i < d; ++i) os << ',' << s.x(i);
        for (int i = 0; i < d; ++i) os << ',' << s.xi(i);
        os << ',' << to_string(tr.tags[k]) << '\n';
    }
    return os.str();
}

nlohmann::json events_json(const Trajectory& tr) {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ev : tr.events) {
        nlohmann::json e;
        e["t0"] = ev.t0;
        e["sigma"] = vec(ev.sigma);
        e["rho_limit"] = ev.rho_limit ? nlohmann::json(vec(*ev.rho_limit)) : nlohmann::json(nullptr);
        e["side"] = ev.side == EventSide::Incoming ? "incoming" : "outgoing";
        e["residual"] = ev.residual;
        arr.push_back(e);
    }
    return arr;
}

}  // namespace conelab
