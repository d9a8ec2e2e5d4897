#include "conelab/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace conelab {

Eigen::VectorXd ProfileGridSpec::axis() const {
    Eigen::VectorXd y(n);
    for (int j = 0; j < n; ++j) y(j) = -half_width + j * dy();
    return y;
}

PacketProfile sample_profile(const Profile& a, const ProfileGridSpec& spec, double t) {
    PacketProfile p;
    p.y = spec.axis();
    p.v.resize(spec.n);
    Eigen::VectorXd q(1);
    for (int j = 0; j < spec.n; ++j) {
        q(0) = p.y(j);
        p.v(j) = a(q);
    }
    p.t = t;
    return p;
}

double ActionRecord::at(double time) const {
    if (t.empty()) return 0.0;
    if (time <= t.front()) return S.front();
    if (time >= t.back()) return S.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    const std::size_t i = static_cast<std::size_t>(it - t.begin());
    const double h = t[i] - t[i - 1];
    const double u = (time - t[i - 1]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * S[i - 1] + h10 * h * L[i - 1] + h01 * S[i] + h11 * h * L[i];
}

ActionRecord action(const Trajectory& traj, const ConicalPotential& P) {
    ActionRecord rec;
    for (auto tag : traj.tags)
        if (tag == SegmentTag::Insider) throw std::invalid_argument("action is defined for exterior trajectories");
    const auto& S = traj.samples;
    std::vector<double> L(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) L[i] = 0.5 * S[i].xi.squaredNorm() - eval_V(P, S[i].x);
    rec.L = L;
    rec.t.push_back(S.front().t);
    rec.S.push_back(0.0);
    for (std::size_t i = 1; i < S.size(); ++i) {
        // Simpson on the Hermite midpoint when it is available keeps the phase
        // error far below eps.
        const double h = S[i].t - S[i - 1].t;
        double mid;
        try {
            const PhasePoint m = state_at(P, traj, 0.5 * (S[i].t + S[i - 1].t));
            mid = 0.5 * m.xi.squaredNorm() - eval_V(P, m.x);
            rec.S.push_back(rec.S.back() + h / 6.0 * (L[i - 1] + 4.0 * mid + L[i]));
        } catch (const std::exception&) {
            rec.S.push_back(rec.S.back() + 0.5 * h * (L[i - 1] + L[i]));
        }
        rec.t.push_back(S[i].t);
    }
    return rec;
}

namespace {

Eigen::VectorXd profile_wavenumbers(const PacketProfile& p) {
    const Eigen::Index n = p.y.size();
    const double L = 0.5 * n * (p.y(1) - p.y(0));
    Eigen::VectorXd k(n);
    for (Eigen::Index j = 0; j < n; ++j) k(j) = std::numbers::pi / L * (j < n / 2 ? j : j - n);
    return k;
}

double hessian_along(const ConicalPotential& P, const Trajectory& traj, double t) {
    const PhasePoint s = state_at(P, traj, t);
    return hess_V(P, s.x)(0, 0);
}

}  // namespace

PacketProfile free_profile(const PacketProfile& v, double span) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd hat;
    fft.fwd(hat, v.v);
    const Eigen::VectorXd k = profile_wavenumbers(v);
    for (Eigen::Index j = 0; j < hat.size(); ++j) hat(j) *= std::exp(cplx(0.0, -0.5 * k(j) * k(j) * span));
    PacketProfile out = v;
    fft.inv(out.v, hat);
    out.t = v.t + span;
    return out;
}

std::vector<PacketProfile> propagate_profile(const PacketProfile& v0, const Trajectory& traj,
                                             const ConicalPotential& P, double dt,
                                             const std::vector<double>& output_times) {
    if (P.d != 1) throw DimensionMismatch("profile propagation is implemented for d = 1");
    if (!(dt > 0.0)) throw std::invalid_argument("profile step must be positive");
    std::vector<PacketProfile> out;
    PacketProfile cur = v0;
    Eigen::FFT<double> fft;
    const Eigen::VectorXd k = profile_wavenumbers(v0);
    const Eigen::ArrayXd y2 = v0.y.array().square();
    Eigen::VectorXcd hat;
    for (double target : output_times) {
        if (target < cur.t - 1e-12) throw std::invalid_argument("output times must be ascending and after the start");
        const double span = target - cur.t;
        const long steps = span > 1e-14 ? static_cast<long>(std::ceil(span / dt - 1e-9)) : 0;
        const double h = steps ? span / steps : 0.0;
        Eigen::VectorXcd kin(k.size());
        for (Eigen::Index j = 0; j < k.size(); ++j) kin(j) = std::exp(cplx(0.0, -0.5 * k(j) * k(j) * h));
        const double t0 = cur.t;
        double H_prev = steps ? hessian_along(P, traj, t0) : 0.0;
        for (long s = 0; s < steps; ++s) {
            const double tb = t0 + (s + 1) * h;
            const double H_next = hessian_along(P, traj, tb);
            cur.v.array() *= (cplx(0.0, -0.25 * h * H_prev) * y2).exp();
            fft.fwd(hat, cur.v);
            hat.array() *= kin.array();
            fft.inv(cur.v, hat);
            cur.v.array() *= (cplx(0.0, -0.25 * h * H_next) * y2).exp();
            H_prev = H_next;
        }
        cur.t = target;
        out.push_back(cur);
    }
    return out;
}

namespace {

// Degree-7 Lagrange interpolation on the profile grid.
cplx interpolate_profile(const PacketProfile& p, double yq) {
    const Eigen::Index m = p.y.size();
    const double h = p.y(1) - p.y(0);
    const double s = (yq - p.y(0)) / h;
    if (s < 0.0 || s > m - 1) return 0.0;
    Eigen::Index i0 = static_cast<Eigen::Index>(std::floor(s)) - 3;
    i0 = std::clamp<Eigen::Index>(i0, 0, m - 8);
    const double frac = s - std::floor(s);
    if (frac == 0.0) return p.v(static_cast<Eigen::Index>(s));
    cplx acc = 0.0;
    for (Eigen::Index i = i0; i < i0 + 8; ++i) {
        double w = 1.0;
        for (Eigen::Index j = i0; j < i0 + 8; ++j)
            if (j != i) w *= (s - j) / static_cast<double>(i - j);
        acc += w * p.v(i);
    }
    return acc;
}

}  // namespace

WaveFunction assemble_packet(const PacketProfile& v, const Eigen::VectorXd& x_t, const Eigen::VectorXd& xi_t, double S,
                             double eps, const GridSpec& grid, bool normalize) {
    grid.validate();
    if (grid.d != 1 || x_t.size() != 1) throw DimensionMismatch("packet assembly is implemented for d = 1");
    WaveFunction psi;
    psi.grid = grid;
    psi.eps = eps;
    psi.t = v.t;
    psi.values.resize(grid.size());
    const double se = std::sqrt(eps);
    const double amp = std::pow(eps, -0.25);
    const Eigen::VectorXd ax = grid.axis();
    for (int j = 0; j < grid.n; ++j) {
        const double dxj = ax(j) - x_t(0);
        const double phase = (xi_t(0) * dxj + S) / eps;
        psi.values(j) = amp * interpolate_profile(v, dxj / se) * std::exp(cplx(0.0, phase));
    }
    if (normalize) {
        const double nrm = psi.norm();
        if (nrm == 0.0) throw ProfileClipped("packet vanishes on the grid");
        psi.values /= nrm;
    }
    if (boundary_mass(psi) > 1e-6 * std::max(1.0, psi.norm() * psi.norm())) throw ProfileClipped("packet reaches the grid boundary");
    return psi;
}

double remainder_norm(const PacketProfile& v, const Eigen::VectorXd& x_t, const ConicalPotential& P, double eps) {
    const double se = std::sqrt(eps);
    const double V0 = eval_V(P, x_t);
    const double V1 = grad_V(P, x_t)(0);
    const double V2 = hess_V(P, x_t)(0, 0);
    double acc = 0.0;
    Eigen::VectorXd x(1);
    for (Eigen::Index j = 0; j < v.y.size(); ++j) {
        const double m = std::norm(v.v(j));
        if (m == 0.0) continue;
        const double y = v.y(j);
        x(0) = x_t(0) + se * y;
        const double R = eval_V(P, x) - V0 - se * V1 * y - 0.5 * eps * V2 * y * y;
        acc += R * R * m;
    }
    return std::sqrt(acc * (v.y(1) - v.y(0))) / eps;
}

double error_functional(const std::vector<PacketProfile>& trace, const Trajectory& traj, const ConicalPotential& P,
                        double eps) {
    double total = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double r = remainder_norm(trace[i], state_at(P, traj, trace[i].t).x, P, eps);
        if (i > 0) total += 0.5 * (r + prev) * (trace[i].t - trace[i - 1].t);
        prev = r;
    }
    return total;
}

int feasible_k(double alpha, double beta) {
    for (int k = 1; k <= 64; ++k)
        if (k / 2.0 - (k + 1) * alpha - (2 * k + 3) * beta > 0.0) return k;
    throw SchemeInfeasible("no k <= 64 satisfies the switching constraint");
}

void CrossingScheme::validate() const {
    if (!(eta <= 0.0)) throw SchemeInfeasible("crossing scheme needs eta <= 0");
    if (!(beta >= 0.0 && beta < 0.1)) throw SchemeInfeasible("beta must lie in [0, 0.1)");
    if (!(2.0 * alpha - beta - 0.5 > 0.0)) throw SchemeInfeasible("switching exponent too small: 2 alpha - beta - 1/2 <= 0");
    if (!(k / 2.0 - (k + 1) * alpha - (2 * k + 3) * beta > 0.0)) {
        feasible_k(alpha, beta);
        throw SchemeInfeasible("stored k violates the switching constraint");
    }
}

PhasePoint crossing_state(double eta, double t) {
    PhasePoint s;
    s.t = t;
    const double sg = t >= 0 ? -1.0 : 1.0;
    s.x = Eigen::VectorXd::Constant(1, eta * t + sg * 0.5 * t * t);
    s.xi = Eigen::VectorXd::Constant(1, eta + sg * t);
    return s;
}

double crossing_action(double eta, double t) { return 0.5 * eta * eta * t - eta * t * std::abs(t) + t * t * t / 3.0; }

double crossing_phase(double t, double y, double eta, double eps) {
    const double se = std::sqrt(eps);
    const double vs = eta + std::sqrt(eta * eta + 2.0 * se * std::abs(y));
    if (t > 0.0 && y > 0.0) {
        const double m = std::min(t, vs);
        return -(eta * m * m - m * m * m / 3.0 + 2.0 * se * y * m) / eps;
    }
    if (t < 0.0 && y < 0.0) {
        const double m = std::max(t, -vs);
        return (eta * m * m + m * m * m / 3.0 + 2.0 * se * y * m) / eps;
    }
    return 0.0;
}

std::vector<PacketProfile> crossing_profile(const Profile& a, const CrossingScheme& scheme, double eps,
                                            const std::vector<double>& times, const ProfileGridSpec& spec) {
    scheme.validate();
    const double eta = scheme.eta_eps(eps);
    const double tau = scheme.tau(eps);
    const PacketProfile base = sample_profile(a, spec, 0.0);
    auto phased = [&](double t) {
        PacketProfile p = base;
        for (Eigen::Index j = 0; j < p.y.size(); ++j) p.v(j) *= std::exp(cplx(0.0, -crossing_phase(t, p.y(j), eta, eps)));
        p.t = t;
        return p;
    };
    const PacketProfile at_plus = phased(tau), at_minus = phased(-tau);
    std::vector<PacketProfile> out;
    for (double t : times) {
        if (std::abs(t) <= tau) out.push_back(phased(t));
        else if (t > 0) out.push_back(free_profile(at_plus, t - tau));
        else out.push_back(free_profile(at_minus, t + tau));
    }
    return out;
}

}  // namespace conelab
