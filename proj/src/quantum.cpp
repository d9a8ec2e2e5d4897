#include "conelab/quantum.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace conelab {

Eigen::VectorXd GridSpec::axis() const {
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x(j) = -half_width + j * dx();
    return x;
}

Eigen::VectorXd GridSpec::wavenumbers() const {
    Eigen::VectorXd k(n);
    const double dk = std::numbers::pi / half_width;
    for (int j = 0; j < n; ++j) k(j) = dk * (j < n / 2 ? j : j - n);
    return k;
}

Eigen::VectorXd GridSpec::point(Eigen::Index flat) const {
    Eigen::VectorXd x(d);
    if (d == 1) {
        x(0) = -half_width + flat * dx();
    } else {
        x(0) = -half_width + (flat / n) * dx();
        x(1) = -half_width + (flat % n) * dx();
    }
    return x;
}

void GridSpec::validate() const {
    if (d != 1 && d != 2) throw DimensionMismatch("quantum grids support d = 1 or 2");
    if (n < 4 || (n & (n - 1)) != 0) throw ConfigError("grid size must be a power of two");
    if (!(half_width > 0.0)) throw ConfigError("grid half width must be positive");
}

Profile bump_profile(double a, double b) {
    return [a, b](const Eigen::VectorXd& y) -> cplx {
        const double u = (2.0 * y(0) - a - b) / (b - a);
        if (std::abs(u) >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - u * u));
    };
}

Profile gaussian_profile(double width) {
    return [width](const Eigen::VectorXd& y) -> cplx { return std::exp(-0.5 * y.squaredNorm() / (width * width)); };
}

Profile sampled_profile(const Eigen::VectorXd& y, const Eigen::VectorXcd& v) {
    // Degree-7 Lagrange interpolation on the uniform sample grid.
    return [y, v](const Eigen::VectorXd& q) -> cplx {
        const Eigen::Index m = y.size();
        const double h = y(1) - y(0);
        const double s = (q(0) - y(0)) / h;
        if (s < 0.0 || s > m - 1) return 0.0;
        Eigen::Index i0 = static_cast<Eigen::Index>(std::floor(s)) - 3;
        i0 = std::clamp<Eigen::Index>(i0, 0, std::max<Eigen::Index>(0, m - 8));
        cplx acc = 0.0;
        for (Eigen::Index i = i0; i < std::min(i0 + 8, m); ++i) {
            double w = 1.0;
            for (Eigen::Index j = i0; j < std::min(i0 + 8, m); ++j)
                if (j != i) w *= (s - j) / static_cast<double>(i - j);
            acc += w * v(i);
        }
        return acc;
    };
}

double boundary_mass(const WaveFunction& psi) {
    const GridSpec& g = psi.grid;
    const int n = g.n;
    double m = 0.0;
    auto near = [n](int j) { return j < 2 || j >= n - 2; };
    if (g.d == 1) {
        for (int j = 0; j < n; ++j)
            if (near(j)) m += std::norm(psi.values(j));
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (near(i) || near(j)) m += std::norm(psi.values(static_cast<Eigen::Index>(i) * n + j));
    }
    return m * g.cell();
}

WaveFunction init_concentrated_state(const GridSpec& grid, double eps, const Profile& a, const Eigen::VectorXd& x0,
                                     const Eigen::VectorXd& xi0) {
    grid.validate();
    if (x0.size() != grid.d || xi0.size() != grid.d) throw DimensionMismatch("state center dimension mismatch");
    WaveFunction psi;
    psi.grid = grid;
    psi.eps = eps;
    psi.values.resize(grid.size());
    const double se = std::sqrt(eps);
    const double amp = std::pow(eps, -0.25 * grid.d);
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const Eigen::VectorXd x = grid.point(k);
        const Eigen::VectorXd y = (x - x0) / se;
        psi.values(k) = amp * a(y) * std::exp(cplx(0.0, xi0.dot(x - x0) / eps));
    }
    const double nrm = psi.norm();
    if (nrm == 0.0) throw ProfileClipped("profile vanishes on the grid");
    psi.values /= nrm;
    if (boundary_mass(psi) > 1e-6) throw ProfileClipped("profile support reaches the grid boundary");
    return psi;
}

Eigen::VectorXd potential_on_grid(const GridSpec& grid, const ConicalPotential& P) {
    if (P.d != grid.d) throw DimensionMismatch("potential and grid dimensions differ");
    Eigen::VectorXd V(grid.size());
    for (Eigen::Index k = 0; k < grid.size(); ++k) V(k) = eval_V(P, grid.point(k));
    return V;
}

void fft_forward(Eigen::FFT<double>& fft, const GridSpec& grid, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    if (grid.d == 1) {
        fft.fwd(out, in);
        return;
    }
    const int n = grid.n;
    out = in;
    Eigen::VectorXcd a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a = out.segment(static_cast<Eigen::Index>(i) * n, n);
        fft.fwd(b, a);
        out.segment(static_cast<Eigen::Index>(i) * n, n) = b;
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) a(i) = out(static_cast<Eigen::Index>(i) * n + j);
        fft.fwd(b, a);
        for (int i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i) * n + j) = b(i);
    }
}

namespace {

void fft_inverse(Eigen::FFT<double>& fft, const GridSpec& grid, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    if (grid.d == 1) {
        fft.inv(out, in);
        return;
    }
    const int n = grid.n;
    out = in;
    Eigen::VectorXcd a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a = out.segment(static_cast<Eigen::Index>(i) * n, n);
        fft.inv(b, a);
        out.segment(static_cast<Eigen::Index>(i) * n, n) = b;
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) a(i) = out(static_cast<Eigen::Index>(i) * n + j);
        fft.inv(b, a);
        for (int i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i) * n + j) = b(i);
    }
}

// |k|^2 over the flat spectral grid.
Eigen::VectorXd k_squared(const GridSpec& grid) {
    const Eigen::VectorXd k = grid.wavenumbers();
    if (grid.d == 1) return k.array().square();
    Eigen::VectorXd k2(grid.size());
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j) k2(static_cast<Eigen::Index>(i) * grid.n + j) = k(i) * k(i) + k(j) * k(j);
    return k2;
}

}  // namespace

StrangStepper::StrangStepper(const GridSpec& grid, double eps, const ConicalPotential& P, double dt)
    : grid_(grid), dt_(dt) {
    grid.validate();
    const Eigen::VectorXd V = potential_on_grid(grid, P);
    half_phase_.resize(V.size());
    for (Eigen::Index k = 0; k < V.size(); ++k) half_phase_(k) = std::exp(cplx(0.0, -V(k) * dt / (2.0 * eps)));
    const Eigen::VectorXd k2 = k_squared(grid);
    kinetic_.resize(k2.size());
    for (Eigen::Index k = 0; k < k2.size(); ++k) kinetic_(k) = std::exp(cplx(0.0, -eps * k2(k) * dt / 2.0));
}

void StrangStepper::step(Eigen::VectorXcd& psi) {
    psi.array() *= half_phase_.array();
    fft_forward(fft_, grid_, psi, buf_);
    buf_.array() *= kinetic_.array();
    fft_inverse(fft_, grid_, buf_, psi);
    psi.array() *= half_phase_.array();
}

WaveFunction step_strang(const WaveFunction& psi, const ConicalPotential& P, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_strang needs dt > 0");
    StrangStepper s(psi.grid, psi.eps, P, dt);
    WaveFunction out = psi;
    s.step(out.values);
    out.t += dt;
    return out;
}

std::vector<WaveFunction> propagate(WaveFunction psi, const ConicalPotential& P, double t_end, double dt,
                                    const std::vector<double>& snapshot_times, const PropagateOptions& opt) {
    const double span = t_end - psi.t;
    if (span < 0.0) throw std::invalid_argument("propagate runs forward in time");
    for (double ts : snapshot_times)
        if (ts < psi.t - 1e-12 || ts > t_end + 1e-12) throw std::invalid_argument("snapshot time outside the run");
    const long steps = span > 0.0 ? static_cast<long>(std::ceil(span / dt - 1e-9)) : 0;
    const double h = steps > 0 ? span / steps : dt;
    const double t0 = psi.t;

    std::vector<std::pair<long, std::size_t>> marks;
    for (std::size_t i = 0; i < snapshot_times.size(); ++i)
        marks.emplace_back(steps > 0 ? std::lround((snapshot_times[i] - t0) / h) : 0, i);
    std::sort(marks.begin(), marks.end());
    std::vector<WaveFunction> out(snapshot_times.size());

    std::size_t next = 0;
    auto take = [&](long k) {
        while (next < marks.size() && marks[next].first == k) {
            out[marks[next].second] = psi;
            ++next;
        }
    };
    take(0);
    if (steps > 0) {
        StrangStepper stepper(psi.grid, psi.eps, P, h);
        for (long k = 1; k <= steps; ++k) {
            stepper.step(psi.values);
            psi.t = t0 + k * h;
            if ((k % opt.check_every == 0 || k == steps) && boundary_mass(psi) > opt.boundary_tol)
                throw BoundaryMassExceeded("wave function reached the boundary guard band at t = " +
                                           std::to_string(psi.t));
            take(k);
        }
    }
    return out;
}

Observables observables(const WaveFunction& psi) {
    const GridSpec& g = psi.grid;
    const int d = g.d;
    Observables o;
    o.position_mean = Eigen::VectorXd::Zero(d);
    o.position_variance = Eigen::VectorXd::Zero(d);
    o.momentum_mean = Eigen::VectorXd::Zero(d);
    const Eigen::VectorXd rho = psi.values.cwiseAbs2() * g.cell();
    const double mass = rho.sum();
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        const Eigen::VectorXd x = g.point(k);
        o.position_mean += rho(k) * x;
        o.position_variance += rho(k) * x.cwiseAbs2();
    }
    o.position_mean /= mass;
    o.position_variance = o.position_variance / mass - o.position_mean.cwiseAbs2();

    Eigen::FFT<double> fft;
    Eigen::VectorXcd hat;
    fft_forward(fft, g, psi.values, hat);
    Eigen::VectorXd kv = g.wavenumbers();
    kv(g.n / 2) = 0.0;  // the Nyquist mode has no signed momentum
    const Eigen::VectorXd p = hat.cwiseAbs2();
    const double total = p.sum();
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        if (d == 1) {
            o.momentum_mean(0) += kv(k) * p(k);
        } else {
            o.momentum_mean(0) += kv(k / g.n) * p(k);
            o.momentum_mean(1) += kv(k % g.n) * p(k);
        }
    }
    o.momentum_mean *= psi.eps / total;
    return o;
}

double energy(const WaveFunction& psi, const ConicalPotential& P) {
    const GridSpec& g = psi.grid;
    Eigen::FFT<double> fft;
    Eigen::VectorXcd hat;
    fft_forward(fft, g, psi.values, hat);
    const Eigen::VectorXd p = hat.cwiseAbs2();
    const Eigen::VectorXd k2 = k_squared(g);
    const double mass = psi.values.squaredNorm() * g.cell();
    const double kin = 0.5 * psi.eps * psi.eps * k2.dot(p) / p.sum();
    const double pot = potential_on_grid(g, P).dot(psi.values.cwiseAbs2()) * g.cell() / mass;
    return kin + pot;
}

std::string snapshot_csv(const WaveFunction& psi) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << (psi.grid.d == 1 ? "x" : "x1,x2") << ",re,im\n";
    for (Eigen::Index k = 0; k < psi.grid.size(); ++k) {
        const Eigen::VectorXd x = psi.grid.point(k);
        for (int i = 0; i < psi.grid.d; ++i) os << x(i) << ',';
        os << psi.values(k).real() << ',' << psi.values(k).imag() << '\n';
    }
    return os.str();
}

}  // namespace conelab
