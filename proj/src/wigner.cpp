#include "conelab/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace conelab {

WignerField wigner_transform(const WaveFunction& psi, int x_subsample, std::optional<double> xi_limit) {
    const GridSpec& g = psi.grid;
    if (g.d != 1) throw DimensionMismatch("Wigner transform is implemented for d = 1");
    if (x_subsample < 1 || g.n % x_subsample != 0) throw ConfigError("x subsample must divide the grid size");
    const int N = g.n;
    const double dx = g.dx();
    const double eps = psi.eps;
    const Eigen::VectorXd axis = g.axis();

    // Odd lags need psi on the half-shifted grid; a spectral shift supplies it and
    // gives the full momentum range xi_k = 2 pi eps k / (N dx), |k| < N/2.
    Eigen::FFT<double> fft;
    Eigen::VectorXcd half, hat;
    fft.fwd(hat, psi.values);
    const Eigen::VectorXd kw = g.wavenumbers();
    for (int k = 0; k < N; ++k) hat(k) = (k == N / 2) ? cplx(0.0) : hat(k) * std::exp(cplx(0.0, 0.5 * kw(k) * dx));
    fft.inv(half, hat);

    std::vector<int> ks;
    for (int k = -N / 2; k < N / 2; ++k) {
        const double xi = 2.0 * std::numbers::pi * eps * k / (N * dx);
        if (!xi_limit || std::abs(xi) <= *xi_limit) ks.push_back(k);
    }
    WignerField W;
    W.eps = eps;
    const int rows = N / x_subsample;
    W.x.resize(rows);
    W.xi.resize(static_cast<Eigen::Index>(ks.size()));
    for (std::size_t c = 0; c < ks.size(); ++c) W.xi(c) = 2.0 * std::numbers::pi * eps * ks[c] / (N * dx);
    W.W.resize(rows, W.xi.size());

    auto wrap = [N](int i) { return ((i % N) + N) % N; };
    Eigen::VectorXcd f(N), F(N);
    const double scale = dx / (2.0 * std::numbers::pi * eps);
    for (int r = 0; r < rows; ++r) {
        const int j = r * x_subsample;
        W.x(r) = axis(j);
        for (int m = -N / 2; m < N / 2; ++m) {
            cplx v;
            if (m % 2 == 0) {
                const int l = m / 2;
                v = psi.values(wrap(j + l)) * std::conj(psi.values(wrap(j - l)));
            } else {
                const int l = (m - 1) / 2;  // floor division for odd m
                v = half(wrap(j + l)) * std::conj(half(wrap(j - l - 1)));
            }
            f(wrap(m)) = v;
        }
        fft.fwd(F, f);
        for (std::size_t c = 0; c < ks.size(); ++c) W.W(r, c) = scale * F(wrap(ks[c])).real();
    }
    return W;
}

WignerField husimi_transform(const WaveFunction& psi, int x_subsample, std::optional<double> xi_limit) {
    const GridSpec& g = psi.grid;
    if (g.d != 1) throw DimensionMismatch("Husimi transform is implemented for d = 1");
    if (x_subsample < 1 || g.n % x_subsample != 0) throw ConfigError("x subsample must divide the grid size");
    const int N = g.n;
    const double dx = g.dx();
    const double eps = psi.eps;
    const Eigen::VectorXd axis = g.axis();

    std::vector<int> ks;
    for (int k = -N / 2; k < N / 2; ++k) {
        const double xi = 2.0 * std::numbers::pi * eps * k / (N * dx);
        if (!xi_limit || std::abs(xi) <= *xi_limit) ks.push_back(k);
    }
    WignerField Q;
    Q.eps = eps;
    const int rows = N / x_subsample;
    Q.x.resize(rows);
    Q.xi.resize(static_cast<Eigen::Index>(ks.size()));
    for (std::size_t c = 0; c < ks.size(); ++c) Q.xi(c) = 2.0 * std::numbers::pi * eps * ks[c] / (N * dx);
    Q.W.resize(rows, Q.xi.size());

    // Q(x, xi) = |int psi(y) G(y - x) exp(-i xi y / eps) dy|^2 / (2 pi eps),
    // G(u) = (pi eps)^{-1/4} exp(-u^2 / (2 eps)). The window is cut at 8 widths.
    const int reach = std::min(N / 2, static_cast<int>(std::ceil(8.0 * std::sqrt(eps) / dx)));
    const double gnorm = std::pow(std::numbers::pi * eps, -0.25);
    Eigen::FFT<double> fft;
    Eigen::VectorXcd f(N), F(N);
    const double scale = dx * dx / (2.0 * std::numbers::pi * eps);
    for (int r = 0; r < rows; ++r) {
        const int j = r * x_subsample;
        Q.x(r) = axis(j);
        f.setZero();
        // Offsets m relative to x_j; the phase exp(-i xi x_j / eps) drops out of |.|^2.
        for (int m = -reach; m <= reach; ++m) {
            const double u = m * dx;
            f(((m % N) + N) % N) = psi.values(((j + m) % N + N) % N) * gnorm * std::exp(-u * u / (2.0 * eps));
        }
        fft.fwd(F, f);
        for (std::size_t c = 0; c < ks.size(); ++c) Q.W(r, c) = scale * std::norm(F(((ks[c] % N) + N) % N));
    }
    return Q;
}

double pair_observable(const WignerField& W, const Symbol& a) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < W.W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.W.cols(); ++c) acc += W.W(r, c) * a(W.x(r), W.xi(c));
    return acc * W.dx() * W.dxi();
}

double pair_observable(const WaveFunction& psi, const Symbol& a, int x_subsample) {
    return pair_observable(wigner_transform(psi, x_subsample), a);
}

WignerField peak_field(const WaveFunction& psi, const PeakOptions& opt) {
    return opt.field == PeakField::Husimi ? husimi_transform(psi, opt.x_subsample, opt.xi_limit)
                                          : wigner_transform(psi, opt.x_subsample, opt.xi_limit);
}

PeakSample locate_peak(const WignerField& W, double t, const PeakOptions& opt) {
    const double half = opt.window_factor * std::sqrt(W.eps);
    auto allowed = [&](Eigen::Index r) {
        if (!opt.half_plane) return true;
        return *opt.half_plane > 0 ? W.x(r) > 0.0 : W.x(r) < 0.0;
    };
    Eigen::Index br = -1, bc = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < W.W.rows(); ++r) {
        if (!allowed(r)) continue;
        for (Eigen::Index c = 0; c < W.W.cols(); ++c)
            if (W.W(r, c) > best) {
                best = W.W(r, c);
                br = r;
                bc = c;
            }
    }
    PeakSample s;
    s.t = t;
    if (br < 0) return s;
    const double x0 = W.x(br), k0 = W.xi(bc);

    // Centroid of the positive part inside the window refines the grid argmax.
    double wsum = 0.0, xs = 0.0, ks = 0.0, mass = 0.0;
    for (Eigen::Index r = 0; r < W.W.rows(); ++r) {
        if (!allowed(r) || std::abs(W.x(r) - x0) > half) continue;
        for (Eigen::Index c = 0; c < W.W.cols(); ++c) {
            if (std::abs(W.xi(c) - k0) > half) continue;
            const double w = W.W(r, c);
            mass += w;
            if (w > 0.0) {
                wsum += w;
                xs += w * W.x(r);
                ks += w * W.xi(c);
            }
        }
    }
    s.x = wsum > 0 ? xs / wsum : x0;
    s.xi = wsum > 0 ? ks / wsum : k0;
    s.window_mass = mass * W.dx() * W.dxi();

    // Competing local maxima well away from the main peak.
    const double sep = 10.0 * std::sqrt(W.eps);
    double second = 0.5 * best;
    for (Eigen::Index r = 1; r + 1 < W.W.rows(); ++r) {
        if (!allowed(r)) continue;
        for (Eigen::Index c = 1; c + 1 < W.W.cols(); ++c) {
            const double v = W.W(r, c);
            if (v <= second) continue;
            if (std::hypot(W.x(r) - x0, W.xi(c) - k0) <= sep) continue;
            bool is_max = true;
            for (int dr = -1; dr <= 1 && is_max; ++dr)
                for (int dc = -1; dc <= 1; ++dc)
                    if ((dr || dc) && W.W(r + dr, c + dc) > v) {
                        is_max = false;
                        break;
                    }
            if (is_max) {
                second = v;
                s.multi_peak = true;
                s.second_peak = std::make_pair(W.x(r), W.xi(c));
            }
        }
    }
    return s;
}

std::vector<PeakSample> peak_track(const std::vector<WaveFunction>& snapshots, const PeakOptions& opt) {
    std::vector<PeakSample> out;
    for (const auto& psi : snapshots) {
        if (!snapshots.empty() && (psi.eps != snapshots.front().eps || psi.grid.n != snapshots.front().grid.n))
            throw ConfigError("snapshots must share grid and eps");
        out.push_back(locate_peak(peak_field(psi, opt), psi.t, opt));
    }
    return out;
}

double cut_function(double r) {
    r = std::abs(r);
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    const double u = 2.0 * (r - 0.5);
    return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

ZoneMasses zone_masses(const WaveFunction& psi, double R, double delta) {
    if (!(psi.eps * R < delta)) throw ScaleOrderViolation("zone masses need eps R < delta");
    ZoneMasses z;
    z.R = R;
    z.delta = delta;
    const GridSpec& g = psi.grid;
    double total = 0.0;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        const double m = std::norm(psi.values(k));
        const double xp = g.point(k)(0);
        const double ci = cut_function(xp / (psi.eps * R));
        const double co = cut_function(xp / delta);
        z.inner += ci * m;
        z.middle += (1.0 - ci) * co * m;
        z.outer += (1.0 - co) * m;
        total += m;
    }
    z.inner /= total;
    z.middle /= total;
    z.outer /= total;
    return z;
}

EmpiricalNu empirical_nu(const WaveFunction& psi, double window) {
    EmpiricalNu nu;
    nu.window = window;
    const GridSpec& g = psi.grid;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        const double xp = g.point(k)(0);
        const double m = std::norm(psi.values(k)) * g.cell();
        if (std::abs(xp) > window) continue;
        if (xp > 0.0) nu.plus += m;
        else if (xp < 0.0) nu.minus += m;
        else {
            nu.plus += 0.5 * m;  // a node on x = 0 is shared
            nu.minus += 0.5 * m;
        }
    }
    return nu;
}

std::string wigner_csv(const WignerField& W) {
    std::ostringstream os;
    os << std::setprecision(12) << "x,xi,W\n";
    for (Eigen::Index r = 0; r < W.W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.W.cols(); ++c) os << W.x(r) << ',' << W.xi(c) << ',' << W.W(r, c) << '\n';
    return os.str();
}

}  // namespace conelab
