#include "msa/ns_synth.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <random>
#include <sstream>

#include "engine.hpp"
#include "json.hpp"
#include "msa/norms.hpp"
#include "msa/parallel.hpp"

namespace msa {

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 2-D real FFT on an n x n layer; x is the slow index.
class Fft2 {
public:
    explicit Fft2(int n) : n_(n), nh_(n / 2 + 1) {
        std::lock_guard<std::mutex> lk(detail::fftw_mutex());
        r_ = fftw_alloc_real(static_cast<std::size_t>(n) * n);
        c_ = fftw_alloc_complex(static_cast<std::size_t>(n) * nh_);
        fwd_ = fftw_plan_dft_r2c_2d(n, n, r_, c_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_2d(n, n, c_, r_, FFTW_ESTIMATE);
        if (!fwd_ || !inv_) throw ResourceError("FFT plan creation failed");
    }
    ~Fft2() {
        std::lock_guard<std::mutex> lk(detail::fftw_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(r_);
        fftw_free(c_);
    }
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    int n() const { return n_; }
    std::size_t csize() const { return static_cast<std::size_t>(n_) * nh_; }
    int kx(std::size_t idx) const {
        int i = static_cast<int>(idx / nh_);
        return i <= n_ / 2 ? i : i - n_;
    }
    int ky(std::size_t idx) const { return static_cast<int>(idx % nh_); }
    bool nyq_x(std::size_t idx) const { return static_cast<int>(idx / nh_) == n_ / 2; }
    bool nyq_y(std::size_t idx) const { return ky(idx) == n_ / 2; }

    std::vector<cplx> forward(const std::vector<double>& a) {
        std::memcpy(r_, a.data(), a.size() * sizeof(double));
        fftw_execute(fwd_);
        std::vector<cplx> out(csize());
        std::memcpy(reinterpret_cast<void*>(out.data()), c_, csize() * sizeof(fftw_complex));
        return out;
    }
    std::vector<double> inverse(const std::vector<cplx>& a) {
        std::memcpy(reinterpret_cast<void*>(c_), a.data(), csize() * sizeof(fftw_complex));
        fftw_execute(inv_);
        const std::size_t N = static_cast<std::size_t>(n_) * n_;
        std::vector<double> out(N);
        const double s = 1.0 / static_cast<double>(N);
        for (std::size_t i = 0; i < N; ++i) out[i] = r_[i] * s;
        return out;
    }
    // d_x^a d_y^b in spectral space; odd derivatives drop the Nyquist row / column.
    std::vector<cplx> deriv(const std::vector<cplx>& a, int ax, int by) const {
        std::vector<cplx> out(a.size());
        const cplx I(0.0, 1.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if ((ax % 2 && nyq_x(i)) || (by % 2 && nyq_y(i))) {
                out[i] = 0.0;
                continue;
            }
            out[i] = a[i] * std::pow(I * static_cast<double>(kx(i)), ax) * std::pow(I * static_cast<double>(ky(i)), by);
        }
        return out;
    }

private:
    int n_, nh_;
    double* r_ = nullptr;
    fftw_complex* c_ = nullptr;
    fftw_plan fwd_ = nullptr, inv_ = nullptr;
};

void check_ns_grid(const GridSpec& g) {
    if (g.D != 3 || g.n[0] != g.n[1] || !g.all_periodic()) throw DomainError("flow data needs an n x n x nz periodic grid");
    if (std::fabs(g.extent(0) - kTwoPi) > 1e-9 || std::fabs(g.extent(1) - kTwoPi) > 1e-9)
        throw DomainError("flow grid must span [0, 2pi)^2");
    if (g.n[0] % 2) throw DomainError("flow grid needs even n");
}

// z = 0 layer of slice k as an n x n array.
std::vector<double> layer(const ScalarField& f, int k) {
    const GridSpec& g = f.grid;
    const int n = g.n[0];
    std::vector<double> out(static_cast<std::size_t>(n) * n);
    const double* s = f.slice(k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i * n + j] = s[g.index(i, j, 0)];
    return out;
}

void set_layer(ScalarField& f, int k, const std::vector<double>& v) {
    const GridSpec& g = f.grid;
    const int n = g.n[0];
    double* s = f.slice(k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int z = 0; z < g.n[2]; ++z) s[g.index(i, j, z)] = v[i * n + j];
}

double layer_sum_sq(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

int binom(int n, int k) {
    int r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Fills omega, P, grad_u, hess_P of slice k from (u1, u2) on the layer.
void derive_slice(FlowSeries& s, Fft2& F, int k, const std::vector<double>& u1, const std::vector<double>& u2) {
    const int n = F.n();
    const std::size_t N = static_cast<std::size_t>(n) * n;
    auto U1 = F.forward(u1), U2 = F.forward(u2);
    auto d = [&](const std::vector<cplx>& a, int ax, int by) { return F.inverse(F.deriv(a, ax, by)); };
    auto u1x = d(U1, 1, 0), u1y = d(U1, 0, 1), u2x = d(U2, 1, 0), u2y = d(U2, 0, 1);
    std::vector<double> w(N), gu(N);
    for (std::size_t i = 0; i < N; ++i) {
        w[i] = u2x[i] - u1y[i];
        gu[i] = std::sqrt(u1x[i] * u1x[i] + u1y[i] * u1y[i] + u2x[i] * u2x[i] + u2y[i] * u2y[i]);
    }
    // -Lap P = d_i d_j (u_i u_j)
    std::vector<double> a11(N), a12(N), a22(N);
    for (std::size_t i = 0; i < N; ++i) a11[i] = u1[i] * u1[i], a12[i] = u1[i] * u2[i], a22[i] = u2[i] * u2[i];
    auto A11 = F.forward(a11), A12 = F.forward(a12), A22 = F.forward(a22);
    std::vector<cplx> Ph(F.csize());
    for (std::size_t i = 0; i < Ph.size(); ++i) {
        const double kx = F.kx(i), ky = F.ky(i), k2 = kx * kx + ky * ky;
        if (k2 == 0.0) continue;
        Ph[i] = -(kx * kx * A11[i] + 2.0 * kx * ky * A12[i] + ky * ky * A22[i]) / k2;
    }
    auto P = F.inverse(Ph);
    auto pxx = d(Ph, 2, 0), pxy = d(Ph, 1, 1), pyy = d(Ph, 0, 2);
    std::vector<double> hp(N);
    for (std::size_t i = 0; i < N; ++i) hp[i] = std::sqrt(pxx[i] * pxx[i] + 2.0 * pxy[i] * pxy[i] + pyy[i] * pyy[i]);
    set_layer(s.u.comp[0], k, u1);
    set_layer(s.u.comp[1], k, u2);
    set_layer(s.omega, k, w);
    set_layer(s.P, k, P);
    set_layer(s.grad_u, k, gu);
    set_layer(s.hess_P, k, hp);
}

FlowSeries empty_series(const GridSpec& g, const TimeSpec& ts, double nu) {
    FlowSeries s;
    s.grid = g;
    s.time = ts;
    s.nu = nu;
    s.u = VectorField::make(g, 3, ts);
    s.omega = ScalarField::make(g, ts);
    s.P = ScalarField::make(g, ts);
    s.grad_u = ScalarField::make(g, ts);
    s.hess_P = ScalarField::make(g, ts);
    for (auto* f : {&s.omega, &s.P, &s.grad_u, &s.hess_P}) f->extension = Extension::Periodic;
    for (auto& c : s.u.comp) c.extension = Extension::Periodic;
    return s;
}

double layer_weight(const GridSpec& g) { return FlowSeries::z_weight * g.h[0] * g.h[1]; }

}  // namespace

GridSpec ns_grid(int n, int nz) {
    if (n < 4 || n % 2) throw DomainError("flow grid needs even n >= 4");
    if (nz < 1) throw DomainError("flow grid needs nz >= 1");
    GridSpec g;
    g.D = 3;
    g.n = {n, n, nz};
    const double h = kTwoPi / n;
    g.h = {h, h, h};
    g.periodic = {true, true, true};
    g.validate();
    return g;
}

double FlowSeries::hess_P_l1() const {
    const double w = layer_weight(grid) * time.dt;
    double acc = 0.0;
    for (int k = 0; k < time.nt; ++k)
        for (double v : layer(hess_P, k)) acc += v * w;
    return acc;
}

double FlowSeries::energy_excess() const {
    if (energy0 <= 0.0) return 0.0;
    double worst = -kInf;
    for (std::size_t k = 0; k < energy.size(); ++k) worst = std::max(worst, 0.5 * energy[k] + dissipation[k] - 0.5 * energy0);
    return worst / (0.5 * energy0);
}

VectorField taylor_green_velocity(const GridSpec& g, double amplitude) {
    check_ns_grid(g);
    VectorField u = VectorField::make(g, 3);
    for (std::size_t p = 0; p < g.size(); ++p) {
        Point x = g.center(p);
        u.comp[0].data[p] = amplitude * std::cos(x[0]) * std::sin(x[1]);
        u.comp[1].data[p] = -amplitude * std::sin(x[0]) * std::cos(x[1]);
    }
    return u;
}

VectorField random_solenoidal(const GridSpec& g, unsigned seed, double amplitude, int kmax) {
    check_ns_grid(g);
    const int n = g.n[0];
    if (kmax < 1 || 3 * kmax >= n) throw DomainError("random field modes exceed the dealiased band");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N01(0.0, 1.0);
    // psi = sum a cos(kx x + ky y) + b sin(...), modes enumerated in a fixed order.
    struct Mode {
        int kx, ky;
        double a, b;
    };
    std::vector<Mode> modes;
    for (int kx = 0; kx <= kmax; ++kx)
        for (int ky = -kmax; ky <= kmax; ++ky) {
            if (kx == 0 && ky <= 0) continue;
            if (kx * kx + ky * ky > kmax * kmax) continue;
            double k2 = kx * kx + ky * ky;
            double sc = 1.0 / k2;
            modes.push_back({kx, ky, sc * N01(rng), sc * N01(rng)});
        }
    VectorField u = VectorField::make(g, 3);
    const int nz = g.n[2];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = g.center(0, i), y = g.center(1, j);
            double u1 = 0.0, u2 = 0.0;
            for (const auto& m : modes) {
                const double ph = m.kx * x + m.ky * y;
                const double dpsi = -m.a * std::sin(ph) + m.b * std::cos(ph);  // d/dph
                u1 += m.ky * dpsi;   // d_y psi
                u2 -= m.kx * dpsi;   // -d_x psi
            }
            for (int z = 0; z < nz; ++z) {
                u.comp[0].data[g.index(i, j, z)] = u1;
                u.comp[1].data[g.index(i, j, z)] = u2;
            }
        }
    double mx = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) mx = std::max(mx, std::hypot(u.comp[0].data[p], u.comp[1].data[p]));
    if (mx > 0.0)
        for (int c = 0; c < 2; ++c)
            for (double& v : u.comp[c].data) v *= amplitude / mx;
    return u;
}

FlowSeries taylor_green_series(double nu, const GridSpec& g, double T, int nt, double amplitude) {
    check_ns_grid(g);
    if (!(T > 0.0) || nt < 1) throw DomainError("series needs T > 0 and nt >= 1");
    const double dt = T / nt;
    FlowSeries s = empty_series(g, TimeSpec{nt, dt, dt}, nu);
    const int n = g.n[0];
    const double A = amplitude, A2 = A * A;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    s.energy0 = FlowSeries::z_weight * 2.0 * pi2 * A2;
    for (int k = 0; k < nt; ++k) {
        const double t = s.time.time(k);
        const double e2 = std::exp(-2.0 * nu * t), e4 = e2 * e2;
        std::vector<double> u1(n * n), u2(n * n), w(n * n), P(n * n), gu(n * n), hp(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x = g.center(0, i), y = g.center(1, j);
                const double cx = std::cos(x), sx = std::sin(x), cy = std::cos(y), sy = std::sin(y);
                const int q = i * n + j;
                u1[q] = A * cx * sy * e2;
                u2[q] = -A * sx * cy * e2;
                w[q] = -2.0 * A * cx * cy * e2;
                P[q] = -0.25 * A2 * (std::cos(2 * x) + std::cos(2 * y)) * e4;
                gu[q] = A * e2 * std::sqrt(2.0 * (sx * sx * sy * sy + cx * cx * cy * cy));
                hp[q] = A2 * e4 * std::hypot(std::cos(2 * x), std::cos(2 * y));
            }
        set_layer(s.u.comp[0], k, u1);
        set_layer(s.u.comp[1], k, u2);
        set_layer(s.omega, k, w);
        set_layer(s.P, k, P);
        set_layer(s.grad_u, k, gu);
        set_layer(s.hess_P, k, hp);
        s.energy.push_back(FlowSeries::z_weight * 2.0 * pi2 * A2 * e4);
        s.dissipation.push_back(nu > 0.0 ? FlowSeries::z_weight * pi2 * A2 * (1.0 - e4) / nu : 0.0);
    }
    return s;
}

FlowSeries taylor_green(double nu, double t, const GridSpec& g, double amplitude) {
    if (!(t > 0.0)) throw DomainError("snapshot time must be positive");
    return taylor_green_series(nu, g, t, 1, amplitude);
}

double taylor_green_residual(const FlowSeries& s) {
    const int n = s.n();
    Fft2 F(n);
    double worst = 0.0;
    for (int k = 0; k < s.time.nt; ++k) {
        auto u1 = layer(s.u.comp[0], k), u2 = layer(s.u.comp[1], k), P = layer(s.P, k);
        auto U1 = F.forward(u1), U2 = F.forward(u2), Ph = F.forward(P);
        auto d = [&](const std::vector<cplx>& a, int ax, int by) { return F.inverse(F.deriv(a, ax, by)); };
        auto u1x = d(U1, 1, 0), u1y = d(U1, 0, 1), u2x = d(U2, 1, 0), u2y = d(U2, 0, 1);
        auto Px = d(Ph, 1, 0), Py = d(Ph, 0, 1);
        auto L1a = d(U1, 2, 0), L1b = d(U1, 0, 2), L2a = d(U2, 2, 0), L2b = d(U2, 0, 2);
        for (std::size_t i = 0; i < u1.size(); ++i) {
            double r1 = -2.0 * s.nu * u1[i] + u1[i] * u1x[i] + u2[i] * u1y[i] + Px[i] - s.nu * (L1a[i] + L1b[i]);
            double r2 = -2.0 * s.nu * u2[i] + u1[i] * u2x[i] + u2[i] * u2y[i] + Py[i] - s.nu * (L2a[i] + L2b[i]);
            worst = std::max(worst, std::hypot(r1, r2));
        }
    }
    return worst;
}

FlowSeries spectral_solve(const VectorField& u0, const SolverConfig& cfg) {
    if (u0.ncomp() < 2) throw DomainError("initial velocity needs at least two components");
    u0.validate();
    const GridSpec& g = u0.comp[0].grid;
    check_ns_grid(g);
    if (!(cfg.nu >= 0.0) || !(cfg.T > 0.0) || cfg.snapshots < 1 || !(cfg.dt > 0.0))
        throw DomainError("bad solver configuration");
    const int n = g.n[0];
    const std::size_t N = static_cast<std::size_t>(n) * n;
    const double h = g.h[0];
    Fft2 F(n);

    auto u1 = layer(u0.comp[0], 0), u2 = layer(u0.comp[1], 0);
    double umax = 0.0, U1m = 0.0, U2m = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        umax = std::max(umax, std::hypot(u1[i], u2[i]));
        U1m += u1[i] / N, U2m += u2[i] / N;
    }
    // Divergence check against the gradient scale.
    {
        auto A = F.forward(u1), B = F.forward(u2);
        auto dx = F.inverse(F.deriv(A, 1, 0)), dy = F.inverse(F.deriv(B, 0, 1));
        auto gx = F.inverse(F.deriv(A, 0, 1));
        double dmax = 0.0, gmax = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            dmax = std::max(dmax, std::fabs(dx[i] + dy[i]));
            gmax = std::max({gmax, std::fabs(dx[i]), std::fabs(gx[i])});
        }
        if (dmax > 1e-8 * (1.0 + gmax)) throw DomainError("initial velocity is not divergence-free");
    }
    const double dts = cfg.T / cfg.snapshots;
    const int sub = std::max(1, static_cast<int>(std::ceil(dts / cfg.dt - 1e-12)));
    const double dt = dts / sub;
    if (umax * dt / h > 0.5) throw ConfigError("CFL violation: max|u| dt / h > 0.5");

    std::vector<cplx> W;
    {
        auto A = F.forward(u1), B = F.forward(u2);
        W.resize(F.csize());
        const cplx I(0.0, 1.0);
        for (std::size_t i = 0; i < W.size(); ++i) {
            const bool nx = F.nyq_x(i), ny = F.nyq_y(i);
            W[i] = (nx ? 0.0 : I * double(F.kx(i)) * B[i]) - (ny ? 0.0 : I * double(F.ky(i)) * A[i]);
        }
    }
    const std::size_t C = F.csize();
    std::vector<double> k2(C), mask(C);
    for (std::size_t i = 0; i < C; ++i) {
        const int kx = F.kx(i), ky = F.ky(i);
        k2[i] = double(kx) * kx + double(ky) * ky;
        mask[i] = (3 * std::abs(kx) < n && 3 * std::abs(ky) < n) ? 1.0 : 0.0;
    }
    W[0] = 0.0;
    for (std::size_t i = 0; i < C; ++i) W[i] *= mask[i];

    const cplx I(0.0, 1.0);
    auto velocity = [&](const std::vector<cplx>& w, std::vector<double>& a, std::vector<double>& b) {
        std::vector<cplx> A(C), B(C);
        for (std::size_t i = 0; i < C; ++i) {
            if (k2[i] == 0.0) continue;
            const cplx psi = w[i] / k2[i];
            A[i] = F.nyq_y(i) ? 0.0 : I * double(F.ky(i)) * psi;
            B[i] = F.nyq_x(i) ? 0.0 : -I * double(F.kx(i)) * psi;
        }
        a = F.inverse(A);
        b = F.inverse(B);
        for (std::size_t i = 0; i < N; ++i) a[i] += U1m, b[i] += U2m;
    };
    auto nonlinear = [&](const std::vector<cplx>& w) {
        std::vector<double> a, b;
        velocity(w, a, b);
        auto wx = F.inverse(F.deriv(w, 1, 0)), wy = F.inverse(F.deriv(w, 0, 1));
        std::vector<double> adv(N);
        for (std::size_t i = 0; i < N; ++i) adv[i] = -(a[i] * wx[i] + b[i] * wy[i]);
        auto out = F.forward(adv);
        for (std::size_t i = 0; i < C; ++i) out[i] *= mask[i];
        return out;
    };
    // Parseval weights of the half spectrum.
    std::vector<double> pw(C);
    for (std::size_t i = 0; i < C; ++i) {
        const int ky = F.ky(i);
        pw[i] = (ky == 0 || ky == n / 2) ? 1.0 : 2.0;
    }
    const double area = layer_weight(g) / static_cast<double>(N);  // 2pi h^2 / n^2
    std::vector<double> E1(C), E2(C);
    for (std::size_t i = 0; i < C; ++i) {
        E1[i] = std::exp(-cfg.nu * k2[i] * dt);
        E2[i] = std::exp(-cfg.nu * k2[i] * dt * 0.5);
    }
    // Per-mode weights of int_0^dt e^{-c tau} phi(tau) with phi linear between the step ends.
    std::vector<double> I0(C), I1(C);
    for (std::size_t i = 0; i < C; ++i) {
        const double c = 2.0 * cfg.nu * k2[i];
        if (c * dt < 1e-8) {
            I0[i] = dt;
            I1[i] = 0.5 * dt * dt;
        } else {
            I0[i] = -std::expm1(-c * dt) / c;
            I1[i] = (1.0 - std::exp(-c * dt) * (1.0 + c * dt)) / (c * c);
        }
    }

    FlowSeries s = empty_series(g, TimeSpec{cfg.snapshots, dts, dts}, cfg.nu);
    s.energy0 = FlowSeries::z_weight * h * h * (layer_sum_sq(u1) + layer_sum_sq(u2));
    double D = 0.0;
    for (int snap = 0; snap < cfg.snapshots; ++snap) {
        for (int st = 0; st < sub; ++st) {
            auto a = nonlinear(W);
            std::vector<cplx> w2(C), w3(C), w4(C), Wn(C);
            for (std::size_t i = 0; i < C; ++i) w2[i] = E2[i] * (W[i] + 0.5 * dt * a[i]);
            auto b = nonlinear(w2);
            for (std::size_t i = 0; i < C; ++i) w3[i] = E2[i] * W[i] + 0.5 * dt * b[i];
            auto c = nonlinear(w3);
            for (std::size_t i = 0; i < C; ++i) w4[i] = E1[i] * W[i] + dt * E2[i] * c[i];
            auto d = nonlinear(w4);
            for (std::size_t i = 0; i < C; ++i)
                Wn[i] = E1[i] * W[i] + dt / 6.0 * (E1[i] * a[i] + 2.0 * E2[i] * (b[i] + c[i]) + d[i]);
            for (std::size_t i = 0; i < C; ++i) {
                const double phi0 = std::norm(W[i]);
                const double phi1 = E1[i] > 0.0 ? std::norm(Wn[i]) / (E1[i] * E1[i]) : phi0;
                D += cfg.nu * pw[i] * area * (phi0 * I0[i] + (phi1 - phi0) * I1[i] / dt);
            }
            W.swap(Wn);
        }
        std::vector<double> a, b;
        velocity(W, a, b);
        derive_slice(s, F, snap, a, b);
        s.energy.push_back(FlowSeries::z_weight * h * h * (layer_sum_sq(a) + layer_sum_sq(b)));
        s.dissipation.push_back(D);
    }
    return s;
}

double l2_distance_last(const FlowSeries& a, const FlowSeries& b) {
    if (!(a.grid == b.grid) || a.time.nt != b.time.nt) throw DomainError("series shapes differ");
    const int k = a.time.nt - 1;
    double acc = 0.0;
    for (int c = 0; c < 2; ++c) {
        auto x = layer(a.u.comp[c], k), y = layer(b.u.comp[c], k);
        for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
    }
    return std::sqrt(acc * layer_weight(a.grid));
}

ScalarField derivative_norm(const FlowSeries& s, Quantity q, int n) {
    if (n < 0 || n > 6) throw DomainError("derivative order must be 0..6");
    const int m = s.n();
    Fft2 F(m);
    ScalarField out = ScalarField::make(s.grid, s.time);
    out.extension = Extension::Periodic;
    std::vector<const ScalarField*> src;
    if (q == Quantity::Vorticity) src = {&s.omega};
    else src = {&s.u.comp[0], &s.u.comp[1]};
    for (int k = 0; k < s.time.nt; ++k) {
        std::vector<double> acc(static_cast<std::size_t>(m) * m, 0.0);
        for (const ScalarField* f : src) {
            auto A = F.forward(layer(*f, k));
            for (int a = 0; a <= n; ++a) {
                auto d = F.inverse(F.deriv(A, a, n - a));
                const double w = binom(n, a);
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * d[i] * d[i];
            }
        }
        for (double& v : acc) v = std::sqrt(v);
        set_layer(out, k, acc);
    }
    return out;
}

PivotConfig PivotConfig::defaults() {
    const double e0 = AdmissibilityParams::defaults(3).eta0;
    PivotConfig c;
    c.eta = c.eta_bar = e0 * e0 / 16.0;
    c.eps0 = 1.0;
    return c;
}

void PivotConfig::validate() const {
    if (!(eta > 0.0) || !(eta_bar > 0.0) || !(eps0 > 0.0)) throw DomainError("pivot thresholds must be positive");
}

Pivots pivot_fields(const FlowSeries& s, const PivotConfig& cfg) {
    cfg.validate();
    Pivots p;
    p.Mgrad = maximal_function(s.grad_u);
    p.f1 = ScalarField::make(s.grid, s.time);
    p.f2 = ScalarField::make(s.grid, s.time);
    p.f3 = ScalarField::make(s.grid, s.time);
    for (std::size_t i = 0; i < p.f1.data.size(); ++i) {
        const double M2 = p.Mgrad.data[i] * p.Mgrad.data[i];
        p.f1.data[i] = M2 / cfg.eta;
        p.f2.data[i] = (M2 + s.hess_P.data[i]) / cfg.eta_bar;
        const double u = std::hypot(s.u.comp[0].data[i], s.u.comp[1].data[i], s.u.comp[2].data[i]);
        p.f3.data[i] = (u * u * u + std::pow(std::fabs(s.P.data[i]), 1.5)) / cfg.eps0;
    }
    for (auto* f : {&p.Mgrad, &p.f1, &p.f2, &p.f3}) f->extension = Extension::Periodic;
    return p;
}

namespace {

bool regular(std::uint8_t part) {
    return part == static_cast<std::uint8_t>(Partition::RegLt) || part == static_cast<std::uint8_t>(Partition::RegEq);
}

std::vector<std::size_t> layer_anchors(const GridSpec& g, int nt) {
    std::vector<std::size_t> a;
    const std::size_t N = g.size();
    for (int k = 0; k < nt; ++k)
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j) a.push_back(k * N + g.index(i, j, 0));
    return a;
}

}  // namespace

ScaleFields scale_fields(const FlowSeries& s, const Pivots& p, const ScaleLadder& ladder,
                         const AdmissibilityParams& params) {
    ScaleFields out;
    CappedOptions opt;
    opt.Mgrad = &p.Mgrad;
    opt.anchors = layer_anchors(s.grid, s.time.nt);
    auto two = capped_scale_op_multi({&p.f1, &p.f2}, {4.0, 4.0}, s.u, ladder, params, opt);
    out.s1 = std::move(two[0]);
    out.s2 = std::move(two[1]);
    CappedOptions opt3;
    opt3.anchors = opt.anchors;
    out.s3 = capped_scale_op(p.f3, VectorField{}, 3.0, ladder, params, opt3);

    const std::size_t N = s.grid.size();
    const std::size_t n = opt.anchors.size();
    out.r_star.resize(n);
    out.bound1.resize(n), out.bound2.resize(n), out.bound3.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = opt.anchors[i];
        const int k = static_cast<int>(a / N);
        const double t = s.time.time(k) - s.time.lower();
        out.r_star[i] = r_star(t, s.grid.center(a % N), s.grid, 0.0, 1.0);
        const double inv_r = 1.0 / out.r_star[i];
        out.bound1[i] = std::max(std::pow(out.s1.a_lt[i], 0.25), inv_r);
        out.bound2[i] = std::max(std::pow(out.s2.a_lt[i], 0.25), inv_r);
        out.bound3[i] = std::max(std::pow(out.s3.a_lt[i], 1.0 / 3.0), inv_r);
        const CappedScaleField* F[3] = {&out.s1, &out.s2, &out.s3};
        const double B[3] = {out.bound1[i], out.bound2[i], out.bound3[i]};
        for (int q = 0; q < 3; ++q) {
            if (!regular(F[q]->part[i])) continue;
            ++out.checked;
            if (1.0 / F[q]->s[i] > B[q] * (1.0 + 1e-12)) ++out.violations;
        }
    }
    return out;
}

RegularityConstants fitted_regularity_constants(const FlowSeries& s, const ScaleFields& sf, int n_max) {
    if (n_max < 0 || n_max > 3) throw DomainError("n_max must be 0..3");
    RegularityConstants C;
    C.C_omega.assign(n_max + 1, 0.0);
    C.C_u.assign(n_max, 0.0);
    std::vector<ScalarField> dw, du;
    for (int n = 0; n <= n_max; ++n) dw.push_back(derivative_norm(s, Quantity::Vorticity, n));
    for (int n = 1; n <= n_max; ++n) du.push_back(derivative_norm(s, Quantity::Velocity, n));
    for (std::size_t i = 0; i < sf.s1.size(); ++i) {
        const std::size_t a = sf.s1.anchors[i];
        const double s1 = sf.s1.s[i], s2 = sf.s2.s[i];
        if (regular(sf.s1.part[i]) && std::isfinite(s1)) {
            ++C.points;
            for (int n = 0; n <= n_max; ++n) C.C_omega[n] = std::max(C.C_omega[n], dw[n].data[a] * std::pow(s1, n + 2));
        }
        if (regular(sf.s2.part[i]) && std::isfinite(s2))
            for (int n = 1; n <= n_max; ++n) C.C_u[n - 1] = std::max(C.C_u[n - 1], du[n - 1].data[a] * std::pow(s2, n + 1));
    }
    return C;
}

namespace {

double safe_ratio(double l, double r) { return (l == 0.0 && r == 0.0) ? 0.0 : l / r; }

std::string jparams(const nlohmann::json& j) { return j.dump(); }

// Layer samples of a field over slices with t_k > t0; cell weight w.
GraphSamples layer_samples(const ScalarField& f, double w, double t0) {
    GraphSamples g;
    g.dt = f.time->dt;
    for (int k = 0; k < f.time->nt; ++k) {
        if (!(f.time->time(k) > t0)) continue;
        auto v = layer(f, k);
        for (double& x : v) x = std::fabs(x);
        g.values.push_back(v);
        g.weights.emplace_back(v.size(), w);
    }
    return g;
}

}  // namespace

double mixed_lebesgue(const ScalarField& f, double p, double q, double t0) {
    if (!f.time) throw DomainError("mixed norm needs a time axis");
    GraphSamples g = layer_samples(f, layer_weight(f.grid), t0);
    return nested_norm(g, LorentzParams::strong(p), LorentzParams::strong(q));
}

std::vector<TheoremRatio> theorem_ratios(const FlowSeries& s, const ScaleFields& sf, const RegularityConstants& C) {
    std::vector<TheoremRatio> rows;
    const std::size_t N = s.grid.size();
    const double dt = s.time.dt;
    const double h2 = s.grid.h[0] * s.grid.h[1];
    const double wT3 = layer_weight(s.grid) * dt;  // spacetime cell of T^3
    const double grad2 = s.dissipation_total();
    const double rhs_p = grad2 + s.hess_P_l1();
    const int nt = s.time.nt;
    const std::size_t L = static_cast<std::size_t>(s.grid.n[0]) * s.grid.n[1];

    auto capped_inv = [&](const CappedScaleField& F, std::size_t i) {
        const double v = F.s[i];
        return (v < sf.r_star[i]) ? 1.0 / v : 0.0;
    };
    auto add = [&](std::string name, double lhs, double rhs, nlohmann::json pj) {
        rows.push_back({std::move(name), lhs, rhs, safe_ratio(lhs, rhs), jparams(pj)});
    };

    // (a), d = 3: whole slab over time.
    for (int which = 1; which <= 2; ++which) {
        const CappedScaleField& F = which == 1 ? sf.s1 : sf.s2;
        MeasuredSample m;
        for (std::size_t i = 0; i < F.size(); ++i) m.add(capped_inv(F, i), wT3);
        const double lhs = std::pow(weak_norm(m, 4.0), 4.0);
        const double rhs = which == 1 ? grad2 : rhs_p;
        add(which == 1 ? "vorticity-trace-a-d3" : "velocity-trace-a-d3", lhs, rhs,
            {{"d", 3}, {"alpha", 4}, {"norm", "L^{4,inf}(Gamma_T)^4"}, {"scale", which == 1 ? "s1" : "s2"}});
    }
    // (b), d = 2: plane z = 0 at five times.
    for (int which = 1; which <= 2; ++which) {
        const CappedScaleField& F = which == 1 ? sf.s1 : sf.s2;
        for (int j = 0; j < 5; ++j) {
            const int k = static_cast<int>(std::lround((j + 1) * nt / 5.0)) - 1;
            MeasuredSample m;
            for (std::size_t i = k * L; i < (k + 1) * L; ++i) m.add(capped_inv(F, i), h2);
            const double lhs = weak_norm(m, 1.0);
            const double rhs = which == 1 ? grad2 : rhs_p;
            add(std::string(which == 1 ? "vorticity-trace-b-d2" : "velocity-trace-b-d2") + "-t" + std::to_string(j), lhs,
                rhs, {{"d", 2}, {"t", s.time.time(k)}, {"norm", "L^{1,inf}(Gamma_t)"}, {"scale", which == 1 ? "s1" : "s2"}});
        }
    }
    // Vorticity cutoff estimates: grad omega above C1 r_*^-3 over the slab; omega above C0 r_*^-2 on the plane.
    {
        ScalarField gw = derivative_norm(s, Quantity::Vorticity, 1);
        const double C1 = C.C_omega.size() > 1 ? C.C_omega[1] : 1.0;
        const double C0 = C.C_omega.empty() ? 1.0 : C.C_omega[0];
        MeasuredSample m1, m2;
        for (std::size_t i = 0; i < sf.s1.size(); ++i) {
            const std::size_t a = sf.s1.anchors[i];
            const double r = sf.r_star[i];
            const double v1 = gw.data[a], v0 = std::fabs(s.omega.data[a]);
            m1.add(v1 > C1 * std::pow(r, -3.0) ? v1 : 0.0, wT3);
            m2.add(v0 > C0 * std::pow(r, -2.0) ? v0 : 0.0, h2 * dt);
        }
        add("grad-vorticity-cutoff", std::pow(weak_norm(m1, 4.0 / 3.0), 4.0 / 3.0), grad2,
            {{"C", C1}, {"norm", "L^{4/3,inf}^{4/3}"}});
        add("vorticity-plane-cutoff", std::pow(weak_norm(m2, 1.5), 1.5), grad2, {{"C", C0}, {"d", 2}, {"norm", "L^{3/2,inf}(Gamma_T)^{3/2}"}});
    }
    // Anisotropic tuples for grad u (n = 1) on (t0, T).
    {
        const double t0 = 0.25 * s.time.upper();
        const double T = s.time.upper();
        ScalarField g1 = derivative_norm(s, Quantity::Velocity, 1);
        GraphSamples gs = layer_samples(g1, layer_weight(s.grid), t0);
        const double gn = std::sqrt(grad2);
        const double tail = std::max(std::pow(t0, -1.0), 1.0);
        double lhs = nested_norm(gs, LorentzParams::weak(1.0), LorentzParams::weak(3.0));
        double rhs = std::pow(gn, 2.0) + (T - t0) * tail;
        add("anisotropic-weak-weak", lhs, rhs, {{"p", 1}, {"q", 3}, {"n", 1}, {"t0", t0}});
        lhs = nested_norm(gs, LorentzParams::weak(4.0), LorentzParams::strong(4.0 / 3.0));
        rhs = std::pow(gn, 1.5) + std::pow(T - t0, 0.75) * tail;
        add("anisotropic-weak-strong", lhs, rhs, {{"p", 4}, {"q", 4.0 / 3.0}, {"n", 1}, {"t0", t0}});
        lhs = joint_norm(gs, LorentzParams::weak(2.0));
        rhs = gn + std::pow(T - t0, 0.5) * tail;
        add("anisotropic-isotropic", lhs, rhs, {{"p", 2}, {"q", 2}, {"n", 1}, {"t0", t0}});
    }
    (void)N;
    return rows;
}

std::string mixed_norm_lattice(const FlowSeries& s, double t0) {
    std::ostringstream os;
    os.precision(10);
    os << "n,branch,p,q,inv_p,inv_q,norm\n";
    const double w = layer_weight(s.grid);
    for (int n = 1; n <= 3; ++n) {
        ScalarField d = derivative_norm(s, Quantity::Velocity, n);
        GraphSamples gs = layer_samples(d, w, t0);
        const double c = (n + 1) / 4.0;
        for (int i = 0; i <= 4; ++i) {
            // weak branch: 1/p + 3/q = n + 1, p <= q
            const double iq = c * i / 4.0, ip = (n + 1) - 3.0 * iq;
            const double p = 1.0 / ip, q = iq > 0.0 ? 1.0 / iq : kInf;
            const double v = nested_norm(gs, LorentzParams::weak(p), q == kInf ? LorentzParams::sup() : LorentzParams::weak(q));
            os << n << ",weak," << p << "," << q << "," << ip << "," << iq << "," << v << "\n";
        }
        for (int i = 1; i <= 4; ++i) {
            // strong branch: 1/p + 1/q = (n + 1)/2, q < p
            const double iq = c + c * i / 4.0, ip = (n + 1) / 2.0 - iq;
            const double q = 1.0 / iq, p = ip > 1e-14 ? 1.0 / ip : kInf;
            const double v = nested_norm(gs, p == kInf ? LorentzParams::sup() : LorentzParams::weak(p), LorentzParams::strong(q));
            os << n << ",strong," << p << "," << q << "," << std::max(ip, 0.0) << "," << iq << "," << v << "\n";
        }
    }
    return os.str();
}

BlowupComparison blowup_norm_comparison(const FlowSeries& s, double p, double q, double pp, double qq, double t) {
    auto crit = [](double a, double b) { return (a == kInf ? 0.0 : 2.0 / a) + (b == kInf ? 0.0 : 3.0 / b); };
    if (std::fabs(crit(p, q) - 1.0) > 1e-9 || std::fabs(crit(pp, qq) - 1.0) > 1e-9)
        throw DomainError("exponents must satisfy 2/p + 3/q = 1");
    if (!(q > 3.0 && q <= p && p < kInf)) throw DomainError("need 3 < q <= p < inf");
    if (!(pp >= 2.0 && qq >= 3.0)) throw DomainError("need p' >= 2 and q' >= 3");
    ScalarField um = ScalarField::make(s.grid, s.time);
    for (std::size_t i = 0; i < um.data.size(); ++i)
        um.data[i] = std::hypot(s.u.comp[0].data[i], s.u.comp[1].data[i], s.u.comp[2].data[i]);
    BlowupComparison b;
    b.lhs = mixed_lebesgue(um, pp, qq, t) + std::sqrt(mixed_lebesgue(s.grad_u, pp / 2.0, qq / 2.0, t));
    b.rhs_u = mixed_lebesgue(um, p, q, 0.0);
    b.rhs_grad = mixed_lebesgue(s.grad_u, p / 2.0, q / 2.0, 0.0);
    return b;
}

}  // namespace msa
