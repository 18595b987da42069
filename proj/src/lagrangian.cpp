#include "msa/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "engine.hpp"
#include "json.hpp"
#include "msa/parallel.hpp"

namespace msa {

using detail::Neighbor;
using detail::OffsetTable;
using detail::SliceSpectra;
using detail::Tap;
using detail::window_len;

namespace {

double bump(double r) { return r < 1.0 ? std::exp(1.0 / (r * r - 1.0)) : 0.0; }

bool all_zero(const ScalarField& f) {
    return std::all_of(f.data.begin(), f.data.end(), [](double v) { return v == 0.0; });
}

bool drift_is_zero(const VectorField& b) {
    return std::all_of(b.comp.begin(), b.comp.end(), [](const ScalarField& c) { return all_zero(c); });
}

// Lattice samples of phi_rho, unit sum.
std::vector<Tap> mollifier_taps(const GridSpec& g, double rho) {
    OffsetTable T(g, rho);
    std::vector<Tap> taps;
    double sum = 0.0;
    for (std::size_t i = 0; i < T.size(); ++i) {
        double w = bump(std::sqrt(T[i].d2) / rho);
        if (w <= 0.0) continue;
        taps.push_back({T[i].o, w});
        sum += w;
    }
    for (auto& t : taps) t.w /= sum;
    return taps;
}

TimeSpec time_of(const ScalarField& f) { return f.time ? *f.time : TimeSpec{1, 1.0, 0.0}; }

// Mollifier applied to precomputed component spectra; zero components stay zero.
class DriftMollifier {
public:
    explicit DriftMollifier(const VectorField& b) : b_(b) {
        for (const auto& c : b.comp)
            spec_.push_back(all_zero(c) ? nullptr : std::make_unique<SliceSpectra>(c.grid, c.data.data(), c.nt()));
    }
    VectorField at(double rho) const {
        VectorField out = b_;
        if (b_.empty()) return out;
        auto taps = mollifier_taps(b_.comp[0].grid, rho);
        if (taps.size() == 1) return out;
        for (std::size_t c = 0; c < spec_.size(); ++c)
            if (spec_[c]) spec_[c]->convolve(taps, out.comp[c].data);
        return out;
    }

private:
    const VectorField& b_;
    std::vector<std::unique_ptr<SliceSpectra>> spec_;
};

}  // namespace

// ---------------------------------------------------------------- mollifier

MollifierSpec MollifierSpec::standard(int D) {
    if (D < 1 || D > 3) throw DomainError("mollifier dimension must be 1..3");
    const double pi = std::numbers::pi;
    const double surf = D == 1 ? 2.0 : (D == 2 ? 2.0 * pi : 4.0 * pi);
    const int n = 200000;  // Simpson, even
    const double h = 1.0 / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        double r = i * h;
        double v = bump(r) * std::pow(r, D - 1);
        acc += v * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    MollifierSpec s;
    s.D = D;
    s.c = 1.0 / (surf * acc * h / 3.0);
    s.sup_norm = s.c * std::exp(-1.0);
    return s;
}

double MollifierSpec::profile(double r) const { return c * bump(r); }

AdmissibilityParams AdmissibilityParams::defaults(int D) {
    AdmissibilityParams p;
    p.eta0 = 0.9 * std::log(2.0) / (MollifierSpec::standard(D).sup_norm * std::pow(4.0, D));
    return p;
}

VectorField mollify_drift(const VectorField& b, double rho) {
    if (!(rho > 0.0)) throw DomainError("mollifier radius must be positive");
    b.validate();
    return DriftMollifier(b).at(rho);
}

// ---------------------------------------------------------------- sampling and flows

DriftSampler::DriftSampler(VectorField b) : own_(std::move(b)) {
    if (own_.empty()) return;
    own_.validate();
    g_ = own_.comp[0].grid;
    ts_ = time_of(own_.comp[0]);
    D_ = g_.D;
    for (int c = 0; c < own_.ncomp() && c < D_; ++c)
        if (!all_zero(own_.comp[c])) comps_.push_back(c);
}

Point DriftSampler::operator()(double s, const Point& y) const {
    Point v{0.0, 0.0, 0.0};
    if (comps_.empty()) return v;
    const bool timed = own_.comp[0].time.has_value();
    int k0 = 0, k1 = 0;
    double tw = 0.0;
    if (timed) {
        if (s <= ts_.lower()) return v;
        double u = (s - ts_.t0) / ts_.dt;
        if (u <= 0.0) {
            k0 = k1 = 0;
        } else if (u >= ts_.nt - 1) {
            k0 = k1 = ts_.nt - 1;
        } else {
            k0 = static_cast<int>(std::floor(u));
            k1 = k0 + 1;
            tw = u - k0;
        }
    }
    std::size_t idx[8];
    double wt[8];
    int nc = 0;
    int i0[3] = {0, 0, 0};
    double fr[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < D_; ++a) {
        double u = (y[a] - g_.origin[a]) / g_.h[a] - 0.5;
        double fl = std::floor(u);
        i0[a] = static_cast<int>(fl);
        fr[a] = u - fl;
    }
    for (int c = 0; c < (1 << D_); ++c) {
        double w = 1.0;
        int ii[3] = {0, 0, 0};
        bool inside = true;
        for (int a = 0; a < D_; ++a) {
            int bit = (c >> a) & 1;
            w *= bit ? fr[a] : 1.0 - fr[a];
            int i = i0[a] + bit;
            if (g_.periodic[a]) {
                i %= g_.n[a];
                if (i < 0) i += g_.n[a];
            } else if (i < 0 || i >= g_.n[a]) {
                inside = false;
            }
            ii[a] = i;
        }
        if (!inside || w == 0.0) continue;
        idx[nc] = g_.index(ii[0], ii[1], ii[2]);
        wt[nc++] = w;
    }
    for (int c : comps_) {
        const ScalarField& f = own_.comp[c];
        const double* s0 = f.slice(k0);
        double acc = 0.0;
        for (int q = 0; q < nc; ++q) acc += wt[q] * s0[idx[q]];
        if (tw > 0.0) {
            const double* s1 = f.slice(k1);
            double acc1 = 0.0;
            for (int q = 0; q < nc; ++q) acc1 += wt[q] * s1[idx[q]];
            acc = (1.0 - tw) * acc + tw * acc1;
        }
        v[c] = acc;
    }
    return v;
}

Point integrate_flow(const DriftSampler& v, const TimeSpec& ts, double t, const Point& x, double s, double max_step) {
    if (v.zero() || s == t) return x;
    if (!(max_step > 0.0)) throw DomainError("flow step must be positive");
    // Breakpoints at slice times strictly between t and s.
    std::vector<double> stops{t};
    const double dir = s < t ? -1.0 : 1.0;
    for (int j = 0; j < ts.nt; ++j) {
        int jj = dir < 0 ? ts.nt - 1 - j : j;
        double tj = ts.time(jj);
        if ((tj - s) * dir < 0.0 && (tj - t) * dir > 0.0) stops.push_back(tj);
    }
    stops.push_back(s);
    Point X = x;
    auto axpy = [](const Point& p, double a, const Point& q) {
        return Point{p[0] + a * q[0], p[1] + a * q[1], p[2] + a * q[2]};
    };
    for (std::size_t seg = 0; seg + 1 < stops.size(); ++seg) {
        const double a = stops[seg], b = stops[seg + 1];
        const int nsub = std::max(1, static_cast<int>(std::ceil(std::fabs(b - a) / max_step)));
        const double hs = (b - a) / nsub;
        for (int i = 0; i < nsub; ++i) {
            double tau = a + i * hs;
            Point k1 = v(tau, X);
            Point k2 = v(tau + 0.5 * hs, axpy(X, 0.5 * hs, k1));
            Point k3 = v(tau + 0.5 * hs, axpy(X, 0.5 * hs, k2));
            Point k4 = v(tau + hs, axpy(X, hs, k3));
            for (int d = 0; d < 3; ++d) X[d] += hs / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
    }
    return X;
}

Point flow_map(const VectorField& b, double rho, double t, const Point& x, double s) {
    if (!(rho > 0.0)) throw DomainError("flow radius must be positive");
    if (s > t || s < t - rho * rho * (1.0 + 1e-12)) throw DomainError("flow time outside [t - rho^2, t]");
    if (b.empty()) return x;
    DriftSampler v(mollify_drift(b, rho));
    return integrate_flow(v, time_of(b.comp[0]), t, x, s, rho * rho / 16.0);
}

// ---------------------------------------------------------------- cylinders

std::string SkewedCylinder::to_json() const {
    nlohmann::json j;
    auto pt = [&](const Point& p) {
        nlohmann::json a = nlohmann::json::array();
        for (int d = 0; d < D; ++d) a.push_back(p[d]);
        return a;
    };
    j["t"] = t;
    j["x"] = pt(x);
    j["rho"] = rho;
    j["admissible"] = admissible;
    j["adm_measured"] = adm_measured;
    j["adm_threshold"] = adm_threshold;
    j["contained"] = contained;
    nlohmann::json poly = nlohmann::json::array();
    for (std::size_t i = 0; i < times.size(); ++i) {
        nlohmann::json row = pt(backbone[i]);
        row.insert(row.begin(), times[i]);
        poly.push_back(row);
    }
    j["backbone"] = poly;
    return j.dump();
}

SkewedCylinder skewed_cylinder(const VectorField& b, const TimeSpec& ts, const GridSpec& omega, int k, const Point& x,
                               double rho, const ScalarField* Mgrad, const AdmissibilityParams* params) {
    if (!(rho > 0.0)) throw DomainError("cylinder radius must be positive");
    if (k < 0 || k >= ts.nt) throw DomainError("slice index out of range");
    SkewedCylinder c;
    c.D = omega.D;
    c.t = ts.time(k);
    c.x = x;
    c.rho = rho;
    DriftSampler v = b.empty() ? DriftSampler() : DriftSampler(mollify_drift(b, rho));
    const double r2 = rho * rho;
    const int nseg = std::max(16, 4 * window_len(rho, ts.dt));
    Point X = x;
    c.times.push_back(c.t);
    c.backbone.push_back(X);
    for (int i = 1; i <= nseg; ++i) {
        double a = c.t - r2 * (i - 1) / nseg, s = c.t - r2 * i / nseg;
        X = integrate_flow(v, ts, a, X, s, r2 / 16.0);
        c.times.push_back(s);
        c.backbone.push_back(X);
    }
    c.contained = r2 <= c.t - ts.lower();
    for (const auto& p : c.backbone)
        if (box_distance_to_boundary(omega, p) < rho) c.contained = false;
    if (Mgrad && params) {
        AdmissibilityResult r = admissible(b, *Mgrad, k, x, rho, *params);
        c.admissible = r.admissible;
        c.adm_measured = r.measured;
        c.adm_threshold = r.threshold;
    }
    return c;
}

double skewed_cyl_average(const ScalarField& f, const VectorField& b, int k, const Point& x, double rho) {
    if (!f.time) throw DomainError("cylinder average needs a time axis");
    if (!(rho > 0.0)) throw DomainError("radius must be positive");
    if (b.empty() || drift_is_zero(b)) return cyl_average(f, k, x, rho);
    const GridSpec& g = f.grid;
    const TimeSpec ts = *f.time;
    const int m = window_len(rho, ts.dt);
    DriftSampler v(mollify_drift(b, rho));
    std::vector<Point> C;
    Point X = x;
    for (int w = 0; w < m && k - w >= 0; ++w) {
        if (w > 0) X = integrate_flow(v, ts, ts.time(k - w + 1), X, ts.time(k - w), rho * rho / 16.0);
        C.push_back(g.center(detail::containing_cell(g, X)));
    }
    double acc = 0.0;
    for (int j = k - m + 1; j <= k; ++j)
        if (j >= 0) acc += detail::direct_ball_sum(f, j, C[k - j], rho);
    return acc / (static_cast<double>(m) * static_cast<double>(ball_count(g, rho)));
}

ScalarField grad_maximal(const VectorField& b, const ScaleLadder& ladder) {
    if (b.empty()) throw DomainError("gradient of an empty drift");
    b.validate();
    const GridSpec& g = b.comp[0].grid;
    ScalarField G = ScalarField::make(g, b.comp[0].time);
    const std::size_t N = g.size();
    const int nt = G.nt();
    for (const auto& c : b.comp) {
        if (all_zero(c)) continue;
        for (int k = 0; k < nt; ++k) {
            const double* s = c.slice(k);
            double* o = G.slice(k);
            for (std::size_t x = 0; x < N; ++x) {
                auto ii = g.unravel(x);
                for (int a = 0; a < g.D; ++a) {
                    const int n = g.n[a];
                    if (n < 2) continue;
                    auto at = [&](int i) {
                        auto jj = ii;
                        jj[a] = i;
                        return s[g.index(jj[0], jj[1], jj[2])];
                    };
                    double d;
                    const int i = ii[a];
                    if (g.periodic[a]) {
                        d = (at((i + 1) % n) - at((i - 1 + n) % n)) / (2.0 * g.h[a]);
                    } else if (i == 0) {
                        d = (at(1) - at(0)) / g.h[a];
                    } else if (i == n - 1) {
                        d = (at(n - 1) - at(n - 2)) / g.h[a];
                    } else {
                        d = (at(i + 1) - at(i - 1)) / (2.0 * g.h[a]);
                    }
                    o[x] += d * d;
                }
            }
        }
    }
    for (double& v : G.data) v = std::sqrt(v);
    return maximal_function(G, ladder);
}

AdmissibilityResult admissible(const VectorField& b, const ScalarField& Mgrad, int k, const Point& x, double rho,
                               const AdmissibilityParams& params) {
    if (!(params.eta0 > 0.0)) throw DomainError("eta0 must be positive");
    AdmissibilityResult r;
    r.measured = skewed_cyl_average(Mgrad, b, k, x, rho);
    r.threshold = params.eta0 / (rho * rho);
    r.admissible = r.measured <= r.threshold;
    return r;
}

// ---------------------------------------------------------------- ladder engine

namespace {

struct EngineSetup {
    const GridSpec* g = nullptr;
    TimeSpec ts;
    ScaleLadder L;
    std::vector<const ScalarField*> fs;
    std::vector<double> alphas;
    const ScalarField* gf = nullptr;  // M(grad b); admissibility off when null
    double eta0 = 0.0;
    const VectorField* b = nullptr;
    bool radii_only = false;
};

struct AnchorState {
    bool active = true;
    std::vector<std::uint8_t> pending;
    std::vector<double> s, S, a_lt, a_eq, f_s;
    std::vector<std::uint8_t> part, trunc;
    double r_bar = kInf;
    bool rbar_resolved = false;
    double r_int = kInf, r_adm = kInf;
    double int_width = 0.0, adm_width = 0.0;
    bool int_done = false, adm_done = false;
};

std::vector<AnchorState> run_engine(const EngineSetup& E, const std::vector<std::size_t>& anchors) {
    const GridSpec& g = *E.g;
    const std::size_t N = g.size();
    const TimeSpec& ts = E.ts;
    const double dt = ts.dt;
    const std::vector<double> R = E.L.rungs();
    const std::size_t Q = E.fs.size();
    const std::size_t NF = Q + (E.gf ? 1 : 0);
    auto win = [&](double r) { return window_len(r, dt); };

    std::vector<const ScalarField*> F(E.fs);
    if (E.gf) F.push_back(E.gf);
    OffsetTable T(g, R.back());
    // Wrapped index per axis for c + o, -1 outside a box axis.
    std::array<std::vector<int>, 3> wrap;
    std::array<int, 3> woff{0, 0, 0};
    std::array<std::size_t, 3> stride{0, 0, 0};
    for (int a = 0; a < 3; ++a) {
        const int n = a < g.D ? g.n[a] : 1;
        woff[a] = a < g.D ? static_cast<int>(std::ceil(R.back() / g.h[a])) + 2 : 0;
        wrap[a].resize(n + 2 * woff[a]);
        for (int j = 0; j < static_cast<int>(wrap[a].size()); ++j) {
            int i = j - woff[a];
            if (a < g.D && g.periodic[a]) i = ((i % n) + n) % n;
            else if (i < 0 || i >= n) i = -1;
            wrap[a][j] = i;
        }
    }
    stride[0] = g.index(1, 0, 0) - g.index(0, 0, 0);
    if (g.D > 1) stride[1] = g.index(0, 1, 0) - g.index(0, 0, 0);
    if (g.D > 2) stride[2] = g.index(0, 0, 1) - g.index(0, 0, 0);
    std::vector<std::unique_ptr<SliceSpectra>> spec;
    for (auto* f : F) spec.push_back(std::make_unique<SliceSpectra>(g, f->data.data(), f->nt()));
    const bool drift = E.b && !E.b->empty() && !drift_is_zero(*E.b);
    std::unique_ptr<DriftMollifier> moll;
    if (drift) moll = std::make_unique<DriftMollifier>(*E.b);

    std::vector<AnchorState> st(anchors.size());
    for (auto& a : st) {
        a.pending.assign(Q, 1);
        a.s.assign(Q, kInf);
        a.S.assign(Q, kInf);
        a.a_lt.assign(Q, 0.0);
        a.a_eq.assign(Q, 0.0);
        a.f_s.assign(Q, 0.0);
        a.part.assign(Q, static_cast<std::uint8_t>(Partition::RegEq));
        a.trunc.assign(Q, 0);
    }

    std::vector<std::vector<double>> prev(NF), cur(NF);
    for (std::size_t i = 0; i < R.size(); ++i) {
        const double rho = R[i];
        for (std::size_t q = 0; q < NF; ++q) spec[q]->ball_sums(T, rho, cur[q]);
        const std::size_t n_cur = T.count(rho);
        const int m_cur = win(rho);
        const std::size_t n_prev = i ? T.count(R[i - 1]) : 0;
        DriftSampler smp;
        if (drift) smp = DriftSampler(moll->at(rho));
        const double max_step = rho * rho / 16.0;

        parallel_for(anchors.size(), [&](std::size_t lo_a, std::size_t hi_a) {
            std::vector<std::vector<double>> pre(NF);
            std::vector<std::vector<std::size_t>> built(NF);
            std::vector<std::size_t> cell;
            std::vector<std::array<int, 3>> cidx;
            std::vector<double> dist;
            for (std::size_t ai = lo_a; ai < hi_a; ++ai) {
                AnchorState& A = st[ai];
                if (!A.active) continue;
                const std::size_t p = anchors[ai];
                const int k = static_cast<int>(p / N);
                const std::size_t x = p % N;

                // Backbone at the slice times of the rung window.
                const int wlen = std::min(m_cur, k + 1);
                cell.assign(wlen, x);
                cidx.assign(wlen, g.unravel(x));
                dist.assign(wlen, 0.0);
                Point X = g.center(x);
                dist[0] = box_distance_to_boundary(g, X);
                for (int w = 1; w < wlen; ++w) {
                    if (drift) {
                        X = integrate_flow(smp, ts, ts.time(k - w + 1), X, ts.time(k - w), max_step);
                        cell[w] = detail::containing_cell(g, X);
                        cidx[w] = g.unravel(cell[w]);
                    }
                    dist[w] = box_distance_to_boundary(g, X);
                }
                for (auto& b : built) b.clear();

                auto window_sum = [&](const std::vector<double>& buf, int m) {
                    double w = 0.0;
                    for (int j = k - m + 1; j <= k; ++j)
                        if (j >= 0) w += buf[j * N + cell[k - j]];
                    return w;
                };
                auto rung_avg = [&](std::size_t q) {
                    return window_sum(cur[q], m_cur) / (static_cast<double>(m_cur) * n_cur);
                };
                const std::size_t n0 = n_prev, n1 = n_cur;
                const std::size_t len = n1 - n0 + 1;
                // Prefix sums over the shell, row w extended on demand up to entry `need`.
                auto extend = [&](std::size_t q, int w, std::size_t need) {
                    if (built[q].empty()) {
                        pre[q].resize(static_cast<std::size_t>(wlen) * len);
                        built[q].assign(wlen, 0);
                    }
                    std::size_t& b = built[q][w];
                    if (b >= need) return;
                    const double* s = F[q]->slice(k - w);
                    double* row = pre[q].data() + w * len;
                    const auto& c = cidx[w];
                    const int* w0 = wrap[0].data() + c[0] + woff[0];
                    const int* w1 = wrap[1].data() + c[1] + woff[1];
                    const int* w2 = wrap[2].data() + c[2] + woff[2];
                    double acc = b ? row[b] : 0.0;
                    if (!b) row[0] = 0.0;
                    for (std::size_t r = b; r < need; ++r) {
                        const auto& o = T[n0 + r].o;
                        const int i0 = w0[o[0]], i1 = w1[o[1]], i2 = w2[o[2]];
                        if (i0 >= 0 && i1 >= 0 && i2 >= 0) acc += s[i0 * stride[0] + i1 * stride[1] + i2 * stride[2]];
                        row[r + 1] = acc;
                    }
                    b = need;
                };
                auto avg_at = [&](std::size_t q, double r) {
                    const std::size_t nr = T.count(r);
                    const int mr = win(r);
                    for (int w = 0; w < std::min(mr, wlen); ++w) extend(q, w, nr - n0);
                    double w = 0.0;
                    for (int j = k - mr + 1; j <= k; ++j) {
                        if (j < 0) continue;
                        w += prev[q][j * N + cell[k - j]] + pre[q][(k - j) * len + (nr - n0)];
                    }
                    return w / (static_cast<double>(mr) * nr);
                };
                auto exits = [&](double r) {
                    if (r * r > (k + 1) * dt) return true;
                    const int mw = std::min(win(r), k + 1);
                    for (int w = 0; w < mw; ++w)
                        if (dist[w] < r) return true;
                    return false;
                };
                auto bisect = [&](double lo, double hi, auto pred) {
                    for (int it = 0; it < E.L.m; ++it) {
                        double mid = std::sqrt(lo * hi);
                        if (pred(mid)) hi = mid;
                        else lo = mid;
                    }
                    return std::pair<double, double>(lo, hi);
                };
                const double r0 = R[0];
                const bool ev_int = !A.int_done && exits(rho);
                const bool ev_adm = E.gf && !A.adm_done && rung_avg(Q) > E.eta0 / (rho * rho);

                auto resolve_int = [&] {
                    if (i == 0) {
                        A.r_int = r0, A.int_width = r0;
                    } else {
                        auto [lo, hi] = bisect(R[i - 1], rho, exits);
                        A.r_int = 0.5 * (lo + hi), A.int_width = hi - lo;
                    }
                    A.int_done = true;
                };
                auto resolve_adm = [&] {
                    if (i == 0) {
                        A.r_adm = r0, A.adm_width = r0;
                    } else {
                        auto [lo, hi] = bisect(R[i - 1], rho, [&](double r) { return avg_at(Q, r) > E.eta0 / (r * r); });
                        A.r_adm = 0.5 * (lo + hi), A.adm_width = hi - lo;
                    }
                    A.adm_done = true;
                };

                if (E.radii_only) {
                    if (ev_int) resolve_int();
                    if (ev_adm) resolve_adm();
                    if (A.int_done && (A.adm_done || !E.gf)) A.active = false;
                    continue;
                }

                // S bracket below hi for field q, from the previous rung.
                auto regular_lt = [&](std::size_t q, double hi) {
                    const double al = E.alphas[q];
                    auto [lo, h2] = bisect(R[i - 1], hi, [&](double r) { return avg_at(q, r) > std::pow(r, -al); });
                    double S = 0.5 * (lo + h2);
                    A.S[q] = A.s[q] = S;
                    A.a_lt[q] = std::pow(S, -al);
                    A.f_s[q] = avg_at(q, S);
                    A.part[q] = static_cast<std::uint8_t>(Partition::RegLt);
                    A.pending[q] = 0;
                };

                if (ev_int || ev_adm) {
                    if (ev_int) resolve_int();
                    if (ev_adm) resolve_adm();
                    A.r_bar = std::min(A.r_int, A.r_adm);
                    A.rbar_resolved = true;
                    for (std::size_t q = 0; q < Q; ++q) {
                        if (!A.pending[q]) continue;
                        const double al = E.alphas[q];
                        if (i == 0) {
                            const double avg = rung_avg(q);
                            A.s[q] = r0;
                            A.S[q] = avg > std::pow(r0, -al) ? r0 : kInf;
                            A.a_eq[q] = std::pow(r0, -al);
                            A.f_s[q] = avg;
                            A.part[q] = static_cast<std::uint8_t>(Partition::SingEq);
                            A.pending[q] = 0;
                            continue;
                        }
                        // Same rung test and bracket as the uncapped operator, then capped at r_bar.
                        double S = kInf;
                        if (rung_avg(q) > std::pow(rho, -al)) {
                            auto [lo, h2] =
                                bisect(R[i - 1], rho, [&](double r) { return avg_at(q, r) > std::pow(r, -al); });
                            S = 0.5 * (lo + h2);
                        }
                        if (S < A.r_bar) {
                            regular_lt(q, rho);
                        } else {
                            const double fr = avg_at(q, A.r_bar);
                            A.s[q] = A.r_bar;
                            A.a_eq[q] = fr;
                            A.f_s[q] = fr;
                            A.part[q] = static_cast<std::uint8_t>(Partition::RegEq);
                            A.pending[q] = 0;
                        }
                    }
                    A.active = false;
                    continue;
                }

                A.r_bar = rho;
                bool any = false;
                for (std::size_t q = 0; q < Q; ++q) {
                    if (!A.pending[q]) continue;
                    const double al = E.alphas[q];
                    const double avg = rung_avg(q);
                    if (!(avg > std::pow(rho, -al))) {
                        any = true;
                        continue;
                    }
                    if (i == 0) {
                        A.S[q] = A.s[q] = r0;
                        A.a_lt[q] = std::pow(r0, -al);
                        A.f_s[q] = avg;
                        A.part[q] = static_cast<std::uint8_t>(Partition::SingLt);
                        A.pending[q] = 0;
                    } else {
                        regular_lt(q, rho);
                    }
                }
                if (!any) A.active = false;
            }
        });
        std::swap(prev, cur);
    }

    for (auto& A : st) {
        for (std::size_t q = 0; q < Q; ++q) {
            if (!A.pending[q]) continue;
            A.trunc[q] = 1;
            A.s[q] = kInf;
            A.part[q] = static_cast<std::uint8_t>(Partition::RegEq);
        }
    }
    return st;
}

}  // namespace

std::vector<CappedScaleField> capped_scale_op_multi(const std::vector<const ScalarField*>& fs,
                                                    const std::vector<double>& alphas, const VectorField& b,
                                                    const ScaleLadder& ladder, const AdmissibilityParams& params,
                                                    const CappedOptions& opt) {
    if (fs.empty() || fs.size() != alphas.size()) throw DomainError("need one alpha per field");
    for (double a : alphas)
        if (!(a > 0.0)) throw DomainError("alpha must be positive");
    if (!(params.eta0 > 0.0)) throw DomainError("eta0 must be positive");
    const ScalarField& f0 = *fs.front();
    for (auto* f : fs) {
        f->validate();
        if (!f->time) throw DomainError("capped operator needs a time axis");
        if (!(f->grid == f0.grid) || !(*f->time == *f0.time)) throw DomainError("fields must share grid and time");
    }
    if (!b.empty()) {
        b.validate();
        if (b.ncomp() != f0.grid.D) throw DomainError("drift needs one component per axis");
        if (!(b.comp[0].grid == f0.grid)) throw DomainError("drift grid differs from the field grid");
        if (b.comp[0].time && !(*b.comp[0].time == *f0.time)) throw DomainError("drift time differs from the field time");
    }
    EngineSetup E;
    E.g = &f0.grid;
    E.ts = *f0.time;
    E.L = ladder.resolved(f0.grid);
    E.fs = fs;
    E.alphas = alphas;
    E.eta0 = params.eta0;
    E.b = &b;
    ScalarField own;
    if (opt.Mgrad) {
        if (!(opt.Mgrad->grid == f0.grid) || opt.Mgrad->nt() != f0.nt()) throw DomainError("Mgrad shape mismatch");
        E.gf = opt.Mgrad;
    } else if (!b.empty() && !drift_is_zero(b)) {
        own = grad_maximal(b);
        E.gf = &own;
    }
    std::vector<std::size_t> anchors = opt.anchors;
    const std::size_t P = f0.grid.size() * f0.nt();
    if (anchors.empty()) {
        anchors.resize(P);
        for (std::size_t p = 0; p < P; ++p) anchors[p] = p;
    }
    for (auto p : anchors)
        if (p >= P) throw DomainError("anchor out of range");
    auto st = run_engine(E, anchors);

    std::vector<CappedScaleField> out(fs.size());
    for (std::size_t q = 0; q < fs.size(); ++q) {
        CappedScaleField& o = out[q];
        o.alpha = alphas[q];
        o.grid = f0.grid;
        o.time = f0.time;
        o.ladder = E.L;
        o.anchors = anchors;
        const std::size_t n = anchors.size();
        o.s.resize(n), o.S.resize(n), o.r_bar.resize(n), o.a_lt.resize(n), o.a_eq.resize(n);
        o.a_wedge.resize(n), o.f_s.resize(n), o.part.resize(n), o.rbar_resolved.resize(n), o.truncated.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const AnchorState& A = st[i];
            o.s[i] = A.s[q];
            o.S[i] = A.S[q];
            o.r_bar[i] = A.r_bar;
            o.a_lt[i] = A.a_lt[q];
            o.a_eq[i] = A.a_eq[q];
            o.a_wedge[i] = A.a_lt[q] + A.a_eq[q];
            o.f_s[i] = A.f_s[q];
            o.part[i] = A.part[q];
            o.rbar_resolved[i] = A.rbar_resolved;
            o.truncated[i] = A.trunc[q];
        }
    }
    return out;
}

CappedScaleField capped_scale_op(const ScalarField& f, const VectorField& b, double alpha, const ScaleLadder& ladder,
                                 const AdmissibilityParams& params, const CappedOptions& opt) {
    return std::move(capped_scale_op_multi({&f}, {alpha}, b, ladder, params, opt).front());
}

CutoffRadii cutoff_radii(const VectorField& b, const ScalarField& Mgrad, int k, const Point& x,
                         const AdmissibilityParams& params, const ScaleLadder& ladder, double L, double r0) {
    if (!Mgrad.time) throw DomainError("cutoff radii need a time axis");
    if (!(params.eta0 > 0.0)) throw DomainError("eta0 must be positive");
    const GridSpec& g = Mgrad.grid;
    if (k < 0 || k >= Mgrad.nt()) throw DomainError("slice index out of range");
    EngineSetup E;
    E.g = &g;
    E.ts = *Mgrad.time;
    E.L = ladder.resolved(g);
    E.gf = &Mgrad;
    E.eta0 = params.eta0;
    E.b = &b;
    E.radii_only = true;
    const std::size_t cellx = detail::containing_cell(g, x);
    auto st = run_engine(E, {static_cast<std::size_t>(k) * g.size() + cellx});
    const AnchorState& A = st.front();
    CutoffRadii r;
    r.r_int = A.r_int;
    r.r_adm = A.r_adm;
    r.int_truncated = !A.int_done;
    r.adm_truncated = !A.adm_done;
    r.r_bar = std::min(r.r_int, r.r_adm);
    const double t = E.ts.time(k) - E.ts.lower();
    r.r_star = r_star(t, g.center(cellx), g, L, r0);
    const double tol = std::max(A.int_width, A.adm_width);
    r.rstar_ok = r.r_bar >= std::min(r.r_star, r.r_adm) - tol;
    return r;
}

double trajectory_separation_check(const VectorField& b, const SkewedCylinder& cyl, const TimeSpec& ts, double c1,
                                   double c2, const AdmissibilityParams& params, unsigned seed, int trials) {
    if (!(c1 > 0.0) || !(c2 > c1)) throw ConfigError("separation check needs c2 > c1 > 0");
    const int D = b.empty() ? cyl.D : b.comp[0].grid.D;
    const double lhs = MollifierSpec::standard(D).sup_norm * std::pow(c2 + 2.0, D) * params.eta0;
    if (!(lhs < std::log(c2) - std::log(c1))) throw ConfigError("separation precondition fails for these constants");
    const double rho = cyl.rho, r2 = rho * rho, t = cyl.t;
    DriftSampler v = b.empty() ? DriftSampler() : DriftSampler(mollify_drift(b, rho));
    const double step = r2 / 16.0;
    const int ns = 64;
    std::vector<double> sg(ns + 1);
    std::vector<Point> main(ns + 1);
    main[0] = cyl.x;
    sg[0] = t;
    for (int j = 1; j <= ns; ++j) {
        sg[j] = t - r2 * j / ns;
        main[j] = integrate_flow(v, ts, sg[j - 1], main[j - 1], sg[j], step);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int tr = 0; tr < trials; ++tr) {
        const double ts_ = t - r2 * U(rng);
        const Point Xs = integrate_flow(v, ts, t, cyl.x, ts_, step);
        Point off{0.0, 0.0, 0.0};
        double n2;
        do {
            n2 = 0.0;
            for (int d = 0; d < D; ++d) {
                off[d] = (2.0 * U(rng) - 1.0);
                n2 += off[d] * off[d];
            }
        } while (n2 >= 1.0);
        Point y = Xs;
        for (int d = 0; d < D; ++d) y[d] += 0.999 * c1 * rho * off[d];
        for (int j = 0; j <= ns; ++j) {
            Point Y = integrate_flow(v, ts, ts_, y, sg[j], step);
            double e = 0.0;
            for (int d = 0; d < D; ++d) e += (Y[d] - main[j][d]) * (Y[d] - main[j][d]);
            worst = std::max(worst, std::sqrt(e) / rho);
        }
    }
    return worst;
}

}  // namespace msa
