#include "msa/multiscale.hpp"

#include <algorithm>
#include <cmath>

#include "engine.hpp"
#include "msa/parallel.hpp"

namespace msa {

using detail::Neighbor;
using detail::OffsetTable;
using detail::SliceSpectra;
using detail::window_len;

ScaleLadder ScaleLadder::resolved(const GridSpec& g) const {
    ScaleLadder L = *this;
    if (L.rho_min <= 0.0) {
        L.rho_min = g.h[0];
        for (int a = 1; a < g.D; ++a) L.rho_min = std::min(L.rho_min, g.h[a]);
    }
    if (L.rho_max <= 0.0) {
        double e = 0.0;
        for (int a = 0; a < g.D; ++a) e = std::max(e, g.extent(a));
        L.rho_max = 0.5 * e;
    }
    L.validate();
    return L;
}

void ScaleLadder::validate() const {
    if (!(rho_min > 0.0)) throw DomainError("ladder rho_min must be positive");
    if (!(rho_max >= rho_min)) throw DomainError("ladder rho_max below rho_min");
    if (k < 1) throw DomainError("ladder needs at least one rung per octave");
    if (m < 0) throw DomainError("ladder bisection count must be >= 0");
}

std::vector<double> ScaleLadder::rungs() const {
    validate();
    std::vector<double> r;
    for (int i = 0;; ++i) {
        double v = std::ldexp(rho_min * std::exp2(static_cast<double>(i % k) / k), i / k);
        if (v > rho_max * (1.0 + 1e-12)) break;
        r.push_back(v);
        if (r.size() > 100000) throw ResourceError("ladder too long");
    }
    return r;
}

double ScaleLadder::step_ratio() const { return std::exp2(1.0 / k); }

static ScalarField make_like(const ScaleField& sf, const std::vector<double>& v) {
    ScalarField f = ScalarField::make(sf.grid, sf.time);
    f.data = v;
    return f;
}

ScalarField ScaleField::s_field() const { return make_like(*this, s); }
ScalarField ScaleField::a_field() const { return make_like(*this, a); }
ScalarField ScaleField::label_field() const {
    std::vector<double> v(label.begin(), label.end());
    return make_like(*this, v);
}

double ScaleField::certified_tolerance(std::size_t i) const {
    double jump = std::fabs(f_hi[i] - f_lo[i]);
    double width = std::pow(lo[i], -alpha) - std::pow(hi[i], -alpha);
    return jump + std::max(2.0 * (ladder.step_ratio() - 1.0) * a[i], width);
}

std::size_t ball_count(const GridSpec& g, double rho) {
    if (!(rho > 0.0)) throw DomainError("radius must be positive");
    int r[3] = {0, 0, 0};
    for (int a = 0; a < g.D; ++a) r[a] = static_cast<int>(std::ceil(rho / g.h[a]));
    const double R2 = rho * rho;
    std::size_t c = 0;
    for (int i = -r[0]; i <= r[0]; ++i)
        for (int j = -r[1]; j <= r[1]; ++j)
            for (int k = -r[2]; k <= r[2]; ++k) {
                double x = i * g.h[0], y = g.D > 1 ? j * g.h[1] : 0.0, z = g.D > 2 ? k * g.h[2] : 0.0;
                if (x * x + y * y + z * z < R2) ++c;
            }
    return c;
}

using detail::direct_ball_sum;

double ball_average(const ScalarField& f, int k, const Point& x, double rho) {
    if (!(rho > 0.0)) throw DomainError("radius must be positive");
    return direct_ball_sum(f, k, x, rho) / static_cast<double>(ball_count(f.grid, rho));
}

double cyl_average(const ScalarField& f, int k, const Point& x, double rho) {
    if (!f.time) throw DomainError("cylinder average needs a time axis");
    if (!(rho > 0.0)) throw DomainError("radius must be positive");
    int m = window_len(rho, f.time->dt);
    double acc = 0.0;
    for (int j = k - m + 1; j <= k; ++j)
        if (j >= 0) acc += direct_ball_sum(f, j, x, rho);
    return acc / (static_cast<double>(m) * static_cast<double>(ball_count(f.grid, rho)));
}

namespace {

struct AlphaState {
    ScaleField out;
    std::vector<std::uint8_t> pending;
};

}  // namespace

std::vector<ScaleField> scale_op_multi(const ScalarField& f, const std::vector<double>& alphas,
                                       const ScaleLadder& ladder, Mode mode) {
    f.validate();
    for (double a : alphas)
        if (!(a > 0.0)) throw DomainError("alpha must be positive");
    if (mode == Mode::Spacetime && !f.time) throw DomainError("spacetime mode needs a time axis");
    const GridSpec& g = f.grid;
    const ScaleLadder L = ladder.resolved(g);
    const std::vector<double> R = L.rungs();
    const int nt = f.nt();
    const std::size_t N = g.size();
    const std::size_t P = N * static_cast<std::size_t>(nt);
    const double dt = f.time ? f.time->dt : 1.0;
    const bool st = mode == Mode::Spacetime;
    auto win = [&](double rho) { return st ? window_len(rho, dt) : 1; };

    OffsetTable T(g, R.back());
    SliceSpectra spec(g, f.data.data(), nt);
    Neighbor nb{&g};

    std::vector<AlphaState> A(alphas.size());
    for (std::size_t q = 0; q < alphas.size(); ++q) {
        ScaleField& o = A[q].out;
        o.alpha = alphas[q];
        o.mode = mode;
        o.grid = g;
        o.time = f.time;
        o.ladder = L;
        o.s.assign(P, kInf);
        o.a.assign(P, 0.0);
        o.lo.assign(P, 0.0);
        o.hi.assign(P, kInf);
        o.f_lo.assign(P, 0.0);
        o.f_hi.assign(P, 0.0);
        o.label.assign(P, static_cast<std::uint8_t>(ScaleLabel::Reg));
        o.truncated.assign(P, 0);
        A[q].pending.assign(P, 1);
    }

    std::vector<double> prev, cur;
    for (std::size_t i = 0; i < R.size(); ++i) {
        const double rho = R[i];
        spec.ball_sums(T, rho, cur);
        const std::size_t n_cur = T.count(rho);
        const int m_cur = win(rho);
        const std::size_t n_prev = i ? T.count(R[i - 1]) : 0;
        const int m_prev = i ? win(R[i - 1]) : 0;
        std::vector<double> thr(alphas.size());
        for (std::size_t q = 0; q < alphas.size(); ++q) thr[q] = std::pow(rho, -alphas[q]);

        parallel_for(P, [&](std::size_t b, std::size_t e) {
            std::vector<double> pre;
            for (std::size_t p = b; p < e; ++p) {
                bool any = false;
                for (auto& st_ : A) any = any || st_.pending[p];
                if (!any) continue;
                const int k = static_cast<int>(p / N);
                const std::size_t x = p % N;
                auto window_sum = [&](const std::vector<double>& buf, int m) {
                    double w = 0.0;
                    for (int j = k - m + 1; j <= k; ++j)
                        if (j >= 0) w += buf[j * N + x];
                    return w;
                };
                const double avg = window_sum(cur, m_cur) / (static_cast<double>(m_cur) * n_cur);
                bool have_pre = false;
                std::size_t n0 = n_prev, n1 = n_cur;
                int mmax = m_cur;
                auto build_pre = [&] {
                    const auto c = g.unravel(x);
                    const std::size_t len = n1 - n0 + 1;
                    pre.assign(static_cast<std::size_t>(mmax) * len, 0.0);
                    for (int w = 0; w < mmax; ++w) {
                        int j = k - w;
                        if (j < 0) continue;
                        const double* s = f.slice(j);
                        double* row = pre.data() + w * len;
                        double acc = 0.0;
                        for (std::size_t r = 0; r + 1 < len; ++r) {
                            std::size_t idx;
                            if (nb(c, T[n0 + r].o, idx)) acc += s[idx];
                            row[r + 1] = acc;
                        }
                    }
                    have_pre = true;
                };
                auto avg_at = [&](double r) {
                    if (!have_pre) build_pre();
                    const std::size_t nr = T.count(r);
                    const int mr = win(r);
                    const std::size_t len = n1 - n0 + 1;
                    double w = 0.0;
                    for (int j = k - mr + 1; j <= k; ++j) {
                        if (j < 0) continue;
                        w += prev[j * N + x] + pre[(k - j) * len + (nr - n0)];
                    }
                    return w / (static_cast<double>(mr) * nr);
                };
                for (std::size_t q = 0; q < A.size(); ++q) {
                    if (!A[q].pending[p]) continue;
                    if (!(avg > thr[q])) continue;
                    ScaleField& o = A[q].out;
                    const double al = alphas[q];
                    A[q].pending[p] = 0;
                    if (i == 0) {
                        o.label[p] = static_cast<std::uint8_t>(ScaleLabel::Sing);
                        o.s[p] = rho;
                        o.a[p] = thr[q];
                        o.lo[p] = 0.0;
                        o.hi[p] = rho;
                        o.f_hi[p] = avg;
                        continue;
                    }
                    double lo = R[i - 1], hi = rho;
                    double flo = window_sum(prev, m_prev) / (static_cast<double>(m_prev) * n_prev);
                    double fhi = avg;
                    for (int it = 0; it < L.m; ++it) {
                        double mid = std::sqrt(lo * hi);
                        double fm = avg_at(mid);
                        if (fm > std::pow(mid, -al)) hi = mid, fhi = fm;
                        else lo = mid, flo = fm;
                    }
                    o.lo[p] = lo;
                    o.hi[p] = hi;
                    o.f_lo[p] = flo;
                    o.f_hi[p] = fhi;
                    o.s[p] = 0.5 * (lo + hi);
                    o.a[p] = std::pow(o.s[p], -al);
                }
            }
        });
        std::swap(prev, cur);
    }

    // Never triggered: s = inf, a = 0, flagged.
    const double last = R.back();
    const int m_last = win(last);
    const std::size_t n_last = T.count(last);
    std::vector<ScaleField> res;
    for (auto& st_ : A) {
        ScaleField& o = st_.out;
        for (std::size_t p = 0; p < P; ++p) {
            if (!st_.pending[p]) continue;
            const int k = static_cast<int>(p / N);
            const std::size_t x = p % N;
            double w = 0.0;
            for (int j = k - m_last + 1; j <= k; ++j)
                if (j >= 0) w += prev[j * N + x];
            o.truncated[p] = 1;
            o.lo[p] = last;
            o.f_lo[p] = w / (static_cast<double>(m_last) * n_last);
        }
        res.push_back(std::move(o));
    }
    return res;
}

ScaleField scale_op(const ScalarField& f, double alpha, const ScaleLadder& ladder, Mode mode) {
    return std::move(scale_op_multi(f, {alpha}, ladder, mode).front());
}

ScalarField maximal_function(const ScalarField& f, const ScaleLadder& ladder) {
    f.validate();
    const GridSpec& g = f.grid;
    const ScaleLadder L = ladder.resolved(g);
    const std::vector<double> R = L.rungs();
    OffsetTable T(g, R.back());
    SliceSpectra spec(g, f.data.data(), f.nt());
    ScalarField M = f;
    std::vector<double> cur;
    for (double rho : R) {
        spec.ball_sums(T, rho, cur);
        const double n = static_cast<double>(T.count(rho));
        for (std::size_t p = 0; p < M.data.size(); ++p) M.data[p] = std::max(M.data[p], cur[p] / n);
    }
    return M;
}

GraphSamples scale_on_graph(const ScaleField& sf, const GraphFamily& g, bool use_a) {
    ScalarField f = use_a ? sf.a_field() : sf.s_field();
    return sample_on_graph(f, g, Lookup::Cell);
}

double level_set_measure(const ScaleField& sf, const GraphFamily& g, double rho) {
    if (!(rho > 0.0)) throw DomainError("radius must be positive");
    GraphSamples gs = scale_on_graph(sf, g, false);
    const double tw = sf.mode == Mode::Spacetime ? gs.dt : 1.0;
    double m = 0.0;
    for (int k = 0; k < gs.nt(); ++k)
        for (std::size_t i = 0; i < gs.values[k].size(); ++i) {
            double s = gs.values[k][i];
            if (s >= rho && s < 2.0 * rho) m += gs.weights[k][i] * tw;
        }
    return m;
}

}  // namespace msa
