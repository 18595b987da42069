#include "msa/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace msa {

void LorentzParams::validate() const {
    if (!(q1 > 0.0)) throw DomainError("Lorentz q1 must be positive");
    if (!(q2 > 0.0)) throw DomainError("Lorentz q2 must be positive");
}

double MeasuredSample::total_weight() const {
    double w = 0.0;
    for (double x : weights) w += x;
    return w;
}

double MeasuredSample::measure_above(double lambda) const {
    double w = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::fabs(values[i]) > lambda) w += weights[i];
    return w;
}

MeasuredSample GraphSamples::slice(int k) const { return MeasuredSample{values[k], weights[k]}; }

MeasuredSample GraphSamples::joint() const {
    MeasuredSample s;
    for (int k = 0; k < nt(); ++k)
        for (std::size_t i = 0; i < values[k].size(); ++i) s.add(values[k][i], weights[k][i] * dt);
    return s;
}

namespace {

// Distinct |values| in descending order with the cumulative weight of {|f| >= v}.
struct Levels {
    std::vector<double> v;
    std::vector<double> W;
    bool infinite = false;
};

Levels levels(const MeasuredSample& s) {
    std::vector<std::size_t> idx;
    idx.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.weights[i] > 0.0 && s.values[i] != 0.0) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        double va = std::fabs(s.values[a]), vb = std::fabs(s.values[b]);
        if (va != vb) return va > vb;
        return a < b;
    });
    Levels L;
    double acc = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        double v = std::fabs(s.values[idx[j]]);
        if (std::isinf(v)) L.infinite = true;
        acc += s.weights[idx[j]];
        if (j + 1 < idx.size() && std::fabs(s.values[idx[j + 1]]) == v) continue;
        L.v.push_back(v);
        L.W.push_back(acc);
    }
    return L;
}

}  // namespace

double weak_norm(const MeasuredSample& s, double q1) {
    if (!(q1 > 0.0)) throw DomainError("weak norm exponent must be positive");
    if (std::isinf(q1)) return sup_norm(s);
    Levels L = levels(s);
    if (L.infinite) return kInf;
    double best = 0.0;
    for (std::size_t i = 0; i < L.v.size(); ++i) best = std::max(best, L.v[i] * std::pow(L.W[i], 1.0 / q1));
    return best;
}

double strong_norm(const MeasuredSample& s, double p) {
    if (!(p > 0.0)) throw DomainError("strong norm exponent must be positive");
    if (std::isinf(p)) return sup_norm(s);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s.weights[i] > 0.0) || s.values[i] == 0.0) continue;
        double v = std::fabs(s.values[i]);
        if (std::isinf(v)) return kInf;
        acc += s.weights[i] * std::pow(v, p);
    }
    return std::pow(acc, 1.0 / p);
}

double sup_norm(const MeasuredSample& s) {
    double m = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.weights[i] > 0.0) m = std::max(m, std::fabs(s.values[i]));
    return m;
}

double lorentz_norm(const MeasuredSample& s, LorentzParams p) {
    p.validate();
    if (std::isinf(p.q1)) return sup_norm(s);
    if (std::isinf(p.q2)) return weak_norm(s, p.q1);
    Levels L = levels(s);
    if (L.infinite) return kInf;
    // mu{|f| > lambda} = W_i on [v_{i+1}, v_i), so the defining integral is a closed-form sum.
    double acc = 0.0;
    for (std::size_t i = 0; i < L.v.size(); ++i) {
        double next = i + 1 < L.v.size() ? std::pow(L.v[i + 1], p.q2) : 0.0;
        acc += std::pow(L.W[i], p.q2 / p.q1) * (std::pow(L.v[i], p.q2) - next);
    }
    return std::pow(p.q1 / p.q2 * acc, 1.0 / p.q2);
}

std::vector<double> graph_measure(const GraphFamily& g, int k) {
    if (g.d == g.D) return std::vector<double>(g.domain.size(), g.domain.cell_volume());
    if (g.d == 0) return {1.0};
    const int m = g.D - g.d;
    const auto& hs = g.heights.at(g.heights.size() == 1 ? 0 : k);
    const GridSpec& b = g.base;
    std::vector<double> w(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        auto ii = b.unravel(i);
        // Jacobian J (m x d) by centred differences, one-sided at the base edges.
        double J[3][3] = {};
        for (int a = 0; a < g.d; ++a) {
            auto lo = ii, hi = ii;
            double span = 2.0 * b.h[a];
            if (ii[a] > 0) lo[a] -= 1; else span = b.h[a];
            if (ii[a] + 1 < b.n[a]) hi[a] += 1; else span = b.h[a];
            if (ii[a] == 0 && ii[a] + 1 >= b.n[a]) continue;
            std::size_t jl = b.index(lo[0], lo[1], lo[2]);
            std::size_t jh = b.index(hi[0], hi[1], hi[2]);
            for (int c = 0; c < m; ++c) J[c][a] = (hs[jh * m + c] - hs[jl * m + c]) / span;
        }
        // Area element sqrt(det(I + J^T J)).
        double G[3][3] = {};
        for (int a = 0; a < g.d; ++a)
            for (int c = 0; c < g.d; ++c) {
                double s = a == c ? 1.0 : 0.0;
                for (int r = 0; r < m; ++r) s += J[r][a] * J[r][c];
                G[a][c] = s;
            }
        double det = 0.0;
        if (g.d == 1) det = G[0][0];
        else if (g.d == 2) det = G[0][0] * G[1][1] - G[0][1] * G[1][0];
        w[i] = b.cell_volume() * std::sqrt(det);
    }
    return w;
}

namespace {

double cell_value(const ScalarField& f, int k, const Point& x) {
    const GridSpec& g = f.grid;
    int ii[3] = {0, 0, 0};
    for (int a = 0; a < g.D; ++a) {
        int i = static_cast<int>(std::floor((x[a] - g.origin[a]) / g.h[a]));
        if (g.periodic[a]) {
            i %= g.n[a];
            if (i < 0) i += g.n[a];
        } else if (i < 0 || i >= g.n[a]) {
            return 0.0;
        }
        ii[a] = i;
    }
    return f.slice(k)[g.index(ii[0], ii[1], ii[2])];
}

}  // namespace

GraphSamples sample_on_graph(const ScalarField& f, const GraphFamily& g, Lookup mode) {
    GraphSamples out;
    out.dt = f.time ? f.time->dt : 1.0;
    const int nt = f.nt();
    if (g.nt() != nt && g.nt() != 1) throw DomainError("graph family and field disagree on the number of slices");
    out.values.resize(nt);
    out.weights.resize(nt);
    for (int k = 0; k < nt; ++k) {
        int gk = g.nt() == 1 ? 0 : k;
        out.weights[k] = graph_measure(g, gk);
        if (g.d == g.D) {
            if (!(g.domain == f.grid)) throw DomainError("whole-domain graph must share the field grid");
            out.values[k].assign(f.slice(k), f.slice(k) + f.slice_size());
            continue;
        }
        std::size_t np = g.npoints();
        out.values[k].resize(np);
        for (std::size_t i = 0; i < np; ++i) {
            Point p = g.point(gk, i);
            out.values[k][i] = mode == Lookup::Cell ? cell_value(f, k, p) : f.interpolate(k, p);
        }
    }
    return out;
}

GraphSamples field_samples(const ScalarField& f) {
    return sample_on_graph(f, GraphFamily::whole_domain(f.grid, f.nt()), Lookup::Cell);
}

double nested_norm(const GraphSamples& g, LorentzParams pt, LorentzParams px) {
    MeasuredSample outer;
    for (int k = 0; k < g.nt(); ++k) outer.add(lorentz_norm(g.slice(k), px), g.dt);
    return lorentz_norm(outer, pt);
}

double joint_norm(const GraphSamples& g, LorentzParams p) { return lorentz_norm(g.joint(), p); }

double mixed_norm(const ScalarField& f, const GraphFamily& g, LorentzParams pt, LorentzParams px) {
    return nested_norm(sample_on_graph(f, g, Lookup::Interpolate), pt, px);
}

NestedWeakPair nested_weak_pair(double eps, int n) {
    if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
    if (n < 2) throw DomainError("need at least two cells");
    GridSpec g = GridSpec::cube(1, n, 1.0, false);
    double h = 1.0 / n;
    TimeSpec ts{n, h, h};
    NestedWeakPair out{ScalarField::make(g, ts), ScalarField::make(g, ts)};
    for (int k = 0; k < n; ++k) {
        double t = ts.time(k);
        double E = std::exp(t / eps), L = std::exp(-t / eps);
        double* a = out.u1.slice(k);
        double* b = out.u2.slice(k);
        for (int i = 0; i < n; ++i) {
            double covered = std::clamp(L - i * h, 0.0, h);
            a[i] = E * covered / h;
            b[i] = 1.0 / (t * (i + 1) * h);
        }
    }
    return out;
}

GraphSamples nested_weak_u1_samples(double eps, int n) {
    if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
    if (n < 2) throw DomainError("need at least two cells");
    double h = 1.0 / n;
    GraphSamples s;
    s.dt = h;
    s.values.resize(n);
    s.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        double t = (k + 1) * h;
        double E = std::exp(t / eps), L = std::exp(-t / eps);
        for (int i = 0; i < n; ++i) {
            double covered = std::clamp(L - i * h, 0.0, h);
            if (covered > 0.0) s.values[k].push_back(E), s.weights[k].push_back(covered);
            if (covered < h) s.values[k].push_back(0.0), s.weights[k].push_back(h - covered);
        }
    }
    return s;
}

InterpolationResult interpolate_nested(const GraphSamples& f, InterpBranch branch, double e0, double e1) {
    InterpolationResult r;
    double joint = joint_norm(f, LorentzParams::weak(1.0));
    if (branch == InterpBranch::A) {
        double q0 = e0, q = e1;
        if (!(q0 > 0.0 && q0 < 1.0 && q > q0 && q < 1.0)) throw DomainError("need 0 < q0 < q < 1");
        r.q = q;
        r.p = (1.0 - q0) / (1.0 - q0 / q);
        if (!(r.p > 1.0 && std::isfinite(r.p))) throw DomainError("p outside (1, inf)");
        double endpoint = nested_norm(f, LorentzParams::sup(), LorentzParams::weak(q0));
        r.measured = nested_norm(f, LorentzParams::weak(r.p), LorentzParams::weak(r.q));
        r.bound = std::pow(joint, 1.0 / r.p) * std::pow(endpoint, 1.0 - 1.0 / r.p);
    } else {
        double p0 = e0, p = e1;
        if (!(p0 > 0.0 && p0 < 1.0 && p > p0 && p < 1.0)) throw DomainError("need 0 < p0 < p < 1");
        r.p = p;
        r.q = (1.0 - p0) / (1.0 - p0 / p);
        if (!(r.q > 1.0 && std::isfinite(r.q))) throw DomainError("q outside (1, inf)");
        double endpoint = nested_norm(f, LorentzParams::weak(p0), LorentzParams::sup());
        r.measured = nested_norm(f, LorentzParams::weak(r.p), LorentzParams::weak(r.q));
        r.bound = std::pow(joint, 1.0 / r.q) * std::pow(endpoint, 1.0 - 1.0 / r.q);
    }
    r.ratio = r.bound > 0.0 ? r.measured / r.bound : 0.0;
    return r;
}

}  // namespace msa
