#pragma once
// Internal: seeded random fields, graph families and report helpers shared by the suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "msa/field.hpp"
#include "msa/multiscale.hpp"
#include "msa/norms.hpp"
#include "msa/verify.hpp"

namespace msa::detail {

using json = nlohmann::json;

/// One generator per (seed, stream, trial); independent of the grid.
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t stream, int trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(trial)};
    return std::mt19937_64(seq);
}

inline double uniform(std::mt19937_64& r, double a, double b) {
    // Explicit formula so the stream does not depend on the standard library's distribution code.
    const double u = static_cast<double>(r() >> 11) * 0x1.0p-53;
    return a + (b - a) * u;
}

/// Gaussian bumps in (t, x, y, z); time is ignored for spatial fields.
struct Bump {
    Point c{0.5, 0.5, 0.5};
    double sigma = 0.1;
    double tc = 0.5;
    double tau = 0.1;
    double amp = 1.0;
};

/// Default gain: puts most critical scales inside the ladder on the unit box.
inline constexpr double kGain = 30.0;

inline std::vector<Bump> random_bumps(std::mt19937_64& r, int D, double gain = 1.0) {
    const int K = 1 + static_cast<int>(uniform(r, 0.0, 4.0));
    std::vector<Bump> out(K);
    for (auto& b : out) {
        for (int a = 0; a < D; ++a) b.c[a] = uniform(r, 0.15, 0.85);
        b.sigma = uniform(r, 0.04, 0.12);
        b.tc = uniform(r, 0.2, 0.9);
        b.tau = uniform(r, 0.05, 0.2);
        b.amp = gain * uniform(r, 0.5, 5.0);
    }
    return out;
}

inline double bump_value(const std::vector<Bump>& bs, int D, const Point& x, double t, bool timed) {
    double v = 0.0;
    for (const auto& b : bs) {
        double d2 = 0.0;
        for (int a = 0; a < D; ++a) d2 += (x[a] - b.c[a]) * (x[a] - b.c[a]);
        double e = d2 / (2.0 * b.sigma * b.sigma);
        if (timed) e += (t - b.tc) * (t - b.tc) / (2.0 * b.tau * b.tau);
        v += b.amp * std::exp(-e);
    }
    return v;
}

/// Unit box [0,1]^D with n cells per axis, zero outside.
inline GridSpec unit_box(int D, int n) { return GridSpec::cube(D, n, 1.0, false); }

/// Time axis over (0, 1] with nt slices at t_k = (k + 1) / nt.
inline TimeSpec unit_time(int nt) { return TimeSpec{nt, 1.0 / nt, 1.0 / nt}; }

inline ScalarField bump_field(const GridSpec& g, const std::vector<Bump>& bs) {
    ScalarField f = ScalarField::make(g);
    for (std::size_t p = 0; p < g.size(); ++p) f.data[p] = bump_value(bs, g.D, g.center(p), 0.0, false);
    return f;
}

inline ScalarField bump_field(const GridSpec& g, const TimeSpec& ts, const std::vector<Bump>& bs) {
    ScalarField f = ScalarField::make(g, ts);
    for (int k = 0; k < ts.nt; ++k)
        for (std::size_t p = 0; p < g.size(); ++p) f.slice(k)[p] = bump_value(bs, g.D, g.center(p), ts.time(k), true);
    return f;
}

/// y = 0.5 + 0.12 sin(2 pi (x + t)) in the unit square; one slice when ts is null.
inline GraphFamily wave_graph(const GridSpec& domain, const TimeSpec* ts) {
    const int n = domain.n[0];
    GridSpec base = GridSpec::cube(1, n, 1.0, false);
    const int nt = ts ? ts->nt : 1;
    std::vector<std::vector<double>> heights(nt, std::vector<double>(n));
    for (int k = 0; k < nt; ++k) {
        const double t = ts ? ts->time(k) : 0.0;
        for (int i = 0; i < n; ++i)
            heights[k][i] = 0.5 + 0.12 * std::sin(2.0 * 3.141592653589793 * (base.center(0, i) + t));
    }
    return GraphFamily::from_heights(domain, base, 0.76, std::move(heights));
}

inline std::vector<int> grids_or(const SuiteConfig& c, std::vector<int> def) { return c.grids.empty() ? def : c.grids; }
inline int trials_or(const SuiteConfig& c, int def) { return c.trials > 0 ? c.trials : def; }

inline TrialRow make_row(std::string name, int grid, int trial, double lhs, double rhs, json params = json::object(),
                         std::string notes = {}) {
    TrialRow r;
    r.name = std::move(name);
    r.grid = grid;
    r.trial = trial;
    r.lhs = lhs;
    r.rhs = rhs;
    r.ratio = (lhs == 0.0 && rhs == 0.0) ? 0.0 : lhs / rhs;
    r.params = params.dump();
    r.notes = std::move(notes);
    return r;
}

inline VerificationReport make_report(std::string id, std::string anchor, std::string kind, json params = json::object()) {
    VerificationReport r;
    r.id = std::move(id);
    r.anchor = std::move(anchor);
    r.kind = std::move(kind);
    r.params = params.dump();
    return r;
}

/// Elementwise power of graph samples.
inline GraphSamples pow_samples(GraphSamples g, double e) {
    for (auto& v : g.values)
        for (double& x : v) x = std::pow(x, e);
    return g;
}

}  // namespace msa::detail
