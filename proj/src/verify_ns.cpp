#include <algorithm>
#include <cmath>
#include <sstream>

#include "msa/ns_synth.hpp"
#include "verify_common.hpp"

namespace msa {

using detail::json;
using detail::make_report;
using detail::make_row;

namespace {

constexpr double kAmp = 0.25;  // Taylor-Green amplitude
constexpr double kNu = 1.0;
constexpr int kSnapshots = 32;

struct GridRun {
    int n = 0;
    FlowSeries tg;
    ScaleFields sf;
    RegularityConstants C;
    std::vector<TheoremRatio> ratios;
};

GridRun run_grid(int n) {
    GridRun r;
    r.n = n;
    r.tg = taylor_green_series(kNu, ns_grid(n), 1.0, kSnapshots, kAmp);
    const Pivots p = pivot_fields(r.tg, PivotConfig::defaults());
    r.sf = scale_fields(r.tg, p);
    r.C = fitted_regularity_constants(r.tg, r.sf, 3);
    r.ratios = theorem_ratios(r.tg, r.sf, r.C);
    return r;
}

const TheoremRatio* find(const std::vector<TheoremRatio>& rows, const std::string& name) {
    for (const auto& r : rows)
        if (r.name == name) return &r;
    return nullptr;
}

}  // namespace

std::vector<VerificationReport> suite_ns(const SuiteConfig& cfg) {
    const auto grids = detail::grids_or(cfg, {64, 128});
    const int trials = detail::trials_or(cfg, 20);
    const json flow{{"nu", kNu}, {"amplitude", kAmp}, {"T", 1.0}, {"snapshots", kSnapshots}, {"nz", 4}};
    std::vector<VerificationReport> out;

    // Closed form and solver against it on the 64 grid.
    {
        const GridSpec g = ns_grid(64);
        const FlowSeries tg = taylor_green_series(kNu, g, 1.0, kSnapshots, kAmp);
        auto res = make_report("taylor-green-residual", "sup |d_t u + u . grad u + grad P - nu Lap u| <= 1e-6", "value", flow);
        const double r = taylor_green_residual(tg);
        res.rows.push_back(make_row("residual", 64, -1, r, 1e-6));
        res.pass = r <= 1e-6;
        out.push_back(std::move(res));

        SolverConfig sc;
        sc.nu = kNu;
        sc.snapshots = kSnapshots;
        const FlowSeries sol = spectral_solve(taylor_green_velocity(g, kAmp), sc);
        auto err = make_report("solver-vs-closed-form", "|u_solver(T) - u_exact(T)|_{L^2(T^3)} <= 1e-4", "value",
                               [&] {
                                   json j = flow;
                                   j["dt"] = sc.dt;
                                   return j;
                               }());
        const double e = l2_distance_last(sol, tg);
        err.rows.push_back(make_row("l2", 64, -1, e, 1e-4));
        err.pass = e <= 1e-4;
        out.push_back(std::move(err));

        auto en = make_report("energy-inequality",
                              "|u(t)|^2/2 + int_0^t |grad u|^2 <= |u(0)|^2/2, relative excess <= 1e-6", "value",
                              {{"runs", "Taylor-Green solve plus the random runs of the pressure study"}});
        en.rows.push_back(make_row("taylor-green", 64, -1, sol.energy_excess(), 1e-6));
        out.push_back(std::move(en));
    }

    // Pressure Hessian against dissipation on random solver runs.
    {
        auto pr = make_report("pressure-hessian", "|grad^2 P|_{L^1} <= C |grad u|^2_{L^2} on the torus", "refinement",
                              {{"nu", 0.05}, {"amplitude", 1.0}, {"kmax", 4}, {"T", 1.0}, {"snapshots", 16}});
        auto& en = out.back();
        for (int n : {32, 64}) {
            const GridSpec g = ns_grid(n);
            for (int tr = 0; tr < trials; ++tr) {
                SolverConfig sc;
                sc.nu = 0.05;
                sc.snapshots = 16;
                const unsigned seed = static_cast<unsigned>(cfg.seed * 1000 + tr);
                const FlowSeries s = spectral_solve(random_solenoidal(g, seed, 1.0, 4), sc);
                pr.rows.push_back(make_row("ratio", n, tr, s.hess_P_l1(), s.dissipation_total(), {{"seed", seed}}));
                en.rows.push_back(make_row("random", n, tr, s.energy_excess(), 1e-6, {{"seed", seed}}));
            }
        }
        for (const auto& r : en.rows)
            if (!(r.lhs <= r.rhs)) ++en.violations;
        en.pass = en.violations == 0;
        finish_refinement(pr, cfg.band);
        out.push_back(std::move(pr));
    }

    std::vector<GridRun> runs;
    for (int n : grids) runs.push_back(run_grid(n));

    auto ratio_report = [&](const std::string& id, const std::string& anchor, const std::vector<std::string>& names) {
        auto r = make_report(id, anchor, "refinement", flow);
        for (const auto& run : runs)
            for (std::size_t j = 0; j < names.size(); ++j) {
                const TheoremRatio* t = find(run.ratios, names[j]);
                if (!t) throw ConfigError("missing ratio " + names[j]);
                r.rows.push_back(make_row(t->name, run.n, static_cast<int>(j), t->lhs, t->rhs, json::parse(t->params)));
            }
        finish_refinement(r, cfg.band);
        return r;
    };
    std::vector<std::string> bw, bu;
    for (int j = 0; j < 5; ++j) {
        bw.push_back("vorticity-trace-b-d2-t" + std::to_string(j));
        bu.push_back("velocity-trace-b-d2-t" + std::to_string(j));
    }
    out.push_back(ratio_report("vorticity-trace-slab", "|s1^-1|^4_{L^{4,inf}((0,T) x T^3)} <= C |grad u|^2_{L^2}",
                               {"vorticity-trace-a-d3"}));
    out.push_back(ratio_report("vorticity-trace-plane",
                               "|s1^-1(t)|_{L^{1,inf}(Gamma_t)} <= C |grad u|^2_{L^2}, plane z = 0, five times", bw));
    out.push_back(ratio_report("velocity-trace-slab",
                               "|s2^-1|^4_{L^{4,inf}} <= C (|grad u|^2_{L^2} + |grad^2 P|_{L^1})", {"velocity-trace-a-d3"}));
    out.push_back(ratio_report("velocity-trace-plane",
                               "|s2^-1(t)|_{L^{1,inf}(Gamma_t)} <= C (|grad u|^2_{L^2} + |grad^2 P|_{L^1}), five times", bu));

    auto pw = make_report("pointwise-scale-bound", "s_i^-1 <= A^<(f_i)^{1/alpha} v r_*^-1 at every anchor", "property", flow);
    for (const auto& run : runs) {
        pw.rows.push_back(make_row("violations", run.n, -1, double(run.sf.violations), double(run.sf.checked)));
        pw.violations += run.sf.violations;
    }
    pw.pass = pw.violations == 0 && !runs.empty();
    out.push_back(std::move(pw));

    auto constant = [&](const std::string& id, const std::string& anchor, bool vort, std::size_t idx) {
        auto r = make_report(id, anchor, "refinement", flow);
        for (const auto& run : runs) {
            const auto& v = vort ? run.C.C_omega : run.C.C_u;
            r.rows.push_back(make_row("C", run.n, -1, idx < v.size() ? v[idx] : kInf, 1.0, {{"points", run.C.points}}));
        }
        finish_refinement(r, cfg.band);
        return r;
    };
    out.push_back(constant("regularity-C0", "C_0 = max |omega| s1^2 over regular anchors", true, 0));
    out.push_back(constant("regularity-C1", "C_1 = max |grad omega| s1^3 over regular anchors", true, 1));
    for (std::size_t n = 2; n <= 3; ++n) {
        auto r = constant("regularity-C" + std::to_string(n), "C_n = max |grad^n omega| s1^{n+2}", true, n);
        r.kind = "info";
        r.pass = true;
        out.push_back(std::move(r));
    }
    for (std::size_t n = 0; n < 3; ++n) {
        auto r = constant("velocity-C" + std::to_string(n + 1), "C_n = max |grad^n u| s2^{n+1}", false, n);
        r.kind = "info";
        r.pass = true;
        out.push_back(std::move(r));
    }

    // Measurements without a claimed constant.
    auto info = make_report("ns-measurements", "cutoff estimates, anisotropic tuples, blow-up norms, mixed-norm lattice",
                            "info", flow);
    for (const auto& run : runs) {
        for (const auto& t : run.ratios)
            if (t.name.rfind("vorticity-trace", 0) != 0 && t.name.rfind("velocity-trace", 0) != 0)
                info.rows.push_back(make_row(t.name, run.n, -1, t.lhs, t.rhs, json::parse(t.params)));
        for (double t : {0.1, 0.5, 0.9}) {
            const BlowupComparison b = blowup_norm_comparison(run.tg, 10.0, 15.0 / 4.0, 4.0, 6.0, t);
            info.rows.push_back(make_row("blowup-norms", run.n, -1, b.lhs, b.rhs_u + b.rhs_grad,
                                         {{"p", 10}, {"q", 3.75}, {"p'", 4}, {"q'", 6}, {"t", t},
                                          {"rhs_u", b.rhs_u}, {"rhs_grad", b.rhs_grad}}));
        }
        std::istringstream csv(mixed_norm_lattice(run.tg));
        std::string line;
        std::getline(csv, line);
        while (std::getline(csv, line)) {
            std::vector<std::string> c;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) c.push_back(cell);
            if (c.size() != 7) continue;
            info.rows.push_back(make_row("lattice", run.n, -1, std::stod(c[6]), 1.0,
                                         {{"n", std::stoi(c[0])}, {"branch", c[1]}, {"inv_p", std::stod(c[4])},
                                          {"inv_q", std::stod(c[5])}}));
        }
    }
    info.pass = true;
    out.push_back(std::move(info));
    return out;
}

}  // namespace msa
