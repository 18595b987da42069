#include <algorithm>
#include <cmath>

#include "msa/lagrangian.hpp"
#include "verify_common.hpp"

namespace msa {

using detail::json;
using detail::make_report;
using detail::make_row;

namespace {

constexpr double kPi = 3.141592653589793;

std::size_t containing_cell(const GridSpec& g, const Point& x) {
    std::array<int, 3> c{0, 0, 0};
    for (int a = 0; a < g.D; ++a)
        c[a] = std::clamp(static_cast<int>(std::floor((x[a] - g.origin[a]) / g.h[a])), 0, g.n[a] - 1);
    return g.index(c[0], c[1], c[2]);
}

// (sin 2 pi y, 0) scaled by kappa, constant in time.
VectorField shear(const GridSpec& g, const TimeSpec& ts, double kappa) {
    VectorField b = VectorField::make(g, g.D, ts);
    for (int k = 0; k < ts.nt; ++k)
        for (std::size_t p = 0; p < g.size(); ++p) b.comp[0].slice(k)[p] = kappa * std::sin(2.0 * kPi * g.center(p)[1]);
    return b;
}

}  // namespace

std::vector<VerificationReport> suite_lagrangian(const SuiteConfig& cfg) {
    const int trials = detail::trials_or(cfg, 10);
    const ScaleLadder L;
    const double alpha = 2.0;
    const GridSpec g = GridSpec::cube(2, 32, 1.0, true);
    const TimeSpec ts{16, 1.0 / 16, 1.0 / 16};
    const AdmissibilityParams params = AdmissibilityParams::defaults(2);
    const json P{{"D", 2}, {"n", 32}, {"nt", 16}, {"alpha", alpha}, {"periodic", true}, {"eta0", params.eta0}};

    auto red = make_report("zero-drift-reduction", "b = 0: capped operator and skewed averages equal the Eulerian ones",
                           "property", P);
    red.notes = "tolerance 1e-12; RegEq points need Eulerian S >= r_bar";
    auto cap = make_report("capped-consistency", "s = min(S, r_bar) and a_wedge = a_lt + a_eq", "property", P);
    const double tol = 1e-12;

    for (int tr = 0; tr < trials; ++tr) {
        auto rng = detail::trial_rng(cfg.seed, 501, tr);
        ScalarField f = detail::bump_field(g, ts, detail::random_bumps(rng, 2, detail::kGain));
        for (double& v : f.data) v += detail::uniform(rng, 0.0, 5.0);
        const VectorField zero = VectorField::make(g, 2, ts);
        const ScaleField e = scale_op(f, alpha, L, Mode::Spacetime);
        const CappedScaleField c = capped_scale_op(f, zero, alpha, L, params);

        std::size_t v = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const std::size_t p = c.anchors[i];
            const auto part = static_cast<Partition>(c.part[i]);
            if (part == Partition::RegLt || part == Partition::SingLt) {
                const double d = c.s[i] == e.s[p] ? 0.0 : std::fabs(c.s[i] - e.s[p]);
                worst = std::max(worst, d);
                if (!(d <= tol)) ++v;
            } else if (part == Partition::RegEq) {
                if (e.s[p] < c.r_bar[i]) ++v;
            }
        }
        for (int j = 0; j < 20; ++j) {
            const int k = static_cast<int>(detail::uniform(rng, 0.0, ts.nt));
            const Point x{detail::uniform(rng, 0.0, 1.0), detail::uniform(rng, 0.0, 1.0), 0.0};
            const double rho = detail::uniform(rng, 0.03, 0.4);
            const double a = skewed_cyl_average(f, zero, k, x, rho), b = cyl_average(f, k, x, rho);
            const double d = std::fabs(a - b);
            worst = std::max(worst, d / std::max(1.0, std::fabs(b)));
            if (!(d <= tol * std::max(1.0, std::fabs(b)))) ++v;
        }
        red.rows.push_back(make_row("max-difference", 32, tr, worst, tol));
        red.violations += v;

        const VectorField sh = shear(g, ts, detail::uniform(rng, 0.5, 2.0));
        const CappedScaleField cs = capped_scale_op(f, sh, alpha, L, params);
        v = 0;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (cs.s[i] > cs.r_bar[i]) ++v;
            if (cs.a_wedge[i] != cs.a_lt[i] + cs.a_eq[i]) ++v;
        }
        cap.rows.push_back(make_row("violations", 32, tr, double(v), double(cs.size())));
        cap.violations += v;
    }

    auto sep = make_report("trajectory-separation",
                           "admissible skewed cylinders: trajectories starting within c1 rho stay within c2 rho", "property",
                           {{"D", 2}, {"c1", 1}, {"c2", 2}, {"eta0", params.eta0}, {"cylinders", 100}});
    sep.notes = "drift (kappa sin 2 pi y, 0); rho shrunk by 2^{-1/2} until admissible";
    for (int j = 0; j < 100; ++j) {
        auto rng = detail::trial_rng(cfg.seed, 502, j);
        const double kappa = detail::uniform(rng, 0.5, 4.0);
        const VectorField b = shear(g, ts, kappa);
        const ScalarField Mg = grad_maximal(b, L);
        const int k = ts.nt / 2 + static_cast<int>(detail::uniform(rng, 0.0, ts.nt / 2));
        const Point x{detail::uniform(rng, 0.0, 1.0), detail::uniform(rng, 0.0, 1.0), 0.0};
        double rho = detail::uniform(rng, 0.1, 0.5);
        SkewedCylinder cyl = skewed_cylinder(b, ts, g, k, x, rho, &Mg, &params);
        for (int it = 0; it < 40 && !cyl.admissible; ++it) {
            rho *= std::sqrt(0.5);
            cyl = skewed_cylinder(b, ts, g, k, x, rho, &Mg, &params);
        }
        json Pj{{"kappa", kappa}, {"rho", rho}, {"slice", k}};
        if (!cyl.admissible) {
            sep.rows.push_back(make_row("separation", 32, j, kInf, 2.0, Pj, "no admissible radius"));
            ++sep.violations;
            continue;
        }
        const double s = trajectory_separation_check(b, cyl, ts, 1.0, 2.0, params, static_cast<unsigned>(j + 1));
        sep.rows.push_back(make_row("separation", 32, j, s, 2.0, Pj));
        if (!(s < 2.0)) ++sep.violations;
    }

    std::vector<VerificationReport> out{red, cap, sep};
    for (auto& r : out) r.pass = r.violations == 0 && !r.rows.empty();
    return out;
}

std::vector<VerificationReport> suite_drift_trace(const SuiteConfig& cfg) {
    const auto grids = detail::grids_or(cfg, {32, 64});
    const int trials = detail::trials_or(cfg, 20);
    const ScaleLadder L;
    const AdmissibilityParams params = AdmissibilityParams::defaults(2);
    const double hot = 30.0;
    const json base{{"D", 2}, {"d", 1}, {"L", 0.76}, {"T", 1.0}, {"gain", detail::kGain}, {"eta0", params.eta0},
                    {"drift", "0.5 (sin 2 pi y, cos 2 pi x)"}};
    auto with = [&](json extra) {
        json j = base;
        j.update(extra);
        return j;
    };
    auto aa = make_report("drift-weak-weak",
                          "|A^<_alpha f|^lambda_{L^{p2,inf}_t L^{q2,inf}_x(Gamma_T)} <= C |f|_{L^1((0,T) x Omega)}",
                          "refinement",
                          with({{"alpha", 3.5}, {"p1", 1}, {"q1", 1}, {"p2", 6.0 / 7.0}, {"q2", 3.0 / 7.0},
                                {"lambda", 3.0 / 7.0}, {"field_factor", hot}}));
    auto bb = make_report("drift-strong-mixed",
                          "|A^<_alpha f|^lambda_{L^{p2}_t L^{q2}_x(Gamma_T)} <= C |f|_{L^{p1}_t L^{q1}_x}, p1 > q1",
                          "refinement",
                          with({{"alpha", 1.5}, {"p1", 4}, {"q1", 2}, {"p2", 4}, {"q2", 1}, {"lambda", 0.5}}));
    aa.notes = bb.notes = "capped operator evaluated at the cells containing the graph points";

    for (int n : grids) {
        const GridSpec g = detail::unit_box(2, n);
        const TimeSpec ts = detail::unit_time(n);
        const GraphFamily G = detail::wave_graph(g, &ts);
        VectorField b = VectorField::make(g, 2, ts);
        for (int k = 0; k < ts.nt; ++k)
            for (std::size_t p = 0; p < g.size(); ++p) {
                const Point y = g.center(p);
                b.comp[0].slice(k)[p] = 0.5 * std::sin(2.0 * kPi * y[1]);
                b.comp[1].slice(k)[p] = 0.5 * std::cos(2.0 * kPi * y[0]);
            }
        const ScalarField Mg = grad_maximal(b, L);
        CappedOptions opt;
        opt.Mgrad = &Mg;
        for (int k = 0; k < G.nt(); ++k)
            for (std::size_t i = 0; i < G.npoints(); ++i)
                opt.anchors.push_back(static_cast<std::size_t>(k) * g.size() + containing_cell(g, G.point(k, i)));
        std::vector<std::size_t> anchors = opt.anchors;
        std::sort(opt.anchors.begin(), opt.anchors.end());
        opt.anchors.erase(std::unique(opt.anchors.begin(), opt.anchors.end()), opt.anchors.end());

        for (int tr = 0; tr < trials; ++tr) {
            auto rng = detail::trial_rng(cfg.seed, 601, tr);
            const ScalarField f = detail::bump_field(g, ts, detail::random_bumps(rng, 2, detail::kGain));
            ScalarField fh = f;
            for (double& v : fh.data) v *= hot;
            const auto cs = capped_scale_op_multi({&fh, &f}, {3.5, 1.5}, b, L, params, opt);

            auto on_graph = [&](const CappedScaleField& c, double e) {
                GraphSamples s;
                s.dt = ts.dt;
                std::size_t q = 0;
                for (int k = 0; k < G.nt(); ++k) {
                    s.weights.push_back(graph_measure(G, k));
                    std::vector<double> vals(G.npoints());
                    for (auto& v : vals) {
                        const std::size_t pos =
                            std::lower_bound(c.anchors.begin(), c.anchors.end(), anchors[q++]) - c.anchors.begin();
                        v = std::pow(c.a_lt[pos], e);
                    }
                    s.values.push_back(std::move(vals));
                }
                return s;
            };
            const GraphSamples fs = field_samples(f);
            const double l1h = hot * joint_norm(fs, LorentzParams::strong(1.0));
            const double l4l2 = nested_norm(fs, LorentzParams::strong(4.0), LorentzParams::strong(2.0));
            const GraphSamples a = on_graph(cs[0], 3.0 / 7.0);
            aa.rows.push_back(make_row("ratio", n, tr,
                                       nested_norm(a, LorentzParams::weak(2.0), LorentzParams::weak(1.0)), l1h));
            const GraphSamples c = on_graph(cs[1], 0.5);
            bb.rows.push_back(make_row("ratio", n, tr,
                                       nested_norm(c, LorentzParams::strong(8.0), LorentzParams::strong(2.0)), l4l2));
        }
    }
    std::vector<VerificationReport> out{aa, bb};
    for (auto& r : out) finish_refinement(r, cfg.band);
    return out;
}

}  // namespace msa
