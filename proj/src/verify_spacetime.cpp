#include <algorithm>
#include <cmath>

#include "msa/multiscale.hpp"
#include "verify_common.hpp"

namespace msa {

using detail::json;
using detail::make_report;
using detail::make_row;

namespace {

struct Setup {
    GridSpec g;
    TimeSpec ts;
    GraphFamily G;
};

// alpha = 3.5 never triggers inside the ladder at the base gain.
constexpr double kHot = 30.0;

ScalarField heated(ScalarField f) {
    for (double& v : f.data) v *= kHot;
    return f;
}

Setup setup(int n) {
    Setup s{detail::unit_box(2, n), detail::unit_time(n), {}};
    s.G = detail::wave_graph(s.g, &s.ts);
    return s;
}

}  // namespace

std::vector<VerificationReport> suite_trace_spacetime(const SuiteConfig& cfg) {
    const auto grids = detail::grids_or(cfg, {32, 64});
    const int trials = detail::trials_or(cfg, 20);
    const ScaleLadder L;
    const json base{{"D", 2}, {"d", 1}, {"L", 0.76}, {"T", 1.0}, {"gain", detail::kGain}};
    auto with = [&](json extra) {
        json j = base;
        j.update(extra);
        return j;
    };
    auto wb = make_report("trace-spacetime-weak", "|(A_alpha f)^{1-(D-d)/alpha}|_{L^{1,inf}(Gamma_T)} <= C |f|_{L^1}",
                          "refinement", with({{"alpha", 1.5}, {"exponent", 1.0 / 3.0}}));
    auto sc = make_report("trace-spacetime-strong",
                          "|(A_alpha f)^{1-(D-d)/(p alpha)}|_{L^p(Gamma_T)} <= C |f|_{L^p}, p = 2", "refinement",
                          with({{"alpha", 1.0}, {"p", 2}, {"exponent", 0.5}}));
    auto fw = make_report("trace-fixed-time-weak",
                          "|(A_alpha f)(t)^{1-(D-d+2)/alpha}|_{L^{1,inf}(Gamma_t)} <= C |f|_{L^1}, every t", "refinement",
                          with({{"alpha", 3.5}, {"exponent", 1.0 / 7.0}, {"times", {0.25, 0.375, 0.5, 0.625, 0.75}},
                                {"field_factor", kHot}}));
    auto fs = make_report("trace-fixed-time-strong",
                          "|(A_alpha f)(t)^{1-(D-d+2)/(p alpha)}|_{L^p(Gamma_t)} <= C |f|_{L^p}, p = 2, every t",
                          "refinement",
                          with({{"alpha", 2.0}, {"p", 2}, {"exponent", 0.25}, {"times", {0.25, 0.375, 0.5, 0.625, 0.75}}}));
    fw.notes = fs.notes = "one row per sampled time";

    for (int n : grids) {
        const Setup S = setup(n);
        for (int tr = 0; tr < trials; ++tr) {
            auto rng = detail::trial_rng(cfg.seed, 301, tr);
            const ScalarField f = detail::bump_field(S.g, S.ts, detail::random_bumps(rng, 2, detail::kGain));
            const auto sfs = scale_op_multi(f, {1.5, 1.0, 2.0}, L, Mode::Spacetime);
            const ScalarField fh = heated(f);
            const ScaleField hot = scale_op(fh, 3.5, L, Mode::Spacetime);
            const GraphSamples all = field_samples(f);
            const double l1 = joint_norm(all, LorentzParams::strong(1.0));
            const double l2 = joint_norm(all, LorentzParams::strong(2.0));
            const double l1h = joint_norm(field_samples(fh), LorentzParams::strong(1.0));

            const GraphSamples a = detail::pow_samples(scale_on_graph(sfs[0], S.G), 1.0 / 3.0);
            wb.rows.push_back(make_row("ratio", n, tr, joint_norm(a, LorentzParams::weak(1.0)), l1));
            const GraphSamples b = detail::pow_samples(scale_on_graph(sfs[1], S.G), 0.5);
            sc.rows.push_back(make_row("ratio", n, tr, joint_norm(b, LorentzParams::strong(2.0)), l2));

            const GraphSamples e = detail::pow_samples(scale_on_graph(hot, S.G), 1.0 / 7.0);
            const GraphSamples q = detail::pow_samples(scale_on_graph(sfs[2], S.G), 0.25);
            for (int j = 2; j <= 6; ++j) {
                const int k = j * n / 8 - 1;
                const json P{{"t", S.ts.time(k)}, {"slice", k}};
                fw.rows.push_back(make_row("ratio", n, tr, weak_norm(e.slice(k), 1.0), l1h, P));
                fs.rows.push_back(make_row("ratio", n, tr, strong_norm(q.slice(k), 2.0), l2, P));
            }
        }
    }
    std::vector<VerificationReport> out{wb, sc, fw, fs};
    for (auto& r : out) finish_refinement(r, cfg.band);
    return out;
}

std::vector<VerificationReport> suite_anisotropic(const SuiteConfig& cfg) {
    const auto grids = detail::grids_or(cfg, {32, 64});
    const int trials = detail::trials_or(cfg, 20);
    const ScaleLadder L;
    const json base{{"D", 2}, {"d", 1}, {"L", 0.76}, {"T", 1.0}, {"gain", detail::kGain}};
    auto with = [&](json extra) {
        json j = base;
        j.update(extra);
        return j;
    };
    // (p1, q1, p2, q2) tuples; lambda from r2 = lambda r1.
    auto aa = make_report("anisotropic-weak-weak", "|A_alpha f|^lambda_{L^{p2,inf}_t L^{q2,inf}_x(Gamma_T)} <= C |f|_{L^1}",
                          "refinement",
                          with({{"alpha", 3.5}, {"p1", 1}, {"q1", 1}, {"p2", 6.0 / 7.0}, {"q2", 3.0 / 7.0},
                                {"lambda", 3.0 / 7.0}, {"gamma", 0.5}, {"field_factor", kHot}}));
    auto ab = make_report("anisotropic-strong-equal",
                          "|A_alpha f|^lambda_{L^{p2}_t L^{q2}_x(Gamma_T)} <= C |f|_{L^p}, p = 2", "refinement",
                          with({{"alpha", 2.0}, {"p1", 2}, {"q1", 2}, {"p2", 2}, {"q2", 1}, {"lambda", 0.5},
                                {"gamma", 0.5}}));
    auto bb = make_report("anisotropic-strong-mixed",
                          "|A_alpha f|^lambda_{L^{p2}_t L^{q2}_x(Gamma_T)} <= C |f|_{L^{p1}_t L^{q1}_x}, p1 > q1",
                          "refinement",
                          with({{"alpha", 1.5}, {"p1", 4}, {"q1", 2}, {"p2", 4}, {"q2", 1}, {"lambda", 0.5},
                                {"gamma", 0.25}, {"theta", 0.5}}));
    auto cc = make_report("anisotropic-sup-time",
                          "|A_alpha f|^lambda_{L^inf_t L^{q2,inf}_x(Gamma_T)} <= C |f|_{L^{p1}_t L^{q1}_x}", "refinement",
                          with({{"alpha", 3.0}, {"p1", 2}, {"q1", 1}, {"p2", "inf"}, {"q2", 1.0 / 3.0},
                                {"lambda", 1.0 / 3.0}, {"gamma", 0.5}}));
    aa.notes = ab.notes = bb.notes = cc.notes = "lhs measured as |(A_alpha f)^lambda| in the rescaled nested norm";

    for (int n : grids) {
        const Setup S = setup(n);
        for (int tr = 0; tr < trials; ++tr) {
            auto rng = detail::trial_rng(cfg.seed, 401, tr);
            const ScalarField f = detail::bump_field(S.g, S.ts, detail::random_bumps(rng, 2, detail::kGain));
            const auto sfs = scale_op_multi(f, {2.0, 1.5, 3.0}, L, Mode::Spacetime);
            const ScalarField fh = heated(f);
            const ScaleField hot = scale_op(fh, 3.5, L, Mode::Spacetime);
            const GraphSamples all = field_samples(f);
            const double l1h = joint_norm(field_samples(fh), LorentzParams::strong(1.0));
            const double l2 = joint_norm(all, LorentzParams::strong(2.0));
            const double l4l2 = nested_norm(all, LorentzParams::strong(4.0), LorentzParams::strong(2.0));
            const double l2l1 = nested_norm(all, LorentzParams::strong(2.0), LorentzParams::strong(1.0));

            const GraphSamples a = detail::pow_samples(scale_on_graph(hot, S.G), 3.0 / 7.0);
            aa.rows.push_back(make_row("ratio", n, tr,
                                       nested_norm(a, LorentzParams::weak(2.0), LorentzParams::weak(1.0)), l1h));
            const GraphSamples b = detail::pow_samples(scale_on_graph(sfs[0], S.G), 0.5);
            ab.rows.push_back(make_row("ratio", n, tr,
                                       nested_norm(b, LorentzParams::strong(4.0), LorentzParams::strong(2.0)), l2));
            const GraphSamples c = detail::pow_samples(scale_on_graph(sfs[1], S.G), 0.5);
            bb.rows.push_back(make_row("ratio", n, tr,
                                       nested_norm(c, LorentzParams::strong(8.0), LorentzParams::strong(2.0)), l4l2));
            const GraphSamples d = detail::pow_samples(scale_on_graph(sfs[2], S.G), 1.0 / 3.0);
            cc.rows.push_back(make_row("ratio", n, tr, nested_norm(d, LorentzParams::sup(), LorentzParams::weak(1.0)),
                                       l2l1));
        }
    }
    std::vector<VerificationReport> out{aa, ab, bb, cc};
    for (auto& r : out) finish_refinement(r, cfg.band);
    return out;
}

}  // namespace msa
