#include <cmath>

#include "msa/cantor.hpp"
#include "msa/norms.hpp"
#include "verify_common.hpp"

namespace msa {

using detail::json;
using detail::make_report;
using detail::make_row;

std::vector<VerificationReport> suite_cantor(const SuiteConfig& cfg) {
    if (cfg.depth < 1 || cfg.depth > 12) throw UsageError("depth must lie in 1..12");
    const int j = cfg.depth;
    const CantorReport rep = cantor_lower_bound(j);

    auto lb = make_report("cantor-superlevel", "|{A_{1/2} f_j >= 2^{-1/2} 2^k}| >= 2^-k for every k <= j", "value",
                          {{"j", j}, {"alpha", 0.5}, {"arithmetic", "dyadic, exact"}});
    for (const auto& r : rep.rows) {
        lb.rows.push_back(make_row("k=" + std::to_string(r.k), j, r.k, r.measure, r.bound,
                                   {{"threshold", r.threshold}, {"radius", r.radius}, {"count", r.count},
                                    {"required", r.required}}));
        if (!r.pass) ++lb.violations;
    }
    lb.pass = lb.violations == 0 && static_cast<int>(rep.rows.size()) == j + 1;

    auto l1 = make_report("cantor-mass", "|f_j|_1 = 2^{3/2} exactly, A_{k+1} inside A_k", "value", {{"j", j}});
    const double want = std::sqrt(8.0);
    l1.rows.push_back(make_row("l1", j, -1, rep.l1, want, {{"exact", rep.l1_exact}, {"nested", rep.nested}}));
    l1.pass = rep.l1_exact && rep.nested && rep.l1 == want;
    if (!l1.pass) l1.violations = 1;

    auto gr = make_report("cantor-growth", "Lorentz norms of A_{1/2} f_j on [0, 1) against j", "info",
                          {{"jmin", 1}, {"jmax", j}});
    const CantorGrowth g = cantor_growth(1, j);
    for (std::size_t i = 0; i < g.j.size(); ++i)
        gr.rows.push_back(make_row("L11", g.j[i], -1, g.l11[i], 1.0,
                                   {{"weak_l1", g.weak_l1[i]}, {"l12", g.l12[i]}, {"l14", g.l14[i]}}));
    gr.fitted = g.slope;
    gr.notes = "fitted = least-squares slope of L^{1,1} against j";
    gr.pass = true;
    return {lb, l1, gr};
}

std::vector<VerificationReport> suite_lorentz(const SuiteConfig& cfg) {
    const double eps = cfg.epsilon;
    const int n = cfg.lorentz_n;
    if (!(eps > 0.0) || n < 2) throw UsageError("lorentz suite needs epsilon > 0 and n >= 2");
    const json P{{"epsilon", eps}, {"n", n}};

    const GraphSamples u1 = nested_weak_u1_samples(eps, n);
    auto nw = make_report("u1-nested-weak", "u1: |u1|_{L^{1,inf}_t L^{1,inf}_x} = 1", "value", P);
    const double nested = nested_norm(u1, LorentzParams::weak(1.0), LorentzParams::weak(1.0));
    nw.rows.push_back(make_row("nested", n, -1, nested, 1.0, {{"tolerance", 0.02}}));
    nw.pass = std::fabs(nested - 1.0) <= 0.02;

    auto jw = make_report("u1-joint-weak", "u1: |u1|_{L^{1,inf}_{t,x}} <= epsilon", "value", P);
    const double joint = joint_norm(u1, LorentzParams::weak(1.0));
    jw.rows.push_back(make_row("joint", n, -1, joint, 1.05 * eps));
    jw.pass = joint <= 1.05 * eps;
    jw.notes = "bound epsilon with 5% sampling allowance";

    const NestedWeakPair pair = nested_weak_pair(eps, n);
    const GraphSamples u2 = field_samples(pair.u2);
    auto lv = make_report("u2-level-sets", "u2 = 1/(t x): |{u2 > a}| = (1 + log a) / a", "value", P);
    const MeasuredSample all = u2.joint();
    for (int e = 1; e <= 3; ++e) {
        const double a = std::exp(double(e));
        const double m = all.measure_above(a), want = (1.0 + std::log(a)) / a;
        lv.rows.push_back(make_row("a=e^" + std::to_string(e), n, -1, m, want, {{"a", a}, {"tolerance", 0.01}}));
        if (!(std::fabs(m / want - 1.0) <= 0.01)) ++lv.violations;
    }
    lv.pass = lv.violations == 0;

    auto sw = make_report("u2-slice-weak", "u2(t): |u2(t)|_{L^{1,inf}} = 1/t", "value", P);
    for (int k = 0; k < n; ++k) {
        const double t = pair.u2.time->time(k);
        const double w = weak_norm(u2.slice(k), 1.0);
        sw.rows.push_back(make_row("slice", n, k, w, 1.0 / t, {{"t", t}}));
        if (!(std::fabs(w * t - 1.0) <= 0.02)) ++sw.violations;
    }
    sw.pass = sw.violations == 0;
    sw.notes = "tolerance 2% at every slice";

    auto ip = make_report("nested-interpolation", "nested weak norms between joint and endpoint norms, constant 1",
                          "info", P);
    for (auto [br, e0, e1] : {std::tuple{InterpBranch::A, 0.5, 0.75}, std::tuple{InterpBranch::A, 0.25, 0.5},
                              std::tuple{InterpBranch::B, 0.5, 0.75}, std::tuple{InterpBranch::B, 0.25, 0.5}}) {
        const InterpolationResult r = interpolate_nested(u1, br, e0, e1);
        ip.rows.push_back(make_row(br == InterpBranch::A ? "branch-a" : "branch-b", n, -1, r.measured, r.bound,
                                   {{"e0", e0}, {"e1", e1}, {"p", r.p}, {"q", r.q}}));
    }
    ip.pass = true;
    return {nw, jw, lv, sw, ip};
}

}  // namespace msa
