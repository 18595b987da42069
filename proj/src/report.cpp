#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"
#include "msa/verify.hpp"

namespace msa {

void finish_refinement(VerificationReport& r, double band) {
    std::map<int, double> best;
    bool finite = true;
    for (const auto& row : r.rows) {
        if (!std::isfinite(row.ratio)) finite = false;
        auto it = best.find(row.grid);
        if (it == best.end()) best[row.grid] = row.ratio;
        else it->second = std::max(it->second, row.ratio);
    }
    r.refinement.assign(best.begin(), best.end());
    if (r.refinement.empty()) {
        r.pass = false;
        r.notes = "no rows";
        return;
    }
    const double c0 = r.refinement.front().second, c1 = r.refinement.back().second;
    r.fitted = c1;
    bool doubling = r.refinement.size() > 1;
    for (std::size_t i = 1; i < r.refinement.size(); ++i)
        if (!(r.refinement[i].second >= 2.0 * r.refinement[i - 1].second) || r.refinement[i - 1].second == 0.0)
            doubling = false;
    bool in_band;
    if (c0 == 0.0) in_band = c1 == 0.0;
    else in_band = std::fabs(c1 / c0 - 1.0) <= band;
    r.pass = finite && in_band && !doubling && r.refinement.size() >= 2;
    if (r.refinement.size() < 2) r.notes = "needs at least two grids";
}

std::string reports_to_json(const std::vector<VerificationReport>& reports) {
    using nlohmann::json;
    json out = json::array();
    for (const auto& r : reports) {
        json j;
        j["id"] = r.id;
        j["anchor"] = r.anchor;
        j["kind"] = r.kind;
        j["params"] = json::parse(r.params);
        j["fitted"] = r.fitted;
        j["violations"] = r.violations;
        j["verdict"] = r.pass ? "PASS" : "FAIL";
        j["notes"] = r.notes;
        json ref = json::array();
        for (auto& [g, c] : r.refinement) ref.push_back({{"grid", g}, {"fitted", c}});
        j["refinement"] = ref;
        json rows = json::array();
        for (const auto& row : r.rows) {
            json x;
            x["name"] = row.name;
            x["lhs"] = row.lhs;
            x["rhs"] = row.rhs;
            x["ratio"] = row.ratio;
            x["params"] = json::parse(row.params);
            x["grid"] = row.grid;
            x["trial"] = row.trial;
            x["notes"] = row.notes;
            x["anchor"] = r.anchor;
            rows.push_back(std::move(x));
        }
        j["rows"] = std::move(rows);
        out.push_back(std::move(j));
    }
    // Non-finite numbers are not valid JSON; dump() writes them as null.
    return out.dump(2);
}

bool all_pass(const std::vector<VerificationReport>& reports) {
    return std::all_of(reports.begin(), reports.end(), [](const VerificationReport& r) { return r.pass; });
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"lemmas-space", "trace-space", "trace-spacetime", "anisotropic",
                                                "lagrangian",   "cantor",      "lorentz",         "ns-theorems"};
    return names;
}

std::vector<VerificationReport> run_suite(const SuiteConfig& cfg) {
    if (cfg.band <= 0.0) throw UsageError("band must be positive");
    if (cfg.suite == "lemmas-space") {
        auto a = suite_lemmas_space(cfg);
        auto b = suite_scale_oracles(cfg);
        a.insert(a.end(), b.begin(), b.end());
        return a;
    }
    if (cfg.suite == "trace-space") return suite_trace_space(cfg);
    if (cfg.suite == "trace-spacetime") return suite_trace_spacetime(cfg);
    if (cfg.suite == "anisotropic") return suite_anisotropic(cfg);
    if (cfg.suite == "lagrangian") {
        auto a = suite_lagrangian(cfg);
        auto b = suite_drift_trace(cfg);
        a.insert(a.end(), b.begin(), b.end());
        return a;
    }
    if (cfg.suite == "cantor") return suite_cantor(cfg);
    if (cfg.suite == "lorentz") return suite_lorentz(cfg);
    if (cfg.suite == "ns-theorems") return suite_ns(cfg);
    throw UsageError("unknown suite: " + cfg.suite);
}

}  // namespace msa
