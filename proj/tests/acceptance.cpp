// One line per acceptance criterion, each with its measured runtime.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "msa/parallel.hpp"
#include "msa/verify.hpp"

using namespace msa;
using Reports = std::vector<VerificationReport>;

namespace {

Reports all_reports;

void keep(const Reports& r) { all_reports.insert(all_reports.end(), r.begin(), r.end()); }

std::string failing(const Reports& r) {
    std::string s;
    for (const auto& x : r)
        if (!x.pass) s += (s.empty() ? "" : ",") + x.id;
    return s;
}

Reports run(const std::string& suite, SuiteConfig c = {}) {
    c.suite = suite;
    return run_suite(c);
}

struct Outcome {
    bool pass;
    std::string detail;
};

bool criterion(int n, const char* what, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.pass && dt < limit_s;
    std::printf("criterion %d %s: %s [%.1f s, limit %.0f s]%s%s\n", n, ok ? "PASS" : "FAIL", what, dt, limit_s,
                o.detail.empty() ? "" : " ", o.detail.c_str());
    std::fflush(stdout);
    return ok;
}

Outcome verdict(const Reports& r) {
    keep(r);
    const std::string f = failing(r);
    return {f.empty() && !r.empty(), f.empty() ? "" : "failing: " + f};
}

}  // namespace

int main(int argc, char** argv) {
    bool ok = true;

    ok &= criterion(1, "cantor superlevel bounds, depth 8, exact mass", 30, [] {
        SuiteConfig c;
        c.depth = 8;
        return verdict(run("cantor", c));
    });

    ok &= criterion(2, "nested weak counterexample pair, epsilon 0.1, 512 samples", 60, [] {
        SuiteConfig c;
        c.epsilon = 0.1;
        c.lorentz_n = 512;
        return verdict(run("lorentz", c));
    });

    ok &= criterion(3, "scale operator oracles: constant field and point mass", 60,
                    [] { return verdict(suite_scale_oracles(SuiteConfig{})); });

    ok &= criterion(4, "scale operator properties, 30 fields at 32 and 64", 300, [] {
        SuiteConfig c;
        c.trials = 30;
        c.grids = {32, 64};
        return verdict(suite_lemmas_space(c));
    });

    ok &= criterion(5, "trace ratio stability under refinement", 1200, [] {
        Reports r = suite_trace_space(SuiteConfig{});
        for (auto* fn : {&suite_trace_spacetime, &suite_anisotropic, &suite_drift_trace}) {
            Reports x = fn(SuiteConfig{});
            r.insert(r.end(), x.begin(), x.end());
        }
        std::string fitted;
        for (const auto& x : r) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "%s%s=%.3g", fitted.empty() ? "" : " ", x.id.c_str(), x.fitted);
            fitted += buf;
        }
        Outcome o = verdict(r);
        o.detail = o.detail.empty() ? fitted : o.detail + " | " + fitted;
        return o;
    });

    ok &= criterion(6, "zero-drift reduction and trajectory separation", 300,
                    [] { return verdict(suite_lagrangian(SuiteConfig{})); });

    ok &= criterion(7, "Navier-Stokes checks", 900, [] { return verdict(run("ns-theorems")); });

    ok &= criterion(8, "reports identical for 1 and 4 workers, same seed", 1800, [] {
        std::string bad;
        for (const char* s : {"cantor", "lorentz", "lemmas-space", "trace-space", "lagrangian"}) {
            SuiteConfig c;
            c.suite = s;
            c.seed = 7;
            set_thread_count(1);
            const std::string a = reports_to_json(run_suite(c));
            set_thread_count(4);
            const std::string b = reports_to_json(run_suite(c));
            set_thread_count(0);
            if (a != b) bad += std::string(bad.empty() ? "" : ",") + s;
        }
        return Outcome{bad.empty(), bad.empty() ? "" : "differs: " + bad};
    });

    const std::string out = argc > 1 ? argv[1] : "acceptance_reports.json";
    std::ofstream(out) << reports_to_json(all_reports);
    std::printf("acceptance %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}
