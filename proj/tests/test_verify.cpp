#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "json.hpp"
#include "msa/parallel.hpp"
#include "msa/verify.hpp"

using namespace msa;

namespace {

VerificationReport with_rows(std::vector<std::pair<int, double>> rows) {
    VerificationReport r;
    r.kind = "refinement";
    for (auto [g, v] : rows) {
        TrialRow t;
        t.grid = g;
        t.ratio = v;
        r.rows.push_back(t);
    }
    return r;
}

}  // namespace

TEST_CASE("refinement verdicts") {
    auto a = with_rows({{32, 1.0}, {32, 1.2}, {64, 1.3}});
    finish_refinement(a, 0.3);
    CHECK(a.pass);
    CHECK(a.fitted == doctest::Approx(1.3));
    REQUIRE(a.refinement.size() == 2u);
    CHECK(a.refinement[0].second == doctest::Approx(1.2));

    auto drift = with_rows({{32, 1.0}, {64, 1.5}});
    finish_refinement(drift, 0.3);
    CHECK_FALSE(drift.pass);

    auto one = with_rows({{32, 1.0}});
    finish_refinement(one, 0.3);
    CHECK_FALSE(one.pass);

    auto bad = with_rows({{32, 1.0}, {64, 1.0 / 0.0}});
    finish_refinement(bad, 0.3);
    CHECK_FALSE(bad.pass);
}

TEST_CASE("suite registry") {
    const auto& n = suite_names();
    for (const char* s : {"lemmas-space", "trace-space", "trace-spacetime", "anisotropic", "lagrangian", "cantor",
                          "lorentz", "ns-theorems"})
        CHECK(std::find(n.begin(), n.end(), s) != n.end());
    SuiteConfig c;
    c.suite = "nope";
    CHECK_THROWS_AS(run_suite(c), UsageError);
    c.suite = "cantor";
    c.depth = 13;
    CHECK_THROWS_AS(run_suite(c), UsageError);
}

TEST_CASE("lorentz and cantor suites pass and serialise") {
    SuiteConfig c;
    c.suite = "lorentz";
    auto r = run_suite(c);
    CHECK(all_pass(r));
    c.suite = "cantor";
    c.depth = 5;
    auto k = run_suite(c);
    CHECK(all_pass(k));
    const auto j = nlohmann::json::parse(reports_to_json(k));
    REQUIRE(j.is_array());
    CHECK(j.size() == k.size());
    CHECK(j[0].contains("id"));
}

TEST_CASE("reports are identical for one and four workers") {
    SuiteConfig c;
    c.suite = "trace-space";
    c.grids = {16, 32};
    c.trials = 2;
    set_thread_count(1);
    const std::string a = reports_to_json(run_suite(c));
    set_thread_count(4);
    const std::string b = reports_to_json(run_suite(c));
    set_thread_count(0);
    CHECK(a == b);
}
