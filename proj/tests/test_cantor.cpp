#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "msa/cantor.hpp"

using namespace msa;

namespace {

// Left endpoints over 4^k from digits {0, 2}, by enumeration.
std::set<std::uint64_t> endpoints_oracle(int k) {
    std::set<std::uint64_t> out{0};
    for (int i = 0; i < k; ++i) {
        std::set<std::uint64_t> next;
        for (auto e : out) {
            next.insert(4 * e);
            next.insert(4 * e + 2);
        }
        out = next;
    }
    return out;
}

}  // namespace

TEST_CASE("levels match digit enumeration") {
    const CantorSet c = build_cantor(5);
    REQUIRE(c.levels.size() == 6u);
    for (int k = 0; k <= 5; ++k) {
        const auto& L = c.levels[k];
        const auto want = endpoints_oracle(k);
        CHECK(std::set<std::uint64_t>(L.left.begin(), L.left.end()) == want);
        CHECK(L.interval_count() == (1u << k));
        CHECK(L.measure() == std::ldexp(1.0, -k));
        CHECK(L.amplitude == std::ldexp(std::sqrt(8.0), k));
    }
    CHECK(c.levels[2].endpoint(1) == 2.0 / 16);
}

TEST_CASE("mass and nesting") {
    for (int j : {1, 4, 7}) {
        const CantorSet c = build_cantor(j, j + 1);
        CHECK(c.nested());
        CHECK(c.l1_norm() == std::sqrt(8.0));
    }
}

TEST_CASE("superlevel bounds hold at every level") {
    const CantorReport r = cantor_lower_bound(6);
    CHECK(r.pass());
    REQUIRE(r.rows.size() == 7u);
    for (const auto& row : r.rows) {
        CHECK(row.threshold == doctest::Approx(std::ldexp(1.0, row.k) / std::sqrt(2.0)));
        CHECK(row.bound == std::ldexp(1.0, -row.k));
        CHECK(row.count >= row.required);
    }
}

TEST_CASE("depth limits") {
    CHECK_THROWS(build_cantor(13));
    CHECK_THROWS(build_cantor(0));
    CHECK_THROWS(build_cantor(4, 3));
}

TEST_CASE("growth rows are monotone in j") {
    const CantorGrowth g = cantor_growth(1, 6);
    REQUIRE(g.j.size() == 6u);
    for (std::size_t i = 1; i < g.j.size(); ++i) CHECK(g.l11[i] > g.l11[i - 1]);
    CHECK(g.slope > 0.0);
}
