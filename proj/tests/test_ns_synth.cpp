#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "msa/ns_synth.hpp"

using namespace msa;

namespace {
constexpr double kPi = 3.141592653589793;
}

TEST_CASE("torus grid") {
    const GridSpec g = ns_grid(32);
    CHECK(g.D == 3);
    CHECK(g.n[0] == 32);
    CHECK(g.n[2] == 4);
    CHECK(g.h[0] == doctest::Approx(2 * kPi / 32));
    CHECK(g.h[2] == doctest::Approx(2 * kPi / 32));
    CHECK(g.all_periodic());
}

TEST_CASE("Taylor-Green velocity and energy") {
    const GridSpec g = ns_grid(32);
    const double A = 0.25;
    const VectorField u = taylor_green_velocity(g, A);
    for (std::size_t p = 0; p < g.size(); p += 31) {
        const Point x = g.center(p);
        CHECK(u.comp[0].data[p] == doctest::Approx(A * std::cos(x[0]) * std::sin(x[1])));
        CHECK(u.comp[1].data[p] == doctest::Approx(-A * std::sin(x[0]) * std::cos(x[1])));
        CHECK(u.comp[2].data[p] == 0.0);
    }
    // |u|^2 over T^3: A^2 (pi^2 + pi^2) 2 pi
    const FlowSeries s = taylor_green_series(1.0, g, 1.0, 4, A);
    CHECK(s.energy0 == doctest::Approx(4 * kPi * kPi * kPi * A * A).epsilon(1e-10));
    for (int k = 0; k < 4; ++k)
        CHECK(s.energy[k] == doctest::Approx(s.energy0 * std::exp(-4.0 * s.time.time(k))).epsilon(1e-10));
    CHECK(s.time.time(3) == doctest::Approx(1.0));
    CHECK(taylor_green_residual(s) <= 1e-6);
    CHECK(s.energy_excess() <= 1e-6);
}

TEST_CASE("closed-form vorticity and pressure") {
    const GridSpec g = ns_grid(16);
    const FlowSeries s = taylor_green(1.0, 0.5, g, 1.0);
    const double d = std::exp(-2.0 * 0.5);
    for (std::size_t p = 0; p < g.size(); p += 17) {
        const Point x = g.center(p);
        // omega_3 = d_x u_2 - d_y u_1 = -2 cos x cos y
        CHECK(std::fabs(s.omega.data[p]) == doctest::Approx(2 * d * std::fabs(std::cos(x[0]) * std::cos(x[1]))));
        // P = (cos 2x + cos 2y) / 4 up to the sign convention
        CHECK(std::fabs(s.P.data[p]) ==
              doctest::Approx(d * d * std::fabs(std::cos(2 * x[0]) + std::cos(2 * x[1])) / 4).epsilon(1e-9));
    }
}

TEST_CASE("random solenoidal fields are divergence free and scaled") {
    const GridSpec g = ns_grid(32);
    const VectorField u = random_solenoidal(g, 7, 1.0, 4);
    double mx = 0.0, div = 0.0;
    const int n = 32;
    const double h = g.h[0];
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto c = g.unravel(p);
        mx = std::max(mx, std::hypot(u.comp[0].data[p], u.comp[1].data[p]));
        // centred differences, second order
        const double dx = (u.comp[0].data[g.index((c[0] + 1) % n, c[1], c[2])] -
                           u.comp[0].data[g.index((c[0] + n - 1) % n, c[1], c[2])]) / (2 * h);
        const double dy = (u.comp[1].data[g.index(c[0], (c[1] + 1) % n, c[2])] -
                           u.comp[1].data[g.index(c[0], (c[1] + n - 1) % n, c[2])]) / (2 * h);
        div = std::max(div, std::fabs(dx + dy));
    }
    CHECK(mx == doctest::Approx(1.0).epsilon(1e-9));
    // truncation of the centred stencil on modes |k| <= 4
    CHECK(div < 0.2);
    const VectorField v = random_solenoidal(g, 7, 1.0, 4);
    CHECK(v.comp[0].data == u.comp[0].data);
}

TEST_CASE("solver tracks the closed form and the energy ledger") {
    const GridSpec g = ns_grid(32);
    SolverConfig sc;
    sc.snapshots = 8;
    const FlowSeries sol = spectral_solve(taylor_green_velocity(g, 0.25), sc);
    const FlowSeries tg = taylor_green_series(1.0, g, 1.0, 8, 0.25);
    CHECK(l2_distance_last(sol, tg) <= 1e-4);
    CHECK(sol.energy_excess() <= 1e-6);
    REQUIRE(sol.dissipation.size() == 8u);
    for (std::size_t k = 1; k < 8; ++k) CHECK(sol.dissipation[k] >= sol.dissipation[k - 1]);

    // CFL: 200 * 1e-3 / (2 pi / 32) > 0.5
    CHECK_THROWS_AS(spectral_solve(taylor_green_velocity(g, 200.0), SolverConfig{}), ConfigError);
}

TEST_CASE("derivative norms of Taylor-Green") {
    const GridSpec g = ns_grid(32);
    const FlowSeries s = taylor_green(1.0, 0.25, g, 1.0);
    const ScalarField gu = derivative_norm(s, Quantity::Velocity, 1);
    const double d = std::exp(-0.5);
    for (std::size_t p = 0; p < g.size(); p += 23) {
        const Point x = g.center(p);
        const double a = std::sin(x[0]) * std::sin(x[1]), b = std::cos(x[0]) * std::cos(x[1]);
        CHECK(gu.data[p] == doctest::Approx(d * std::sqrt(2 * a * a + 2 * b * b)).epsilon(1e-9));
    }
}

TEST_CASE("pivot defaults and lattice CSV") {
    const PivotConfig p = PivotConfig::defaults();
    CHECK(p.eta == p.eta_bar);
    CHECK(p.eps0 == 1.0);
    PivotConfig bad = p;
    bad.eta = -1.0;
    CHECK_THROWS(bad.validate());

    const FlowSeries s = taylor_green_series(1.0, ns_grid(32), 1.0, 8, 0.25);
    std::istringstream csv(mixed_norm_lattice(s));
    std::string line;
    std::getline(csv, line);
    CHECK(line.rfind("n,", 0) == 0);
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows > 0);
}
