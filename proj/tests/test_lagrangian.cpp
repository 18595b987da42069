#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "msa/lagrangian.hpp"

using namespace msa;

namespace {

constexpr double kPi = 3.141592653589793;

VectorField constant_drift(const GridSpec& g, const TimeSpec& ts, double bx, double by) {
    VectorField b = VectorField::make(g, 2, ts);
    for (double& v : b.comp[0].data) v = bx;
    for (double& v : b.comp[1].data) v = by;
    return b;
}

}  // namespace

TEST_CASE("mollifier mass and sup") {
    for (int D : {1, 2, 3}) {
        const MollifierSpec m = MollifierSpec::standard(D);
        CHECK(m.sup_norm == doctest::Approx(m.c / std::exp(1.0)));
        CHECK(m.profile(1.0) == 0.0);
        // radial quadrature of the continuum mass
        const int N = 20000;
        double mass = 0.0;
        const double area = D == 1 ? 2.0 : D == 2 ? 2 * kPi : 4 * kPi;
        for (int i = 0; i < N; ++i) {
            const double r = (i + 0.5) / N;
            mass += area * std::pow(r, D - 1) * m.profile(r) / N;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        const AdmissibilityParams p = AdmissibilityParams::defaults(D);
        CHECK(p.eta0 == doctest::Approx(0.9 * std::log(2.0) / (m.sup_norm * std::pow(4.0, D))));
    }
}

TEST_CASE("mollifying a constant drift keeps it away from the boundary") {
    const GridSpec g = GridSpec::cube(2, 32, 1.0, false);
    const TimeSpec ts{4, 0.25, 0.25};
    const VectorField m = mollify_drift(constant_drift(g, ts, 0.3, -0.7), 0.1);
    for (std::size_t i = 0; i < g.size(); i += 13) {
        if (box_distance_to_boundary(g, g.center(i)) < 0.1) continue;
        CHECK(m.comp[0].data[i] == doctest::Approx(0.3));
        CHECK(m.comp[1].data[i] == doctest::Approx(-0.7));
    }
}

TEST_CASE("flow of a constant drift is a translation") {
    const GridSpec g = GridSpec::cube(2, 32, 4.0, false);
    const TimeSpec ts{16, 1.0 / 16, 1.0 / 16};
    const VectorField b = constant_drift(g, ts, 0.5, 0.25);
    const Point x{2.0, 2.0, 0};
    const double t = ts.time(15), s = t - 0.25;
    const Point y = flow_map(b, 0.5, t, x, s);
    CHECK(y[0] == doctest::Approx(2.0 - 0.5 * 0.25).epsilon(1e-6));
    CHECK(y[1] == doctest::Approx(2.0 - 0.25 * 0.25).epsilon(1e-6));
}

TEST_CASE("rotation keeps the radius under RK4") {
    const GridSpec g = GridSpec::cube(2, 64, 4.0, false, -2.0);
    const TimeSpec ts{8, 0.125, 0.125};
    VectorField b = VectorField::make(g, 2, ts);
    for (int k = 0; k < ts.nt; ++k)
        for (std::size_t p = 0; p < g.size(); ++p) {
            const Point c = g.center(p);
            b.comp[0].slice(k)[p] = -c[1];
            b.comp[1].slice(k)[p] = c[0];
        }
    const DriftSampler v(b);
    const Point x{0.5, 0.0, 0};
    const Point y = integrate_flow(v, ts, 1.0, x, 0.5, 1e-3);
    // exact: rotate back by 0.5 rad
    CHECK(y[0] == doctest::Approx(0.5 * std::cos(0.5)).epsilon(1e-3));
    CHECK(y[1] == doctest::Approx(-0.5 * std::sin(0.5)).epsilon(1e-3));
}

TEST_CASE("empty drift: skewed average equals the plain cylinder average") {
    const GridSpec g = GridSpec::cube(2, 24, 1.0, true);
    const TimeSpec ts{8, 0.125, 0.125};
    ScalarField f = ScalarField::make(g, ts);
    f.extension = Extension::Periodic;
    std::mt19937_64 r(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : f.data) v = u(r);
    const VectorField zero = VectorField::make(g, 2, ts);
    for (int i = 0; i < 10; ++i) {
        const Point x{u(r), u(r), 0};
        const double rho = 0.05 + 0.3 * u(r);
        CHECK(skewed_cyl_average(f, zero, 7, x, rho) == cyl_average(f, 7, x, rho));
        CHECK(skewed_cyl_average(f, VectorField{}, 7, x, rho) == cyl_average(f, 7, x, rho));
    }
}

TEST_CASE("skewed cylinder of a constant drift is a translate") {
    const GridSpec g = GridSpec::cube(2, 32, 4.0, false);
    const TimeSpec ts{16, 1.0 / 16, 1.0 / 16};
    const VectorField b = constant_drift(g, ts, 1.0, 0.0);
    const SkewedCylinder c = skewed_cylinder(b, ts, g, 15, {2.0, 2.0, 0}, 0.5);
    REQUIRE(c.backbone.size() >= 16u);
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        CHECK(c.backbone[i][0] == doctest::Approx(2.0 - (c.t - c.times[i])).epsilon(1e-6));
        if (i) CHECK(c.times[i] < c.times[i - 1]);
    }
    CHECK(c.times.front() == doctest::Approx(c.t));
    CHECK(c.times.back() >= c.t - 0.25 - 1e-12);
}

TEST_CASE("capped operator invariants on a shear") {
    const GridSpec g = GridSpec::cube(2, 24, 1.0, true);
    const TimeSpec ts{12, 1.0 / 12, 1.0 / 12};
    VectorField b = VectorField::make(g, 2, ts);
    for (int k = 0; k < ts.nt; ++k)
        for (std::size_t p = 0; p < g.size(); ++p) b.comp[0].slice(k)[p] = std::sin(2 * kPi * g.center(p)[1]);
    ScalarField f = ScalarField::make(g, ts);
    f.extension = Extension::Periodic;
    std::mt19937_64 r(6);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (double& v : f.data) v = u(r);
    const CappedScaleField c = capped_scale_op(f, b, 2.0, {}, AdmissibilityParams::defaults(2));
    REQUIRE(c.size() == f.data.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(c.s[i] <= c.r_bar[i]);
        CHECK(c.a_wedge[i] == c.a_lt[i] + c.a_eq[i]);
        CHECK(c.part[i] <= 3);
    }
}

TEST_CASE("admissibility of a zero drift") {
    const GridSpec g = GridSpec::cube(2, 16, 1.0, false);
    const TimeSpec ts{8, 0.125, 0.125};
    const VectorField b = VectorField::make(g, 2, ts);
    const ScalarField M = grad_maximal(b);
    for (double v : M.data) CHECK(v == 0.0);
    const AdmissibilityResult a = admissible(b, M, 7, {0.5, 0.5, 0}, 0.2, AdmissibilityParams::defaults(2));
    CHECK(a.admissible);
    CHECK(a.measured == 0.0);
}

TEST_CASE("separation of nearby trajectories in a gentle shear") {
    const GridSpec g = GridSpec::cube(2, 32, 1.0, true);
    const TimeSpec ts{16, 1.0 / 16, 1.0 / 16};
    VectorField b = VectorField::make(g, 2, ts);
    for (int k = 0; k < ts.nt; ++k)
        for (std::size_t p = 0; p < g.size(); ++p) b.comp[0].slice(k)[p] = 0.5 * std::sin(2 * kPi * g.center(p)[1]);
    const ScalarField M = grad_maximal(b);
    const AdmissibilityParams P = AdmissibilityParams::defaults(2);
    double rho = 0.4;
    SkewedCylinder c = skewed_cylinder(b, ts, g, 15, {0.5, 0.5, 0}, rho, &M, &P);
    while (!c.admissible) {
        rho *= 0.7;
        c = skewed_cylinder(b, ts, g, 15, {0.5, 0.5, 0}, rho, &M, &P);
    }
    CHECK(trajectory_separation_check(b, c, ts, 1.0, 2.0, P, 3) < 2.0);
}
