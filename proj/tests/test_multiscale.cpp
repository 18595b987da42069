#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "msa/multiscale.hpp"
#include "msa/parallel.hpp"

using namespace msa;

namespace {

std::size_t count_oracle(int D, double h, double rho) {
    const int m = static_cast<int>(std::ceil(rho / h)) + 1;
    std::size_t c = 0;
    for (int i = -m; i <= m; ++i)
        for (int j = (D > 1 ? -m : 0); j <= (D > 1 ? m : 0); ++j)
            for (int k = (D > 2 ? -m : 0); k <= (D > 2 ? m : 0); ++k)
                if (std::sqrt(double(i * i + j * j + k * k)) * h < rho) ++c;
    return c;
}

ScalarField noisy(const GridSpec& g, std::optional<TimeSpec> ts, unsigned seed, double scale) {
    ScalarField f = ScalarField::make(g, ts);
    std::mt19937_64 r(seed);
    std::uniform_real_distribution<double> u(0.0, scale);
    for (double& v : f.data) v = u(r);
    return f;
}

}  // namespace

TEST_CASE("ladder rungs") {
    ScaleLadder L;
    L.rho_min = 0.01;
    L.rho_max = 0.5;
    const auto R = L.rungs();
    REQUIRE(R.size() > 40);
    CHECK(R[8] == 0.02);
    CHECK(R[16] == 0.04);
    CHECK(R[1] / R[0] == doctest::Approx(std::pow(2.0, 1.0 / 8)));
    CHECK(R.back() <= 0.5 * (1 + 1e-12));
    CHECK(L.step_ratio() == doctest::Approx(std::pow(2.0, 1.0 / 8)));
    ScaleLadder bad;
    bad.k = 0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("ball lattice counts") {
    for (int D : {1, 2, 3}) {
        const GridSpec g = GridSpec::cube(D, 16, 1.0, true);
        for (double rho : {0.05, 0.1, 0.17, 0.3}) CHECK(ball_count(g, rho) == count_oracle(D, 1.0 / 16, rho));
    }
}

TEST_CASE("averages of affine and constant fields") {
    const GridSpec g = GridSpec::cube(2, 32, 1.0, false);
    ScalarField f = ScalarField::make(g);
    for (std::size_t i = 0; i < g.size(); ++i) f.data[i] = 1.0 + g.center(i)[0] - 2.0 * g.center(i)[1];
    const Point x = g.center(g.index(15, 17));
    CHECK(ball_average(f, 0, x, 0.2) == doctest::Approx(1.0 + x[0] - 2.0 * x[1]));

    const TimeSpec ts{8, 0.125, 0.125};
    const ScalarField c = ScalarField::make(g, ts, 3.0);
    CHECK(cyl_average(c, 7, x, 0.3) == doctest::Approx(3.0));
}

TEST_CASE("constant field scale: c^{-1/alpha} within one bracket") {
    const GridSpec g = GridSpec::cube(2, 64, 4.0, true, -2.0);
    ScalarField f = ScalarField::make(g, std::nullopt, 2.0);
    f.extension = Extension::Periodic;
    for (double alpha : {0.5, 1.0, 2.0}) {
        const ScaleField sf = scale_op(f, alpha, {}, Mode::Space);
        const double want = std::pow(2.0, -1.0 / alpha);
        for (std::size_t i = 0; i < sf.size(); i += 97) {
            CHECK(sf.s[i] == doctest::Approx(want).epsilon(0.01));
            CHECK(sf.a[i] == doctest::Approx(std::pow(sf.s[i], -alpha)));
            CHECK(sf.label[i] == 0);
        }
    }
}

TEST_CASE("zero field never triggers, huge field is singular") {
    const GridSpec g = GridSpec::cube(2, 16, 1.0, false);
    const ScaleField z = scale_op(ScalarField::make(g), 1.0, {}, Mode::Space);
    for (double s : z.s) CHECK(std::isinf(s));
    const ScaleField big = scale_op(ScalarField::make(g, std::nullopt, 1e12), 1.0, {}, Mode::Space);
    for (std::size_t i = 0; i < big.size(); ++i) {
        CHECK(big.label[i] == 1);
        CHECK(big.s[i] == big.ladder.rho_min);
    }
}

TEST_CASE("a larger field has a smaller scale") {
    const GridSpec g = GridSpec::cube(2, 32, 1.0, false);
    const ScalarField f = noisy(g, std::nullopt, 5, 40.0);
    ScalarField f2 = f;
    for (double& v : f2.data) v *= 4.0;
    const ScaleField a = scale_op(f, 1.5, {}, Mode::Space), b = scale_op(f2, 1.5, {}, Mode::Space);
    const double step = a.ladder.step_ratio();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b.s[i] <= a.s[i] * step * (1 + 1e-12));
}

TEST_CASE("multi-exponent path equals single calls") {
    const GridSpec g = GridSpec::cube(2, 24, 1.0, false);
    const ScalarField f = noisy(g, TimeSpec{6, 1.0 / 6, 1.0 / 6}, 8, 60.0);
    const auto m = scale_op_multi(f, {1.0, 2.0}, {}, Mode::Spacetime);
    const ScaleField a = scale_op(f, 1.0, {}, Mode::Spacetime), b = scale_op(f, 2.0, {}, Mode::Spacetime);
    CHECK(m[0].s == a.s);
    CHECK(m[1].s == b.s);
}

TEST_CASE("results do not depend on the worker count") {
    const GridSpec g = GridSpec::cube(2, 32, 1.0, false);
    const ScalarField f = noisy(g, TimeSpec{4, 0.25, 0.25}, 11, 80.0);
    set_thread_count(1);
    const ScaleField a = scale_op(f, 1.5, {}, Mode::Spacetime);
    set_thread_count(4);
    const ScaleField b = scale_op(f, 1.5, {}, Mode::Spacetime);
    set_thread_count(0);
    CHECK(a.s == b.s);
    CHECK(a.a == b.a);
}

TEST_CASE("maximal function dominates the field") {
    const GridSpec g = GridSpec::cube(2, 16, 1.0, false);
    const ScalarField f = noisy(g, std::nullopt, 2, 1.0);
    const ScalarField M = maximal_function(f);
    for (std::size_t i = 0; i < f.data.size(); ++i) CHECK(M.data[i] >= f.data[i]);
}

TEST_CASE("level sets partition the finite graph points") {
    const GridSpec g = GridSpec::cube(2, 32, 1.0, false);
    const ScalarField f = noisy(g, std::nullopt, 4, 200.0);
    const ScaleField sf = scale_op(f, 1.0, {}, Mode::Space);
    const GraphFamily W = GraphFamily::whole_domain(g);
    double total = 0.0, want = 0.0;
    for (double rho = sf.ladder.rho_min / 2; rho < 2.0; rho *= 2) total += level_set_measure(sf, W, rho);
    for (double s : sf.s)
        if (std::isfinite(s)) want += g.cell_volume();
    CHECK(total == doctest::Approx(want));
}
