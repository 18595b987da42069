#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "msa/field.hpp"

using namespace msa;

TEST_CASE("cell centres and flat indices") {
    const GridSpec g = GridSpec::cube(3, 6, 3.0, false, -1.0);
    CHECK(g.size() == 216u);
    CHECK(g.center(0, 0) == doctest::Approx(-0.75));
    CHECK(g.center(2, 5) == doctest::Approx(1.75));
    for (std::size_t i = 0; i < g.size(); i += 7) {
        auto c = g.unravel(i);
        CHECK(g.index(c[0], c[1], c[2]) == i);
        const Point p = g.center(i);
        for (int a = 0; a < 3; ++a) CHECK(p[a] == doctest::Approx(-1.0 + (c[a] + 0.5) * 0.5));
    }
    CHECK(g.cell_volume() == doctest::Approx(0.125));
}

TEST_CASE("bad grids are refused") {
    GridSpec g = GridSpec::cube(2, 4, 1.0, false);
    g.n[0] = 0;
    CHECK_THROWS(g.validate());
    CHECK_THROWS(GridSpec::cube(4, 4, 1.0, false).validate());
}

TEST_CASE("interpolation reproduces affine data inside the box") {
    const GridSpec g = GridSpec::cube(2, 16, 1.0, false);
    ScalarField f = ScalarField::make(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point p = g.center(i);
        f.data[i] = 2.0 * p[0] - 3.0 * p[1] + 0.5;
    }
    for (double x : {0.1, 0.33, 0.71})
        for (double y : {0.2, 0.5, 0.9}) CHECK(f.interpolate(0, {x, y, 0}) == doctest::Approx(2 * x - 3 * y + 0.5));
}

TEST_CASE("periodic interpolation wraps") {
    const GridSpec g = GridSpec::cube(1, 8, 1.0, true);
    ScalarField f = ScalarField::make(g);
    f.extension = Extension::Periodic;
    for (std::size_t i = 0; i < g.size(); ++i) f.data[i] = double(i);
    CHECK(f.interpolate(0, {0.0625, 0, 0}) == doctest::Approx(f.interpolate(0, {1.0625, 0, 0})));
    // halfway between the last and the first centre
    CHECK(f.interpolate(0, {0.0, 0, 0}) == doctest::Approx(3.5));
}

TEST_CASE("parabolic distance") {
    CHECK(parabolic_distance(1.0, {0, 0, 0}, 0.75, {0.3, 0.4, 0}) == doctest::Approx(std::sqrt(0.25 + 0.25)));
    const GridSpec t = GridSpec::cube(2, 10, 1.0, true);
    CHECK(parabolic_distance(0.0, {0.05, 0.5, 0}, 0.0, {0.95, 0.5, 0}, &t) == doctest::Approx(0.1));
}

TEST_CASE("r_star is the smallest of its three terms over L + 4") {
    const GridSpec g = GridSpec::cube(2, 10, 1.0, false);
    const Point x{0.2, 0.6, 0};
    for (double t : {0.01, 0.09, 0.5})
        for (double L : {0.0, 1.5}) {
            const double want = std::min({std::sqrt(t), 0.2, 0.3}) / (L + 4.0);
            CHECK(r_star(t, x, g, L, 0.3) == doctest::Approx(want));
        }
}

TEST_CASE("graphs: whole domain, heights, Lipschitz check") {
    const GridSpec g = GridSpec::cube(2, 8, 1.0, false);
    const GraphFamily w = GraphFamily::whole_domain(g, 3);
    CHECK(w.nt() == 3);
    CHECK(w.npoints() == 64u);
    const GridSpec base = GridSpec::cube(1, 8, 1.0, false);
    std::vector<double> flat(8, 0.5), steep(8);
    for (int i = 0; i < 8; ++i) steep[i] = (i % 2) ? 0.9 : 0.1;
    const GraphFamily h = GraphFamily::from_heights(g, base, 0.1, {flat});
    CHECK(h.point(0, 3)[1] == doctest::Approx(0.5));
    CHECK(h.point(0, 3)[0] == doctest::Approx(base.center(0, 3)));
    CHECK_THROWS(GraphFamily::from_heights(g, base, 1.0, {steep}));
}

TEST_CASE("MSF round trip and corrupt input") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "msa_test_field";
    fs::create_directories(dir);
    const GridSpec g = GridSpec::cube(2, 5, 2.0, true, -1.0);
    const TimeSpec ts{3, 0.25, 0.5};
    ScalarField f = ScalarField::make(g, ts);
    for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = std::sin(double(i)) * 1e3;
    const std::string p = (dir / "f.msf").string();
    save_field(p, f, "probe");
    std::string role;
    const ScalarField r = load_scalar(p, &role);
    CHECK(role == "probe");
    CHECK(r.grid == g);
    REQUIRE(r.time);
    CHECK(*r.time == ts);
    CHECK(r.data == f.data);
    CHECK_FALSE(is_vector_file(p));

    VectorField v = VectorField::make(g, 2, ts);
    v.comp[1].data[7] = 4.5;
    const std::string q = (dir / "v.msf").string();
    save_field(q, v);
    CHECK(is_vector_file(q));
    CHECK(load_vector(q).comp[1].data[7] == 4.5);

    {
        std::ofstream o(p, std::ios::binary | std::ios::trunc);
        o << "junk";
    }
    CHECK_THROWS(load_scalar(p));
    fs::remove_all(dir);
}
