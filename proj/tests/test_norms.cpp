#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "msa/norms.hpp"

using namespace msa;

namespace {

MeasuredSample random_sample(unsigned seed, int n) {
    std::mt19937_64 r(seed);
    std::uniform_real_distribution<double> v(-3.0, 3.0), w(0.01, 0.2);
    MeasuredSample s;
    for (int i = 0; i < n; ++i) s.add(v(r), w(r));
    return s;
}

// sup over lambda of lambda mu{|f| > lambda}^{1/q}, scanning lambda just below each |value|.
double weak_oracle(const MeasuredSample& s, double q) {
    double best = 0.0;
    for (double lam : s.values) {
        const double l = std::fabs(lam);
        double m = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i)
            if (std::fabs(s.values[i]) >= l) m += s.weights[i];
        best = std::max(best, l * std::pow(m, 1.0 / q));
    }
    return best;
}

}  // namespace

TEST_CASE("strong norm is the weighted power sum") {
    const MeasuredSample s = random_sample(3, 50);
    for (double p : {0.5, 1.0, 2.0, 3.5}) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) acc += s.weights[i] * std::pow(std::fabs(s.values[i]), p);
        CHECK(strong_norm(s, p) == doctest::Approx(std::pow(acc, 1.0 / p)).epsilon(1e-12));
        CHECK(lorentz_norm(s, LorentzParams::strong(p)) == doctest::Approx(strong_norm(s, p)).epsilon(1e-10));
    }
}

TEST_CASE("weak norm against a level scan") {
    for (unsigned seed : {1u, 2u, 3u}) {
        const MeasuredSample s = random_sample(seed, 40);
        for (double q : {0.5, 1.0, 2.0}) CHECK(weak_norm(s, q) == doctest::Approx(weak_oracle(s, q)).epsilon(1e-12));
    }
}

TEST_CASE("Lorentz scale is ordered in the second index") {
    const MeasuredSample s = random_sample(9, 60);
    const double a = lorentz_norm(s, {2.0, 1.0}), b = lorentz_norm(s, {2.0, 2.0}), c = lorentz_norm(s, {2.0, 4.0}),
                 d = lorentz_norm(s, LorentzParams::weak(2.0));
    CHECK(a >= b);
    CHECK(b >= c);
    CHECK(c >= d);
}

TEST_CASE("indicator norms") {
    MeasuredSample s;
    s.add(2.0, 0.25);
    s.add(0.0, 0.75);
    CHECK(sup_norm(s) == 2.0);
    CHECK(weak_norm(s, 1.0) == doctest::Approx(0.5));
    CHECK(strong_norm(s, 2.0) == doctest::Approx(1.0));
    // |chi_E|_{p,q} = (p/q)^{1/q} |E|^{1/p}
    CHECK(lorentz_norm(s, {1.0, 3.0}) == doctest::Approx(2.0 * 0.25 * std::cbrt(1.0 / 3.0)));
    CHECK(s.measure_above(1.0) == doctest::Approx(0.25));
    CHECK(s.measure_above(2.0) == 0.0);
}

TEST_CASE("bad exponents throw") {
    const MeasuredSample s = random_sample(1, 5);
    CHECK_THROWS_AS(weak_norm(s, 0.0), DomainError);
    CHECK_THROWS_AS(strong_norm(s, -1.0), DomainError);
}

TEST_CASE("nested and joint norms on a separable field") {
    // f(t, x) = g(t) h(x): the nested strong norm factorises.
    GraphSamples gs;
    gs.dt = 0.1;
    const std::vector<double> g{1.0, 2.0, 0.5, 3.0}, h{0.2, 1.0, 4.0};
    const std::vector<double> w{0.3, 0.3, 0.4};
    for (double gt : g) {
        std::vector<double> v;
        for (double hx : h) v.push_back(gt * hx);
        gs.values.push_back(v);
        gs.weights.push_back(w);
    }
    double gt2 = 0, hx1 = 0;
    for (double a : g) gt2 += 0.1 * a * a;
    for (std::size_t i = 0; i < h.size(); ++i) hx1 += w[i] * h[i];
    CHECK(nested_norm(gs, LorentzParams::strong(2.0), LorentzParams::strong(1.0)) ==
          doctest::Approx(std::sqrt(gt2) * hx1));
    double j1 = 0;
    for (double a : g)
        for (std::size_t i = 0; i < h.size(); ++i) j1 += 0.1 * w[i] * a * h[i];
    CHECK(joint_norm(gs, LorentzParams::strong(1.0)) == doctest::Approx(j1));
    CHECK(gs.joint().total_weight() == doctest::Approx(0.4));
}

TEST_CASE("nested weak pair") {
    const double eps = 0.1;
    const GraphSamples u1 = nested_weak_u1_samples(eps, 256);
    CHECK(nested_norm(u1, LorentzParams::weak(1.0), LorentzParams::weak(1.0)) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(joint_norm(u1, LorentzParams::weak(1.0)) <= 1.05 * eps);
    const NestedWeakPair p = nested_weak_pair(eps, 64);
    // u2 at the upper cell corner
    CHECK(p.u2.slice(0)[0] == doctest::Approx(1.0 / ((1.0 / 64) * (1.0 / 64))));
    CHECK_THROWS(nested_weak_pair(0.0, 8));
}

TEST_CASE("graph sampling on the whole domain reads cells") {
    const GridSpec g = GridSpec::cube(2, 4, 1.0, false);
    ScalarField f = ScalarField::make(g, TimeSpec{2, 0.5, 0.5});
    for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = double(i);
    const GraphSamples s = sample_on_graph(f, GraphFamily::whole_domain(g, 2), Lookup::Cell);
    REQUIRE(s.nt() == 2);
    CHECK(s.values[1][3] == 19.0);
    CHECK(s.weights[0][0] == doctest::Approx(1.0 / 16));
    const GraphSamples fs = field_samples(f);
    CHECK(joint_norm(fs, LorentzParams::strong(1.0)) == doctest::Approx(0.5 / 16 * (31.0 * 32 / 2)));
}

TEST_CASE("interpolation branches satisfy their exponent relation") {
    const GraphSamples u1 = nested_weak_u1_samples(0.1, 128);
    const InterpolationResult a = interpolate_nested(u1, InterpBranch::A, 0.5, 0.75);
    CHECK((1 - 0.5) / a.p + 0.5 / 0.75 == doctest::Approx(1.0));
    const InterpolationResult b = interpolate_nested(u1, InterpBranch::B, 0.25, 0.5);
    CHECK(0.25 / 0.5 + (1 - 0.25) / b.q == doctest::Approx(1.0));
}
