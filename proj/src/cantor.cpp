#include "msa/cantor.hpp"

#include <cmath>

#include "msa/multiscale.hpp"
#include "msa/norms.hpp"

namespace msa {

double CantorLevel::endpoint(std::size_t i) const { return std::ldexp(static_cast<double>(left.at(i)), -2 * k); }

double CantorLevel::measure() const { return std::ldexp(static_cast<double>(left.size()), -2 * k); }

std::vector<std::uint8_t> CantorSet::mask(int k) const {
    if (k < 0 || k > j) throw DomainError("Cantor level out of range");
    const CantorLevel& L = levels[k];
    const std::uint64_t width = std::uint64_t{1} << (2 * (grid_depth - k));
    std::vector<std::uint8_t> m(static_cast<std::size_t>(f.grid.n[0]), 0);
    for (std::uint64_t x : L.left)
        for (std::uint64_t c = x * width; c < (x + 1) * width; ++c) m[c] = 1;
    return m;
}

bool CantorSet::nested() const {
    for (int k = 0; k < j; ++k) {
        auto a = mask(k), b = mask(k + 1);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (b[i] && !a[i]) return false;
    }
    return true;
}

double CantorSet::l1_norm() const {
    std::uint64_t cells = 0;
    for (double v : f.data)
        if (v != 0.0) ++cells;
    return static_cast<double>(cells) * levels[j].amplitude * f.grid.h[0];
}

CantorSet build_cantor(int j, int grid_depth) {
    if (j < 1) throw DomainError("Cantor depth must be >= 1");
    if (grid_depth == 0) grid_depth = j;
    if (j > 12 || grid_depth > 12) throw ResourceError("Cantor depth above 12");
    if (grid_depth < j) throw DomainError("grid coarser than the Cantor level");
    CantorSet C;
    C.j = j;
    C.grid_depth = grid_depth;
    CantorLevel L0;
    L0.left = {0};
    L0.amplitude = std::sqrt(8.0);
    C.levels.push_back(L0);
    for (int k = 1; k <= j; ++k) {
        CantorLevel L;
        L.k = k;
        L.amplitude = std::ldexp(std::sqrt(8.0), k);
        for (std::uint64_t x : C.levels.back().left) {
            L.left.push_back(4 * x);
            L.left.push_back(4 * x + 2);
        }
        C.levels.push_back(std::move(L));
    }
    const int n = 1 << (2 * grid_depth);
    GridSpec g = GridSpec::cube(1, n, 1.0, false);
    C.f = ScalarField::make(g);
    auto m = C.mask(j);
    for (int i = 0; i < n; ++i)
        if (m[i]) C.f.data[i] = C.levels[j].amplitude;
    return C;
}

bool CantorReport::pass() const {
    if (!l1_exact || !nested) return false;
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

namespace {

ScaleField cantor_scale(const CantorSet& C, double alpha) {
    ScaleLadder L;
    L.rho_min = C.f.grid.h[0];
    L.rho_max = 2.0;
    L.k = 8;
    L.m = 6;
    return scale_op(C.f, alpha, L, Mode::Space);
}

void fill_norms(CantorReport& r, const ScaleField& sf) {
    MeasuredSample s;
    for (std::size_t i = 0; i < sf.size(); ++i) s.add(sf.a[i], sf.grid.h[0]);
    r.weak_l1 = weak_norm(s, 1.0);
    r.l11 = lorentz_norm(s, {1.0, 1.0});
    r.l12 = lorentz_norm(s, {1.0, 2.0});
    r.l14 = lorentz_norm(s, {1.0, 4.0});
}

}  // namespace

CantorReport cantor_lower_bound(int j, double alpha) {
    if (alpha != 0.5) throw DomainError("the Cantor bound is stated for alpha = 1/2");
    CantorSet C = build_cantor(j);
    CantorReport r;
    r.j = j;
    r.alpha = alpha;
    r.l1 = C.l1_norm();
    r.l1_exact = r.l1 == std::sqrt(8.0);
    r.nested = C.nested();
    ScaleField sf = cantor_scale(C, alpha);
    const int G = C.grid_depth;
    for (int k = 0; k <= j; ++k) {
        CantorRow row;
        row.k = k;
        row.threshold = std::ldexp(std::sqrt(0.5), k);
        row.radius = std::ldexp(1.0, 1 - 2 * k);
        for (double s : sf.s)
            if (s <= row.radius) ++row.count;
        row.required = std::uint64_t{1} << (2 * G - k);
        row.measure = std::ldexp(static_cast<double>(row.count), -2 * G);
        row.bound = std::ldexp(1.0, -k);
        row.pass = row.count >= row.required;
        r.rows.push_back(row);
    }
    fill_norms(r, sf);
    return r;
}

CantorGrowth cantor_growth(int jmin, int jmax) {
    if (jmin < 1 || jmax < jmin) throw DomainError("bad Cantor depth range");
    CantorGrowth g;
    for (int j = jmin; j <= jmax; ++j) {
        CantorSet C = build_cantor(j);
        CantorReport r;
        fill_norms(r, cantor_scale(C, 0.5));
        g.j.push_back(j);
        g.weak_l1.push_back(r.weak_l1);
        g.l11.push_back(r.l11);
        g.l12.push_back(r.l12);
        g.l14.push_back(r.l14);
    }
    const double n = static_cast<double>(g.j.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < g.j.size(); ++i) {
        sx += g.j[i], sy += g.l11[i], sxx += g.j[i] * g.j[i], sxy += g.j[i] * g.l11[i];
    }
    const double den = n * sxx - sx * sx;
    g.slope = den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    return g;
}

}  // namespace msa
