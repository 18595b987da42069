#include "msa/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace msa {

static_assert(std::endian::native == std::endian::little, "MSF payload is written in host order");

GridSpec GridSpec::cube(int D, int n, double extent, bool periodic, double origin) {
    GridSpec g;
    g.D = D;
    for (int a = 0; a < 3; ++a) {
        if (a < D) {
            g.n[a] = n;
            g.h[a] = extent / n;
            g.periodic[a] = periodic;
            g.origin[a] = origin;
        } else {
            g.n[a] = 1;
            g.h[a] = 1.0;
            g.periodic[a] = false;
            g.origin[a] = 0.0;
        }
    }
    g.validate();
    return g;
}

void GridSpec::validate() const {
    if (D < 1 || D > 3) throw DomainError("grid rank must be 1..3");
    for (int a = 0; a < D; ++a) {
        if (n[a] < 2) throw DomainError("grid needs n >= 2 per axis");
        if (!(h[a] > 0.0)) throw DomainError("grid spacing must be positive");
    }
}

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (int a = 0; a < D; ++a) s *= static_cast<std::size_t>(n[a]);
    return s;
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < D; ++a) v *= h[a];
    return v;
}

Point GridSpec::center(std::size_t idx) const {
    auto ii = unravel(idx);
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < D; ++a) p[a] = center(a, ii[a]);
    return p;
}

bool GridSpec::all_periodic() const {
    for (int a = 0; a < D; ++a)
        if (!periodic[a]) return false;
    return true;
}

bool GridSpec::any_periodic() const {
    for (int a = 0; a < D; ++a)
        if (periodic[a]) return true;
    return false;
}

std::size_t GridSpec::index(int i0, int i1, int i2) const {
    std::size_t idx = static_cast<std::size_t>(i0);
    if (D > 1) idx = idx * n[1] + i1;
    if (D > 2) idx = idx * n[2] + i2;
    return idx;
}

std::array<int, 3> GridSpec::unravel(std::size_t idx) const {
    std::array<int, 3> ii{0, 0, 0};
    for (int a = D - 1; a >= 1; --a) {
        ii[a] = static_cast<int>(idx % n[a]);
        idx /= n[a];
    }
    ii[0] = static_cast<int>(idx);
    return ii;
}

bool GridSpec::operator==(const GridSpec& o) const {
    if (D != o.D) return false;
    for (int a = 0; a < D; ++a)
        if (n[a] != o.n[a] || h[a] != o.h[a] || periodic[a] != o.periodic[a] || origin[a] != o.origin[a])
            return false;
    return true;
}

ScalarField ScalarField::make(const GridSpec& g, std::optional<TimeSpec> t, double value) {
    g.validate();
    ScalarField f;
    f.grid = g;
    f.time = t;
    if (t && (t->nt < 1 || !(t->dt > 0.0))) throw DomainError("time spec needs nt >= 1 and dt > 0");
    f.data.assign(static_cast<std::size_t>(f.nt()) * g.size(), value);
    f.extension = g.all_periodic() ? Extension::Periodic : Extension::ZeroOutside;
    return f;
}

void ScalarField::validate() const {
    grid.validate();
    if (data.size() != static_cast<std::size_t>(nt()) * grid.size()) throw DomainError("field size mismatch");
    for (double v : data)
        if (std::isnan(v) || v == -kInf) throw DomainError("field values must be finite or +inf");
}

double ScalarField::interpolate(int k, const Point& x) const {
    const double* s = slice(k);
    int i0[3] = {0, 0, 0};
    double w[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < grid.D; ++a) {
        double u = (x[a] - grid.origin[a]) / grid.h[a] - 0.5;
        double fl = std::floor(u);
        i0[a] = static_cast<int>(fl);
        w[a] = u - fl;
    }
    double acc = 0.0;
    const int corners = 1 << grid.D;
    for (int c = 0; c < corners; ++c) {
        double wt = 1.0;
        int ii[3] = {0, 0, 0};
        bool inside = true;
        for (int a = 0; a < grid.D; ++a) {
            int bit = (c >> a) & 1;
            wt *= bit ? w[a] : 1.0 - w[a];
            int i = i0[a] + bit;
            if (grid.periodic[a]) {
                i %= grid.n[a];
                if (i < 0) i += grid.n[a];
            } else if (i < 0 || i >= grid.n[a]) {
                inside = false;
            }
            ii[a] = i;
        }
        if (!inside || wt == 0.0) continue;
        acc += wt * s[grid.index(ii[0], ii[1], ii[2])];
    }
    return acc;
}

VectorField VectorField::make(const GridSpec& g, int ncomp, std::optional<TimeSpec> t) {
    VectorField v;
    for (int c = 0; c < ncomp; ++c) v.comp.push_back(ScalarField::make(g, t));
    return v;
}

void VectorField::validate() const {
    for (const auto& c : comp) {
        c.validate();
        if (!(c.grid == comp.front().grid) || c.time.has_value() != comp.front().time.has_value() ||
            (c.time && !(*c.time == *comp.front().time)))
            throw DomainError("vector components must share grid and time");
    }
}

GraphFamily GraphFamily::whole_domain(const GridSpec& g, int nt) {
    GraphFamily G;
    G.d = g.D;
    G.D = g.D;
    G.L = 0.0;
    G.domain = g;
    G.heights.assign(nt, {});
    return G;
}

GraphFamily GraphFamily::from_heights(const GridSpec& domain, const GridSpec& base, double L,
                                      std::vector<std::vector<double>> heights) {
    GraphFamily G;
    G.D = domain.D;
    G.d = base.D;
    if (G.d >= G.D) throw DomainError("graph base must have lower dimension than the domain");
    G.L = L;
    G.base = base;
    G.domain = domain;
    G.heights = std::move(heights);
    for (const auto& hs : G.heights)
        if (hs.size() != base.size() * static_cast<std::size_t>(G.D - G.d)) throw DomainError("graph height size");
    G.check_lipschitz();
    return G;
}

GraphFamily GraphFamily::points(const GridSpec& domain, std::vector<Point> per_slice) {
    GraphFamily G;
    G.D = domain.D;
    G.d = 0;
    G.domain = domain;
    G.anchors = std::move(per_slice);
    G.heights.assign(G.anchors.size(), {});
    return G;
}

int GraphFamily::nt() const { return static_cast<int>(heights.size()); }

std::size_t GraphFamily::npoints() const {
    if (d == D) return domain.size();
    if (d == 0) return 1;
    return base.size();
}

Point GraphFamily::point(int k, std::size_t i) const {
    if (d == D) return domain.center(i);
    if (d == 0) return anchors[k];
    Point p{0.0, 0.0, 0.0};
    Point b = base.center(i);
    for (int a = 0; a < d; ++a) p[a] = b[a];
    for (int a = d; a < D; ++a) p[a] = heights[k][i * (D - d) + (a - d)];
    return p;
}

void GraphFamily::check_lipschitz() const {
    if (d == 0 || d == D) return;
    const int m = D - d;
    for (const auto& hs : heights) {
        for (std::size_t i = 0; i < base.size(); ++i) {
            auto ii = base.unravel(i);
            for (int a = 0; a < d; ++a) {
                if (ii[a] + 1 >= base.n[a]) continue;
                auto jj = ii;
                jj[a] += 1;
                std::size_t j = base.index(jj[0], jj[1], jj[2]);
                double diff2 = 0.0;
                for (int c = 0; c < m; ++c) {
                    double dd = hs[i * m + c] - hs[j * m + c];
                    diff2 += dd * dd;
                }
                if (std::sqrt(diff2) > L * base.h[a] * (1.0 + 1e-9) + 1e-14)
                    throw DomainError("graph violates its Lipschitz bound");
            }
            for (int c = 0; c < m; ++c) {
                int ax = d + c;
                double y = hs[i * m + c];
                if (!domain.periodic[ax] &&
                    (y < domain.origin[ax] || y > domain.origin[ax] + domain.extent(ax)))
                    throw DomainError("graph point outside the domain");
            }
        }
    }
}

double box_distance_to_boundary(const GridSpec& g, const Point& x) {
    double d = kInf;
    for (int a = 0; a < g.D; ++a) {
        if (g.periodic[a]) continue;
        double lo = x[a] - g.origin[a];
        double hi = g.origin[a] + g.extent(a) - x[a];
        d = std::min(d, std::min(lo, hi));
    }
    return std::max(d, 0.0);
}

double r_star(double t, const Point& x, const GridSpec& omega, double L, double r0) {
    if (!(t > 0.0)) throw DomainError("r_star needs t > 0");
    if (!(r0 > 0.0)) throw DomainError("r_star needs r0 > 0");
    double m = std::min({std::sqrt(t), box_distance_to_boundary(omega, x), r0});
    return m / (L + 4.0);
}

double parabolic_distance(double t1, const Point& x1, double t2, const Point& x2, const GridSpec* torus) {
    double s = std::fabs(t1 - t2);
    for (int a = 0; a < 3; ++a) {
        double d = std::fabs(x1[a] - x2[a]);
        if (torus && a < torus->D && torus->periodic[a]) {
            double L = torus->extent(a);
            d = std::fmod(d, L);
            d = std::min(d, L - d);
        }
        s += d * d;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------- MSF I/O

namespace {

constexpr char kMagic[4] = {'M', 'S', 'F', '1'};

std::string sidecar_path(const std::string& path) {
    auto dot = path.rfind('.');
    auto slash = path.rfind('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return path.substr(0, dot) + ".json";
    return path + ".json";
}

template <class T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw TruncationError("unexpected end of MSF header");
    return v;
}

void write_payload(const std::string& path, const std::vector<std::uint64_t>& dims,
                   const std::vector<const std::vector<double>*>& blocks) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path);
    os.write(kMagic, 4);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) put<std::uint64_t>(os, d);
    put<std::uint8_t>(os, 0);
    for (const auto* b : blocks) os.write(reinterpret_cast<const char*>(b->data()), b->size() * sizeof(double));
    if (!os) throw FormatError("write failed for " + path);
}

nlohmann::json meta_json(const ScalarField& f, int ncomp, const std::string& role) {
    nlohmann::json j;
    j["spacing"] = std::vector<double>(f.grid.h.begin(), f.grid.h.begin() + f.grid.D);
    j["periodic"] = std::vector<bool>(f.grid.periodic.begin(), f.grid.periodic.begin() + f.grid.D);
    j["origin"] = std::vector<double>(f.grid.origin.begin(), f.grid.origin.begin() + f.grid.D);
    j["t0"] = f.time ? f.time->t0 : 0.0;
    j["dt"] = f.time ? f.time->dt : 0.0;
    j["time_axis"] = f.time.has_value();
    j["components"] = ncomp;
    j["extension"] = f.extension == Extension::Periodic ? "periodic" : "zero-outside";
    j["field_role"] = role;
    return j;
}

void write_sidecar(const std::string& path, const nlohmann::json& j) {
    std::ofstream os(sidecar_path(path));
    if (!os) throw FormatError("cannot write sidecar for " + path);
    os << j.dump(2) << "\n";
}

struct RawFile {
    std::vector<std::uint64_t> dims;
    std::vector<double> payload;
    nlohmann::json meta;
};

RawFile read_raw(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad MSF magic in " + path);
    auto version = get<std::uint32_t>(is);
    if (version != 1) throw FormatError("unsupported MSF version");
    auto rank = get<std::uint32_t>(is);
    if (rank < 1 || rank > 5) throw FormatError("bad MSF rank");
    RawFile r;
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        auto d = get<std::uint64_t>(is);
        if (d == 0 || d > (1ull << 32)) throw FormatError("bad MSF dimension");
        r.dims.push_back(d);
        total *= d;
    }
    if (get<std::uint8_t>(is) != 0) throw FormatError("unsupported MSF dtype");
    r.payload.resize(total);
    is.read(reinterpret_cast<char*>(r.payload.data()), total * sizeof(double));
    if (static_cast<std::uint64_t>(is.gcount()) != total * sizeof(double))
        throw TruncationError("MSF payload shorter than its header claims");
    std::ifstream js(sidecar_path(path));
    if (!js) throw FormatError("missing sidecar for " + path);
    try {
        js >> r.meta;
    } catch (const std::exception& e) {
        throw FormatError(std::string("bad sidecar: ") + e.what());
    }
    return r;
}

ScalarField field_from_meta(const nlohmann::json& m, const std::vector<std::uint64_t>& dims, std::size_t skip) {
    auto spacing = m.at("spacing").get<std::vector<double>>();
    auto periodic = m.at("periodic").get<std::vector<bool>>();
    std::vector<double> origin(spacing.size(), 0.0);
    if (m.contains("origin")) origin = m.at("origin").get<std::vector<double>>();
    bool has_time = m.value("time_axis", false);
    int D = static_cast<int>(spacing.size());
    if (dims.size() != skip + (has_time ? 1 : 0) + D) throw FormatError("MSF rank does not match sidecar");
    GridSpec g;
    g.D = D;
    std::size_t off = skip + (has_time ? 1 : 0);
    for (int a = 0; a < D; ++a) {
        g.n[a] = static_cast<int>(dims[off + a]);
        g.h[a] = spacing[a];
        g.periodic[a] = periodic.at(a);
        g.origin[a] = origin.at(a);
    }
    std::optional<TimeSpec> t;
    if (has_time) t = TimeSpec{static_cast<int>(dims[skip]), m.at("dt").get<double>(), m.at("t0").get<double>()};
    ScalarField f = ScalarField::make(g, t);
    f.extension = m.value("extension", std::string("zero-outside")) == "periodic" ? Extension::Periodic
                                                                                 : Extension::ZeroOutside;
    return f;
}

std::vector<std::uint64_t> dims_of(const ScalarField& f) {
    std::vector<std::uint64_t> dims;
    if (f.time) dims.push_back(static_cast<std::uint64_t>(f.time->nt));
    for (int a = 0; a < f.grid.D; ++a) dims.push_back(static_cast<std::uint64_t>(f.grid.n[a]));
    return dims;
}

}  // namespace

void save_field(const std::string& path, const ScalarField& f, const std::string& role) {
    write_payload(path, dims_of(f), {&f.data});
    write_sidecar(path, meta_json(f, 0, role));
}

void save_field(const std::string& path, const VectorField& v, const std::string& role) {
    if (v.empty()) throw DomainError("cannot save an empty vector field");
    v.validate();
    auto dims = dims_of(v.comp.front());
    dims.insert(dims.begin(), static_cast<std::uint64_t>(v.ncomp()));
    std::vector<const std::vector<double>*> blocks;
    for (const auto& c : v.comp) blocks.push_back(&c.data);
    write_payload(path, dims, blocks);
    write_sidecar(path, meta_json(v.comp.front(), v.ncomp(), role));
}

bool is_vector_file(const std::string& path) {
    std::ifstream js(sidecar_path(path));
    if (!js) throw FormatError("missing sidecar for " + path);
    nlohmann::json m;
    js >> m;
    return m.value("components", 0) > 0;
}

ScalarField load_scalar(const std::string& path, std::string* role) {
    RawFile r = read_raw(path);
    if (r.meta.value("components", 0) > 0) throw FormatError(path + " holds a vector field");
    ScalarField f = field_from_meta(r.meta, r.dims, 0);
    if (f.data.size() != r.payload.size()) throw TruncationError("payload size mismatch");
    f.data = std::move(r.payload);
    if (role) *role = r.meta.value("field_role", std::string());
    return f;
}

VectorField load_vector(const std::string& path, std::string* role) {
    RawFile r = read_raw(path);
    int nc = r.meta.value("components", 0);
    if (nc <= 0) throw FormatError(path + " holds a scalar field");
    if (r.dims.front() != static_cast<std::uint64_t>(nc)) throw FormatError("component count mismatch");
    ScalarField proto = field_from_meta(r.meta, r.dims, 1);
    VectorField v;
    std::size_t block = proto.data.size();
    if (block * nc != r.payload.size()) throw TruncationError("payload size mismatch");
    for (int c = 0; c < nc; ++c) {
        ScalarField f = proto;
        std::copy(r.payload.begin() + c * block, r.payload.begin() + (c + 1) * block, f.data.begin());
        v.comp.push_back(std::move(f));
    }
    if (role) *role = r.meta.value("field_role", std::string());
    return v;
}

}  // namespace msa
