#pragma once
/// @file field.hpp
/// @brief Uniform grids, sampled fields, graph families and parabolic geometry.

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace msa {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Point = std::array<double, 3>;

/// Cell-centred uniform grid in 1 to 3 space dimensions.
/// Sample i on axis a sits at origin[a] + (i + 1/2) h[a].
struct GridSpec {
    int D = 1;
    std::array<int, 3> n{1, 1, 1};
    std::array<double, 3> h{1.0, 1.0, 1.0};
    std::array<bool, 3> periodic{false, false, false};
    std::array<double, 3> origin{0.0, 0.0, 0.0};

    /// Equal n, extent and periodicity on every axis.
    static GridSpec cube(int D, int n, double extent, bool periodic, double origin = 0.0);

    void validate() const;
    std::size_t size() const;
    double extent(int a) const { return n[a] * h[a]; }
    double cell_volume() const;
    double center(int a, int i) const { return origin[a] + (i + 0.5) * h[a]; }
    Point center(std::size_t idx) const;
    bool all_periodic() const;
    bool any_periodic() const;
    std::size_t index(int i0, int i1 = 0, int i2 = 0) const;
    std::array<int, 3> unravel(std::size_t idx) const;
    bool operator==(const GridSpec& o) const;
};

/// Time sampling. Slice k sits at t0 + k dt and stands for (t_k - dt, t_k],
/// so the time domain is (t0 - dt, t0 + (nt - 1) dt].
struct TimeSpec {
    int nt = 1;
    double dt = 1.0;
    double t0 = 0.0;

    double time(int k) const { return t0 + k * dt; }
    double lower() const { return t0 - dt; }
    double upper() const { return t0 + (nt - 1) * dt; }
    bool operator==(const TimeSpec& o) const { return nt == o.nt && dt == o.dt && t0 == o.t0; }
};

enum class Extension { ZeroOutside, Periodic };

struct ScalarField {
    GridSpec grid;
    std::optional<TimeSpec> time;
    std::vector<double> data;
    Extension extension = Extension::ZeroOutside;

    static ScalarField make(const GridSpec& g, std::optional<TimeSpec> t = std::nullopt, double value = 0.0);

    int nt() const { return time ? time->nt : 1; }
    std::size_t slice_size() const { return grid.size(); }
    double* slice(int k) { return data.data() + static_cast<std::size_t>(k) * grid.size(); }
    const double* slice(int k) const { return data.data() + static_cast<std::size_t>(k) * grid.size(); }
    void validate() const;

    /// Multilinear interpolation at a point of slice k; honours the extension rule.
    double interpolate(int k, const Point& x) const;
};

struct VectorField {
    std::vector<ScalarField> comp;

    static VectorField make(const GridSpec& g, int ncomp, std::optional<TimeSpec> t = std::nullopt);
    int ncomp() const { return static_cast<int>(comp.size()); }
    bool empty() const { return comp.empty(); }
    void validate() const;
};

/// Time-indexed d-dimensional Lipschitz graphs inside a D-dimensional domain.
/// Base coordinates are the first d spatial axes; heights fill axes d..D-1.
/// d == D means the whole domain (points are the grid cells themselves).
struct GraphFamily {
    int d = 0;
    int D = 1;
    double L = 0.0;
    GridSpec base;                                 // d-dimensional base grid (unused when d == 0 or d == D)
    std::vector<std::vector<double>> heights;      // per slice: base.size() x (D - d), row-major
    std::vector<Point> anchors;                    // d == 0: one point per slice
    GridSpec domain;                               // ambient grid, used when d == D

    static GraphFamily whole_domain(const GridSpec& g, int nt = 1);
    /// Graph of height functions sampled on base cell centres; checked for the Lipschitz bound on construction.
    static GraphFamily from_heights(const GridSpec& domain, const GridSpec& base, double L,
                                    std::vector<std::vector<double>> heights);
    static GraphFamily points(const GridSpec& domain, std::vector<Point> per_slice);

    int nt() const;
    std::size_t npoints() const;
    Point point(int k, std::size_t i) const;
    void check_lipschitz() const;
};

double box_distance_to_boundary(const GridSpec& g, const Point& x);

/// min{sqrt(t), dist(x, boundary), r0} / (L + 4). t is measured from the start of the time domain.
double r_star(double t, const Point& x, const GridSpec& omega, double L, double r0);

/// sqrt(|t1 - t2| + |x1 - x2|^2); with a grid supplied, periodic axes use the wrapped distance.
double parabolic_distance(double t1, const Point& x1, double t2, const Point& x2, const GridSpec* torus = nullptr);

// MSF binary I/O with a JSON sidecar next to the payload.
void save_field(const std::string& path, const ScalarField& f, const std::string& role = "scalar");
void save_field(const std::string& path, const VectorField& f, const std::string& role = "vector");
ScalarField load_scalar(const std::string& path, std::string* role = nullptr);
VectorField load_vector(const std::string& path, std::string* role = nullptr);
/// True when the file holds several components.
bool is_vector_file(const std::string& path);

}  // namespace msa
