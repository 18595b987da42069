#pragma once
/// @file multiscale.hpp
/// @brief Ball and cylinder averages, the scale operator, maximal function and level-set measures.

#include <cstdint>
#include <vector>

#include "msa/field.hpp"
#include "msa/norms.hpp"

namespace msa {

/// Geometric ladder rho_min * 2^(i/k) up to rho_max, refined by m bisections.
/// Zero rho_min / rho_max mean "one grid spacing" / "half the largest extent".
struct ScaleLadder {
    double rho_min = 0.0;
    double rho_max = 0.0;
    int k = 8;
    int m = 6;

    ScaleLadder resolved(const GridSpec& g) const;
    /// Rungs; each is ldexp(rho_min 2^{(i mod k)/k}, i div k) so powers of two are exact.
    std::vector<double> rungs() const;
    double step_ratio() const;
    void validate() const;
};

enum class Mode { Space, Spacetime };

enum class ScaleLabel : std::uint8_t { Reg = 0, Sing = 1 };

/// Per-point output of the scale operator.
/// s in (0, inf]; a = s^-alpha; [lo, hi] is the final bracket with averages f_lo, f_hi at its ends.
/// Sing-candidates (the smallest rung already triggers) carry s = rho_min and a = rho_min^-alpha.
struct ScaleField {
    double alpha = 1.0;
    Mode mode = Mode::Space;
    GridSpec grid;
    std::optional<TimeSpec> time;
    ScaleLadder ladder;
    std::vector<double> s, a, lo, hi, f_lo, f_hi;
    std::vector<std::uint8_t> label;
    std::vector<std::uint8_t> truncated;

    std::size_t size() const { return s.size(); }
    ScalarField s_field() const;
    ScalarField a_field() const;
    ScalarField label_field() const;
    /// |f_hi - a| bound certified per point: jump across the final bracket plus the bracket width term.
    double certified_tolerance(std::size_t i) const;
};

/// Mean over cells whose centres lie in the open ball B_rho(x), divided by the lattice count of that ball.
double ball_average(const ScalarField& f, int k, const Point& x, double rho);
/// Mean over the slices in (t - rho^2, t] and the ball, divided by (slice count) x (lattice count).
double cyl_average(const ScalarField& f, int k, const Point& x, double rho);
/// Lattice count of the open ball |o| < rho.
std::size_t ball_count(const GridSpec& g, double rho);

ScaleField scale_op(const ScalarField& f, double alpha, const ScaleLadder& ladder, Mode mode);
/// Several exponents sharing one set of ball sums.
std::vector<ScaleField> scale_op_multi(const ScalarField& f, const std::vector<double>& alphas,
                                       const ScaleLadder& ladder, Mode mode);

/// max of the cell value and every ladder ball average, slice by slice.
ScalarField maximal_function(const ScalarField& f, const ScaleLadder& ladder = {});

/// Scale-field values at graph points (containing-cell lookup).
GraphSamples scale_on_graph(const ScaleField& sf, const GraphFamily& g, bool use_a = true);
/// mu-measure of graph points with rho <= s < 2 rho; spacetime mode integrates in time with weight dt.
double level_set_measure(const ScaleField& sf, const GraphFamily& g, double rho);

}  // namespace msa
