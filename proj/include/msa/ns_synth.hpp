#pragma once
/// @file ns_synth.hpp
/// @brief Taylor-Green data, a periodic pseudo-spectral solver, pivot quantities and scale fields.
///
/// Flows are two-dimensional on [0, 2pi)^2 and embedded z-invariantly in a thin periodic slab of
/// nz cells (cubic cells). Integrals over T^3 are layer integrals times 2pi.

#include <string>
#include <vector>

#include "msa/field.hpp"
#include "msa/lagrangian.hpp"
#include "msa/multiscale.hpp"

namespace msa {

/// n x n x nz periodic grid with spacing 2pi / n on every axis.
GridSpec ns_grid(int n, int nz = 4);

struct FlowSeries {
    GridSpec grid;
    TimeSpec time;
    double nu = 1.0;
    VectorField u;       // three components, the third is zero
    ScalarField omega;   // omega_3 = d_x u_2 - d_y u_1
    ScalarField P;       // zero spatial mean per slice
    ScalarField grad_u;  // |grad u|, Frobenius
    ScalarField hess_P;  // |grad^2 P|, Frobenius
    double energy0 = 0.0;             // |u(0)|_2^2 over T^3
    std::vector<double> energy;       // |u(t_k)|_2^2 over T^3
    std::vector<double> dissipation;  // int_0^{t_k} |grad u|_2^2 over T^3

    static constexpr double z_weight = 6.283185307179586;
    int n() const { return grid.n[0]; }
    /// |grad u|^2_{L^2((0,T) x T^3)} from the ledger.
    double dissipation_total() const { return dissipation.empty() ? 0.0 : dissipation.back(); }
    /// |grad^2 P|_{L^1((0,T) x T^3)} with slice weight dt.
    double hess_P_l1() const;
    /// max_k (|u(t_k)|^2 / 2 + D(t_k)) - |u(0)|^2 / 2, relative to |u(0)|^2 / 2 (0 for u = 0).
    double energy_excess() const;
};

/// Velocity of amplitude A: A (cos x sin y, -sin x cos y, 0).
VectorField taylor_green_velocity(const GridSpec& g, double amplitude = 1.0);
/// Divergence-free random field from a stream function on modes |k| <= kmax; max |u| scaled to amplitude.
VectorField random_solenoidal(const GridSpec& g, unsigned seed, double amplitude, int kmax = 4);

/// Closed-form Taylor-Green snapshot at time t (one slice).
FlowSeries taylor_green(double nu, double t, const GridSpec& g, double amplitude = 1.0);
/// Closed-form series at t_k = (k + 1) T / nt.
FlowSeries taylor_green_series(double nu, const GridSpec& g, double T, int nt, double amplitude = 1.0);

/// sup |d_t u + u . grad u + grad P - nu Lap u| of a closed-form Taylor-Green series, spatial
/// derivatives spectral and d_t u = -2 nu u.
double taylor_green_residual(const FlowSeries& s);

struct SolverConfig {
    double nu = 1.0;
    double T = 1.0;
    int snapshots = 32;  // t_k = (k + 1) T / snapshots
    double dt = 1e-3;    // upper bound; steps are shortened to divide the snapshot spacing
};

/// Vorticity form with an exact integrating factor for the viscous term, RK4, 2/3 dealiasing.
/// Throws ConfigError when max|u| dt / h > 0.5.
FlowSeries spectral_solve(const VectorField& u0, const SolverConfig& cfg);

/// L^2(T^3) distance between two series at their last slice.
double l2_distance_last(const FlowSeries& a, const FlowSeries& b);

/// |grad^n omega| (vorticity) or |grad^n u| (velocity), Frobenius over ordered index tuples.
enum class Quantity { Vorticity, Velocity };
ScalarField derivative_norm(const FlowSeries& s, Quantity q, int n);

struct PivotConfig {
    double eta = 1.0;
    double eta_bar = 1.0;
    double eps0 = 1.0;

    /// eta = eta_bar = eta0(3)^2 / 16, eps0 = 1.
    static PivotConfig defaults();
    void validate() const;
};

struct Pivots {
    ScalarField Mgrad;  // M(|grad u|), per slice
    ScalarField f1, f2, f3;
};

Pivots pivot_fields(const FlowSeries& s, const PivotConfig& cfg);

struct ScaleFields {
    CappedScaleField s1, s2, s3;  // anchors: the z = 0 layer of every slice
    std::vector<double> r_star;   // per anchor
    /// max(A^<(f)^{1/alpha}, 1/r_*) per anchor, one per scale field.
    std::vector<double> bound1, bound2, bound3;
    std::size_t violations = 0;   // anchors where s^-1 exceeds its bound beyond rounding
    std::size_t checked = 0;
};

/// s1, s2 with drift u (alpha 4); s3 without drift (alpha 3). r_* uses L = 0 and r0 = 1.
ScaleFields scale_fields(const FlowSeries& s, const Pivots& p, const ScaleLadder& ladder = {},
                         const AdmissibilityParams& params = AdmissibilityParams::defaults(3));

struct RegularityConstants {
    std::vector<double> C_omega;  // n = 0..n_max: max |grad^n omega| s1^{n+2}
    std::vector<double> C_u;      // n = 1..n_max: max |grad^n u| s2^{n+1}
    std::size_t points = 0;       // regular anchors used
};

RegularityConstants fitted_regularity_constants(const FlowSeries& s, const ScaleFields& sf, int n_max);

struct TheoremRatio {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  // 0 when both sides vanish
    std::string params;  // JSON object
};

/// Vorticity trace ratios for d = 3 (the slab) and d = 2 (the plane z = 0, five times), the same
/// for s2 with the pressure term, the two vorticity cutoff estimates with constants C_0, C_1, and
/// three anisotropic tuples.
std::vector<TheoremRatio> theorem_ratios(const FlowSeries& s, const ScaleFields& sf, const RegularityConstants& C);

/// CSV rows n, branch, p, q, inv_p, inv_q, norm for the mixed-norm lattice of grad^n u, n = 1..3.
std::string mixed_norm_lattice(const FlowSeries& s, double t0 = 0.25);

struct BlowupComparison {
    double lhs = 0.0;        // |u|_{L^p'(t,T;L^q')} + |grad u|^{1/2}_{L^{p'/2}(t,T;L^{q'/2})}
    double rhs_u = 0.0;      // |u|_{L^p(0,T;L^q)}
    double rhs_grad = 0.0;   // |grad u|_{L^{p/2}(0,T;L^{q/2})}
};

/// Requires 2/p + 3/q = 2/p' + 3/q' = 1, 3 < q <= p < inf, 2 <= p', 3 <= q'.
BlowupComparison blowup_norm_comparison(const FlowSeries& s, double p, double q, double pp, double qq, double t);

/// Mixed strong norm L^p_t L^q_x over slices with t_k > t0 (z-layer integral times 2pi).
double mixed_lebesgue(const ScalarField& f, double p, double q, double t0 = 0.0);

}  // namespace msa
