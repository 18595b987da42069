#pragma once
/// @file lagrangian.hpp
/// @brief Mollified drifts, backward flows, skewed cylinders, cutoff radii and capped operators.

#include <cstdint>
#include <string>
#include <vector>

#include "msa/field.hpp"
#include "msa/multiscale.hpp"

namespace msa {

/// Radial bump c exp(1/(|x|^2 - 1)) on B_1 with unit continuum mass.
struct MollifierSpec {
    int D = 3;
    double c = 0.0;
    double sup_norm = 0.0;  // c / e

    static MollifierSpec standard(int D);
    double profile(double r) const;
};

struct AdmissibilityParams {
    double eta0 = 0.0;

    /// 0.9 log 2 / (|phi|_inf 4^D), which keeps the (c1, c2) = (1, 2) separation bound in force.
    static AdmissibilityParams defaults(int D);
};

/// b * phi_rho slice by slice (zero extension outside a box). Weights are the lattice samples of
/// phi_rho renormalised to unit sum, so constants are preserved exactly up to rounding.
VectorField mollify_drift(const VectorField& b, double rho);

/// Evaluates a (mollified) drift at any time and point: multilinear in space, linear in time,
/// zero outside the box and before the first time cell.
class DriftSampler {
public:
    DriftSampler() = default;
    explicit DriftSampler(VectorField b);
    bool zero() const { return comps_.empty(); }
    Point operator()(double s, const Point& y) const;

private:
    GridSpec g_;
    TimeSpec ts_;
    int D_ = 0;
    std::vector<int> comps_;
    VectorField own_;
};

/// RK4 from (t, x) to time s with steps no longer than max_step, breaking at slice times.
Point integrate_flow(const DriftSampler& v, const TimeSpec& ts, double t, const Point& x, double s, double max_step);

/// X_rho(s; t, x) for the drift mollified at rho; s must lie in [t - rho^2, t].
Point flow_map(const VectorField& b, double rho, double t, const Point& x, double s);

struct SkewedCylinder {
    int D = 1;
    double t = 0.0;
    Point x{};
    double rho = 0.0;
    std::vector<double> times;      // descending from t
    std::vector<Point> backbone;
    bool admissible = true;
    double adm_measured = 0.0;
    double adm_threshold = 0.0;
    bool contained = true;

    std::string to_json() const;
};

/// Cylinder at slice k; backbone sampled on at least 16 substeps over (t - rho^2, t].
/// The admissibility verdict is filled in when Mgrad and params are given.
SkewedCylinder skewed_cylinder(const VectorField& b, const TimeSpec& ts, const GridSpec& omega, int k,
                               const Point& x, double rho, const ScalarField* Mgrad = nullptr,
                               const AdmissibilityParams* params = nullptr);

/// Mean of f over the slices of (t - rho^2, t] and the balls around the snapped backbone,
/// divided by (slice count) x (lattice count). An empty drift reduces exactly to cyl_average.
double skewed_cyl_average(const ScalarField& f, const VectorField& b, int k, const Point& x, double rho);

/// Per-slice maximal function of the Frobenius norm of the finite-difference Jacobian.
ScalarField grad_maximal(const VectorField& b, const ScaleLadder& ladder = {});

struct AdmissibilityResult {
    bool admissible = true;
    double measured = 0.0;
    double threshold = 0.0;
};

/// Average of M(grad b) over the skewed cylinder against eta0 rho^-2.
AdmissibilityResult admissible(const VectorField& b, const ScalarField& Mgrad, int k, const Point& x, double rho,
                               const AdmissibilityParams& params);

struct CutoffRadii {
    double r_adm = kInf;
    double r_int = kInf;
    double r_bar = kInf;
    bool adm_truncated = false;
    bool int_truncated = false;
    double r_star = 0.0;
    /// r_int ^ r_adm >= r_* ^ r_adm, checked up to the final bracket width.
    bool rstar_ok = true;
};

enum class Partition : std::uint8_t { RegLt = 0, RegEq = 1, SingLt = 2, SingEq = 3 };

/// Capped operator output. s = min(S, r_bar); a_lt, a_eq partition a_wedge; f_s is the measured
/// skewed average at s. S is only resolved where it lies below r_bar; r_bar is only resolved where
/// an interior or admissibility event was met (otherwise it holds the largest radius known to be clean).
struct CappedScaleField {
    double alpha = 1.0;
    GridSpec grid;
    std::optional<TimeSpec> time;
    ScaleLadder ladder;
    std::vector<std::size_t> anchors;  // flat (k, x) indices evaluated
    std::vector<double> s, S, r_bar, a_lt, a_eq, a_wedge, f_s;
    std::vector<std::uint8_t> part;
    std::vector<std::uint8_t> rbar_resolved;
    std::vector<std::uint8_t> truncated;

    std::size_t size() const { return anchors.size(); }
};

struct CappedOptions {
    /// M(grad b); computed from b by finite differences when empty.
    const ScalarField* Mgrad = nullptr;
    /// Flat (k, x) anchors; all points when empty.
    std::vector<std::size_t> anchors;
};

/// Several (f, alpha) pairs sharing one drift. f fields must share grid and time.
std::vector<CappedScaleField> capped_scale_op_multi(const std::vector<const ScalarField*>& fs,
                                                    const std::vector<double>& alphas, const VectorField& b,
                                                    const ScaleLadder& ladder, const AdmissibilityParams& params,
                                                    const CappedOptions& opt = {});
CappedScaleField capped_scale_op(const ScalarField& f, const VectorField& b, double alpha, const ScaleLadder& ladder,
                                 const AdmissibilityParams& params, const CappedOptions& opt = {});

/// Full ladder scan for both radii at one anchor.
/// r_* uses Lipschitz constant L and cap r0; the domain is Mgrad's grid.
CutoffRadii cutoff_radii(const VectorField& b, const ScalarField& Mgrad, int k, const Point& x,
                         const AdmissibilityParams& params, const ScaleLadder& ladder, double L = 0.0,
                         double r0 = 1.0);

/// Seeds `trials` companion trajectories within c1 rho of the backbone and returns the largest
/// separation over rho along (t - rho^2, t]. Throws ConfigError when the separation bound's
/// precondition fails for the given constants.
double trajectory_separation_check(const VectorField& b, const SkewedCylinder& cyl, const TimeSpec& ts, double c1,
                                   double c2, const AdmissibilityParams& params, unsigned seed, int trials = 10);

}  // namespace msa
