#pragma once
/// @file norms.hpp
/// @brief Weak, strong, Lorentz, nested and joint norms over sampled measures.

#include <vector>

#include "msa/field.hpp"

namespace msa {

/// Lorentz exponents. q2 = inf is the weak space, q1 = q2 the strong one, q1 = inf the sup norm.
struct LorentzParams {
    double q1 = 1.0;
    double q2 = kInf;

    static LorentzParams weak(double q) { return {q, kInf}; }
    static LorentzParams strong(double q) { return {q, q}; }
    static LorentzParams sup() { return {kInf, kInf}; }
    void validate() const;
};

/// (value, weight) pairs; weights are measures of the sample cells.
struct MeasuredSample {
    std::vector<double> values;
    std::vector<double> weights;

    void add(double v, double w) {
        values.push_back(v);
        weights.push_back(w);
    }
    std::size_t size() const { return values.size(); }
    double total_weight() const;
    /// Weighted measure of {|f| > lambda}.
    double measure_above(double lambda) const;
};

/// Per-slice samples on a graph family: values[k][i] with weights[k][i], slices of length dt.
struct GraphSamples {
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> weights;
    double dt = 1.0;

    int nt() const { return static_cast<int>(values.size()); }
    MeasuredSample slice(int k) const;
    /// All slices pooled with weight dt * mu_t.
    MeasuredSample joint() const;
};

/// Surface weights of the graph points of slice k.
std::vector<double> graph_measure(const GraphFamily& g, int k);

enum class Lookup { Interpolate, Cell };

/// Values of f at the graph points. Cell lookup uses the containing cell; whole-domain graphs read cells directly.
GraphSamples sample_on_graph(const ScalarField& f, const GraphFamily& g, Lookup mode = Lookup::Interpolate);

double weak_norm(const MeasuredSample& s, double q1);
double strong_norm(const MeasuredSample& s, double p);
double sup_norm(const MeasuredSample& s);
double lorentz_norm(const MeasuredSample& s, LorentzParams p);

/// Inner norm per slice, then outer norm in time with weight dt.
double nested_norm(const GraphSamples& g, LorentzParams pt, LorentzParams px);
double joint_norm(const GraphSamples& g, LorentzParams p);
double mixed_norm(const ScalarField& f, const GraphFamily& g, LorentzParams pt, LorentzParams px);

// Counterexample pair on (0,1) x (0,1) with n x n cells.
// u1 = exp(t/eps) 1{x <= exp(-t/eps)} stored as exact cell averages in x.
// u2 = 1/(t x) sampled at the upper corner of every cell (the cell minimum).
// Slice k sits at t = (k+1)/n, the right end of its time cell.
struct NestedWeakPair {
    ScalarField u1;
    ScalarField u2;
};
NestedWeakPair nested_weak_pair(double eps, int n);
/// u1 slices with the cell containing the support edge split at exp(-t/eps), so every slice is represented exactly.
GraphSamples nested_weak_u1_samples(double eps, int n);
GraphSamples field_samples(const ScalarField& f);

enum class InterpBranch { A, B };
struct InterpolationResult {
    double p = 0.0;
    double q = 0.0;
    double measured = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
};
/// Branch A: given q0 in (0,1) and q in (q0,1), p solves (1-q0)/p + q0/q = 1.
/// Branch B: given p0 in (0,1) and p in (p0,1), q solves p0/p + (1-p0)/q = 1.
/// The bound is taken with constant 1.
InterpolationResult interpolate_nested(const GraphSamples& f, InterpBranch branch, double e0, double e1);

}  // namespace msa
