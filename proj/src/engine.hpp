#pragma once
// Internal: lattice offsets, FFT convolution of field slices, ladder helpers.

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

#include "msa/field.hpp"

namespace msa::detail {

std::mutex& fftw_mutex();

struct Offset {
    double d2;
    std::array<int, 3> o;
};

/// All lattice offsets with |o| < rho_max, sorted by length then lexicographically.
class OffsetTable {
public:
    OffsetTable(const GridSpec& g, double rho_max);
    /// Number of offsets with |o| < rho on the infinite lattice.
    std::size_t count(double rho) const;
    const Offset& operator[](std::size_t i) const { return offs_[i]; }
    std::size_t size() const { return offs_.size(); }
    double rho_max() const { return rho_max_; }

private:
    std::vector<Offset> offs_;
    double rho_max_;
};

/// Maps (cell, offset) to a flat index, honouring periodic wrap; returns false outside a zero-extended box.
struct Neighbor {
    const GridSpec* g;
    bool operator()(const std::array<int, 3>& c, const std::array<int, 3>& o, std::size_t& out) const {
        int ii[3] = {0, 0, 0};
        for (int a = 0; a < g->D; ++a) {
            int i = c[a] + o[a];
            if (g->periodic[a]) {
                i %= g->n[a];
                if (i < 0) i += g->n[a];
            } else if (i < 0 || i >= g->n[a]) {
                return false;
            }
            ii[a] = i;
        }
        out = g->index(ii[0], ii[1], ii[2]);
        return true;
    }
};

struct Tap {
    std::array<int, 3> o;
    double w;
};

/// Forward spectra of every slice on a padded grid, for repeated convolutions.
class SliceSpectra {
public:
    SliceSpectra(const GridSpec& g, const double* data, int nt);
    ~SliceSpectra();
    SliceSpectra(const SliceSpectra&) = delete;
    SliceSpectra& operator=(const SliceSpectra&) = delete;

    /// out[k*N + x] = sum over taps of w * f_k(x + o), zero outside the box.
    void convolve(const std::vector<Tap>& taps, std::vector<double>& out) const;
    /// Sum of f over the open ball |o| < rho, every slice.
    void ball_sums(const OffsetTable& T, double rho, std::vector<double>& out) const;

private:
    GridSpec g_;
    int nt_;
    std::array<int, 3> P_{1, 1, 1};
    std::size_t real_size_ = 0, cplx_size_ = 0;
    std::vector<std::complex<double>> spectra_;
    std::vector<std::size_t> pad_;  // cell -> padded index
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

/// Sum of slice k over cells whose centre lies in the open ball B_rho(x), periodic images included.
double direct_ball_sum(const ScalarField& f, int k, const Point& x, double rho);

/// Flat index of the cell containing x (wrapped on periodic axes, clamped on box axes).
std::size_t containing_cell(const GridSpec& g, const Point& x);

/// Number of slices in a window of radius rho: max(1, ceil(rho^2 / dt)).
int window_len(double rho, double dt);

}  // namespace msa::detail
