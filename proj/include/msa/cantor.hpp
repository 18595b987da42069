#pragma once
/// @file cantor.hpp
/// @brief Base-4 Cantor approximants f_j and the superlevel bounds of their averaging operator.

#include <cstdint>
#include <vector>

#include "msa/field.hpp"

namespace msa {

/// Level k: left endpoints sum a_i 4^-i (a_i in {0, 2}), stored as integers over 4^k.
struct CantorLevel {
    int k = 0;
    std::vector<std::uint64_t> left;  // numerators over 4^k, ascending
    double amplitude = 0.0;           // 2^{3/2} 2^k

    double endpoint(std::size_t i) const;
    /// |A_k| as a count of 4^-k intervals (always 2^k).
    std::uint64_t interval_count() const { return left.size(); }
    double measure() const;
};

struct CantorSet {
    int j = 0;
    int grid_depth = 0;  // cells of width 4^-grid_depth on [0, 1)
    std::vector<CantorLevel> levels;  // k = 0..j
    ScalarField f;                    // f_j, zero outside [0, 1)

    /// Cell mask of A_k on the grid.
    std::vector<std::uint8_t> mask(int k) const;
    /// A_{k+1} inside A_k for every k < j, checked cell by cell.
    bool nested() const;
    /// ||f_j||_1 = (cell count) x amplitude x h, exact in binary floating point.
    double l1_norm() const;
};

/// grid_depth >= j (0 means j). Depth above 12 is refused.
CantorSet build_cantor(int j, int grid_depth = 0);

struct CantorRow {
    int k = 0;
    double threshold = 0.0;       // 2^{-1/2} 2^k
    double radius = 0.0;          // 2 * 4^-k, where S <= radius is the superlevel event
    std::uint64_t count = 0;      // cells with S <= radius
    std::uint64_t required = 0;   // 2^{2 grid_depth - k}
    double measure = 0.0;         // count * 4^-grid_depth
    double bound = 0.0;           // 2^-k
    bool pass = false;
};

struct CantorReport {
    int j = 0;
    double alpha = 0.5;
    double l1 = 0.0;
    bool l1_exact = false;
    bool nested = false;
    std::vector<CantorRow> rows;
    /// Lorentz norms of A f_j on [0, 1).
    double weak_l1 = 0.0;
    double l11 = 0.0, l12 = 0.0, l14 = 0.0;
    bool pass() const;
};

/// A_{1/2} f_j via the scale operator on a ladder that hits every 2 * 4^-k exactly.
CantorReport cantor_lower_bound(int j, double alpha = 0.5);

struct CantorGrowth {
    std::vector<int> j;
    std::vector<double> weak_l1, l11, l12, l14;
    /// Least-squares slope of l11 against j.
    double slope = 0.0;
};

CantorGrowth cantor_growth(int jmin, int jmax);

}  // namespace msa
