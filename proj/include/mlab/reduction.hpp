#pragma once

// Reduction of a sampled measurable target to a zero-free piecewise-constant
// function on a compact set with connected complement.

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mlab/complexgrid.hpp"

namespace mlab {

/// One complex value per marked cell of `domain`, in row-major ordinal order.
struct SampledFunction {
    RegionMask domain;
    std::vector<cplx> values;

    /// Samples f at cell centers.
    static SampledFunction sample(const RegionMask& domain, const std::function<cplx(cplx)>& f);

    /// Throws validation when sizes disagree or a value is not finite.
    void validate() const;
    std::optional<cplx> at(int row, int col) const;
    /// Values on a sub-mask (same grid).
    SampledFunction restricted(const RegionMask& sub) const;
};

struct Piece {
    RegionMask cells;
    cplx value;
};

struct PiecewiseConstantTarget {
    RegionMask support;
    std::vector<Piece> pieces;  // disjoint, covering support
    bool zero_free = false;

    /// Throws validation if pieces overlap, miss support cells, or a
    /// zero_free target has a zero value.
    void validate() const;
    SampledFunction to_sampled() const;
    bool has_zero_value() const noexcept;
};

/// Result of the greedy oscillation-driven cell removal.
struct LuzinSelection {
    RegionMask retained;
    bool achieved = false;        // bound met within budget
    double max_oscillation = 0.0; // over retained cells
    double area_removed = 0.0;
};

/// Largest |f(c) - f(c')| over marked 4-neighbors c' of each marked cell.
std::vector<double> local_oscillation(const SampledFunction& f);

/// Greedily removes the worst-oscillation cell (ties: first in row-major
/// order) until the bound holds or the next removal would exceed the budget.
LuzinSelection luzin_select(const SampledFunction& f, double oscillation_bound, double loss_budget);

struct ReductionReport {
    int n = 0;
    double area_lost = 0.0;
    double max_error_on_support = 0.0;
    bool complement_connected = false;
    bool luzin_achieved = false;
    double luzin_loss = 0.0;
    double carve_loss = 0.0;
    double shrink_loss = 0.0;     // square rims plus finest-level windowing
    int finest_square_level = 0;
    int piece_count = 0;
    double cell_side = 0.0;
    double slack = 0.0;           // one cell layer around the grid
};

struct Reduction {
    PiecewiseConstantTarget target;
    ReductionReport report;
};

/// Luzin selection, corridor carving, adaptive dyadic squares with their
/// rims removed, anchors and nonzero values. Guarantees on success:
/// error < 2/n on the support, area lost < 3/n + slack, zero-free values,
/// connected complement. Throws resolution when the grid is too coarse.
Reduction reduce_to_piecewise(const SampledFunction& f, int n);

struct ZeroSplit {
    RegionMask small;  // |g| <= 1/j
    RegionMask large;  // |g| >= 2/j
};

ZeroSplit zero_split(const SampledFunction& g, int j);

// Text format: "piecewise <count> zero_free <0|1>", the support mask, then
// per piece "piece <re> <im> <run_count>" followed by "row begin end" lines.
void write_piecewise(std::ostream& os, const PiecewiseConstantTarget& target);
PiecewiseConstantTarget read_piecewise(std::istream& is);

}  // namespace mlab
