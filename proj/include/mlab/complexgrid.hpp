#pragma once

// Discrete model of bounded planar measurable sets.
//
// A RegionMask is a set of cells of a dyadic grid, stored as sorted column
// runs per row. Lebesgue measure is cell counting. Both the region and its
// complement use 4-connectivity.

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlab/error.hpp"

namespace mlab {

using cplx = std::complex<double>;

/// Axis-aligned closed rectangle [x0, x1] x [y0, y1].
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    bool degenerate() const noexcept { return !(x1 > x0) || !(y1 > y0); }
    bool contains(cplx z) const noexcept {
        return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct CellIndex {
    int row = 0;
    int col = 0;
    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Half-open column interval [begin, end) inside one row.
struct Span {
    int begin = 0;
    int end = 0;
    int length() const noexcept { return end - begin; }
    friend bool operator==(const Span&, const Span&) = default;
};

/// Rectangle of cell indices; may extend past the grid (negative indices).
struct CellRect {
    int row0 = 0;
    int col0 = 0;
    int rows = 0;
    int cols = 0;
    int row_end() const noexcept { return row0 + rows; }
    int col_end() const noexcept { return col0 + cols; }
};

class GridSpec {
public:
    /// `level` k gives cell side 2^-k. Throws precondition on k < 0 or empty grids.
    GridSpec(cplx origin, int level, int width, int height);

    /// Grid at `level` whose origin sits on the dyadic lattice and which
    /// covers `bbox` (snapped outward).
    static GridSpec covering(const Rect& bbox, int level);

    cplx origin() const noexcept { return origin_; }
    int level() const noexcept { return level_; }
    double cell_side() const noexcept { return side_; }
    double cell_area() const noexcept { return side_ * side_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::int64_t cell_total() const noexcept {
        return static_cast<std::int64_t>(width_) * height_;
    }

    bool in_bounds(int row, int col) const noexcept {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }
    cplx cell_center(int row, int col) const noexcept {
        return {origin_.real() + (col + 0.5) * side_, origin_.imag() + (row + 0.5) * side_};
    }
    /// Cell containing z (floor convention); may be out of bounds.
    CellIndex cell_of(cplx z) const noexcept;
    Rect bounds() const noexcept;
    /// Default connectivity frame: the grid plus a one-cell padding ring.
    CellRect padded_frame() const noexcept { return {-1, -1, height_ + 2, width_ + 2}; }

    /// Origin coordinates are integer multiples of the cell side.
    bool lattice_aligned() const noexcept;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    cplx origin_;
    int level_;
    double side_;
    int width_;
    int height_;
};

/// Marked cells of a grid, stored as sorted disjoint runs per row.
/// Immutable after construction.
class RegionMask {
public:
    explicit RegionMask(GridSpec grid);

    /// Rows must be given for every row of the grid; runs are normalized
    /// (sorted, merged, clipped to the grid).
    static RegionMask from_rows(GridSpec grid, std::vector<std::vector<Span>> rows);
    static RegionMask from_cells(GridSpec grid, std::span<const CellIndex> cells);
    static RegionMask full(GridSpec grid);
    /// Cells whose center satisfies `inside`.
    static RegionMask from_predicate(GridSpec grid, const std::function<bool(cplx)>& inside);
    /// Cells whose center x lies in one of the closed x-intervals returned
    /// for the row's center height y.
    static RegionMask from_chords(
        GridSpec grid,
        const std::function<void(double y, std::vector<std::pair<double, double>>& out)>& chords);

    const GridSpec& grid() const noexcept { return grid_; }
    std::int64_t cell_count() const noexcept { return total_; }
    double area() const noexcept { return static_cast<double>(total_) * grid_.cell_area(); }
    bool empty() const noexcept { return total_ == 0; }

    std::span<const Span> row_runs(int row) const noexcept;
    bool contains(int row, int col) const noexcept;
    /// Row-major ordinal of a marked cell.
    std::optional<std::int64_t> ordinal(int row, int col) const noexcept;
    CellIndex cell_at(std::int64_t ordinal) const;
    std::vector<CellIndex> cells() const;
    std::optional<CellIndex> first_cell() const noexcept;

    /// f(row, col, ordinal) for every marked cell in row-major order.
    template <class F>
    void for_each_cell(F&& f) const {
        std::int64_t k = 0;
        for (int r = 0; r < grid_.height(); ++r)
            for (const Span& s : row_runs(r))
                for (int c = s.begin; c < s.end; ++c) f(r, c, k++);
    }

    /// Smallest cell rectangle holding all marked cells; nullopt when empty.
    std::optional<CellRect> bounding_cells() const noexcept;

    RegionMask united(const RegionMask& other) const;
    RegionMask intersected(const RegionMask& other) const;
    RegionMask minus(const RegionMask& other) const;
    bool subset_of(const RegionMask& other) const;

    /// Same point set on a grid `extra_levels` finer.
    RegionMask refined(int extra_levels) const;
    /// Same cells re-indexed on another grid of the same level whose lattice
    /// is compatible; cells falling outside the target are dropped.
    RegionMask embedded(const GridSpec& target) const;

    /// Area of marked cells whose centers lie in the closed disk.
    double disk_area(cplx center, double radius) const;
    std::int64_t disk_count(cplx center, double radius) const;

    friend bool operator==(const RegionMask& a, const RegionMask& b) {
        return a.grid_ == b.grid_ && a.row_start_ == b.row_start_ && a.runs_ == b.runs_;
    }

private:
    void index();

    GridSpec grid_;
    std::vector<std::int32_t> row_start_;
    std::vector<Span> runs_;
    std::vector<std::int64_t> run_prefix_;
    std::int64_t total_ = 0;
};

RegionMask disk_mask(const GridSpec& grid, cplx center, double radius);
RegionMask annulus_mask(const GridSpec& grid, cplx center, double r_inner, double r_outer);
RegionMask rect_mask(const GridSpec& grid, const Rect& rect);

/// One dyadic square [i s, (i+1) s] x [j s, (j+1) s], s = 2^-level.
struct DyadicSquare {
    std::int64_t i = 0;
    std::int64_t j = 0;
    int level = 0;

    double side() const noexcept;
    Rect rect() const noexcept;
    DyadicSquare parent() const noexcept;
    bool contains(const DyadicSquare& finer) const noexcept;
    friend bool operator==(const DyadicSquare&, const DyadicSquare&) = default;
};

struct DyadicPartition {
    GridSpec grid;                      // one cell per square
    std::vector<DyadicSquare> squares;  // row-major over `grid`
};

/// Tiles bbox (snapped outward to the level-k lattice) with dyadic squares.
/// Throws resource_limit when more than `max_squares` would be produced.
DyadicPartition dyadic_partition(const Rect& bbox, int level,
                                 std::int64_t max_squares = std::int64_t{1} << 26);

/// Connected components (4-connectivity) of the region, ordered by their
/// first cell in row-major order.
std::vector<RegionMask> components(const RegionMask& mask);

/// Labels of the complement of a mask inside a frame (cell coordinates of
/// the mask's grid, possibly extending past it).
class ComponentLabeling {
public:
    struct LabeledRun {
        int row;
        Span span;
        int label;
    };

    ComponentLabeling(CellRect frame, std::vector<LabeledRun> runs, int count, int unbounded_id);

    const CellRect& frame() const noexcept { return frame_; }
    int component_count() const noexcept { return count_; }
    int unbounded_id() const noexcept { return unbounded_id_; }
    /// Label of a complement cell, nullopt for mask cells or cells outside the frame.
    std::optional<int> label_of(int row, int col) const noexcept;
    /// Runs of one component in row-major order.
    std::vector<LabeledRun> runs_of(int label) const;
    const std::vector<LabeledRun>& runs() const noexcept { return runs_; }

private:
    CellRect frame_;
    std::vector<LabeledRun> runs_;
    std::vector<std::int32_t> row_first_;  // index of first run per frame row
    int count_;
    int unbounded_id_;
};

/// Throws precondition if a mask cell lies on the frame border or outside it.
ComponentLabeling label_complement(const RegionMask& mask, const CellRect& frame);
ComponentLabeling label_complement(const RegionMask& mask);

bool is_complement_connected(const RegionMask& mask, const CellRect& frame);
bool is_complement_connected(const RegionMask& mask);
/// Number of enclosed (bounded) complement components.
int hole_count(const RegionMask& mask);

struct Corridor {
    CellIndex start;      // hole cell the corridor starts from
    int direction;        // 0: -row, 1: -col, 2: +col, 3: +row
    std::vector<CellIndex> removed;
};

struct Carving {
    RegionMask mask;
    std::vector<Corridor> corridors;
    double removed_area = 0.0;
};

/// Joins every enclosed complement component to the unbounded one by
/// removing a straight one-cell-wide corridor whose area is below
/// `per_hole_budget`. Throws infeasible_budget when the budget is below one
/// cell or no corridor fits.
Carving carve_connectors(const RegionMask& mask, double per_hole_budget);

/// One cell layer around the grid's bounding box.
double cell_layer_slack(const GridSpec& grid) noexcept;

// Text format: "grid x0 y0 cell_side width height" followed by one line per
// row (bottom row first) of alternating run lengths, starting with an
// unmarked run, summing to the width.
void write_mask(std::ostream& os, const RegionMask& mask);
RegionMask read_mask(std::istream& is);

// Shared number formatting for every text and CSV writer: shortest
// round-trip form. parse_double accepts exactly one number.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace mlab
