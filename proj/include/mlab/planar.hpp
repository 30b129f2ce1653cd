#pragma once

// Planar geometry for Dirichlet-type approximation in measure: lens areas,
// thin shells with density budgets, boundary densities, the piecewise
// constant skeleton and a fundamental-solution harmonic fitter.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlab/reduction.hpp"

namespace mlab {

struct Disk {
    cplx center;
    double radius = 0.0;
};

/// Open set U modelled by its marked cells, with sample points on its boundary.
struct DomainSpec {
    RegionMask U;
    std::vector<cplx> boundary_samples;

    double resolution() const noexcept { return U.grid().cell_side(); }
    /// Throws validation unless every sample lies within one cell of the
    /// mask boundary.
    void validate() const;

    /// Mask of the disk plus `samples` equally spaced points on its circle.
    static DomainSpec disk(const GridSpec& grid, const Disk& d, int samples);
    /// Samples taken evenly from the mask's boundary edge midpoints.
    static DomainSpec from_mask(RegionMask U, int samples);
};

/// Midpoints of the cell edges separating marked from unmarked cells.
std::vector<cplx> boundary_edge_points(const RegionMask& mask);

/// Area of the intersection of two radius-h disks at center distance d.
double lens_area(double h, double d);

/// Distance from a circle to the boundary of U, less half a cell.
double circle_boundary_gap(const Disk& circle, const DomainSpec& U);

struct ShellOptions {
    int max_extra_levels = 12;
    int max_level = 20;
    double width_cells = 1.5;
};

/// Connected annulus around the circle with area below budget * lens_area(h, h),
/// on a grid fine enough to hold it. Geometry error when the circle is not
/// 2h away from the boundary; infeasible_budget when the budget is below the
/// area of one cell of U or no permitted level is fine enough.
RegionMask shell_construct(const Disk& circle, const DomainSpec& U, double budget, double h,
                           const ShellOptions& options = {});

struct DensityRatio {
    double r = 0.0;
    std::optional<double> ratio;  // empty when U meets B(p, r) in no cell
};

/// area(A cap B(p, r)) / area(U cap B(p, r)) for each radius (strictly descending).
std::vector<DensityRatio> boundary_density(const RegionMask& A, const DomainSpec& U, cplx p,
                                           const std::vector<double>& radii);

/// One cell layer on the circle of radius r relative to the denominator area.
double density_slack(double r, double denominator, double cell_side);

struct ShellFamily {
    std::vector<Disk> disks;
    std::vector<RegionMask> shells;
    std::vector<double> budgets;
    std::vector<double> margins;  // h used for each shell
};

struct Skeleton {
    ShellFamily family;
    RegionMask F;                   // U minus the shells, on the common fine grid
    RegionMask U_fine;              // U on the same grid
    PiecewiseConstantTarget g;      // constant on each piece of F
    std::vector<int> piece_disk;    // disk index per piece, -1 for the outer collar
};

/// Greedy disks (deepest uncovered cell, radius = depth / 3.2), shells with
/// budgets 2^-j, pieces S_j minus earlier disks and the collar split by
/// nearest boundary sample; values phi(nearest sample to the piece's first cell).
Skeleton build_dirichlet_skeleton(const DomainSpec& U, const std::vector<double>& phi, int J);

struct DensityCheck {
    cplx p;
    double r = 0.0;
    double ratio = 0.0;
    double bound = 0.0;  // 1 - sum of active budgets - slack
    bool ok = false;
};

/// density of F in U at every boundary sample and radius against the budget chain.
std::vector<DensityCheck> skeleton_density_check(const Skeleton& sk, const DomainSpec& U,
                                                 const std::vector<double>& radii);

struct Source {
    cplx point;
    double weight = 0.0;
};

/// u(x) = sum_i w_i log|x - q_i| + Re sum_k c_k ((x - center) / scale)^k.
struct HarmonicFit {
    std::vector<Source> sources;
    std::vector<cplx> poly_coeffs;
    cplx center;
    double scale = 1.0;
    double fit_error = 0.0;  // max over piece cells

    double operator()(cplx x) const;
};

struct HarmonicOptions {
    int poly_degree = 4;
    double rank_tolerance = 1e-13;  // relative pivot size that counts as rank loss
};

struct ValuedPiece {
    RegionMask cells;
    double value = 0.0;
};

/// Sources spread over rings around each piece at half the gap to its
/// neighbours (clamped to [1 cell, piece radius]), then least squares.
/// source_count_limit when the pivoted QR loses rank.
HarmonicFit harmonic_fit(const std::vector<ValuedPiece>& pieces, int source_count,
                         const HarmonicOptions& options = {});

struct HarmonicStep {
    int n = 0;
    HarmonicFit fit;
    double exceedance_area = 0.0;  // area{x in E: |u_n - v| > 1/n}
    double reduction_loss = 0.0;   // area of E outside the support
    double fit_slack = 0.0;        // support area where |u_n - g_n| >= 1/(2n)
    double bound = 0.0;            // 3/n + one cell layer + fit_slack
    int piece_count = 0;
};

/// For n = 1..n_max: reduce the real part of v at tolerance 1/(4n), fit the
/// pieces with source_count * n sources, measure the exceedance set against v.
std::vector<HarmonicStep> harmonic_measure_sequence(const SampledFunction& v, int n_max, int source_count = 64,
                                                    const HarmonicOptions& options = {});

// {"sources": [[x, y, w], ...], "center": [re, im], "scale": r,
//  "poly_coefficients": [[re, im], ...], "fit_error": e}
std::string harmonic_fit_to_json(const HarmonicFit& fit);

// Domain file: the mask text format, then "samples <count>" and one "x y" per line.
void write_domain(std::ostream& os, const DomainSpec& d);
DomainSpec read_domain(std::istream& is);

}  // namespace mlab
