#pragma once

// Vertical-shift searches: how well L(s + it) approximates a target on a
// compact set, over a lattice of shifts t.

#include <iosfwd>
#include <optional>
#include <vector>

#include "mlab/lfun.hpp"
#include "mlab/reduction.hpp"

namespace mlab {

struct ScanConfig {
    double t_min = 0.0;
    double t_max = 100.0;
    double step = 0.05;
    int refine_depth = 0;      // bisection steps at each hit/miss boundary
    double epsilon = 0.1;
    bool require_zero_free = true;  // theorem-faithful mode
    unsigned threads = 0;      // 0: thread_count()

    /// Throws precondition on t_min >= t_max, step <= 0 or epsilon <= 0.
    void validate() const;
    std::int64_t sample_count() const;
    double t_at(std::int64_t i) const { return t_min + static_cast<double>(i) * step; }
};

struct DensityEstimate {
    double epsilon = 0.0;
    double T = 0.0;                 // length of the scanned range
    double fraction = 0.0;          // hits / samples
    std::int64_t hits = 0;
    std::int64_t samples = 0;
    double step = 0.0;
    double refined_fraction = 0.0;  // hit length with bisected boundaries / T
};

struct ScanSample {
    double t = 0.0;
    double discrepancy = 0.0;
    bool hit = false;
};

struct DensityScan {
    DensityEstimate estimate;
    std::vector<ScanSample> samples;
};

/// Throws domain unless every cell center of K has sigma_m < Re s < 1.
void require_in_strip(const DirichletSeriesSpec& spec, const RegionMask& K);

/// max over cell centers s of K of |L(s + it) - g(s)|; g must be defined on K.
double sup_discrepancy(const DirichletSeriesSpec& spec, const RegionMask& K, const SampledFunction& g, double t,
                       double eval_error = 1e-10);
double sup_discrepancy(const DirichletSeriesSpec& spec, const PiecewiseConstantTarget& g, double t,
                       double eval_error = 1e-10);

/// Area of the cells of A where |L(s + it) - phi(s)| > epsilon.
double measure_discrepancy(const DirichletSeriesSpec& spec, const RegionMask& A, const SampledFunction& phi, double t,
                           double epsilon, double eval_error = 1e-10);

/// Hit when sup_discrepancy < epsilon. Samples carry the full sup value.
DensityScan density_scan(const DirichletSeriesSpec& spec, const RegionMask& K, const SampledFunction& g,
                         const ScanConfig& config);
DensityEstimate density_statistic(const DirichletSeriesSpec& spec, const RegionMask& K, const SampledFunction& g,
                                  const ScanConfig& config);

/// Hit when measure_discrepancy(t, epsilon) < area_epsilon (defaults to epsilon).
DensityScan measure_density_scan(const DirichletSeriesSpec& spec, const RegionMask& A, const SampledFunction& phi,
                                 double epsilon, const ScanConfig& config,
                                 std::optional<double> area_epsilon = std::nullopt);
DensityEstimate measure_density_statistic(const DirichletSeriesSpec& spec, const RegionMask& A,
                                          const SampledFunction& phi, double epsilon, const ScanConfig& config,
                                          std::optional<double> area_epsilon = std::nullopt);

struct ShiftEntry {
    int n = 0;
    double t = 0.0;
    double sup_error = 0.0;      // on the reduced support K_n against g_n
    double measure_error = 0.0;  // area of {|f - L(. + it)| > 3/n} in the domain of f
    double area_bound = 0.0;     // 3/n plus one cell layer
    bool found = false;
    bool verified = false;       // sup_error < 1/n and measure_error < area_bound
    int piece_count = 0;
    double reduction_area_lost = 0.0;
};

struct ShiftSequenceResult {
    std::vector<ShiftEntry> entries;
};

/// For n = 1..n_max: reduce f, take the first lattice shift in [0, T_max]
/// whose sup discrepancy on K_n is below 1/n, then recheck the 3/n bound.
ShiftSequenceResult find_shift_sequence(const DirichletSeriesSpec& spec, const SampledFunction& f, int n_max,
                                        double t_max, double step, unsigned threads = 0);

struct Placement {
    double scale = 1.0;  // z -> scale * z + offset
    cplx offset = 0.0;
    RegionMask image;

    cplx map(cplx z) const { return scale * z + offset; }
    cplx inverse(cplx w) const { return (w - offset) / scale; }
};

/// Affine map into the open box (sigma_star, 1) x (0, m). Identity when K
/// already lies inside; otherwise half the largest fitting scale, centered.
Placement place_compact(const RegionMask& K, double sigma_star, double m);

/// g o inverse(placement) sampled on the image cells.
SampledFunction transport(const SampledFunction& g, const Placement& placement);

/// CSV with columns t,<value_name>,hit.
void write_scan_csv(std::ostream& os, const std::vector<ScanSample>& samples, const char* value_name);

}  // namespace mlab
