#pragma once

// Polynomial approximation on compact sets with connected complement, and
// zero-free polynomial approximation in measure.

#include <string>
#include <string_view>
#include <vector>

#include "mlab/reduction.hpp"

namespace mlab {

/// p(z) = sum_k coeffs[k] * ((z - center) / scale)^k. The shifted basis keeps
/// high degrees well conditioned on sets away from the origin.
struct Poly {
    std::vector<cplx> coeffs;
    cplx center = 0.0;
    double scale = 1.0;

    static Poly constant(cplx c) { return Poly{{c}, 0.0, 1.0}; }

    cplx operator()(cplx z) const;
    /// -1 for the zero polynomial.
    int degree() const noexcept;
    /// Drops trailing zero coefficients.
    void trim();
    /// Plain monomial coefficients in z (may lose accuracy at high degree).
    std::vector<cplx> monomial_coeffs() const;
};

struct FitResult {
    Poly poly;
    double sup_error = 0.0;  // over the cell centers
    double rms_error = 0.0;  // the least-squares objective, monotone in degree
};

/// Least squares at the cell centers of g's domain on an orthonormalized
/// (modified Gram-Schmidt, two passes) monomial basis. Precondition error when
/// the complement of the domain is disconnected; degree_limit when a basis
/// vector loses more than 12 digits to orthogonalization.
FitResult mergelyan_fit(const SampledFunction& g, int degree);

/// Least squares followed by Lawson reweighting (weights multiplied by the
/// pointwise error) toward the minimax fit; returns the best sup error seen.
FitResult minimax_fit(const SampledFunction& g, int degree, int iterations = 60);

struct ZeroFreeReport {
    RegionMask K_eps;
    int j = 0;
    double sup_error_on_Keps = 0.0;    // max |p - g_eps| on K_eps
    double min_modulus_on_Keps = 0.0;
    double min_modulus_on_K = 0.0;
    double area_removed = 0.0;         // area(K) - area(K_eps)
    double gap_area = 0.0;             // area of 1/j < |g| < 2/j
    double carve_area = 0.0;
    double fit_tolerance = 0.0;
    int degree = 0;
};

struct ZeroFreeResult {
    Poly poly;
    ZeroFreeReport report;
};

struct ZeroFreeOptions {
    int max_degree = 60;
    int max_j_factor = 64;  // j ranges over [j0, j0 * factor]
    int lawson_iterations = 60;  // used when plain least squares misses the tolerance
};

/// Splits K at the levels 1/j and 2/j of |g|, drops the gap, carves the
/// remainder to connected complement, lifts the small part to 1/j and fits.
/// Resolution error when no j meets the gap bound; approximation_failure
/// when the degree limit is reached first.
ZeroFreeResult zero_free_approx_in_measure(const SampledFunction& g, double epsilon, int degree,
                                           const ZeroFreeOptions& options = {});

// {"center": [re, im], "scale": r, "coefficients": [[re, im], ...]}
std::string poly_to_json(const Poly& p);
Poly poly_from_json(std::string_view text);

}  // namespace mlab
