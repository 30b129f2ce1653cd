#pragma once

// Dirichlet series engine: evaluation with continuation into the critical
// strip, axiom checks, functional-equation residuals and zero censuses.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlab/error.hpp"

namespace mlab {

using cplx = std::complex<double>;

enum class CoefficientRule { zeta, dirichlet_chi4, synthetic };

struct GammaFactor {
    double lambda = 0.5;
    cplx mu = 0.0;
};

struct FunctionalData {
    double q = 1.0;
    std::vector<GammaFactor> factors;
    cplx omega = 1.0;
};

struct DirichletSeriesSpec {
    std::string name;
    CoefficientRule rule = CoefficientRule::zeta;
    std::vector<cplx> poly;  // synthetic rule: coefficients in s, ascending
    int euler_degree = 1;
    double sigma_L = 0.0;
    double mu_L = 0.5;
    int pole_order = 1;
    std::optional<double> known_sigma_m;
    std::optional<FunctionalData> functional;

    static DirichletSeriesSpec zeta();
    static DirichletSeriesSpec dirichlet_chi4();
    /// Polynomial in s with the given roots (leading coefficient 1).
    static DirichletSeriesSpec synthetic_roots(const std::vector<cplx>& roots);
    static DirichletSeriesSpec synthetic_coeffs(std::vector<cplx> coeffs);

    /// Throws domain when sigma_L >= 1 or mu_L < 0, validation when |omega| != 1.
    void validate() const;
    bool has_series() const noexcept { return rule != CoefficientRule::synthetic; }
    /// a(n); capability error for rules without a Dirichlet series.
    cplx coefficient(std::uint64_t n) const;
    /// Upper bound on |a(n)| used by tail estimates.
    double coefficient_bound() const;
    /// alpha_j(p), j = 1..euler_degree.
    std::vector<cplx> euler_alphas(std::uint64_t p) const;
};

struct StripSpec {
    double sigma_m = 0.5;
    double right_edge = 1.0;
};

struct EvalResult {
    cplx value;
    double error_bound = 0.0;
    std::int64_t terms_used = 0;
};

struct EvalLimits {
    double height_limit = 1e5;
    double pole_margin = 1e-3;
    std::int64_t max_series_terms = 10'000'000;
};

/// Hurwitz zeta by Euler-Maclaurin summation; alpha in (0, 1].
EvalResult hurwitz_eval(cplx s, double alpha, double target_error, const EvalLimits& limits = {});
EvalResult zeta_eval(cplx s, double target_error, const EvalLimits& limits = {});
/// Series with tail bound for sigma > 1 when affordable, continuation otherwise.
EvalResult lfun_eval(const DirichletSeriesSpec& spec, cplx s, double target_error,
                     const EvalLimits& limits = {});

double sigma_m_upper(double sigma_L, double mu_L);
/// Known sigma_m when recorded, the upper bound otherwise.
StripSpec strip_of(const DirichletSeriesSpec& spec);

/// Primes p <= x by a sieve; range error above 1e8.
std::vector<std::uint32_t> primes_up_to(std::uint64_t x);
double prime_mean_square(const DirichletSeriesSpec& spec, double x);
/// Product over p <= p_max of prod_j (1 - alpha_j(p) p^-s)^-1, summed in log space.
cplx euler_product(const DirichletSeriesSpec& spec, cplx s, std::uint64_t p_max);

/// Complex log-gamma (Lanczos, g = 7, nine terms) with reflection; about
/// 1e-15 relative accuracy for |Im z| up to a few hundred.
cplx log_gamma(cplx z);
cplx gamma_fn(cplx z);

/// |Lambda(s) - omega conj(Lambda(1 - conj s))| with
/// Lambda(s) = L(s) Q^s prod Gamma(lambda_j s + mu_j).
double functional_equation_residual(const DirichletSeriesSpec& spec, cplx s, double gamma_margin = 1e-3);

/// Hardy's Z: real-valued, sign changes at critical-line zeros.
double hardy_z(double t, double target_error = 1e-12);

struct RectangleBox {
    double sigma_lo = 0.0;
    double sigma_hi = 1.0;
    double t_lo = 0.0;
    double t_hi = 1.0;
};

struct CensusOptions {
    double resolution = 0.1;       // initial sample spacing along the contour
    double eval_error = 1e-9;
    double modulus_factor = 100.0; // |F| <= factor * eval_error is "on the contour"
    int max_depth = 24;
};

struct ZeroCount {
    int count = 0;
    std::int64_t samples = 0;
    double min_modulus = 0.0;
};

/// Zeros of (s - 1)^k L(s) inside the box by argument tracking along its
/// boundary with steps bisected until phase jumps are below pi/2.
ZeroCount zero_count_rectangle(const DirichletSeriesSpec& spec, const RectangleBox& box,
                               const CensusOptions& options = {});

/// Winding number of a closed sampled curve around 0 (last joins first).
int winding_number(const std::vector<cplx>& samples);

struct RoucheResult {
    bool equal = false;
    int winding_f = 0;
    int winding_g = 0;
};

/// Requires |f - g| < |g| at every sample (dominance error with the index).
RoucheResult rouche_compare(const std::vector<cplx>& f, const std::vector<cplx>& g);

struct IntervalCensus {
    double fraction = 0.0;  // nu(n) / n
    int zero_free = 0;      // nu(n)
    std::vector<int> counts;
};

/// Splits [0, m n] into n intervals of length m and counts those whose box
/// [sigma_star, sigma_hi] x interval holds no zero.
IntervalCensus zero_free_interval_fraction(const DirichletSeriesSpec& spec, double sigma_star, double m,
                                           int n, double sigma_hi = 1.0, const CensusOptions& options = {});

struct AxiomReport {
    bool continuation = false;
    double sigma_L = 0.0;
    double growth_sigma = 0.0;
    double growth_ratio = 0.0;     // max |L(sigma + it)| / t^mu_L over the sampled t
    int euler_degree = 1;
    double euler_gap = 0.0;        // relative gap at s = 2
    std::vector<std::pair<double, double>> prime_mean_square;  // (x, value)
    double ramanujan_max = 0.0;    // max |a(n)|, n <= ramanujan_n
    double theta_estimate = 0.0;   // max log|b(p^k)| / (k log p)
    std::vector<std::pair<cplx, double>> functional_residuals;
    double sigma_m_bound = 0.0;
    std::optional<double> sigma_m_known;
};

struct AxiomOptions {
    std::uint64_t euler_primes = 100'000;
    std::vector<double> mean_square_x{1e2, 1e3, 1e4};
    std::uint64_t ramanujan_n = 10'000;
    std::uint64_t theta_primes = 1'000;
    int theta_powers = 6;
    double growth_t_max = 1000.0;
    int growth_samples = 200;
    std::vector<cplx> functional_points{{0.7, 5.0}, {0.5, 10.0}, {0.3, 20.0}};
};

AxiomReport check_axioms(const DirichletSeriesSpec& spec, const AxiomOptions& options = {});

/// Complex literals such as "2", "-0.5i", "0.8+15i", "1e-3-2e2i".
cplx parse_complex(std::string_view text);
std::string format_complex(cplx z);

// Key/value spec file: coefficients, sigma_L, mu_L, pole_order, sigma_m,
// functional.Q, functional.gamma ("lambda:mu" entries separated by ';'),
// functional.omega, name. Lines starting with '#' are comments.
DirichletSeriesSpec read_spec(std::istream& is);
DirichletSeriesSpec spec_from_name(std::string_view coefficients);
void write_spec(std::ostream& os, const DirichletSeriesSpec& spec);

}  // namespace mlab
