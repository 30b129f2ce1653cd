#include "mlab/lfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mlab/complexgrid.hpp"
#include "mlab/parallel.hpp"

namespace mlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxCorrection = 60;
constexpr std::uint64_t kSieveLimit = 100'000'000;

// B_{2k} / (2k)! for k = 0..kMaxCorrection + 1 via 2 zeta(2k) / (2 pi)^{2k}.
const std::array<double, kMaxCorrection + 2>& bernoulli_ratios() {
    static const auto table = [] {
        std::array<double, kMaxCorrection + 2> t{};
        t[0] = 1.0;
        for (int k = 1; k <= kMaxCorrection + 1; ++k) {
            double z2k = 0.0;
            if (k == 1) {
                z2k = kPi * kPi / 6.0;
            } else if (k == 2) {
                z2k = std::pow(kPi, 4) / 90.0;
            } else {
                const int cut = 2000;
                for (int n = cut; n >= 1; --n) z2k += std::pow(static_cast<double>(n), -2.0 * k);
                z2k += std::pow(cut + 0.5, 1.0 - 2.0 * k) / (2.0 * k - 1.0);
            }
            const double sign = (k % 2 == 1) ? 1.0 : -1.0;
            t[k] = sign * 2.0 * z2k * std::exp(-2.0 * k * std::log(2.0 * kPi));
        }
        return t;
    }();
    return table;
}

// x^{-s} for real x > 0.
cplx real_pow_neg(double log_x, cplx s) {
    const double mag = std::exp(-s.real() * log_x);
    const double ph = -s.imag() * log_x;
    return {mag * std::cos(ph), mag * std::sin(ph)};
}

// (e^w - 1) / w without cancellation near 0.
cplx phi1(cplx w) {
    if (std::abs(w) < 1e-4) return 1.0 + w / 2.0 + w * w / 6.0 + w * w * w / 24.0;
    return (std::exp(w) - 1.0) / w;
}

struct ShiftedTerm {
    double weight;
    double alpha;
};

void check_height(cplx s, const EvalLimits& limits) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
        fail(ErrorKind::domain, "evaluation point is not finite");
    if (std::abs(s.imag()) > limits.height_limit)
        fail(ErrorKind::range, "|Im s| = " + format_double(std::abs(s.imag())) + " exceeds the height limit " +
                                   format_double(limits.height_limit));
}

// prefactor * sum_a weight_a * zeta(s, alpha_a) by Euler-Maclaurin with a
// shared cut N and correction order M.
EvalResult shifted_zeta_sum(cplx s, const std::vector<ShiftedTerm>& terms, cplx prefactor, double target) {
    if (!(target > 0.0)) fail(ErrorKind::precondition, "target error must be positive");
    const double sigma = s.real();
    const double pre_abs = std::abs(prefactor);
    double weight_abs = 0.0;
    double weight_sum = 0.0;
    double alpha_min = 1.0;
    for (const auto& t : terms) {
        weight_abs += std::abs(t.weight);
        weight_sum += t.weight;
        alpha_min = std::min(alpha_min, t.alpha);
    }
    const auto& bern = bernoulli_ratios();
    const double goal = 0.5 * target / std::max(pre_abs * weight_abs, 1e-300);

    // remainder after M corrections at x: C_M x^{-sigma-2M-1}
    // log |(s)_j| for j up to 2 kMaxCorrection + 2; -inf once a factor vanishes
    std::array<double, 2 * kMaxCorrection + 3> log_rising{};
    for (int j = 0; j < 2 * kMaxCorrection + 2; ++j) {
        const double a = std::abs(s + static_cast<double>(j));
        log_rising[j + 1] = a == 0.0 ? -std::numeric_limits<double>::infinity() : log_rising[j] + std::log(a);
    }
    auto log_cm = [&](int m) {
        return std::log(std::abs(bern[m + 1])) + log_rising[2 * m + 2] - std::log(sigma + 2.0 * m + 1.0);
    };

    int best_m = -1;
    double best_n = 0.0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= kMaxCorrection; ++m) {
        const double expo = sigma + 2.0 * m + 1.0;
        if (expo <= 0.5) continue;
        const double lc = log_cm(m);
        double n_cut = 1.0;
        if (std::isfinite(lc)) {
            const double log_x = (lc - std::log(goal)) / expo;
            if (log_x > std::log(1e9)) continue;
            n_cut = std::max(1.0, std::ceil(std::exp(log_x) - alpha_min));
        }
        const double cost = n_cut + 2.0 * m;
        if (cost < best_cost) {
            best_cost = cost;
            best_m = m;
            best_n = n_cut;
        }
    }
    if (best_m < 0)
        fail(ErrorKind::precision, "no Euler-Maclaurin order reaches error " + format_double(target) + " at s = " +
                                       format_complex(s));
    const auto n_cut = static_cast<std::int64_t>(best_n);
    const int m_cut = best_m;
    const double lc = log_cm(m_cut);

    cplx total = 0.0;
    double abs_terms = 0.0;
    double trunc = 0.0;
    // pole parts (N + alpha)^{1-s} / (s - 1), combined stably when weights cancel
    const bool cancel = weight_sum == 0.0;
    const double log_ref = std::log(static_cast<double>(n_cut) + alpha_min);
    const cplx ref_pow = real_pow_neg(log_ref, s - 1.0);
    for (const auto& t : terms) {
        cplx part = 0.0;
        for (std::int64_t n = 0; n < n_cut; ++n) {
            const cplx v = real_pow_neg(std::log(static_cast<double>(n) + t.alpha), s);
            part += v;
            abs_terms += std::abs(t.weight) * std::abs(v);
        }
        const double x = static_cast<double>(n_cut) + t.alpha;
        const double log_x = std::log(x);
        const cplx x_neg_s = real_pow_neg(log_x, s);
        cplx pole;
        if (cancel) {
            const double delta = log_x - log_ref;
            const cplx w = (1.0 - s) * delta;
            pole = -ref_pow * delta * phi1(w);  // (x^{1-s} - ref^{1-s}) / (s - 1)
        } else {
            pole = x_neg_s * x / (s - 1.0);
        }
        part += pole + 0.5 * x_neg_s;
        abs_terms += std::abs(t.weight) * (std::abs(pole) + 0.5 * std::abs(x_neg_s));

        cplx ratio = s / x;  // (s)_{2k-1} x^{-(2k-1)}, kept as one product to avoid overflow
        for (int k = 1; k <= m_cut; ++k) {
            const cplx corr = bern[k] * ratio * x_neg_s;
            part += corr;
            abs_terms += std::abs(t.weight) * std::abs(corr);
            ratio *= (s + (2.0 * k - 1.0)) / x * ((s + 2.0 * k) / x);
        }
        total += t.weight * part;
        if (std::isfinite(lc)) trunc += std::abs(t.weight) * std::exp(lc - (sigma + 2.0 * m_cut + 1.0) * log_x);
    }
    EvalResult out;
    out.value = prefactor * total;
    const double rounding = 10.0 * kEps * pre_abs * abs_terms;
    if (rounding > 0.5 * target)
        fail(ErrorKind::precision, "rounding estimate " + format_double(rounding) + " exceeds half of target " +
                                       format_double(target) + " at s = " + format_complex(s));
    out.error_bound = pre_abs * trunc + rounding;
    out.terms_used = n_cut + m_cut;
    return out;
}

void check_pole(cplx s, const EvalLimits& limits) {
    if (std::abs(s - 1.0) < limits.pole_margin)
        fail(ErrorKind::pole, "s = " + format_complex(s) + " lies within " + format_double(limits.pole_margin) +
                                  " of the pole at 1");
}

cplx log1p_complex(cplx w) {
    const double re = 0.5 * std::log1p(2.0 * w.real() + std::norm(w));
    const double im = std::atan2(w.imag(), 1.0 + w.real());
    return {re, im};
}

EvalResult synthetic_eval(const DirichletSeriesSpec& spec, cplx s) {
    cplx acc = 0.0;
    double mag = 0.0;
    for (auto it = spec.poly.rbegin(); it != spec.poly.rend(); ++it) {
        acc = acc * s + *it;
        mag = mag * std::abs(s) + std::abs(*it);
    }
    return {acc, 4.0 * kEps * static_cast<double>(spec.poly.size()) * mag, static_cast<std::int64_t>(spec.poly.size())};
}

EvalResult continuation_eval(const DirichletSeriesSpec& spec, cplx s, double target) {
    switch (spec.rule) {
    case CoefficientRule::zeta:
        return shifted_zeta_sum(s, {{1.0, 1.0}}, 1.0, target);
    case CoefficientRule::dirichlet_chi4:
        return shifted_zeta_sum(s, {{1.0, 0.25}, {-1.0, 0.75}}, real_pow_neg(std::log(4.0), s), target);
    case CoefficientRule::synthetic:
        return synthetic_eval(spec, s);
    }
    fail(ErrorKind::capability, "no continuation method for spec '" + spec.name + "'");
}

}  // namespace

// ------------------------------------------------------------------ specs

DirichletSeriesSpec DirichletSeriesSpec::zeta() {
    DirichletSeriesSpec d;
    d.name = "zeta";
    d.rule = CoefficientRule::zeta;
    d.sigma_L = 0.0;
    d.mu_L = 0.5;
    d.pole_order = 1;
    d.known_sigma_m = 0.5;
    d.functional = FunctionalData{1.0 / std::sqrt(kPi), {{0.5, 0.0}}, 1.0};
    return d;
}

DirichletSeriesSpec DirichletSeriesSpec::dirichlet_chi4() {
    DirichletSeriesSpec d;
    d.name = "dirichlet-chi4";
    d.rule = CoefficientRule::dirichlet_chi4;
    d.sigma_L = 0.0;
    d.mu_L = 0.5;
    d.pole_order = 0;
    d.functional = FunctionalData{2.0 / std::sqrt(kPi), {{0.5, 0.5}}, 1.0};
    return d;
}

DirichletSeriesSpec DirichletSeriesSpec::synthetic_roots(const std::vector<cplx>& roots) {
    std::vector<cplx> c{1.0};
    for (const cplx& r : roots) {
        std::vector<cplx> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= r * c[k];
        }
        c = std::move(next);
    }
    auto d = synthetic_coeffs(std::move(c));
    return d;
}

DirichletSeriesSpec DirichletSeriesSpec::synthetic_coeffs(std::vector<cplx> coeffs) {
    while (coeffs.size() > 1 && coeffs.back() == cplx(0.0)) coeffs.pop_back();
    if (coeffs.empty()) fail(ErrorKind::validation, "synthetic spec needs at least one coefficient");
    DirichletSeriesSpec d;
    d.name = "synthetic";
    d.rule = CoefficientRule::synthetic;
    d.poly = std::move(coeffs);
    d.euler_degree = 0;
    d.sigma_L = 0.0;
    d.mu_L = 0.0;
    d.pole_order = 0;
    return d;
}

void DirichletSeriesSpec::validate() const {
    if (!(sigma_L < 1.0)) fail(ErrorKind::domain, "sigma_L must be below 1");
    if (!(mu_L >= 0.0)) fail(ErrorKind::domain, "mu_L must be non-negative");
    if (pole_order < 0) fail(ErrorKind::validation, "pole order must be non-negative");
    if (functional) {
        if (std::abs(std::abs(functional->omega) - 1.0) > 1e-12)
            fail(ErrorKind::validation, "functional-equation omega must be unimodular");
        if (!(functional->q > 0.0)) fail(ErrorKind::validation, "functional-equation Q must be positive");
        for (const auto& g : functional->factors)
            if (!(g.lambda > 0.0) || g.mu.real() < 0.0)
                fail(ErrorKind::validation, "gamma factors need lambda > 0 and Re mu >= 0");
    }
    if (rule == CoefficientRule::synthetic && poly.empty())
        fail(ErrorKind::validation, "synthetic spec has no coefficients");
}

cplx DirichletSeriesSpec::coefficient(std::uint64_t n) const {
    if (n == 0) fail(ErrorKind::precondition, "coefficients start at n = 1");
    switch (rule) {
    case CoefficientRule::zeta:
        return 1.0;
    case CoefficientRule::dirichlet_chi4:
        if (n % 2 == 0) return 0.0;
        return n % 4 == 1 ? 1.0 : -1.0;
    case CoefficientRule::synthetic:
        break;
    }
    fail(ErrorKind::capability, "spec '" + name + "' has no Dirichlet coefficients");
}

double DirichletSeriesSpec::coefficient_bound() const {
    if (!has_series()) fail(ErrorKind::capability, "spec '" + name + "' has no Dirichlet coefficients");
    return 1.0;
}

std::vector<cplx> DirichletSeriesSpec::euler_alphas(std::uint64_t p) const {
    if (!has_series()) fail(ErrorKind::capability, "spec '" + name + "' has no Euler product");
    return {coefficient(p)};
}

// -------------------------------------------------------------- evaluation

EvalResult hurwitz_eval(cplx s, double alpha, double target_error, const EvalLimits& limits) {
    check_height(s, limits);
    check_pole(s, limits);
    if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::domain, "Hurwitz shift must lie in (0, 1]");
    return shifted_zeta_sum(s, {{1.0, alpha}}, 1.0, target_error);
}

EvalResult zeta_eval(cplx s, double target_error, const EvalLimits& limits) {
    check_height(s, limits);
    check_pole(s, limits);
    return shifted_zeta_sum(s, {{1.0, 1.0}}, 1.0, target_error);
}

EvalResult lfun_eval(const DirichletSeriesSpec& spec, cplx s, double target_error, const EvalLimits& limits) {
    if (!(target_error > 0.0)) fail(ErrorKind::precondition, "target error must be positive");
    check_height(s, limits);
    if (spec.rule == CoefficientRule::synthetic) return synthetic_eval(spec, s);
    if (spec.pole_order > 0) check_pole(s, limits);
    const double sigma = s.real();
    if (sigma > 1.0) {
        // sum_{n >= N} |a(n)| n^-sigma <= B (N^-sigma + N^{1-sigma} / (sigma - 1))
        const double b = spec.coefficient_bound();
        const double guess = std::pow(4.0 * b / ((sigma - 1.0) * target_error), 1.0 / (sigma - 1.0));
        if (guess <= static_cast<double>(limits.max_series_terms)) {
            auto n_cut = static_cast<std::int64_t>(std::max(2.0, std::ceil(guess)));
            auto tail = [&](std::int64_t n) {
                const double x = static_cast<double>(n);
                return b * (std::pow(x, -sigma) + std::pow(x, 1.0 - sigma) / (sigma - 1.0));
            };
            while (tail(n_cut) > 0.5 * target_error && n_cut < limits.max_series_terms) n_cut *= 2;
            if (tail(n_cut) <= 0.5 * target_error) {
                cplx acc = 0.0;
                double mag = 0.0;
                for (std::int64_t n = n_cut - 1; n >= 1; --n) {  // small terms first
                    const cplx a = spec.coefficient(static_cast<std::uint64_t>(n));
                    if (a == cplx(0.0)) continue;
                    const cplx v = a * real_pow_neg(std::log(static_cast<double>(n)), s);
                    acc += v;
                    mag += std::abs(v);
                }
                const double rounding = 10.0 * kEps * mag;
                if (rounding <= 0.5 * target_error) return {acc, tail(n_cut) + rounding, n_cut - 1};
            }
        }
    }
    // the built-in continuations are valid on the whole plane
    return continuation_eval(spec, s, target_error);
}

double sigma_m_upper(double sigma_L, double mu_L) {
    if (!(sigma_L < 1.0)) fail(ErrorKind::domain, "sigma_L must be below 1");
    if (!(mu_L >= 0.0)) fail(ErrorKind::domain, "mu_L must be non-negative");
    return std::max(0.5, 1.0 - (1.0 - sigma_L) / (1.0 + 2.0 * mu_L));
}

StripSpec strip_of(const DirichletSeriesSpec& spec) {
    return {spec.known_sigma_m.value_or(sigma_m_upper(spec.sigma_L, spec.mu_L)), 1.0};
}

// ----------------------------------------------------------------- primes

std::vector<std::uint32_t> primes_up_to(std::uint64_t x) {
    if (x > kSieveLimit) fail(ErrorKind::range, "sieve limit is 1e8");
    std::vector<std::uint32_t> out;
    if (x < 2) return out;
    std::vector<bool> composite(x + 1, false);
    for (std::uint64_t p = 2; p <= x; ++p) {
        if (composite[p]) continue;
        out.push_back(static_cast<std::uint32_t>(p));
        for (std::uint64_t q = p * p; q <= x; q += p) composite[q] = true;
    }
    return out;
}

double prime_mean_square(const DirichletSeriesSpec& spec, double x) {
    if (!(x >= 2.0)) fail(ErrorKind::domain, "prime mean square needs x >= 2");
    const auto primes = primes_up_to(static_cast<std::uint64_t>(std::floor(x)));
    double acc = 0.0;
    for (auto p : primes) acc += std::norm(spec.coefficient(p));
    return acc / static_cast<double>(primes.size());
}

cplx euler_product(const DirichletSeriesSpec& spec, cplx s, std::uint64_t p_max) {
    if (!(s.real() > 1.0)) fail(ErrorKind::domain, "the Euler product converges only for Re s > 1");
    const auto primes = primes_up_to(p_max);
    cplx log_sum = 0.0;
    for (auto it = primes.rbegin(); it != primes.rend(); ++it) {
        const cplx ps = real_pow_neg(std::log(static_cast<double>(*it)), s);
        for (const cplx& a : spec.euler_alphas(*it)) log_sum -= log1p_complex(-a * ps);
    }
    return std::exp(log_sum);
}

// ------------------------------------------------------------------ gamma

cplx log_gamma(cplx z) {
    static constexpr double kLanczos[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                           771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                           -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (z.real() < 0.5) {
        // reflection with a log-sine that stays finite for large |Im z|
        const cplx w = kPi * z;
        cplx log_sin;
        if (std::abs(w.imag()) < 20.0) {
            log_sin = std::log(std::sin(w));
        } else if (w.imag() > 0) {
            log_sin = -cplx(0, 1) * w + std::log(1.0 - std::exp(cplx(0, 2) * w)) + std::log(cplx(0, 0.5));
        } else {
            log_sin = cplx(0, 1) * w + std::log(1.0 - std::exp(cplx(0, -2) * w)) + std::log(cplx(0, -0.5));
        }
        return std::log(kPi) - log_sin - log_gamma(1.0 - z);
    }
    const cplx zm = z - 1.0;
    cplx x = kLanczos[0];
    for (int i = 1; i < 9; ++i) x += kLanczos[i] / (zm + static_cast<double>(i));
    const cplx t = zm + 7.5;
    return 0.5 * std::log(2.0 * kPi) + (zm + 0.5) * std::log(t) - t + std::log(x);
}

cplx gamma_fn(cplx z) { return std::exp(log_gamma(z)); }

namespace {

cplx log_lambda_factor(const FunctionalData& fd, cplx s, double margin) {
    cplx acc = s * std::log(fd.q);
    for (const auto& g : fd.factors) {
        const cplx w = g.lambda * s + g.mu;
        const double k = std::min(0.0, std::round(w.real()));
        if (std::abs(w - k) < margin)
            fail(ErrorKind::pole, "gamma factor argument " + format_complex(w) + " is within " +
                                      format_double(margin) + " of a pole");
        acc += log_gamma(w);
    }
    return acc;
}

}  // namespace

double functional_equation_residual(const DirichletSeriesSpec& spec, cplx s, double gamma_margin) {
    if (!spec.functional) fail(ErrorKind::capability, "spec '" + spec.name + "' carries no functional equation");
    const FunctionalData& fd = *spec.functional;
    const cplx s_dual = 1.0 - std::conj(s);
    constexpr double target = 1e-11;
    const cplx left = lfun_eval(spec, s, target).value * std::exp(log_lambda_factor(fd, s, gamma_margin));
    const cplx right = lfun_eval(spec, s_dual, target).value * std::exp(log_lambda_factor(fd, s_dual, gamma_margin));
    return std::abs(left - fd.omega * std::conj(right));
}

double hardy_z(double t, double target_error) {
    const double theta = log_gamma(cplx(0.25, 0.5 * t)).imag() - 0.5 * t * std::log(kPi);
    const cplx z = zeta_eval(cplx(0.5, t), target_error).value;
    return (std::polar(1.0, theta) * z).real();
}

// ------------------------------------------------------------- zero census

namespace {

struct ContourPoint {
    cplx s;
    cplx value;
};

class ContourTracker {
public:
    ContourTracker(const DirichletSeriesSpec& spec, const CensusOptions& opt) : spec_(spec), opt_(opt) {}

    ContourPoint evaluate(cplx s) {
        ++samples_;
        cplx v;
        const EvalLimits limits;
        if (spec_.pole_order > 0 && std::abs(s - 1.0) < limits.pole_margin) {
            // mean over a small circle equals the value of the entire function
            const double r = 2.0 * limits.pole_margin;
            cplx acc = 0.0;
            for (int k = 0; k < 16; ++k) {
                const cplx p = 1.0 + std::polar(r, 2.0 * kPi * k / 16.0);
                acc += completed(p);
            }
            v = acc / 16.0;
        } else {
            v = completed(s);
        }
        const double mod = std::abs(v);
        min_modulus_ = std::min(min_modulus_, mod);
        if (mod <= opt_.modulus_factor * opt_.eval_error)
            fail(ErrorKind::contour, "|F| = " + format_double(mod) + " at s = " + format_complex(s) +
                                         " is indistinguishable from a zero on the contour");
        return {s, v};
    }

    // Adds the phase change from a to b, bisecting until each step is below pi/2.
    void advance(const ContourPoint& a, const ContourPoint& b, int depth) {
        const double d = std::arg(b.value / a.value);
        if (std::abs(d) < kPi / 2.0) {
            phase_ += d;
            return;
        }
        if (depth >= opt_.max_depth)
            fail(ErrorKind::contour, "phase unresolved on segment " + format_complex(a.s) + " -> " +
                                         format_complex(b.s) + " after " + std::to_string(depth) + " bisections");
        const ContourPoint mid = evaluate(0.5 * (a.s + b.s));
        advance(a, mid, depth + 1);
        advance(mid, b, depth + 1);
    }

    double phase() const noexcept { return phase_; }
    std::int64_t samples() const noexcept { return samples_; }
    double min_modulus() const noexcept { return min_modulus_; }

private:
    cplx completed(cplx s) const {
        cplx v = lfun_eval(spec_, s, opt_.eval_error).value;
        for (int k = 0; k < spec_.pole_order; ++k) v *= (s - 1.0);
        return v;
    }

    const DirichletSeriesSpec& spec_;
    const CensusOptions& opt_;
    double phase_ = 0.0;
    std::int64_t samples_ = 0;
    double min_modulus_ = std::numeric_limits<double>::infinity();
};

}  // namespace

ZeroCount zero_count_rectangle(const DirichletSeriesSpec& spec, const RectangleBox& box,
                               const CensusOptions& options) {
    spec.validate();
    if (!(box.sigma_lo < box.sigma_hi) || !(box.t_lo < box.t_hi))
        fail(ErrorKind::precondition, "rectangle must have positive width and height");
    if (!(options.resolution > 0.0)) fail(ErrorKind::precondition, "resolution must be positive");

    const std::array<cplx, 4> corners{cplx(box.sigma_lo, box.t_lo), cplx(box.sigma_hi, box.t_lo),
                                      cplx(box.sigma_hi, box.t_hi), cplx(box.sigma_lo, box.t_hi)};
    std::vector<cplx> nodes;
    for (int e = 0; e < 4; ++e) {
        const cplx a = corners[e];
        const cplx b = corners[(e + 1) % 4];
        const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / options.resolution)));
        for (int i = 0; i < pieces; ++i) nodes.push_back(a + (b - a) * (static_cast<double>(i) / pieces));
    }

    ContourTracker tracker(spec, options);
    auto values = parallel_map<cplx>(nodes.size(), [&](std::size_t i) {
        ContourTracker local(spec, options);
        return local.evaluate(nodes[i]).value;
    });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const ContourPoint a{nodes[i], values[i]};
        const ContourPoint b{nodes[(i + 1) % nodes.size()], values[(i + 1) % nodes.size()]};
        tracker.advance(a, b, 0);
    }
    double min_mod = tracker.min_modulus();
    for (const cplx& v : values) min_mod = std::min(min_mod, std::abs(v));

    const double turns = tracker.phase() / (2.0 * kPi);
    ZeroCount out;
    out.count = static_cast<int>(std::lround(turns));
    out.samples = tracker.samples() + static_cast<std::int64_t>(nodes.size());
    out.min_modulus = min_mod;
    return out;
}

int winding_number(const std::vector<cplx>& samples) {
    if (samples.size() < 3) fail(ErrorKind::precondition, "a closed curve needs at least three samples");
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const cplx a = samples[i];
        const cplx b = samples[(i + 1) % samples.size()];
        if (a == cplx(0.0) || b == cplx(0.0)) fail(ErrorKind::contour, "curve passes through zero");
        total += std::arg(b / a);
    }
    return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

RoucheResult rouche_compare(const std::vector<cplx>& f, const std::vector<cplx>& g) {
    if (f.size() != g.size()) fail(ErrorKind::precondition, "f and g need the same number of samples");
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!(std::abs(f[i] - g[i]) < std::abs(g[i])))
            fail(ErrorKind::dominance, "|f - g| < |g| fails at sample " + std::to_string(i) + " (|f - g| = " +
                                           format_double(std::abs(f[i] - g[i])) + ", |g| = " +
                                           format_double(std::abs(g[i])) + ")");
    RoucheResult r;
    r.winding_f = winding_number(f);
    r.winding_g = winding_number(g);
    r.equal = r.winding_f == r.winding_g;
    return r;
}

IntervalCensus zero_free_interval_fraction(const DirichletSeriesSpec& spec, double sigma_star, double m, int n,
                                           double sigma_hi, const CensusOptions& options) {
    const StripSpec strip = strip_of(spec);
    if (spec.has_series() && !(sigma_star > strip.sigma_m && sigma_star < 1.0))
        fail(ErrorKind::domain, "sigma_star must lie in (sigma_m, 1) = (" + format_double(strip.sigma_m) + ", 1)");
    if (!(m > 0.0) || n < 1) fail(ErrorKind::precondition, "need m > 0 and n >= 1");
    if (!(sigma_hi > sigma_star)) fail(ErrorKind::precondition, "sigma_hi must exceed sigma_star");
    IntervalCensus out;
    for (int j = 1; j <= n; ++j) {
        const RectangleBox box{sigma_star, sigma_hi, (j - 1) * m, j * m};
        try {
            out.counts.push_back(zero_count_rectangle(spec, box, options).count);
        } catch (const Error& e) {
            fail(e.kind(), "interval I_" + std::to_string(j) + " = (" + format_double(box.t_lo) + ", " +
                               format_double(box.t_hi) + "): " + e.what());
        }
        if (out.counts.back() == 0) ++out.zero_free;
    }
    out.fraction = static_cast<double>(out.zero_free) / n;
    return out;
}

// ------------------------------------------------------------------ axioms

AxiomReport check_axioms(const DirichletSeriesSpec& spec, const AxiomOptions& opt) {
    spec.validate();
    AxiomReport r;
    r.continuation = spec.sigma_L < 1.0;
    r.sigma_L = spec.sigma_L;
    r.euler_degree = spec.euler_degree;
    r.sigma_m_bound = sigma_m_upper(spec.sigma_L, spec.mu_L);
    r.sigma_m_known = spec.known_sigma_m;

    r.growth_sigma = 0.5 * (std::max(spec.sigma_L, 0.0) + 1.0);
    const int samples = std::max(2, opt.growth_samples);
    for (int i = 0; i < samples; ++i) {
        const double t = 10.0 + (opt.growth_t_max - 10.0) * i / (samples - 1);
        const double v = std::abs(lfun_eval(spec, cplx(r.growth_sigma, t), 1e-6).value);
        r.growth_ratio = std::max(r.growth_ratio, v / std::pow(t, spec.mu_L));
    }

    if (spec.has_series()) {
        const cplx series = lfun_eval(spec, 2.0, 1e-14).value;
        r.euler_gap = std::abs(euler_product(spec, 2.0, opt.euler_primes) - series) / std::abs(series);
        for (double x : opt.mean_square_x) r.prime_mean_square.emplace_back(x, prime_mean_square(spec, x));
        for (std::uint64_t n = 1; n <= opt.ramanujan_n; ++n)
            r.ramanujan_max = std::max(r.ramanujan_max, std::abs(spec.coefficient(n)));
        r.theta_estimate = -std::numeric_limits<double>::infinity();
        for (auto p : primes_up_to(opt.theta_primes)) {
            const auto alphas = spec.euler_alphas(p);
            for (int k = 1; k <= opt.theta_powers; ++k) {
                cplx b = 0.0;
                for (const cplx& a : alphas) b += std::pow(a, k);
                b /= static_cast<double>(k);
                if (std::abs(b) == 0.0) continue;
                r.theta_estimate = std::max(r.theta_estimate, std::log(std::abs(b)) / (k * std::log(double(p))));
            }
        }
    }
    if (spec.functional)
        for (const cplx& s : opt.functional_points)
            r.functional_residuals.emplace_back(s, functional_equation_residual(spec, s));
    return r;
}

// -------------------------------------------------------------- text I/O

cplx parse_complex(std::string_view text) {
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    if (t.empty()) fail(ErrorKind::parse, "empty complex literal");
    auto number = [&](std::string part, double unit_default) -> double {
        if (part.empty() || part == "+") return unit_default;
        if (part == "-") return -unit_default;
        if (part.front() == '+') part.erase(0, 1);
        return parse_double(part);
    };
    const char last = t.back();
    if (last != 'i' && last != 'j') return {number(t, 0.0), 0.0};
    t.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = t.size(); k-- > 1;) {
        if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    if (split == std::string::npos) return {0.0, number(t, 1.0)};
    return {number(t.substr(0, split), 0.0), number(t.substr(split), 1.0)};
}

std::string format_complex(cplx z) {
    std::string im = format_double(z.imag());
    if (im.front() != '-') im.insert(im.begin(), '+');
    return format_double(z.real()) + im + "i";
}

namespace {

std::vector<std::string> split_list(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

}  // namespace

DirichletSeriesSpec spec_from_name(std::string_view coefficients) {
    const std::string c = trim(coefficients);
    if (c == "zeta") return DirichletSeriesSpec::zeta();
    if (c == "dirichlet-chi4") return DirichletSeriesSpec::dirichlet_chi4();
    const std::string roots = "synthetic:roots=";
    const std::string coeffs = "synthetic:coeffs=";
    auto parse_all = [](std::string_view list, char sep) {
        std::vector<cplx> v;
        for (const auto& item : split_list(list, sep))
            if (!trim(item).empty()) v.push_back(parse_complex(item));
        return v;
    };
    if (c.rfind(roots, 0) == 0) {
        auto d = DirichletSeriesSpec::synthetic_roots(parse_all(std::string_view(c).substr(roots.size()), ';'));
        d.name = c;
        return d;
    }
    if (c.rfind(coeffs, 0) == 0) {
        auto d = DirichletSeriesSpec::synthetic_coeffs(parse_all(std::string_view(c).substr(coeffs.size()), ','));
        d.name = c;
        return d;
    }
    fail(ErrorKind::parse, "unknown coefficient rule '" + c + "' (zeta, dirichlet-chi4, synthetic:roots=..., "
                                                            "synthetic:coeffs=...)");
}

DirichletSeriesSpec read_spec(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) fail(ErrorKind::parse, "line " + std::to_string(lineno) + ": expected key = value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    auto it = kv.find("coefficients");
    if (it == kv.end()) fail(ErrorKind::parse, "spec file needs a 'coefficients' entry");
    DirichletSeriesSpec d = spec_from_name(it->second);
    std::optional<FunctionalData> fd = d.functional;
    for (const auto& [key, value] : kv) {
        if (key == "coefficients") continue;
        if (key == "name") d.name = value;
        else if (key == "sigma_L") d.sigma_L = parse_double(value);
        else if (key == "mu_L") d.mu_L = parse_double(value);
        else if (key == "pole_order") d.pole_order = static_cast<int>(parse_double(value));
        else if (key == "sigma_m") d.known_sigma_m = parse_double(value);
        else if (key.rfind("functional.", 0) == 0) {
            if (!fd) fd = FunctionalData{};
            if (key == "functional.Q") fd->q = parse_double(value);
            else if (key == "functional.omega") fd->omega = parse_complex(value);
            else if (key == "functional.gamma") {
                fd->factors.clear();
                for (const auto& item : split_list(value, ';')) {
                    const auto parts = split_list(item, ':');
                    if (parts.size() != 2) fail(ErrorKind::parse, "gamma factor must read lambda:mu");
                    fd->factors.push_back({parse_double(trim(parts[0])), parse_complex(parts[1])});
                }
            } else {
                fail(ErrorKind::parse, "unknown key '" + key + "'");
            }
        } else {
            fail(ErrorKind::parse, "unknown key '" + key + "'");
        }
    }
    d.functional = fd;
    d.validate();
    return d;
}

void write_spec(std::ostream& os, const DirichletSeriesSpec& spec) {
    std::string rule;
    switch (spec.rule) {
    case CoefficientRule::zeta: rule = "zeta"; break;
    case CoefficientRule::dirichlet_chi4: rule = "dirichlet-chi4"; break;
    case CoefficientRule::synthetic: {
        rule = "synthetic:coeffs=";
        for (std::size_t k = 0; k < spec.poly.size(); ++k) rule += (k ? "," : "") + format_complex(spec.poly[k]);
        break;
    }
    }
    os << "name = " << spec.name << '\n';
    os << "coefficients = " << rule << '\n';
    os << "sigma_L = " << format_double(spec.sigma_L) << '\n';
    os << "mu_L = " << format_double(spec.mu_L) << '\n';
    os << "pole_order = " << spec.pole_order << '\n';
    if (spec.known_sigma_m) os << "sigma_m = " << format_double(*spec.known_sigma_m) << '\n';
    if (spec.functional) {
        os << "functional.Q = " << format_double(spec.functional->q) << '\n';
        os << "functional.gamma = ";
        for (std::size_t k = 0; k < spec.functional->factors.size(); ++k)
            os << (k ? ";" : "") << format_double(spec.functional->factors[k].lambda) << ':'
               << format_complex(spec.functional->factors[k].mu);
        os << '\n';
        os << "functional.omega = " << format_complex(spec.functional->omega) << '\n';
    }
}

}  // namespace mlab
