#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>
#include <random>
#include <sstream>

#include "mlab/lfun.hpp"

using namespace mlab;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct partial sum plus integral tail bounds, valid for real s > 1.
double zeta_direct(double s, long n) {
    double acc = 0.0;
    for (long k = n; k >= 1; --k) acc += std::pow(static_cast<double>(k), -s);
    // sum_{k > n} k^-s lies between the two integrals; take the midpoint
    const double lo = std::pow(n + 1.0, 1.0 - s) / (s - 1.0);
    const double hi = std::pow(static_cast<double>(n), 1.0 - s) / (s - 1.0);
    return acc + 0.5 * (lo + hi);
}

double bisect_hardy(double a, double b) {
    double fa = hardy_z(a);
    for (int i = 0; i < 60 && b - a > 1e-12; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = hardy_z(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) < tol; }

}  // namespace

TEST_CASE("zeta at integer points") {
    CHECK(std::abs(zeta_eval(2.0, 1e-14).value - kPi * kPi / 6.0) < 1e-12);
    CHECK(std::abs(zeta_eval(3.0, 1e-14).value - 1.2020569031595943) < 1e-12);
    CHECK(std::abs(zeta_eval(0.0, 1e-12).value + 0.5) < 1e-10);
    CHECK(std::abs(zeta_eval(-1.0, 1e-12).value + 1.0 / 12.0) < 1e-10);
    CHECK(std::abs(zeta_eval(4.0, 1e-14).value - std::pow(kPi, 4) / 90.0) < 1e-13);
    // independent oracle
    CHECK(std::abs(zeta_eval(3.0, 1e-14).value.real() - zeta_direct(3.0, 200000)) < 1e-12);
    CHECK(std::abs(zeta_eval(2.5, 1e-14).value.real() - zeta_direct(2.5, 2000000)) < 1e-10);
}

TEST_CASE("zeta in the strip against frozen 30-digit references") {
    CHECK(close(zeta_eval({0.7, 5.0}, 1e-13).value, {0.72632911515779514, 0.20908727604572884}, 1e-12));
    CHECK(close(zeta_eval({0.5, 100.0}, 1e-13).value, {2.6926198856813241, -0.020386029602598171}, 1e-11));
    CHECK(close(zeta_eval({0.75, 30000.0}, 1e-10).value, {0.48664773528675729, 0.26303129104193024}, 1e-9));
    CHECK(close(zeta_eval({-3.5, 2.0}, 1e-9).value, {-0.0035609799649190723, 0.042622537314776407}, 1e-9));
    CHECK(close(lfun_eval(DirichletSeriesSpec::dirichlet_chi4(), {0.6, 7.0}, 1e-13).value,
                {0.74755663418642889, 0.98313021290343782}, 1e-12));
}

TEST_CASE("reported error bound covers the actual error") {
    const cplx s(0.7, 5.0);
    const cplx ref(0.72632911515779514, 0.20908727604572884);
    for (double target : {1e-3, 1e-6, 1e-9}) {
        auto r = zeta_eval(s, target);
        CHECK(r.error_bound <= target);
        CHECK(std::abs(r.value - ref) <= r.error_bound + 1e-15);
    }
}

TEST_CASE("Hurwitz at alpha 1 matches zeta and alpha 1/2 matches (2^s - 1) zeta") {
    const cplx s(0.8, 12.0);
    const cplx z = zeta_eval(s, 1e-13).value;
    CHECK(close(hurwitz_eval(s, 1.0, 1e-13).value, z, 1e-12));
    CHECK(close(hurwitz_eval(s, 0.5, 1e-13).value, (std::pow(2.0, s) - 1.0) * z, 1e-11));
}

TEST_CASE("Catalan's constant from chi4 at 2") {
    const auto chi4 = DirichletSeriesSpec::dirichlet_chi4();
    CHECK(std::abs(lfun_eval(chi4, 2.0, 1e-14).value - 0.915965594177219015) < 1e-13);
    // continuation route agrees with the series route on sigma > 1
    EvalLimits no_series;
    no_series.max_series_terms = 0;
    CHECK(close(lfun_eval(chi4, {1.5, 3.0}, 1e-13, no_series).value, lfun_eval(chi4, {1.5, 3.0}, 1e-9).value, 1e-9));
    CHECK(std::abs(lfun_eval(chi4, 1.0, 1e-13).value - kPi / 4.0) < 1e-12);
}

TEST_CASE("series and continuation routes agree at random points with sigma >= 2") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> sig(2.0, 4.0), tt(-50.0, 50.0);
    EvalLimits no_series;
    no_series.max_series_terms = 0;
    const auto zeta = DirichletSeriesSpec::zeta();
    for (int i = 0; i < 20; ++i) {
        const cplx s(sig(rng), tt(rng));
        const auto series = lfun_eval(zeta, s, 1e-8);
        const auto cont = lfun_eval(zeta, s, 1e-12, no_series);
        CHECK(std::abs(series.value - cont.value) < 1e-8);
    }
}

TEST_CASE("conjugation symmetry") {
    for (cplx s : {cplx(0.3, 7.0), cplx(0.9, 40.0), cplx(-1.2, 3.0)}) {
        CHECK(close(zeta_eval(std::conj(s), 1e-11).value, std::conj(zeta_eval(s, 1e-11).value), 1e-11));
    }
}

TEST_CASE("pole and height limits raise typed errors") {
    try {
        zeta_eval({1.0, 1e-4}, 1e-10);
        FAIL("expected a pole error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::pole);
    }
    try {
        zeta_eval({0.5, 2e5}, 1e-10);
        FAIL("expected a range error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::range);
    }
    // no pole for chi4
    CHECK_NOTHROW(lfun_eval(DirichletSeriesSpec::dirichlet_chi4(), 1.0, 1e-10));
}

TEST_CASE("first critical-line zeros by sign changes of Hardy's Z") {
    const double refs[] = {14.134725141734693, 21.022039638771555, 25.010857580145688};
    std::vector<double> found;
    double prev_t = 10.0;
    double prev = hardy_z(prev_t);
    for (double t = 10.05; t <= 26.0 && found.size() < 3; t += 0.05) {
        const double z = hardy_z(t);
        if ((z < 0) != (prev < 0)) found.push_back(bisect_hardy(prev_t, t));
        prev = z;
        prev_t = t;
    }
    REQUIRE(found.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(found[i] - refs[i]) < 1e-6);
}

TEST_CASE("log gamma against closed forms and references") {
    CHECK(close(log_gamma(5.0), std::log(24.0), 1e-13));
    CHECK(close(log_gamma(0.5), 0.5 * std::log(kPi), 1e-13));
    CHECK(close(gamma_fn(cplx(-0.5)), -2.0 * std::sqrt(kPi), 1e-12));
    CHECK(close(log_gamma({0.3, 40.0}), {-62.650686053968133, 107.24156057988668}, 1e-10));
    const cplx g = log_gamma({-2.7, 3.0});
    // branch may differ by 2 pi i from the principal continuous log
    CHECK(close(std::exp(g), std::exp(cplx(-7.7706239824698817, -6.2010508338149689)), 1e-15));
    // recurrence Gamma(z + 1) = z Gamma(z)
    const cplx z(0.37, -2.2);
    CHECK(close(gamma_fn(z + 1.0), z * gamma_fn(z), 1e-13));
}

TEST_CASE("Euler product approaches the series at s = 2") {
    const auto zeta = DirichletSeriesSpec::zeta();
    const double gap = std::abs(euler_product(zeta, 2.0, 100000) - kPi * kPi / 6.0) / (kPi * kPi / 6.0);
    CHECK(gap < 1e-6);
    CHECK(gap > 0.0);
    const auto chi4 = DirichletSeriesSpec::dirichlet_chi4();
    CHECK(std::abs(euler_product(chi4, 2.0, 100000) - 0.915965594177219015) < 1e-6);
    CHECK_THROWS_AS(euler_product(zeta, 0.9, 100), Error);
}

TEST_CASE("prime mean square") {
    const auto zeta = DirichletSeriesSpec::zeta();
    for (double x : {1e2, 1e3, 1e4}) CHECK(prime_mean_square(zeta, x) == 1.0);
    // chi4 vanishes only at p = 2; count primes by trial division
    const auto chi4 = DirichletSeriesSpec::dirichlet_chi4();
    long count = 0;
    for (long n = 2; n <= 10000; ++n) {
        bool prime = true;
        for (long d = 2; d * d <= n; ++d)
            if (n % d == 0) prime = false;
        count += prime;
    }
    CHECK(count == 1229);
    CHECK(prime_mean_square(chi4, 1e4) == doctest::Approx(1228.0 / 1229.0).epsilon(1e-15));
    CHECK(prime_mean_square(chi4, 2.0) == 0.0);
    CHECK(primes_up_to(30) == std::vector<std::uint32_t>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29});
    CHECK_THROWS_AS(prime_mean_square(zeta, 1.5), Error);
}

TEST_CASE("functional equation residuals") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> sig(0.05, 0.95), tt(1.0, 60.0);
    for (const auto& spec : {DirichletSeriesSpec::zeta(), DirichletSeriesSpec::dirichlet_chi4()}) {
        for (int i = 0; i < 10; ++i) {
            const cplx s(sig(rng), tt(rng));
            CHECK(functional_equation_residual(spec, s) < 1e-8);
        }
    }
    auto wrong = DirichletSeriesSpec::zeta();
    wrong.functional->omega = -1.0;
    CHECK(functional_equation_residual(wrong, {0.3, 5.0}) > 1e-3);
    auto none = DirichletSeriesSpec::synthetic_roots({0.5});
    CHECK_THROWS_AS(functional_equation_residual(none, 0.3), Error);
}

TEST_CASE("zero counts in rectangles") {
    const auto zeta = DirichletSeriesSpec::zeta();
    CHECK(zero_count_rectangle(zeta, {0.6, 1.2, 0.0, 100.0}).count == 0);
    CHECK(zero_count_rectangle(zeta, {0.0, 0.99, 5.0, 30.0}).count == 3);
    const int lower = zero_count_rectangle(zeta, {0.0, 0.99, 5.0, 20.0}).count;
    const int upper = zero_count_rectangle(zeta, {0.0, 0.99, 20.0, 30.0}).count;
    CHECK(lower == 1);
    CHECK(upper == 2);
    // boxes far from zeros and far from the pole
    CHECK(zero_count_rectangle(zeta, {1.5, 3.0, -10.0, 10.0}).count == 0);
}

TEST_CASE("zero counts on synthetic polynomials") {
    const auto p = DirichletSeriesSpec::synthetic_roots({{0.5, 3.0}, {0.7, 8.5}, {0.2, 8.6}, {2.0, 5.0}});
    CHECK(zero_count_rectangle(p, {0.0, 1.0, 0.0, 10.0}).count == 3);
    CHECK(zero_count_rectangle(p, {0.0, 3.0, 0.0, 10.0}).count == 4);
    CHECK(zero_count_rectangle(p, {0.0, 1.0, 4.0, 8.0}).count == 0);
    // root on the contour
    try {
        zero_count_rectangle(p, {0.5, 1.0, 0.0, 10.0});
        FAIL("expected a contour error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::contour);
    }
}

TEST_CASE("zero-free interval fraction") {
    const auto zeta = DirichletSeriesSpec::zeta();
    auto census = zero_free_interval_fraction(zeta, 0.6, 10.0, 10, 1.2);
    CHECK(census.fraction == 1.0);
    CHECK(census.zero_free == 10);
    // planted zero in the third interval of a synthetic spec
    auto planted = DirichletSeriesSpec::synthetic_roots({{0.8, 25.0}});
    auto c2 = zero_free_interval_fraction(planted, 0.6, 10.0, 5, 1.0);
    CHECK(c2.fraction == doctest::Approx(4.0 / 5.0));
    CHECK(c2.counts == std::vector<int>{0, 0, 1, 0, 0});
    CHECK_THROWS_AS(zero_free_interval_fraction(zeta, 0.4, 10.0, 2), Error);
}

TEST_CASE("Rouche comparison") {
    std::vector<cplx> f, g, h;
    for (int k = 0; k < 64; ++k) {
        const cplx z = std::polar(1.0, 2.0 * kPi * k / 64.0);
        f.push_back(z * z + 0.1);
        g.push_back(z * z);
        h.push_back(z - 2.0);
    }
    auto r = rouche_compare(f, g);
    CHECK(r.equal);
    CHECK(r.winding_f == 2);
    CHECK(winding_number(h) == 0);
    try {
        rouche_compare(h, g);
        FAIL("expected a dominance error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::dominance);
        CHECK(std::string(e.what()).find("sample 0") != std::string::npos);
    }
}

TEST_CASE("mean-square abscissa bound") {
    CHECK(sigma_m_upper(0.0, 0.5) == 0.5);
    CHECK(sigma_m_upper(0.5, 0.0) == 0.5);
    CHECK(sigma_m_upper(0.5, 1.0) == doctest::Approx(5.0 / 6.0));
    CHECK(sigma_m_upper(-1.0, 2.0) == doctest::Approx(0.6));
    CHECK_THROWS_AS(sigma_m_upper(1.0, 0.5), Error);
    CHECK(strip_of(DirichletSeriesSpec::zeta()).sigma_m == 0.5);
}

TEST_CASE("axiom report for zeta") {
    AxiomOptions opt;
    opt.growth_samples = 20;
    opt.growth_t_max = 200.0;
    const auto r = check_axioms(DirichletSeriesSpec::zeta(), opt);
    CHECK(r.continuation);
    CHECK(r.euler_gap < 1e-6);
    REQUIRE(r.prime_mean_square.size() == 3);
    for (auto [x, v] : r.prime_mean_square) CHECK(v == 1.0);
    CHECK(r.ramanujan_max == 1.0);
    CHECK(r.theta_estimate == 0.0);
    for (auto [s, v] : r.functional_residuals) CHECK(v < 1e-8);
    CHECK(r.growth_ratio < 10.0);
}

TEST_CASE("complex literal parsing") {
    CHECK(parse_complex("2") == cplx(2.0, 0.0));
    CHECK(parse_complex("-0.5i") == cplx(0.0, -0.5));
    CHECK(parse_complex("0.8+15i") == cplx(0.8, 15.0));
    CHECK(parse_complex("1e-3-2e2i") == cplx(1e-3, -200.0));
    CHECK(parse_complex("i") == cplx(0.0, 1.0));
    CHECK(parse_complex("-j") == cplx(0.0, -1.0));
    CHECK(parse_complex(" 3 - 4 i ") == cplx(3.0, -4.0));
    CHECK(parse_complex("+1.5e+2") == cplx(150.0, 0.0));
    CHECK_THROWS_AS(parse_complex(""), Error);
    CHECK_THROWS_AS(parse_complex("abc"), Error);
    const cplx z(0.1, -1.0 / 3.0);
    CHECK(parse_complex(format_complex(z)) == z);
}

TEST_CASE("spec files round trip") {
    std::stringstream ss;
    write_spec(ss, DirichletSeriesSpec::dirichlet_chi4());
    const auto back = read_spec(ss);
    CHECK(back.rule == CoefficientRule::dirichlet_chi4);
    CHECK(back.pole_order == 0);
    REQUIRE(back.functional);
    CHECK(back.functional->factors.size() == 1);
    CHECK(back.functional->q == doctest::Approx(2.0 / std::sqrt(kPi)));

    std::stringstream custom("# comment\ncoefficients = synthetic:roots=0.5+3i;0.7+8i\nname = two\n");
    const auto s = read_spec(custom);
    CHECK(s.name == "two");
    CHECK(std::abs(lfun_eval(s, {0.5, 3.0}, 1e-10).value) < 1e-12);

    std::stringstream bad("coefficients = zeta\nfoo = 1\n");
    CHECK_THROWS_AS(read_spec(bad), Error);
    std::stringstream bad_sigma("coefficients = zeta\nsigma_L = 1.5\n");
    try {
        read_spec(bad_sigma);
        FAIL("expected a domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
}
