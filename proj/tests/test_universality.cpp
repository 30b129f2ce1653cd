#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "mlab/universality.hpp"
#include "support.hpp"

using namespace mlab;

namespace {

const auto kZeta = DirichletSeriesSpec::zeta();

RegionMask small_disk() {
    const auto g = GridSpec::covering({0.72, -0.03, 0.78, 0.03}, 7);
    return disk_mask(g, {0.75, 0.0}, 0.03);
}

SampledFunction constant_on(const RegionMask& K, cplx v) {
    return SampledFunction::sample(K, [v](cplx) { return v; });
}

SampledFunction zeta_shifted(const RegionMask& K, double t0) {
    return SampledFunction::sample(K, [t0](cplx s) { return testing::borwein_zeta(s + cplx(0.0, t0)); });
}

}  // namespace

TEST_CASE("sup discrepancy of zeta against itself vanishes") {
    const auto K = small_disk();
    REQUIRE(K.cell_count() > 20);
    CHECK(sup_discrepancy(kZeta, K, zeta_shifted(K, 0.0), 0.0) < 1e-9);
    CHECK(sup_discrepancy(kZeta, K, zeta_shifted(K, 7.5), 7.5) < 1e-9);
    CHECK(sup_discrepancy(kZeta, K, zeta_shifted(K, 7.5), 0.0) > 0.1);
}

TEST_CASE("sup discrepancy against a brute cellwise oracle") {
    const auto K = small_disk();
    const auto g = constant_on(K, 1.0);
    for (double t : {0.0, 3.3, 17.0}) {
        double brute = 0.0;
        K.for_each_cell([&](int r, int c, std::int64_t) {
            const cplx s = K.grid().cell_center(r, c) + cplx(0.0, t);
            brute = std::max(brute, std::abs(testing::borwein_zeta(s) - 1.0));
        });
        CHECK(sup_discrepancy(kZeta, K, g, t, 1e-12) == doctest::Approx(brute).epsilon(1e-9));
    }
}

TEST_CASE("compact sets outside the strip are rejected") {
    const auto g = GridSpec::covering({2.0, 0.0, 2.0 + 1.0 / 128, 1.0 / 128}, 7);
    const auto K = RegionMask::full(g);
    try {
        sup_discrepancy(kZeta, K, constant_on(K, 1.0), 0.0);
        FAIL("expected a domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
    const auto straddle = RegionMask::full(GridSpec::covering({0.4, 0.0, 0.6, 0.1}, 5));
    CHECK_THROWS_AS(measure_discrepancy(kZeta, straddle, constant_on(straddle, 1.0), 0.0, 0.1), Error);
}

TEST_CASE("measure discrepancy against a brute cellwise oracle") {
    const auto A = rect_mask(GridSpec::covering({0.7, 0.1, 0.8, 0.2}, 7), {0.7, 0.1, 0.8, 0.2});
    const auto phi = constant_on(A, 1.0);
    double brute = 0.0;
    A.for_each_cell([&](int r, int c, std::int64_t) {
        if (std::abs(testing::borwein_zeta(A.grid().cell_center(r, c)) - 1.0) > 0.1) brute += A.grid().cell_area();
    });
    CHECK(measure_discrepancy(kZeta, A, phi, 0.0, 0.1) == doctest::Approx(brute).epsilon(1e-12));
    CHECK(measure_discrepancy(kZeta, A, zeta_shifted(A, 2.0), 2.0, 1e-6) == 0.0);
    CHECK(measure_discrepancy(kZeta, A, phi, 0.0, 1e6) == 0.0);
}

TEST_CASE("self-approximation statistic hits at t = 0 and is monotone in epsilon") {
    const auto K = small_disk();
    const auto g = zeta_shifted(K, 0.0);
    ScanConfig cfg;
    cfg.t_min = 0.0;
    cfg.t_max = 50.0;
    cfg.step = 0.05;
    double prev = -1.0;
    for (double eps : {0.1, 0.2, 0.4}) {
        cfg.epsilon = eps;
        const auto scan = density_scan(kZeta, K, g, cfg);
        CHECK(scan.samples.front().hit);
        CHECK(scan.estimate.fraction > 0.0);
        CHECK(scan.estimate.fraction == doctest::Approx(double(scan.estimate.hits) / scan.estimate.samples));
        CHECK(scan.estimate.samples == 1001);
        CHECK(scan.estimate.fraction >= prev);
        prev = scan.estimate.fraction;
        // replay: every hit recomputes below epsilon
        for (const auto& s : scan.samples)
            if (s.hit) CHECK(sup_discrepancy(kZeta, K, g, s.t, eps / 10.0) < eps);
    }
}

TEST_CASE("scans do not depend on the thread count") {
    const auto K = small_disk();
    const auto g = constant_on(K, 1.0);
    ScanConfig cfg;
    cfg.t_max = 80.0;
    cfg.epsilon = 0.8;
    cfg.refine_depth = 4;
    std::string reference;
    for (unsigned threads : {1u, 3u, 8u}) {
        cfg.threads = threads;
        const auto scan = density_scan(kZeta, K, g, cfg);
        std::ostringstream os;
        write_scan_csv(os, scan.samples, "sup_discrepancy");
        os << format_double(scan.estimate.refined_fraction);
        if (reference.empty()) reference = os.str();
        CHECK(os.str() == reference);
    }
    CHECK(reference.rfind("t,sup_discrepancy,hit\n0,", 0) == 0);
}

TEST_CASE("refined fraction tracks the lattice fraction") {
    const auto K = small_disk();
    ScanConfig cfg;
    cfg.t_max = 200.0;
    cfg.epsilon = 0.8;
    cfg.refine_depth = 6;
    const auto e = density_statistic(kZeta, K, constant_on(K, 1.0), cfg);
    CHECK(e.fraction > 0.0);
    CHECK(std::abs(e.refined_fraction - e.fraction) < 0.05);
}

TEST_CASE("theorem-faithful mode rejects targets with zeros") {
    const auto K = small_disk();
    auto g = constant_on(K, 1.0);
    g.values[3] = 0.0;
    ScanConfig cfg;
    cfg.t_max = 1.0;
    CHECK_THROWS_AS(density_statistic(kZeta, K, g, cfg), Error);
    cfg.require_zero_free = false;
    CHECK_NOTHROW(density_statistic(kZeta, K, g, cfg));
}

TEST_CASE("measure density statistic thresholds") {
    const auto A = rect_mask(GridSpec::covering({0.7, 0.1, 0.8, 0.2}, 6), {0.7, 0.1, 0.8, 0.2});
    ScanConfig cfg;
    cfg.t_max = 20.0;
    cfg.step = 0.5;
    // vacuous: epsilon above the area and above every pointwise gap
    const auto all = measure_density_statistic(kZeta, A, constant_on(A, 1.0), 100.0, cfg);
    CHECK(all.fraction == 1.0);
    const auto planted = measure_density_scan(kZeta, A, zeta_shifted(A, 4.0), 0.05, cfg);
    CHECK(planted.estimate.fraction > 0.0);
    CHECK(planted.samples[8].hit);
    // separate area threshold
    const auto strict = measure_density_statistic(kZeta, A, constant_on(A, 1.0), 0.5, cfg, 0.0);
    CHECK(strict.fraction <= measure_density_statistic(kZeta, A, constant_on(A, 1.0), 0.5, cfg).fraction);
}

TEST_CASE("shift sequence finds a planted shift") {
    const auto A = rect_mask(GridSpec::covering({0.7, 0.0, 0.8, 0.1}, 6), {0.7, 0.0, 0.8, 0.1});
    const double t0 = 3.0;
    const auto f = zeta_shifted(A, t0);
    const auto res = find_shift_sequence(kZeta, f, 2, 10.0, 0.05);
    REQUIRE(res.entries.size() == 2);
    for (const auto& e : res.entries) {
        REQUIRE(e.found);
        CHECK(e.t <= t0 + 1e-12);
        CHECK(e.verified);
        CHECK(e.sup_error < 1.0 / e.n);
        CHECK(e.measure_error < e.area_bound);
        // independent recomputation of the composite bound on the full domain
        CHECK(measure_discrepancy(kZeta, A, f, e.t, 3.0 / e.n) == doctest::Approx(e.measure_error));
    }
}

TEST_CASE("shift sequence with a zero-valued region keeps nonzero values") {
    const auto A = rect_mask(GridSpec::covering({0.7, 0.0, 0.8, 0.1}, 6), {0.7, 0.0, 0.8, 0.1});
    const auto f = SampledFunction::sample(A, [](cplx z) { return z.real() < 0.75 ? cplx(0.0) : cplx(1.0); });
    const auto res = find_shift_sequence(kZeta, f, 1, 200.0, 0.05);
    REQUIRE(res.entries.size() == 1);
    if (res.entries[0].found) {
        CHECK(res.entries[0].verified);
        CHECK(measure_discrepancy(kZeta, A, f, res.entries[0].t, 3.0) < res.entries[0].area_bound);
    }
}

TEST_CASE("placing a compact set in the box") {
    const auto unit = RegionMask::full(GridSpec::covering({0, 0, 1, 1}, 4));
    const auto p = place_compact(unit, 0.6, 1.0);
    CHECK(p.scale == doctest::Approx(0.2));
    const auto box = *p.image.bounding_cells();
    const GridSpec& g = p.image.grid();
    const double x0 = g.origin().real() + box.col0 * g.cell_side();
    const double x1 = g.origin().real() + box.col_end() * g.cell_side();
    const double y0 = g.origin().imag() + box.row0 * g.cell_side();
    const double y1 = g.origin().imag() + box.row_end() * g.cell_side();
    CHECK(x0 > 0.6);
    CHECK(x1 < 1.0);
    CHECK(y0 > 0.0);
    CHECK(y1 < 1.0);
    // one fine cell layer around the image perimeter
    CHECK(std::abs(p.image.area() - 0.04) <= 0.8 * g.cell_side());

    const auto inside = disk_mask(GridSpec::covering({0.7, 0.45, 0.8, 0.55}, 7), {0.75, 0.5}, 0.03);
    const auto id = place_compact(inside, 0.6, 1.0);
    CHECK(id.scale == 1.0);
    CHECK(id.offset == cplx(0.0));
    CHECK(id.image == inside);
    // straddles Im 0, so it must move
    const auto moved_disk = place_compact(small_disk(), 0.6, 1.0);
    CHECK(moved_disk.scale != 1.0);
    CHECK(moved_disk.map({0.75, 0.0}) == cplx(0.8, 0.5));
    CHECK_THROWS_AS(place_compact(unit, 0.6, 0.0), Error);
    CHECK_THROWS_AS(place_compact(RegionMask(GridSpec::covering({0, 0, 1, 1}, 2)), 0.6, 1.0), Error);

    const auto f = SampledFunction::sample(unit, [](cplx z) { return z * z; });
    const auto moved = transport(f, p);
    moved.domain.for_each_cell([&](int r, int c, std::int64_t k) {
        const cplx z = p.inverse(moved.domain.grid().cell_center(r, c));
        const CellIndex src = unit.grid().cell_of(z);
        CHECK(moved.values[static_cast<std::size_t>(k)] == *f.at(src.row, src.col));
    });
}
