#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <queue>
#include <random>
#include <sstream>

#include "mlab/complexgrid.hpp"

using namespace mlab;

namespace {

// Flood fill over a dense boolean grid with a one-cell padding ring.
int brute_complement_components(const RegionMask& m) {
    const int h = m.grid().height() + 2;
    const int w = m.grid().width() + 2;
    std::vector<int> lab(static_cast<std::size_t>(h * w), -1);
    auto blocked = [&](int r, int c) { return m.contains(r - 1, c - 1); };
    int count = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (blocked(r, c) || lab[r * w + c] >= 0) continue;
            std::queue<std::pair<int, int>> q;
            q.push({r, c});
            lab[r * w + c] = count;
            while (!q.empty()) {
                auto [a, b] = q.front();
                q.pop();
                const int da[4] = {-1, 1, 0, 0};
                const int db[4] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int x = a + da[k], y = b + db[k];
                    if (x < 0 || y < 0 || x >= h || y >= w) continue;
                    if (blocked(x, y) || lab[x * w + y] >= 0) continue;
                    lab[x * w + y] = count;
                    q.push({x, y});
                }
            }
            ++count;
        }
    return count;
}

GridSpec unit_grid(int level) {
    return GridSpec::covering({0, 0, 1, 1}, level);
}

}  // namespace

TEST_CASE("dyadic partition tiles the snapped box") {
    CHECK(dyadic_partition({0, 0, 1, 1}, 1).squares.size() == 4);
    CHECK(dyadic_partition({0, 0, 1, 1}, 0).squares.size() == 1);
    auto p = dyadic_partition({0.1, 0.1, 0.9, 0.9}, 2);
    CHECK(p.squares.size() == 16);
    CHECK(p.grid.bounds() == Rect{0, 0, 1, 1});
    CHECK_THROWS_AS(dyadic_partition({0, 0, 1, 1}, 20, 1000), Error);
    CHECK_THROWS_AS(dyadic_partition({0, 0, 0, 1}, 2), Error);
}

TEST_CASE("level k+1 squares lie in exactly one level k square") {
    auto coarse = dyadic_partition({-1, -1, 1, 1}, 2);
    auto fine = dyadic_partition({-1, -1, 1, 1}, 3);
    for (const auto& q : fine.squares) {
        int hits = 0;
        for (const auto& c : coarse.squares) hits += c.contains(q) ? 1 : 0;
        CHECK(hits == 1);
    }
}

TEST_CASE("area counts cells") {
    for (int k : {0, 3, 6}) CHECK(RegionMask::full(unit_grid(k)).area() == 1.0);
    CHECK(RegionMask(unit_grid(4)).area() == 0.0);
    auto g = unit_grid(3);
    auto half = RegionMask::from_predicate(g, [](cplx z) { return z.real() < 0.5; });
    CHECK(half.area() == 0.5);
    auto other = RegionMask::full(g).minus(half);
    CHECK(half.united(other).area() == half.area() + other.area());
    CHECK(half.subset_of(RegionMask::full(g)));
}

TEST_CASE("complement connectivity examples") {
    auto g = GridSpec::covering({-1, -1, 1, 1}, 5);
    CHECK(is_complement_connected(disk_mask(g, 0, 0.5)));
    auto ring = annulus_mask(g, 0, 0.3, 0.6);
    CHECK_FALSE(is_complement_connected(ring));
    CHECK(hole_count(ring) == 1);
    auto two = rect_mask(g, {-0.8, -0.8, -0.3, -0.3}).united(rect_mask(g, {0.3, 0.3, 0.8, 0.8}));
    CHECK(is_complement_connected(two));
    CHECK(brute_complement_components(two) == 1);
    CHECK(components(two).size() == 2);
}

TEST_CASE("mask touching the frame is a precondition error") {
    auto g = unit_grid(3);
    auto m = RegionMask::full(g);
    CHECK_THROWS_AS(is_complement_connected(m, CellRect{0, 0, 8, 8}), Error);
    CHECK(is_complement_connected(m));
}

TEST_CASE("exhaustive agreement with flood fill on small masks") {
    // all 3x3 masks, then random masks up to 8x8
    auto g3 = GridSpec({0, 0}, 0, 3, 3);
    for (int bits = 0; bits < 512; ++bits) {
        std::vector<CellIndex> cells;
        for (int k = 0; k < 9; ++k)
            if (bits & (1 << k)) cells.push_back({k / 3, k % 3});
        auto m = RegionMask::from_cells(g3, cells);
        const int brute = brute_complement_components(m);
        CHECK(label_complement(m).component_count() == brute);
    }
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 3000; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 8);
        const int h = 1 + static_cast<int>(rng() % 8);
        const double density = 0.2 + 0.6 * static_cast<double>(rng() % 1000) / 1000.0;
        GridSpec g({0, 0}, 0, w, h);
        std::vector<CellIndex> cells;
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                if (static_cast<double>(rng() % 1000) / 1000.0 < density) cells.push_back({r, c});
        auto m = RegionMask::from_cells(g, cells);
        REQUIRE(label_complement(m).component_count() == brute_complement_components(m));
        CHECK(m.cell_count() == static_cast<std::int64_t>(cells.size()));
    }
}

TEST_CASE("carving an annulus") {
    auto g = GridSpec::covering({-1, -1, 1, 1}, 5);
    auto ring = annulus_mask(g, 0, 0.3, 0.5);
    const double budget = 8 * g.cell_area();
    auto out = carve_connectors(ring, budget);
    CHECK(out.mask.subset_of(ring));
    CHECK(is_complement_connected(out.mask));
    CHECK(brute_complement_components(out.mask) == 1);
    REQUIRE(out.corridors.size() == 1);
    CHECK(out.removed_area < budget);
    CHECK(out.removed_area == doctest::Approx(ring.area() - out.mask.area()));

    // thick ring: a budget of 4 cells cannot cross it
    CHECK_THROWS_AS(carve_connectors(ring, 4 * g.cell_area()), Error);
    CHECK_THROWS_AS(carve_connectors(ring, 0.5 * g.cell_area()), Error);
}

TEST_CASE("carving a thin ring with a four-cell budget") {
    GridSpec g({0, 0}, 0, 7, 7);
    auto ring = RegionMask::from_predicate(g, [](cplx z) {
        const double x = z.real(), y = z.imag();
        const bool outer = x > 1 && x < 6 && y > 1 && y < 6;
        const bool inner = x > 2 && x < 5 && y > 2 && y < 5;
        return outer && !inner;
    });
    REQUIRE(hole_count(ring) == 1);
    auto out = carve_connectors(ring, 4.0);
    CHECK(out.removed_area == 1.0);
    CHECK(is_complement_connected(out.mask));
}

TEST_CASE("carving nested annuli and the no-hole case") {
    auto g = GridSpec::covering({-1, -1, 1, 1}, 6);
    auto nested = annulus_mask(g, 0, 0.2, 0.3).united(annulus_mask(g, 0, 0.5, 0.6));
    REQUIRE(hole_count(nested) == 2);
    auto out = carve_connectors(nested, 10 * g.cell_area());
    CHECK(out.corridors.size() == 2);
    CHECK(is_complement_connected(out.mask));
    CHECK(brute_complement_components(out.mask) == 1);
    CHECK(out.removed_area < 2 * 10 * g.cell_area());

    auto disk = disk_mask(g, 0, 0.5);
    auto same = carve_connectors(disk, 2 * g.cell_area());
    CHECK(same.mask == disk);
    CHECK(same.corridors.empty());
}

TEST_CASE("mask text round trip is exact") {
    auto g = GridSpec({-0.3, 0.1}, 4, 23, 17);
    auto m = annulus_mask(g, {0.4, 0.6}, 0.1, 0.4);
    std::stringstream ss;
    write_mask(ss, m);
    auto back = read_mask(ss);
    CHECK(back == m);
    std::stringstream bad("grid 0 0 0.3 2 2\n2\n2\n");
    CHECK_THROWS_AS(read_mask(bad), Error);
    std::stringstream short_row("grid 0 0 0.5 2 2\n1\n2\n");
    CHECK_THROWS_AS(read_mask(short_row), Error);
}

TEST_CASE("ordinals and disk counts") {
    auto g = unit_grid(4);
    auto m = disk_mask(g, {0.5, 0.5}, 0.4);
    std::int64_t k = 0;
    m.for_each_cell([&](int r, int c, std::int64_t ord) {
        CHECK(ord == k++);
        CHECK(m.ordinal(r, c) == ord);
        CHECK(m.cell_at(ord) == CellIndex{r, c});
    });
    std::int64_t brute = 0;
    m.for_each_cell([&](int r, int c, std::int64_t) {
        if (std::abs(g.cell_center(r, c) - cplx(0.3, 0.4)) <= 0.2) ++brute;
    });
    CHECK(m.disk_count({0.3, 0.4}, 0.2) == brute);
}

TEST_CASE("refine and embed preserve area") {
    auto g = unit_grid(3);
    auto m = disk_mask(g, {0.5, 0.5}, 0.3);
    auto f = m.refined(2);
    CHECK(f.area() == m.area());
    auto big = GridSpec({-0.5, -0.5}, 3, 16, 16);
    auto e = m.embedded(big);
    CHECK(e.area() == m.area());
    CHECK(e.contains(4, 8) == m.contains(0, 4));
}
