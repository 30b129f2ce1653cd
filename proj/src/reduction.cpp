#include "mlab/reduction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

namespace mlab {

// ----------------------------------------------------------- SampledFunction

SampledFunction SampledFunction::sample(const RegionMask& domain, const std::function<cplx(cplx)>& f) {
    SampledFunction out{domain, {}};
    out.values.reserve(static_cast<std::size_t>(domain.cell_count()));
    domain.for_each_cell([&](int r, int c, std::int64_t) {
        out.values.push_back(f(domain.grid().cell_center(r, c)));
    });
    out.validate();
    return out;
}

void SampledFunction::validate() const {
    if (static_cast<std::int64_t>(values.size()) != domain.cell_count())
        fail(ErrorKind::validation, "sample count " + std::to_string(values.size()) +
                                        " does not match " + std::to_string(domain.cell_count()) +
                                        " domain cells");
    for (std::size_t k = 0; k < values.size(); ++k)
        if (!std::isfinite(values[k].real()) || !std::isfinite(values[k].imag()))
            fail(ErrorKind::validation, "sample " + std::to_string(k) + " is not finite");
}

std::optional<cplx> SampledFunction::at(int row, int col) const {
    auto ord = domain.ordinal(row, col);
    if (!ord) return std::nullopt;
    return values[static_cast<std::size_t>(*ord)];
}

SampledFunction SampledFunction::restricted(const RegionMask& sub) const {
    if (!sub.subset_of(domain)) fail(ErrorKind::precondition, "restriction mask leaves the domain");
    SampledFunction out{sub, {}};
    out.values.reserve(static_cast<std::size_t>(sub.cell_count()));
    sub.for_each_cell([&](int r, int c, std::int64_t) {
        out.values.push_back(values[static_cast<std::size_t>(*domain.ordinal(r, c))]);
    });
    return out;
}

// ---------------------------------------------------- PiecewiseConstantTarget

void PiecewiseConstantTarget::validate() const {
    RegionMask seen(support.grid());
    std::int64_t total = 0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const Piece& p = pieces[k];
        if (!(p.cells.grid() == support.grid()))
            fail(ErrorKind::validation, "piece " + std::to_string(k) + " lives on another grid");
        if (!std::isfinite(p.value.real()) || !std::isfinite(p.value.imag()))
            fail(ErrorKind::validation, "piece " + std::to_string(k) + " has a non-finite value");
        if (zero_free && p.value == cplx(0.0))
            fail(ErrorKind::validation, "zero-free target has a zero value on piece " + std::to_string(k));
        total += p.cells.cell_count();
        seen = seen.united(p.cells);
        if (seen.cell_count() != total)
            fail(ErrorKind::validation, "piece " + std::to_string(k) + " overlaps an earlier piece");
    }
    if (!(seen == support)) fail(ErrorKind::validation, "pieces do not cover the support exactly");
}

SampledFunction PiecewiseConstantTarget::to_sampled() const {
    SampledFunction out{support, std::vector<cplx>(static_cast<std::size_t>(support.cell_count()))};
    for (const Piece& p : pieces) {
        p.cells.for_each_cell([&](int r, int c, std::int64_t) {
            auto ord = support.ordinal(r, c);
            if (!ord) fail(ErrorKind::validation, "piece cell outside the support");
            out.values[static_cast<std::size_t>(*ord)] = p.value;
        });
    }
    return out;
}

bool PiecewiseConstantTarget::has_zero_value() const noexcept {
    return std::any_of(pieces.begin(), pieces.end(), [](const Piece& p) { return p.value == cplx(0.0); });
}

// ------------------------------------------------------------------ Luzin

namespace {

constexpr int kRowStep[4] = {-1, 0, 0, 1};
constexpr int kColStep[4] = {0, -1, 1, 0};

// Ordinals of the four neighbors of every cell, -1 where unmarked.
std::vector<std::array<std::int64_t, 4>> neighbor_table(const RegionMask& m) {
    std::vector<std::array<std::int64_t, 4>> nb(static_cast<std::size_t>(m.cell_count()));
    m.for_each_cell([&](int r, int c, std::int64_t k) {
        for (int d = 0; d < 4; ++d) nb[k][d] = m.ordinal(r + kRowStep[d], c + kColStep[d]).value_or(-1);
    });
    return nb;
}

}  // namespace

std::vector<double> local_oscillation(const SampledFunction& f) {
    auto nb = neighbor_table(f.domain);
    std::vector<double> osc(f.values.size(), 0.0);
    for (std::size_t k = 0; k < osc.size(); ++k)
        for (std::int64_t q : nb[k])
            if (q >= 0) osc[k] = std::max(osc[k], std::abs(f.values[k] - f.values[q]));
    return osc;
}

LuzinSelection luzin_select(const SampledFunction& f, double oscillation_bound, double loss_budget) {
    f.validate();
    if (!(oscillation_bound > 0.0) || !(loss_budget >= 0.0))
        fail(ErrorKind::precondition, "oscillation bound must be positive and budget non-negative");
    const RegionMask& dom = f.domain;
    const auto nb = neighbor_table(dom);
    const std::size_t count = f.values.size();
    std::vector<char> alive(count, 1);
    auto osc_of = [&](std::size_t k) {
        double o = 0.0;
        for (std::int64_t q : nb[k])
            if (q >= 0 && alive[q]) o = std::max(o, std::abs(f.values[k] - f.values[q]));
        return o;
    };

    using Entry = std::pair<double, std::int64_t>;  // (oscillation, -ordinal)
    std::priority_queue<Entry> heap;
    std::vector<double> current(count);
    for (std::size_t k = 0; k < count; ++k) {
        current[k] = osc_of(k);
        heap.push({current[k], -static_cast<std::int64_t>(k)});
    }

    const double cell = dom.grid().cell_area();
    std::int64_t removed = 0;
    LuzinSelection sel{dom, true, 0.0, 0.0};
    while (!heap.empty()) {
        auto [o, neg] = heap.top();
        const auto k = static_cast<std::size_t>(-neg);
        if (!alive[k] || o != current[k]) {
            heap.pop();
            continue;
        }
        if (o <= oscillation_bound) break;
        if (static_cast<double>(removed + 1) * cell > loss_budget) {
            sel.achieved = false;
            break;
        }
        heap.pop();
        alive[k] = 0;
        ++removed;
        for (std::int64_t q : nb[k]) {
            if (q < 0 || !alive[q]) continue;
            const double updated = osc_of(static_cast<std::size_t>(q));
            if (updated != current[q]) {
                current[q] = updated;
                heap.push({updated, -q});
            }
        }
    }

    std::vector<std::vector<Span>> rows(dom.grid().height());
    dom.for_each_cell([&](int r, int c, std::int64_t k) {
        if (!alive[k]) return;
        sel.max_oscillation = std::max(sel.max_oscillation, current[k]);
        if (!rows[r].empty() && rows[r].back().end == c)
            ++rows[r].back().end;
        else
            rows[r].push_back({c, c + 1});
    });
    sel.retained = RegionMask::from_rows(dom.grid(), std::move(rows));
    sel.area_removed = static_cast<double>(removed) * cell;
    return sel;
}

// --------------------------------------------------------------- reduction

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

struct CellValue {
    CellIndex cell;
    cplx value;
};

double value_diameter(const std::vector<CellValue>& cells) {
    double d = 0.0;
    for (std::size_t a = 0; a < cells.size(); ++a)
        for (std::size_t b = a + 1; b < cells.size(); ++b)
            d = std::max(d, std::abs(cells[a].value - cells[b].value));
    return d;
}

double bbox_diagonal(const std::vector<CellValue>& cells) {
    double x0 = cells.front().value.real(), x1 = x0;
    double y0 = cells.front().value.imag(), y1 = y0;
    for (const auto& cv : cells) {
        x0 = std::min(x0, cv.value.real());
        x1 = std::max(x1, cv.value.real());
        y0 = std::min(y0, cv.value.imag());
        y1 = std::max(y1, cv.value.imag());
    }
    return std::hypot(x1 - x0, y1 - y0);
}

class SquareTree {
public:
    SquareTree(const SampledFunction& f, const RegionMask& retained, int n)
        : f_(f), kept_(retained), grid_(retained.grid()), tol_(1.0 / n), finest_(grid_.level() - 2),
          i_origin_(std::llround(grid_.origin().real() / grid_.cell_side())),
          j_origin_(std::llround(grid_.origin().imag() / grid_.cell_side())) {}

    std::vector<std::vector<CellValue>> run() {
        const auto bb = kept_.bounding_cells();
        if (!bb) return {};
        const std::int64_t span = std::int64_t{1} << grid_.level();  // cells per level-0 square
        const std::int64_t i0 = floor_div(i_origin_ + bb->col0, span);
        const std::int64_t i1 = floor_div(i_origin_ + bb->col_end() - 1, span);
        const std::int64_t j0 = floor_div(j_origin_ + bb->row0, span);
        const std::int64_t j1 = floor_div(j_origin_ + bb->row_end() - 1, span);
        for (std::int64_t j = j0; j <= j1; ++j)
            for (std::int64_t i = i0; i <= i1; ++i) visit({i, j, 0});
        return std::move(pieces_);
    }

    int deepest() const noexcept { return deepest_; }

private:
    void visit(const DyadicSquare& q) {
        const std::int64_t side = std::int64_t{1} << (grid_.level() - q.level);
        // interior of the square in grid cell coordinates (outer layer removed)
        const std::int64_t c0 = q.i * side - i_origin_ + 1;
        const std::int64_t c1 = (q.i + 1) * side - i_origin_ - 1;
        const std::int64_t r0 = q.j * side - j_origin_ + 1;
        const std::int64_t r1 = (q.j + 1) * side - j_origin_ - 1;
        std::vector<CellValue> cells;
        for (std::int64_t r = std::max<std::int64_t>(r0, 0); r < std::min<std::int64_t>(r1, grid_.height()); ++r) {
            for (const Span& s : kept_.row_runs(static_cast<int>(r))) {
                const std::int64_t a = std::max<std::int64_t>(s.begin, c0);
                const std::int64_t b = std::min<std::int64_t>(s.end, c1);
                for (std::int64_t c = a; c < b; ++c) {
                    const CellIndex ci{static_cast<int>(r), static_cast<int>(c)};
                    cells.push_back({ci, *f_.at(ci.row, ci.col)});
                }
            }
        }
        if (cells.empty()) return;
        deepest_ = std::max(deepest_, q.level);

        const bool can_refine = q.level < finest_;
        bool small_spread = bbox_diagonal(cells) < tol_;
        if (!small_spread && (!can_refine || cells.size() <= 256)) small_spread = value_diameter(cells) < tol_;
        // finest interiors are 2x2 and cannot enclose a hole
        if (small_spread && (!can_refine || !encloses_hole(cells, c0 - 1, r0 - 1, side))) {
            pieces_.push_back(std::move(cells));
            return;
        }
        if (can_refine) {
            for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di) visit({2 * q.i + di, 2 * q.j + dj, q.level + 1});
            return;
        }
        pieces_.push_back(window(cells));
    }

    // Whether the cells, seen inside their square with the rim as outside,
    // enclose a complement component.
    static bool encloses_hole(const std::vector<CellValue>& cells, std::int64_t col0, std::int64_t row0,
                              std::int64_t side) {
        const GridSpec local({0.0, 0.0}, 0, static_cast<int>(side), static_cast<int>(side));
        std::vector<CellIndex> shifted;
        shifted.reserve(cells.size());
        for (const auto& cv : cells)
            shifted.push_back({static_cast<int>(cv.cell.row - row0), static_cast<int>(cv.cell.col - col0)});
        const RegionMask m = RegionMask::from_cells(local, shifted);
        return !is_complement_connected(m, CellRect{0, 0, static_cast<int>(side), static_cast<int>(side)});
    }

    // Keeps the cells within tol/2 of the value that captures the most cells.
    std::vector<CellValue> window(const std::vector<CellValue>& cells) const {
        const double radius = tol_ / 2.0;
        std::size_t best = 0;
        std::size_t best_count = 0;
        for (std::size_t a = 0; a < cells.size(); ++a) {
            std::size_t count = 0;
            for (const auto& cv : cells) count += std::abs(cv.value - cells[a].value) < radius ? 1 : 0;
            if (count > best_count) {
                best_count = count;
                best = a;
            }
        }
        std::vector<CellValue> kept;
        for (const auto& cv : cells)
            if (std::abs(cv.value - cells[best].value) < radius) kept.push_back(cv);
        return kept;
    }

    const SampledFunction& f_;
    const RegionMask& kept_;
    const GridSpec& grid_;
    double tol_;
    int finest_;
    std::int64_t i_origin_;
    std::int64_t j_origin_;
    int deepest_ = 0;
    std::vector<std::vector<CellValue>> pieces_;
};

Carving carve_or_resolution(const RegionMask& mask, double total_budget, int level) {
    const int holes = hole_count(mask);
    if (holes == 0) return Carving{mask, {}, 0.0};
    try {
        return carve_connectors(mask, total_budget / holes);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::infeasible_budget) throw;
        fail(ErrorKind::resolution, std::string("connecting ") + std::to_string(holes) +
                                        " holes needs a finer grid; retry at level " +
                                        std::to_string(level + 1) + " (" + e.what() + ")");
    }
}

}  // namespace

Reduction reduce_to_piecewise(const SampledFunction& f, int n) {
    f.validate();
    if (n < 1) fail(ErrorKind::precondition, "n must be a positive integer");
    if (f.domain.empty()) fail(ErrorKind::precondition, "domain has zero area");
    const GridSpec& grid = f.domain.grid();
    if (grid.level() < 2)
        fail(ErrorKind::resolution, "square interiors need cell level at least 2; retry at level 2");
    if (!grid.lattice_aligned())
        fail(ErrorKind::precondition, "grid origin must lie on the dyadic lattice of its level");

    const double inv_n = 1.0 / n;
    ReductionReport rep;
    rep.n = n;
    rep.cell_side = grid.cell_side();
    rep.slack = cell_layer_slack(grid);

    LuzinSelection sel = luzin_select(f, inv_n / 2.0, inv_n);
    rep.luzin_achieved = sel.achieved;
    rep.luzin_loss = sel.area_removed;

    // Corridors are the cheap way to open holes; where the budget does not
    // allow them, squares holding a hole are refined until their rims cut it.
    Carving carved{sel.retained, {}, 0.0};
    try {
        carved = carve_or_resolution(sel.retained, inv_n, grid.level());
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::resolution) throw;
    }
    rep.carve_loss = carved.removed_area;

    SquareTree tree(f, carved.mask, n);
    auto groups = tree.run();
    rep.finest_square_level = tree.deepest();
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front().cell < b.front().cell; });

    PiecewiseConstantTarget target{RegionMask(grid), {}, true};
    std::vector<CellIndex> all_cells;
    for (const auto& g : groups) {
        std::vector<CellIndex> cells;
        cells.reserve(g.size());
        for (const auto& cv : g) cells.push_back(cv.cell);
        all_cells.insert(all_cells.end(), cells.begin(), cells.end());
        const cplx anchor = g.front().value;
        const cplx value = anchor == cplx(0.0) ? cplx(inv_n / 2.0) : anchor;
        target.pieces.push_back({RegionMask::from_cells(grid, cells), value});
    }
    target.support = RegionMask::from_cells(grid, all_cells);
    rep.shrink_loss = carved.mask.area() - target.support.area();

    // Rims form a connected network, so this is a safeguard rather than a step.
    if (!is_complement_connected(target.support)) {
        const double left = 3.0 * inv_n - (f.domain.area() - target.support.area());
        Carving extra = carve_or_resolution(target.support, std::max(left, 0.0), grid.level());
        rep.carve_loss += extra.removed_area;
        target.support = extra.mask;
        std::vector<Piece> trimmed;
        for (Piece& p : target.pieces) {
            RegionMask cells = p.cells.intersected(extra.mask);
            if (!cells.empty()) trimmed.push_back({std::move(cells), p.value});
        }
        target.pieces = std::move(trimmed);
    }

    for (const Piece& p : target.pieces) {
        p.cells.for_each_cell([&](int r, int c, std::int64_t) {
            rep.max_error_on_support = std::max(rep.max_error_on_support, std::abs(*f.at(r, c) - p.value));
        });
    }
    rep.piece_count = static_cast<int>(target.pieces.size());
    rep.area_lost = f.domain.area() - target.support.area();
    rep.complement_connected = is_complement_connected(target.support);
    if (rep.area_lost >= 3.0 * inv_n + rep.slack)
        fail(ErrorKind::resolution, "area lost " + format_double(rep.area_lost) + " exceeds 3/n + slack at level " +
                                        std::to_string(grid.level()) + "; retry at level " +
                                        std::to_string(grid.level() + 1));
    return {std::move(target), rep};
}

// -------------------------------------------------------------- zero split

ZeroSplit zero_split(const SampledFunction& g, int j) {
    g.validate();
    if (j < 1) fail(ErrorKind::precondition, "j must be a positive integer");
    const double lo = 1.0 / j;
    const double hi = 2.0 / j;
    std::vector<CellIndex> small, large;
    g.domain.for_each_cell([&](int r, int c, std::int64_t k) {
        const double m = std::abs(g.values[k]);
        if (m <= lo) small.push_back({r, c});
        if (m >= hi) large.push_back({r, c});
    });
    return {RegionMask::from_cells(g.domain.grid(), small), RegionMask::from_cells(g.domain.grid(), large)};
}

// -------------------------------------------------------------- text I/O

void write_piecewise(std::ostream& os, const PiecewiseConstantTarget& target) {
    os << "piecewise " << target.pieces.size() << " zero_free " << (target.zero_free ? 1 : 0) << '\n';
    write_mask(os, target.support);
    for (const Piece& p : target.pieces) {
        std::size_t runs = 0;
        for (int r = 0; r < p.cells.grid().height(); ++r) runs += p.cells.row_runs(r).size();
        os << "piece " << format_double(p.value.real()) << ' ' << format_double(p.value.imag()) << ' ' << runs
           << '\n';
        for (int r = 0; r < p.cells.grid().height(); ++r)
            for (const Span& s : p.cells.row_runs(r)) os << r << ' ' << s.begin << ' ' << s.end << '\n';
    }
}

namespace {

template <class T>
T parse_token(std::istringstream& in, const char* what) {
    T v{};
    if (!(in >> v)) fail(ErrorKind::parse, std::string("expected ") + what);
    return v;
}

}  // namespace

PiecewiseConstantTarget read_piecewise(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) fail(ErrorKind::parse, "missing piecewise header");
    std::istringstream hs(line);
    if (parse_token<std::string>(hs, "'piecewise'") != "piecewise")
        fail(ErrorKind::parse, "header must start with 'piecewise'");
    const auto count = parse_token<long long>(hs, "piece count");
    if (parse_token<std::string>(hs, "'zero_free'") != "zero_free")
        fail(ErrorKind::parse, "header must name zero_free");
    const int flag = parse_token<int>(hs, "zero_free flag");
    if (count < 0 || (flag != 0 && flag != 1)) fail(ErrorKind::parse, "bad piecewise header");

    PiecewiseConstantTarget t{read_mask(is), {}, flag == 1};
    const GridSpec& g = t.support.grid();
    for (long long k = 0; k < count; ++k) {
        if (!std::getline(is, line)) fail(ErrorKind::parse, "missing piece " + std::to_string(k));
        std::istringstream ps(line);
        if (parse_token<std::string>(ps, "'piece'") != "piece") fail(ErrorKind::parse, "expected 'piece'");
        const double re = parse_double(parse_token<std::string>(ps, "real part"));
        const double im = parse_double(parse_token<std::string>(ps, "imaginary part"));
        const auto runs = parse_token<long long>(ps, "run count");
        std::vector<std::vector<Span>> rows(g.height());
        for (long long q = 0; q < runs; ++q) {
            if (!std::getline(is, line)) fail(ErrorKind::parse, "missing run line");
            std::istringstream rs(line);
            const int r = parse_token<int>(rs, "row");
            const int b = parse_token<int>(rs, "run begin");
            const int e = parse_token<int>(rs, "run end");
            if (r < 0 || r >= g.height() || b < 0 || e > g.width() || b >= e)
                fail(ErrorKind::parse, "run out of range");
            rows[r].push_back({b, e});
        }
        t.pieces.push_back({RegionMask::from_rows(g, std::move(rows)), {re, im}});
    }
    t.validate();
    return t;
}

}  // namespace mlab
