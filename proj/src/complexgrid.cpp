#include "mlab/complexgrid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace mlab {

namespace {

constexpr int kMaxLevel = 40;
constexpr std::int64_t kMaxDimension = std::int64_t{1} << 30;

// Sorts, clips to [0, width) and merges touching runs.
void normalize_row(std::vector<Span>& row, int width) {
    for (Span& s : row) {
        s.begin = std::max(s.begin, 0);
        s.end = std::min(s.end, width);
    }
    std::erase_if(row, [](const Span& s) { return s.end <= s.begin; });
    std::sort(row.begin(), row.end(),
              [](const Span& a, const Span& b) { return a.begin < b.begin; });
    std::vector<Span> merged;
    merged.reserve(row.size());
    for (const Span& s : row) {
        if (!merged.empty() && s.begin <= merged.back().end)
            merged.back().end = std::max(merged.back().end, s.end);
        else
            merged.push_back(s);
    }
    row = std::move(merged);
}

// Applies a boolean combination to two sorted run lists of one row.
template <class Op>
std::vector<Span> combine_rows(std::span<const Span> a, std::span<const Span> b, Op op) {
    std::vector<int> cuts;
    cuts.reserve(2 * (a.size() + b.size()));
    for (const Span& s : a) { cuts.push_back(s.begin); cuts.push_back(s.end); }
    for (const Span& s : b) { cuts.push_back(s.begin); cuts.push_back(s.end); }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto inside = [](std::span<const Span> runs, int x) {
        auto it = std::upper_bound(runs.begin(), runs.end(), x,
                                   [](int v, const Span& s) { return v < s.begin; });
        return it != runs.begin() && x < std::prev(it)->end;
    };

    std::vector<Span> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const int lo = cuts[k];
        if (op(inside(a, lo), inside(b, lo))) {
            if (!out.empty() && out.back().end == lo)
                out.back().end = cuts[k + 1];
            else
                out.push_back({lo, cuts[k + 1]});
        }
    }
    return out;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// Unites overlapping runs of consecutive rows (4-connectivity).
// `rows[r]` holds (first index, count) into a flat run array.
template <class RunAt>
void link_rows(UnionFind& uf, const std::vector<std::pair<int, int>>& rows, RunAt run_at) {
    for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
        auto [a0, an] = rows[r];
        auto [b0, bn] = rows[r + 1];
        int i = 0;
        int j = 0;
        while (i < an && j < bn) {
            const Span& sa = run_at(a0 + i);
            const Span& sb = run_at(b0 + j);
            if (sa.begin < sb.end && sb.begin < sa.end) uf.unite(a0 + i, b0 + j);
            if (sa.end < sb.end)
                ++i;
            else
                ++j;
        }
    }
}

std::pair<int, int> column_range(double a, double b, double x0, double side) {
    const int lo = static_cast<int>(std::ceil((a - x0) / side - 0.5));
    const int hi = static_cast<int>(std::floor((b - x0) / side - 0.5));
    return {lo, hi + 1};
}

}  // namespace

// ---------------------------------------------------------------- GridSpec

GridSpec::GridSpec(cplx origin, int level, int width, int height)
    : origin_(origin), level_(level), side_(std::ldexp(1.0, -level)), width_(width), height_(height) {
    if (level < 0 || level > kMaxLevel)
        fail(ErrorKind::precondition, "grid level must lie in [0, 40], got " + std::to_string(level));
    if (width < 1 || height < 1)
        fail(ErrorKind::precondition, "grid must have at least one cell");
    if (!std::isfinite(origin.real()) || !std::isfinite(origin.imag()))
        fail(ErrorKind::precondition, "grid origin must be finite");
}

GridSpec GridSpec::covering(const Rect& bbox, int level) {
    if (bbox.degenerate()) fail(ErrorKind::precondition, "bounding box is degenerate");
    if (level < 0 || level > kMaxLevel)
        fail(ErrorKind::precondition, "grid level must lie in [0, 40]");
    const double s = std::ldexp(1.0, -level);
    const double i0 = std::floor(bbox.x0 / s);
    const double i1 = std::ceil(bbox.x1 / s);
    const double j0 = std::floor(bbox.y0 / s);
    const double j1 = std::ceil(bbox.y1 / s);
    if (i1 - i0 > static_cast<double>(kMaxDimension) || j1 - j0 > static_cast<double>(kMaxDimension))
        fail(ErrorKind::resource_limit, "grid dimensions exceed 2^30 cells per side");
    return GridSpec({i0 * s, j0 * s}, level, static_cast<int>(i1 - i0), static_cast<int>(j1 - j0));
}

CellIndex GridSpec::cell_of(cplx z) const noexcept {
    return {static_cast<int>(std::floor((z.imag() - origin_.imag()) / side_)),
            static_cast<int>(std::floor((z.real() - origin_.real()) / side_))};
}

Rect GridSpec::bounds() const noexcept {
    return {origin_.real(), origin_.imag(), origin_.real() + width_ * side_,
            origin_.imag() + height_ * side_};
}

bool GridSpec::lattice_aligned() const noexcept {
    const double a = origin_.real() / side_;
    const double b = origin_.imag() / side_;
    return std::floor(a) == a && std::floor(b) == b;
}

// -------------------------------------------------------------- RegionMask

RegionMask::RegionMask(GridSpec grid) : grid_(grid), row_start_(grid.height() + 1, 0) {}

void RegionMask::index() {
    run_prefix_.resize(runs_.size());
    total_ = 0;
    for (std::size_t k = 0; k < runs_.size(); ++k) {
        run_prefix_[k] = total_;
        total_ += runs_[k].length();
    }
}

RegionMask RegionMask::from_rows(GridSpec grid, std::vector<std::vector<Span>> rows) {
    if (static_cast<int>(rows.size()) != grid.height())
        fail(ErrorKind::precondition, "row count does not match grid height");
    RegionMask m(grid);
    for (int r = 0; r < grid.height(); ++r) {
        normalize_row(rows[r], grid.width());
        m.row_start_[r] = static_cast<std::int32_t>(m.runs_.size());
        m.runs_.insert(m.runs_.end(), rows[r].begin(), rows[r].end());
    }
    m.row_start_[grid.height()] = static_cast<std::int32_t>(m.runs_.size());
    m.index();
    return m;
}

RegionMask RegionMask::from_cells(GridSpec grid, std::span<const CellIndex> cells) {
    std::vector<std::vector<Span>> rows(grid.height());
    for (const CellIndex& c : cells) {
        if (!grid.in_bounds(c.row, c.col))
            fail(ErrorKind::precondition, "cell outside grid bounds");
        rows[c.row].push_back({c.col, c.col + 1});
    }
    return from_rows(grid, std::move(rows));
}

RegionMask RegionMask::full(GridSpec grid) {
    std::vector<std::vector<Span>> rows(grid.height(), std::vector<Span>{{0, grid.width()}});
    return from_rows(grid, std::move(rows));
}

RegionMask RegionMask::from_predicate(GridSpec grid, const std::function<bool(cplx)>& inside) {
    std::vector<std::vector<Span>> rows(grid.height());
    for (int r = 0; r < grid.height(); ++r) {
        int start = -1;
        for (int c = 0; c <= grid.width(); ++c) {
            const bool in = c < grid.width() && inside(grid.cell_center(r, c));
            if (in && start < 0) start = c;
            if (!in && start >= 0) {
                rows[r].push_back({start, c});
                start = -1;
            }
        }
    }
    return from_rows(grid, std::move(rows));
}

RegionMask RegionMask::from_chords(
    GridSpec grid,
    const std::function<void(double, std::vector<std::pair<double, double>>&)>& chords) {
    std::vector<std::vector<Span>> rows(grid.height());
    std::vector<std::pair<double, double>> buf;
    const double x0 = grid.origin().real();
    for (int r = 0; r < grid.height(); ++r) {
        buf.clear();
        chords(grid.cell_center(r, 0).imag(), buf);
        for (auto [a, b] : buf) {
            if (!(b >= a)) continue;
            auto [lo, hi] = column_range(a, b, x0, grid.cell_side());
            lo = std::max(lo, 0);
            hi = std::min(hi, grid.width());
            if (lo < hi) rows[r].push_back({lo, hi});
        }
    }
    return from_rows(grid, std::move(rows));
}

std::span<const Span> RegionMask::row_runs(int row) const noexcept {
    if (row < 0 || row >= grid_.height()) return {};
    return {runs_.data() + row_start_[row],
            static_cast<std::size_t>(row_start_[row + 1] - row_start_[row])};
}

bool RegionMask::contains(int row, int col) const noexcept {
    return ordinal(row, col).has_value();
}

std::optional<std::int64_t> RegionMask::ordinal(int row, int col) const noexcept {
    if (!grid_.in_bounds(row, col)) return std::nullopt;
    auto runs = row_runs(row);
    auto it = std::upper_bound(runs.begin(), runs.end(), col,
                               [](int v, const Span& s) { return v < s.begin; });
    if (it == runs.begin()) return std::nullopt;
    --it;
    if (col >= it->end) return std::nullopt;
    const auto k = static_cast<std::size_t>(row_start_[row]) + (it - runs.begin());
    return run_prefix_[k] + (col - it->begin);
}

CellIndex RegionMask::cell_at(std::int64_t ordinal) const {
    if (ordinal < 0 || ordinal >= total_) fail(ErrorKind::precondition, "cell ordinal out of range");
    auto it = std::upper_bound(run_prefix_.begin(), run_prefix_.end(), ordinal);
    const auto k = static_cast<std::int32_t>(std::distance(run_prefix_.begin(), it) - 1);
    auto rit = std::upper_bound(row_start_.begin(), row_start_.end(), k);
    const int row = static_cast<int>(std::distance(row_start_.begin(), rit) - 1);
    return {row, runs_[k].begin + static_cast<int>(ordinal - run_prefix_[k])};
}

std::vector<CellIndex> RegionMask::cells() const {
    std::vector<CellIndex> out;
    out.reserve(static_cast<std::size_t>(total_));
    for_each_cell([&](int r, int c, std::int64_t) { out.push_back({r, c}); });
    return out;
}

std::optional<CellIndex> RegionMask::first_cell() const noexcept {
    for (int r = 0; r < grid_.height(); ++r) {
        auto runs = row_runs(r);
        if (!runs.empty()) return CellIndex{r, runs.front().begin};
    }
    return std::nullopt;
}

std::optional<CellRect> RegionMask::bounding_cells() const noexcept {
    if (total_ == 0) return std::nullopt;
    int r0 = grid_.height(), r1 = -1, c0 = grid_.width(), c1 = -1;
    for (int r = 0; r < grid_.height(); ++r) {
        auto runs = row_runs(r);
        if (runs.empty()) continue;
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, runs.front().begin);
        c1 = std::max(c1, runs.back().end - 1);
    }
    return CellRect{r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

namespace {
template <class Op>
RegionMask combine(const RegionMask& a, const RegionMask& b, Op op) {
    if (!(a.grid() == b.grid())) fail(ErrorKind::precondition, "masks live on different grids");
    std::vector<std::vector<Span>> rows(a.grid().height());
    for (int r = 0; r < a.grid().height(); ++r) rows[r] = combine_rows(a.row_runs(r), b.row_runs(r), op);
    return RegionMask::from_rows(a.grid(), std::move(rows));
}
}  // namespace

RegionMask RegionMask::united(const RegionMask& other) const {
    return combine(*this, other, [](bool x, bool y) { return x || y; });
}
RegionMask RegionMask::intersected(const RegionMask& other) const {
    return combine(*this, other, [](bool x, bool y) { return x && y; });
}
RegionMask RegionMask::minus(const RegionMask& other) const {
    return combine(*this, other, [](bool x, bool y) { return x && !y; });
}
bool RegionMask::subset_of(const RegionMask& other) const {
    return minus(other).empty();
}

RegionMask RegionMask::refined(int extra_levels) const {
    if (extra_levels < 0) fail(ErrorKind::precondition, "refinement must be non-negative");
    if (extra_levels == 0) return *this;
    const std::int64_t f = std::int64_t{1} << extra_levels;
    if (grid_.width() * f > kMaxDimension || grid_.height() * f > kMaxDimension)
        fail(ErrorKind::resource_limit, "refined grid exceeds 2^30 cells per side");
    GridSpec fine(grid_.origin(), grid_.level() + extra_levels, static_cast<int>(grid_.width() * f),
                  static_cast<int>(grid_.height() * f));
    std::vector<std::vector<Span>> rows(fine.height());
    for (int r = 0; r < grid_.height(); ++r) {
        std::vector<Span> scaled;
        for (const Span& s : row_runs(r))
            scaled.push_back({static_cast<int>(s.begin * f), static_cast<int>(s.end * f)});
        for (std::int64_t k = 0; k < f; ++k) rows[r * f + k] = scaled;
    }
    return from_rows(fine, std::move(rows));
}

RegionMask RegionMask::embedded(const GridSpec& target) const {
    if (target.level() != grid_.level())
        fail(ErrorKind::precondition, "embedding requires grids of equal level");
    const double s = grid_.cell_side();
    const double dc = (target.origin().real() - grid_.origin().real()) / s;
    const double dr = (target.origin().imag() - grid_.origin().imag()) / s;
    if (std::abs(dc - std::round(dc)) > 1e-9 || std::abs(dr - std::round(dr)) > 1e-9)
        fail(ErrorKind::precondition, "grids do not share a lattice");
    const int ic = static_cast<int>(std::lround(dc));
    const int ir = static_cast<int>(std::lround(dr));
    std::vector<std::vector<Span>> rows(target.height());
    for (int r = 0; r < target.height(); ++r) {
        for (const Span& sp : row_runs(r + ir)) rows[r].push_back({sp.begin - ic, sp.end - ic});
    }
    return from_rows(target, std::move(rows));
}

std::int64_t RegionMask::disk_count(cplx center, double radius) const {
    if (!(radius >= 0.0) || total_ == 0) return 0;
    const double s = grid_.cell_side();
    const cplx o = grid_.origin();
    const int r_lo = std::max(0, static_cast<int>(std::ceil((center.imag() - radius - o.imag()) / s - 0.5)));
    const int r_hi = std::min(grid_.height() - 1,
                              static_cast<int>(std::floor((center.imag() + radius - o.imag()) / s - 0.5)));
    std::int64_t count = 0;
    for (int r = r_lo; r <= r_hi; ++r) {
        const double dy = grid_.cell_center(r, 0).imag() - center.imag();
        const double h2 = radius * radius - dy * dy;
        if (h2 < 0.0) continue;
        const double half = std::sqrt(h2);
        auto [lo, hi] = column_range(center.real() - half, center.real() + half, o.real(), s);
        for (const Span& sp : row_runs(r)) {
            const int a = std::max(lo, sp.begin);
            const int b = std::min(hi, sp.end);
            if (b > a) count += b - a;
        }
    }
    return count;
}

double RegionMask::disk_area(cplx center, double radius) const {
    return static_cast<double>(disk_count(center, radius)) * grid_.cell_area();
}

RegionMask disk_mask(const GridSpec& grid, cplx center, double radius) {
    return RegionMask::from_chords(grid, [&](double y, auto& out) {
        const double dy = y - center.imag();
        const double h2 = radius * radius - dy * dy;
        if (h2 >= 0.0) {
            const double h = std::sqrt(h2);
            out.emplace_back(center.real() - h, center.real() + h);
        }
    });
}

RegionMask annulus_mask(const GridSpec& grid, cplx center, double r_inner, double r_outer) {
    // |z - c| in [r_inner, r_outer]
    return RegionMask::from_chords(grid, [&](double y, auto& out) {
        const double dy = y - center.imag();
        const double ho2 = r_outer * r_outer - dy * dy;
        if (ho2 < 0.0) return;
        const double ho = std::sqrt(ho2);
        const double hi2 = r_inner * r_inner - dy * dy;
        if (hi2 <= 0.0) {
            out.emplace_back(center.real() - ho, center.real() + ho);
            return;
        }
        const double hi = std::sqrt(hi2);
        // open inner disk is excluded; a tiny nudge keeps boundary centers in the ring
        const double eps = 1e-12 * std::max(1.0, r_outer);
        out.emplace_back(center.real() - ho, center.real() - hi + eps);
        out.emplace_back(center.real() + hi - eps, center.real() + ho);
    });
}

RegionMask rect_mask(const GridSpec& grid, const Rect& rect) {
    return RegionMask::from_chords(grid, [&](double y, auto& out) {
        if (y >= rect.y0 && y <= rect.y1) out.emplace_back(rect.x0, rect.x1);
    });
}

// ------------------------------------------------------------ dyadic squares

double DyadicSquare::side() const noexcept { return std::ldexp(1.0, -level); }

Rect DyadicSquare::rect() const noexcept {
    const double s = side();
    return {static_cast<double>(i) * s, static_cast<double>(j) * s, static_cast<double>(i + 1) * s,
            static_cast<double>(j + 1) * s};
}

namespace {
std::int64_t floor_div2(std::int64_t v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }
}  // namespace

DyadicSquare DyadicSquare::parent() const noexcept {
    return {floor_div2(i), floor_div2(j), level - 1};
}

bool DyadicSquare::contains(const DyadicSquare& finer) const noexcept {
    if (finer.level < level) return false;
    DyadicSquare q = finer;
    while (q.level > level) q = q.parent();
    return q.i == i && q.j == j;
}

DyadicPartition dyadic_partition(const Rect& bbox, int level, std::int64_t max_squares) {
    if (level < 0) fail(ErrorKind::precondition, "dyadic level must be non-negative");
    if (bbox.degenerate()) fail(ErrorKind::precondition, "bounding box is degenerate");
    const double s = std::ldexp(1.0, -level);
    const double nx = std::ceil(bbox.x1 / s) - std::floor(bbox.x0 / s);
    const double ny = std::ceil(bbox.y1 / s) - std::floor(bbox.y0 / s);
    if (nx * ny > static_cast<double>(max_squares))
        fail(ErrorKind::resource_limit, "dyadic partition at level " + std::to_string(level) +
                                            " needs " + format_double(nx * ny) +
                                            " squares, limit " + std::to_string(max_squares));
    GridSpec grid = GridSpec::covering(bbox, level);
    const auto i0 = static_cast<std::int64_t>(std::llround(grid.origin().real() / s));
    const auto j0 = static_cast<std::int64_t>(std::llround(grid.origin().imag() / s));
    DyadicPartition p{grid, {}};
    p.squares.reserve(static_cast<std::size_t>(grid.cell_total()));
    for (int r = 0; r < grid.height(); ++r)
        for (int c = 0; c < grid.width(); ++c) p.squares.push_back({i0 + c, j0 + r, level});
    return p;
}

// --------------------------------------------------------------- components

std::vector<RegionMask> components(const RegionMask& mask) {
    const GridSpec& g = mask.grid();
    std::vector<Span> flat;
    std::vector<int> flat_row;
    std::vector<std::pair<int, int>> rows(g.height());
    for (int r = 0; r < g.height(); ++r) {
        auto runs = mask.row_runs(r);
        rows[r] = {static_cast<int>(flat.size()), static_cast<int>(runs.size())};
        for (const Span& s : runs) {
            flat.push_back(s);
            flat_row.push_back(r);
        }
    }
    UnionFind uf(flat.size());
    link_rows(uf, rows, [&](int k) -> const Span& { return flat[k]; });

    std::vector<int> comp_of_root(flat.size(), -1);
    std::vector<std::vector<std::vector<Span>>> parts;
    for (std::size_t k = 0; k < flat.size(); ++k) {
        const int root = uf.find(static_cast<int>(k));
        if (comp_of_root[root] < 0) {
            comp_of_root[root] = static_cast<int>(parts.size());
            parts.emplace_back(g.height());
        }
        parts[comp_of_root[root]][flat_row[k]].push_back(flat[k]);
    }
    std::vector<RegionMask> out;
    out.reserve(parts.size());
    for (auto& p : parts) out.push_back(RegionMask::from_rows(g, std::move(p)));
    return out;
}

ComponentLabeling::ComponentLabeling(CellRect frame, std::vector<LabeledRun> runs, int count,
                                     int unbounded_id)
    : frame_(frame), runs_(std::move(runs)), row_first_(frame.rows + 1, 0), count_(count),
      unbounded_id_(unbounded_id) {
    std::size_t k = 0;
    for (int fr = 0; fr < frame_.rows; ++fr) {
        row_first_[fr] = static_cast<std::int32_t>(k);
        while (k < runs_.size() && runs_[k].row == frame_.row0 + fr) ++k;
    }
    row_first_[frame_.rows] = static_cast<std::int32_t>(runs_.size());
}

std::optional<int> ComponentLabeling::label_of(int row, int col) const noexcept {
    const int fr = row - frame_.row0;
    if (fr < 0 || fr >= frame_.rows || col < frame_.col0 || col >= frame_.col_end()) return std::nullopt;
    auto first = runs_.begin() + row_first_[fr];
    auto last = runs_.begin() + row_first_[fr + 1];
    auto it = std::upper_bound(first, last, col,
                               [](int v, const LabeledRun& lr) { return v < lr.span.begin; });
    if (it == first) return std::nullopt;
    --it;
    if (col >= it->span.end) return std::nullopt;
    return it->label;
}

std::vector<ComponentLabeling::LabeledRun> ComponentLabeling::runs_of(int label) const {
    std::vector<LabeledRun> out;
    for (const auto& lr : runs_)
        if (lr.label == label) out.push_back(lr);
    return out;
}

ComponentLabeling label_complement(const RegionMask& mask, const CellRect& frame) {
    if (frame.rows < 3 || frame.cols < 3) fail(ErrorKind::precondition, "frame must be at least 3x3 cells");
    if (auto bb = mask.bounding_cells()) {
        if (bb->row0 <= frame.row0 || bb->row_end() >= frame.row_end() || bb->col0 <= frame.col0 ||
            bb->col_end() >= frame.col_end())
            fail(ErrorKind::precondition, "mask touches or crosses the frame boundary");
    }
    std::vector<Span> flat;
    std::vector<int> flat_row;
    std::vector<std::pair<int, int>> rows(frame.rows);
    for (int fr = 0; fr < frame.rows; ++fr) {
        const int r = frame.row0 + fr;
        rows[fr].first = static_cast<int>(flat.size());
        int cursor = frame.col0;
        for (const Span& s : mask.row_runs(r)) {
            if (s.begin > cursor) {
                flat.push_back({cursor, s.begin});
                flat_row.push_back(r);
            }
            cursor = s.end;
        }
        if (cursor < frame.col_end()) {
            flat.push_back({cursor, frame.col_end()});
            flat_row.push_back(r);
        }
        rows[fr].second = static_cast<int>(flat.size()) - rows[fr].first;
    }
    UnionFind uf(flat.size());
    link_rows(uf, rows, [&](int k) -> const Span& { return flat[k]; });

    std::vector<int> label_of_root(flat.size(), -1);
    int count = 0;
    std::vector<ComponentLabeling::LabeledRun> labeled;
    labeled.reserve(flat.size());
    for (std::size_t k = 0; k < flat.size(); ++k) {
        const int root = uf.find(static_cast<int>(k));
        if (label_of_root[root] < 0) label_of_root[root] = count++;
        labeled.push_back({flat_row[k], flat[k], label_of_root[root]});
    }
    // The first run starts at the frame corner, which is always complement.
    return ComponentLabeling(frame, std::move(labeled), count, 0);
}

ComponentLabeling label_complement(const RegionMask& mask) {
    return label_complement(mask, mask.grid().padded_frame());
}

bool is_complement_connected(const RegionMask& mask, const CellRect& frame) {
    return label_complement(mask, frame).component_count() == 1;
}

bool is_complement_connected(const RegionMask& mask) {
    return is_complement_connected(mask, mask.grid().padded_frame());
}

int hole_count(const RegionMask& mask) {
    return label_complement(mask).component_count() - 1;
}

// ------------------------------------------------------------------- carving

Carving carve_connectors(const RegionMask& mask, double per_hole_budget) {
    const GridSpec& g = mask.grid();
    if (!(per_hole_budget > g.cell_area()))
        fail(ErrorKind::infeasible_budget, "per-hole budget " + format_double(per_hole_budget) +
                                               " does not exceed one cell area " +
                                               format_double(g.cell_area()));
    const std::int64_t max_cost =
        static_cast<std::int64_t>(std::ceil(per_hole_budget / g.cell_area())) - 1;
    constexpr int dr[4] = {-1, 0, 0, 1};
    constexpr int dc[4] = {0, -1, 1, 0};

    Carving out{mask, {}, 0.0};
    for (;;) {
        const ComponentLabeling lab = label_complement(out.mask);
        if (lab.component_count() == 1) break;
        const int hole = lab.unbounded_id() == 0 ? 1 : 0;

        std::optional<Corridor> best;
        std::int64_t best_cost = max_cost + 1;
        for (const auto& lr : lab.runs_of(hole)) {
            for (int c = lr.span.begin; c < lr.span.end; ++c) {
                for (int d = 0; d < 4; ++d) {
                    int r1 = lr.row + dr[d];
                    int c1 = c + dc[d];
                    // a ray entering another hole cell is dominated by the ray from that cell
                    if (!out.mask.contains(r1, c1)) continue;
                    std::vector<CellIndex> path;
                    bool reached = false;
                    while (static_cast<std::int64_t>(path.size()) < best_cost) {
                        if (!g.in_bounds(r1, c1)) {
                            reached = true;
                            break;
                        }
                        if (out.mask.contains(r1, c1)) {
                            path.push_back({r1, c1});
                        } else if (lab.label_of(r1, c1) == lab.unbounded_id()) {
                            reached = true;
                            break;
                        }
                        r1 += dr[d];
                        c1 += dc[d];
                    }
                    if (reached && static_cast<std::int64_t>(path.size()) < best_cost) {
                        best_cost = static_cast<std::int64_t>(path.size());
                        best = Corridor{{lr.row, c}, d, std::move(path)};
                    }
                }
            }
        }
        if (!best)
            fail(ErrorKind::infeasible_budget,
                 "no corridor below the per-hole budget " + format_double(per_hole_budget) +
                     " reaches the unbounded component");
        out.removed_area += static_cast<double>(best->removed.size()) * g.cell_area();
        out.mask = out.mask.minus(RegionMask::from_cells(g, best->removed));
        out.corridors.push_back(std::move(*best));
    }
    return out;
}

double cell_layer_slack(const GridSpec& grid) noexcept {
    return (2.0 * (grid.width() + grid.height()) + 4.0) * grid.cell_area();
}

// --------------------------------------------------------------------- text I/O

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_mask(std::ostream& os, const RegionMask& mask) {
    const GridSpec& g = mask.grid();
    os << "grid " << format_double(g.origin().real()) << ' ' << format_double(g.origin().imag()) << ' '
       << format_double(g.cell_side()) << ' ' << g.width() << ' ' << g.height() << '\n';
    for (int r = 0; r < g.height(); ++r) {
        int cursor = 0;
        bool first = true;
        auto emit = [&](int n) {
            if (!first) os << ' ';
            os << n;
            first = false;
        };
        for (const Span& s : mask.row_runs(r)) {
            emit(s.begin - cursor);
            emit(s.length());
            cursor = s.end;
        }
        emit(g.width() - cursor);
        os << '\n';
    }
}

double parse_double(std::string_view tok) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || tok.empty())
        fail(ErrorKind::parse, "bad number '" + std::string(tok) + "'");
    return v;
}

namespace {

long long parse_int(const std::string& tok) {
    long long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        fail(ErrorKind::parse, "bad integer '" + tok + "'");
    return v;
}

}  // namespace

RegionMask read_mask(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) fail(ErrorKind::parse, "missing grid header");
    std::istringstream hs(line);
    std::string tag, sx, sy, ss, sw, sh, extra;
    if (!(hs >> tag >> sx >> sy >> ss >> sw >> sh) || tag != "grid" || (hs >> extra))
        fail(ErrorKind::parse, "header must read 'grid x0 y0 cell_side width height'");
    const double side = parse_double(ss);
    const int level = static_cast<int>(std::lround(-std::log2(side)));
    if (!(side > 0.0) || std::ldexp(1.0, -level) != side)
        fail(ErrorKind::parse, "cell side is not a dyadic value 2^-k");
    const long long w = parse_int(sw);
    const long long h = parse_int(sh);
    if (w < 1 || h < 1 || w > kMaxDimension || h > kMaxDimension)
        fail(ErrorKind::parse, "grid dimensions out of range");
    GridSpec g({parse_double(sx), parse_double(sy)}, level, static_cast<int>(w), static_cast<int>(h));
    std::vector<std::vector<Span>> rows(g.height());
    for (int r = 0; r < g.height(); ++r) {
        if (!std::getline(is, line)) fail(ErrorKind::parse, "missing row " + std::to_string(r));
        std::istringstream ls(line);
        std::string tok;
        long long cursor = 0;
        bool on = false;
        while (ls >> tok) {
            const long long n = parse_int(tok);
            if (n < 0) fail(ErrorKind::parse, "negative run length in row " + std::to_string(r));
            if (on && n > 0) rows[r].push_back({static_cast<int>(cursor), static_cast<int>(cursor + n)});
            cursor += n;
            on = !on;
        }
        if (cursor != w) fail(ErrorKind::parse, "row " + std::to_string(r) + " does not sum to the width");
    }
    return RegionMask::from_rows(g, std::move(rows));
}

}  // namespace mlab
