#include "mlab/planar.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "json.hpp"
#include "mlab/parallel.hpp"

namespace mlab {

namespace {

constexpr double kPi = std::numbers::pi;

RegionMask at_level(const RegionMask& m, int level) {
    const int extra = level - m.grid().level();
    if (extra < 0) fail(ErrorKind::precondition, "cannot coarsen a mask");
    return extra == 0 ? m : m.refined(extra);
}

// a \ b for sorted disjoint runs
std::vector<Span> span_minus(std::span<const Span> a, std::span<const Span> b) {
    std::vector<Span> out;
    std::size_t j = 0;
    for (const Span& s : a) {
        int cur = s.begin;
        while (j < b.size() && b[j].end <= cur) ++j;
        std::size_t k = j;
        while (cur < s.end) {
            if (k >= b.size() || b[k].begin >= s.end) {
                out.push_back({cur, s.end});
                break;
            }
            if (b[k].begin > cur) out.push_back({cur, b[k].begin});
            cur = std::max(cur, b[k].end);
            ++k;
        }
    }
    return out;
}

bool near_boundary(const RegionMask& U, cplx p) {
    const CellIndex c = U.grid().cell_of(p);
    bool in = false;
    bool out = false;
    for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
            if (U.contains(c.row + dr, c.col + dc))
                in = true;
            else
                out = true;
        }
    return in && out;
}

std::size_t nearest_index(const std::vector<cplx>& points, cplx z) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = std::norm(points[i] - z);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

double min_distance(const std::vector<cplx>& points, cplx z) {
    double bd = std::numeric_limits<double>::infinity();
    for (const cplx& q : points) bd = std::min(bd, std::norm(q - z));
    return std::sqrt(bd);
}

}  // namespace

// ------------------------------------------------------------------ domains

std::vector<cplx> boundary_edge_points(const RegionMask& mask) {
    std::vector<cplx> pts;
    const GridSpec& g = mask.grid();
    const double s = g.cell_side();
    const cplx o = g.origin();
    const std::span<const Span> none;
    for (int r = 0; r < g.height(); ++r) {
        const auto runs = mask.row_runs(r);
        if (runs.empty()) continue;
        const double y = o.imag() + (r + 0.5) * s;
        for (const Span& sp : runs) {
            pts.emplace_back(o.real() + sp.begin * s, y);
            pts.emplace_back(o.real() + sp.end * s, y);
        }
        const auto below = r > 0 ? mask.row_runs(r - 1) : none;
        const auto above = r + 1 < g.height() ? mask.row_runs(r + 1) : none;
        for (const Span& sp : span_minus(runs, below))
            for (int c = sp.begin; c < sp.end; ++c) pts.emplace_back(o.real() + (c + 0.5) * s, o.imag() + r * s);
        for (const Span& sp : span_minus(runs, above))
            for (int c = sp.begin; c < sp.end; ++c)
                pts.emplace_back(o.real() + (c + 0.5) * s, o.imag() + (r + 1) * s);
    }
    return pts;
}

void DomainSpec::validate() const {
    if (U.empty()) fail(ErrorKind::validation, "domain mask is empty");
    for (const cplx& p : boundary_samples)
        if (!near_boundary(U, p))
            fail(ErrorKind::validation, "boundary sample (" + format_double(p.real()) + ", " +
                                            format_double(p.imag()) + ") is not within one cell of the boundary");
}

DomainSpec DomainSpec::disk(const GridSpec& grid, const Disk& d, int samples) {
    if (samples < 1 || !(d.radius > 0.0)) fail(ErrorKind::precondition, "disk domain needs a radius and samples");
    DomainSpec out{disk_mask(grid, d.center, d.radius), {}};
    for (int k = 0; k < samples; ++k)
        out.boundary_samples.push_back(d.center + std::polar(d.radius, 2.0 * kPi * k / samples));
    return out;
}

DomainSpec DomainSpec::from_mask(RegionMask U, int samples) {
    if (samples < 1) fail(ErrorKind::precondition, "at least one boundary sample is required");
    const auto edges = boundary_edge_points(U);
    if (edges.empty()) fail(ErrorKind::precondition, "mask has no boundary");
    DomainSpec out{std::move(U), {}};
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(samples), edges.size());
    for (std::size_t k = 0; k < n; ++k) out.boundary_samples.push_back(edges[k * edges.size() / n]);
    return out;
}

// ------------------------------------------------------------------- shells

double lens_area(double h, double d) {
    if (!(h > 0.0) || !(d >= 0.0)) fail(ErrorKind::precondition, "lens_area needs h > 0 and d >= 0");
    if (d >= 2.0 * h) return 0.0;
    return 2.0 * h * h * std::acos(d / (2.0 * h)) - 0.5 * d * std::sqrt(4.0 * h * h - d * d);
}

double circle_boundary_gap(const Disk& circle, const DomainSpec& U) {
    // a circle leaving U has no gap at all
    for (int k = 0; k < 8; ++k) {
        const CellIndex c = U.U.grid().cell_of(circle.center + std::polar(circle.radius, kPi * k / 4.0));
        if (!U.U.contains(c.row, c.col)) return -1.0;
    }
    double gap = std::numeric_limits<double>::infinity();
    for (const cplx& q : boundary_edge_points(U.U))
        gap = std::min(gap, std::abs(std::abs(q - circle.center) - circle.radius));
    return gap - 0.5 * U.resolution();
}

RegionMask shell_construct(const Disk& circle, const DomainSpec& U, double budget, double h,
                           const ShellOptions& options) {
    if (!(budget > 0.0) || !(h > 0.0) || !(circle.radius > 0.0))
        fail(ErrorKind::precondition, "shell needs positive budget, margin and radius");
    const double gap = circle_boundary_gap(circle, U);
    if (!(gap > 2.0 * h))
        fail(ErrorKind::geometry, "circle is only " + format_double(gap) + " from the boundary, need more than 2h = " +
                                      format_double(2.0 * h));
    if (budget < U.U.grid().cell_area())
        fail(ErrorKind::infeasible_budget, "budget " + format_double(budget) + " is below one cell of U");
    const double allowance = budget * lens_area(h, h);

    const int base = U.U.grid().level();
    for (int level = base; level <= std::min(base + options.max_extra_levels, options.max_level); ++level) {
        const double s = std::ldexp(1.0, -level);
        for (double width : {options.width_cells, options.width_cells + 1.0}) {
            const double w = width * s;
            if (2.0 * kPi * circle.radius * w >= allowance) break;
            const double pad = circle.radius + w + 2.0 * s;
            const auto grid = GridSpec::covering({circle.center.real() - pad, circle.center.imag() - pad,
                                                  circle.center.real() + pad, circle.center.imag() + pad},
                                                 level);
            auto shell = annulus_mask(grid, circle.center, circle.radius - 0.5 * w, circle.radius + 0.5 * w);
            if (shell.area() < allowance && components(shell).size() == 1) return shell;
        }
    }
    fail(ErrorKind::infeasible_budget, "no grid up to the level limit holds a connected shell within " +
                                           format_double(allowance));
}

// ---------------------------------------------------------------- densities

std::vector<DensityRatio> boundary_density(const RegionMask& A, const DomainSpec& U, cplx p,
                                           const std::vector<double>& radii) {
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) fail(ErrorKind::precondition, "radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) fail(ErrorKind::precondition, "radii must be strictly descending");
    }
    if (!near_boundary(U.U, p)) fail(ErrorKind::precondition, "p is not a boundary point of U");
    const int level = std::max(A.grid().level(), U.U.grid().level());
    const RegionMask Uf = at_level(U.U, level);
    const RegionMask Af = at_level(A, level).embedded(Uf.grid()).intersected(Uf);
    std::vector<DensityRatio> out;
    for (double r : radii) {
        DensityRatio d{r, std::nullopt};
        const double den = Uf.disk_area(p, r);
        if (den > 0.0) d.ratio = Af.disk_area(p, r) / den;
        out.push_back(d);
    }
    return out;
}

double density_slack(double r, double denominator, double cell_side) {
    if (!(denominator > 0.0)) return std::numeric_limits<double>::infinity();
    return 2.0 * kPi * r * cell_side / denominator;
}

// ---------------------------------------------------------------- skeleton

Skeleton build_dirichlet_skeleton(const DomainSpec& U, const std::vector<double>& phi, int J) {
    if (J < 1) fail(ErrorKind::precondition, "J must be at least 1");
    if (U.boundary_samples.empty() || phi.size() != U.boundary_samples.size())
        fail(ErrorKind::precondition, "phi needs one value per boundary sample");
    U.validate();
    if (components(U.U).size() != 1) fail(ErrorKind::precondition, "U must be connected");

    const GridSpec& grid = U.U.grid();
    const double s = grid.cell_side();
    const auto edges = boundary_edge_points(U.U);
    const auto cells = U.U.cells();
    const auto depth = parallel_map<double>(cells.size(), [&](std::size_t k) {
        return min_distance(edges, grid.cell_center(cells[k].row, cells[k].col));
    });

    ShellFamily fam;
    std::vector<char> covered(cells.size(), 0);
    for (int j = 1; j <= J; ++j) {
        std::size_t pick = cells.size();
        for (std::size_t k = 0; k < cells.size(); ++k)
            if (!covered[k] && (pick == cells.size() || depth[k] > depth[pick])) pick = k;
        if (pick == cells.size()) fail(ErrorKind::geometry, "U is covered before disk " + std::to_string(j));
        const cplx x = grid.cell_center(cells[pick].row, cells[pick].col);
        const double rho = depth[pick] / 3.2;
        if (rho < 2.0 * s)
            fail(ErrorKind::geometry, "U is too thin for " + std::to_string(J) + " disks at this resolution");
        const Disk S{x, rho};
        // |S| < dist(S, boundary)
        if (!(2.0 * rho < depth[pick] - rho - 0.5 * s))
            fail(ErrorKind::geometry, "disk " + std::to_string(j) + " is too close to the boundary");
        const double h = 0.45 * circle_boundary_gap(S, U);
        const double budget = std::ldexp(1.0, -j);
        fam.shells.push_back(shell_construct(S, U, budget, h));
        fam.disks.push_back(S);
        fam.budgets.push_back(budget);
        fam.margins.push_back(h);
        for (std::size_t k = 0; k < cells.size(); ++k)
            if (std::abs(grid.cell_center(cells[k].row, cells[k].col) - x) <= rho) covered[k] = 1;
    }

    int fine = grid.level();
    for (const auto& sh : fam.shells) fine = std::max(fine, sh.grid().level());
    RegionMask Uf = at_level(U.U, fine);
    RegionMask R(Uf.grid());
    for (const auto& sh : fam.shells) R = R.united(at_level(sh, fine).embedded(Uf.grid()));
    RegionMask F = Uf.minus(R);

    std::vector<Piece> pieces;
    std::vector<int> piece_disk;
    const auto value_of = [&](const RegionMask& piece) {
        const CellIndex c = *piece.first_cell();
        return phi[nearest_index(U.boundary_samples, piece.grid().cell_center(c.row, c.col))];
    };
    RegionMask earlier(Uf.grid());
    for (std::size_t j = 0; j < fam.disks.size(); ++j) {
        const auto D = disk_mask(Uf.grid(), fam.disks[j].center, fam.disks[j].radius);
        auto piece = F.intersected(D).minus(earlier);
        earlier = earlier.united(D);
        if (piece.empty()) continue;
        const double v = value_of(piece);
        pieces.push_back({std::move(piece), v});
        piece_disk.push_back(static_cast<int>(j));
    }
    // the collar outside the disks, split by nearest boundary sample on the coarse grid
    const RegionMask collar = F.minus(earlier);
    std::vector<std::vector<CellIndex>> by_sample(U.boundary_samples.size());
    for (const auto& c : cells)
        by_sample[nearest_index(U.boundary_samples, grid.cell_center(c.row, c.col))].push_back(c);
    for (const auto& group : by_sample) {
        if (group.empty()) continue;
        auto piece = at_level(RegionMask::from_cells(grid, group), fine).intersected(collar);
        if (piece.empty()) continue;
        const double v = value_of(piece);
        pieces.push_back({std::move(piece), v});
        piece_disk.push_back(-1);
    }

    bool zero_free = true;
    for (const auto& p : pieces) zero_free = zero_free && p.value != cplx(0.0);
    Skeleton sk{std::move(fam), F, std::move(Uf), PiecewiseConstantTarget{F, std::move(pieces), zero_free},
                std::move(piece_disk)};
    return sk;
}

std::vector<DensityCheck> skeleton_density_check(const Skeleton& sk, const DomainSpec& U,
                                                 const std::vector<double>& radii) {
    std::vector<DensityCheck> out;
    const double s = sk.U_fine.grid().cell_side();
    for (const cplx& p : U.boundary_samples) {
        for (double r : radii) {
            const double den = sk.U_fine.disk_area(p, r);
            if (!(den > 0.0)) continue;
            double active = 0.0;
            for (std::size_t j = 0; j < sk.family.shells.size(); ++j)
                if (sk.family.shells[j].disk_count(p, r) > 0) active += sk.family.budgets[j];
            DensityCheck c;
            c.p = p;
            c.r = r;
            c.ratio = sk.F.disk_area(p, r) / den;
            c.bound = 1.0 - active - density_slack(r, den, s);
            c.ok = c.ratio >= c.bound;
            out.push_back(c);
        }
    }
    return out;
}

// ----------------------------------------------------------- harmonic fits

double HarmonicFit::operator()(cplx x) const {
    double u = 0.0;
    for (const Source& q : sources) u += q.weight * std::log(std::abs(x - q.point));
    const cplx w = (x - center) / scale;
    cplx acc = 0.0;
    for (auto it = poly_coeffs.rbegin(); it != poly_coeffs.rend(); ++it) acc = acc * w + *it;
    return u + acc.real();
}

HarmonicFit harmonic_fit(const std::vector<ValuedPiece>& pieces, int source_count, const HarmonicOptions& options) {
    if (pieces.empty()) fail(ErrorKind::precondition, "no pieces to fit");
    if (source_count < 0 || options.poly_degree < 0) fail(ErrorKind::precondition, "negative source count or degree");
    const GridSpec& grid = pieces.front().cells.grid();
    RegionMask all(grid);
    std::int64_t total = 0;
    for (const auto& p : pieces) {
        if (!(p.cells.grid() == grid)) fail(ErrorKind::precondition, "pieces must share one grid");
        if (p.cells.empty()) fail(ErrorKind::precondition, "empty piece");
        if (!std::isfinite(p.value)) fail(ErrorKind::precondition, "piece value is not finite");
        all = all.united(p.cells);
        total += p.cells.cell_count();
    }
    if (all.cell_count() != total) fail(ErrorKind::precondition, "pieces overlap");
    const double s = grid.cell_side();

    HarmonicFit fit;
    {
        const CellRect b = *all.bounding_cells();
        const cplx lo = grid.origin() + cplx(b.col0 * s, b.row0 * s);
        const cplx hi = grid.origin() + cplx(b.col_end() * s, b.row_end() * s);
        fit.center = 0.5 * (lo + hi);
        fit.scale = 0.5 * std::abs(hi - lo);
    }

    // rings around each piece at half the gap to the nearest other piece
    const std::size_t np = pieces.size();
    std::vector<std::vector<cplx>> edges(np);
    std::vector<cplx> centroid(np);
    std::vector<double> extent(np, 0.0);
    for (std::size_t i = 0; i < np; ++i) {
        edges[i] = boundary_edge_points(pieces[i].cells);
        cplx sum = 0.0;
        pieces[i].cells.for_each_cell([&](int r, int c, std::int64_t) { sum += grid.cell_center(r, c); });
        centroid[i] = sum / static_cast<double>(pieces[i].cells.cell_count());
        for (const cplx& e : edges[i]) extent[i] = std::max(extent[i], std::abs(e - centroid[i]));
        extent[i] = std::max(extent[i], 0.5 * s);
    }
    const auto gaps = parallel_map<double>(np, [&](std::size_t i) {
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < np; ++k)
            if (k != i)
                for (const cplx& e : edges[i]) g = std::min(g, min_distance(edges[k], e));
        return g;
    });
    std::vector<double> offset(np), perimeter(np);
    double perimeter_sum = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        offset[i] = std::clamp(0.5 * gaps[i], s, std::max(s, extent[i]));
        perimeter[i] = 2.0 * kPi * (extent[i] + offset[i]);
        perimeter_sum += perimeter[i];
    }
    // largest remainder allocation of the sources
    std::vector<int> count(np, 0);
    {
        std::vector<std::pair<double, std::size_t>> rem;
        int used = 0;
        for (std::size_t i = 0; i < np; ++i) {
            const double share = source_count * perimeter[i] / perimeter_sum;
            count[i] = static_cast<int>(std::floor(share));
            used += count[i];
            rem.emplace_back(share - count[i], i);
        }
        std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t k = 0; used < source_count; ++k, ++used) ++count[rem[k % np].second];
    }
    for (std::size_t i = 0; i < np; ++i) {
        for (int m = 0; m < count[i]; ++m) {
            const cplx dir = std::polar(1.0, 2.0 * kPi * (m + 0.5) / count[i]);
            double last = 0.0;
            for (double t = 0.0; t <= extent[i] + s; t += 0.25 * s) {
                const CellIndex c = grid.cell_of(centroid[i] + t * dir);
                if (pieces[i].cells.contains(c.row, c.col)) last = t;
            }
            const cplx q = centroid[i] + (last + offset[i]) * dir;
            const CellIndex c = grid.cell_of(q);
            if (all.contains(c.row, c.col)) continue;
            bool dup = false;
            for (const Source& o : fit.sources) dup = dup || std::abs(o.point - q) < 0.25 * s;
            if (!dup) fit.sources.push_back({q, 0.0});
        }
    }

    const int deg = options.poly_degree;
    const Eigen::Index ns = static_cast<Eigen::Index>(fit.sources.size());
    const Eigen::Index cols = ns + 1 + 2 * deg;
    Eigen::MatrixXd A(total, cols);
    Eigen::VectorXd b(total);
    Eigen::Index row = 0;
    for (const auto& p : pieces) {
        p.cells.for_each_cell([&](int r, int c, std::int64_t) {
            const cplx z = grid.cell_center(r, c);
            for (Eigen::Index k = 0; k < ns; ++k) A(row, k) = std::log(std::abs(z - fit.sources[k].point));
            A(row, ns) = 1.0;
            const cplx w = (z - fit.center) / fit.scale;
            cplx wk = 1.0;
            for (int k = 1; k <= deg; ++k) {
                wk *= w;
                A(row, ns + 2 * k - 1) = wk.real();
                A(row, ns + 2 * k) = -wk.imag();
            }
            b(row) = p.value;
            ++row;
        });
    }
    Eigen::VectorXd norms = A.colwise().norm().transpose();
    for (Eigen::Index k = 0; k < cols; ++k) {
        if (!(norms(k) > 0.0)) norms(k) = 1.0;
        A.col(k) /= norms(k);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    qr.setThreshold(options.rank_tolerance);
    qr.compute(A);
    if (qr.rank() < cols)
        fail(ErrorKind::source_count_limit, "fit matrix lost rank (" + std::to_string(qr.rank()) + " of " +
                                                std::to_string(cols) + " columns) with " + std::to_string(ns) +
                                                " sources");
    Eigen::VectorXd x = qr.solve(b);
    for (Eigen::Index k = 0; k < cols; ++k) x(k) /= norms(k);

    for (Eigen::Index k = 0; k < ns; ++k) fit.sources[k].weight = x(k);
    fit.poly_coeffs.assign(static_cast<std::size_t>(deg) + 1, 0.0);
    fit.poly_coeffs[0] = x(ns);
    for (int k = 1; k <= deg; ++k) fit.poly_coeffs[k] = cplx(x(ns + 2 * k - 1), x(ns + 2 * k));

    for (const auto& p : pieces)
        p.cells.for_each_cell([&](int r, int c, std::int64_t) {
            fit.fit_error = std::max(fit.fit_error, std::abs(fit(grid.cell_center(r, c)) - p.value));
        });
    return fit;
}

std::vector<HarmonicStep> harmonic_measure_sequence(const SampledFunction& v, int n_max, int source_count,
                                                    const HarmonicOptions& options) {
    if (n_max < 1) fail(ErrorKind::precondition, "n_max must be at least 1");
    v.validate();
    SampledFunction real_part = v;
    for (auto& z : real_part.values) z = z.real();
    const GridSpec& grid = v.domain.grid();
    const double cell_area = grid.cell_area();

    std::vector<HarmonicStep> out;
    for (int n = 1; n <= n_max; ++n) {
        const auto red = reduce_to_piecewise(real_part, 4 * n);
        std::vector<ValuedPiece> pieces;
        for (const auto& p : red.target.pieces) pieces.push_back({p.cells, p.value.real()});
        HarmonicStep step;
        step.n = n;
        step.piece_count = static_cast<int>(pieces.size());
        step.fit = harmonic_fit(pieces, source_count * n, options);
        step.reduction_loss = red.report.area_lost;

        const double tol = 1.0 / n;
        v.domain.for_each_cell([&](int r, int c, std::int64_t k) {
            const double u = step.fit(grid.cell_center(r, c));
            if (std::abs(u - real_part.values[static_cast<std::size_t>(k)].real()) > tol)
                step.exceedance_area += cell_area;
        });
        for (const auto& p : pieces)
            p.cells.for_each_cell([&](int r, int c, std::int64_t) {
                if (std::abs(step.fit(grid.cell_center(r, c)) - p.value) >= 0.5 * tol) step.fit_slack += cell_area;
            });
        step.bound = 3.0 / n + cell_layer_slack(grid) + step.fit_slack;
        out.push_back(std::move(step));
    }
    return out;
}

// --------------------------------------------------------------------- I/O

std::string harmonic_fit_to_json(const HarmonicFit& fit) {
    nlohmann::json j;
    j["sources"] = nlohmann::json::array();
    for (const auto& q : fit.sources) j["sources"].push_back({q.point.real(), q.point.imag(), q.weight});
    j["poly_coefficients"] = nlohmann::json::array();
    for (const auto& c : fit.poly_coeffs) j["poly_coefficients"].push_back({c.real(), c.imag()});
    j["center"] = {fit.center.real(), fit.center.imag()};
    j["scale"] = fit.scale;
    j["fit_error"] = fit.fit_error;
    return j.dump();
}

void write_domain(std::ostream& os, const DomainSpec& d) {
    write_mask(os, d.U);
    os << "samples " << d.boundary_samples.size() << '\n';
    for (const cplx& p : d.boundary_samples) os << format_double(p.real()) << ' ' << format_double(p.imag()) << '\n';
}

DomainSpec read_domain(std::istream& is) {
    RegionMask U = read_mask(is);
    std::string tag;
    long long n = -1;
    if (!(is >> tag >> n) || tag != "samples" || n < 0) fail(ErrorKind::parse, "expected 'samples <count>'");
    DomainSpec d{std::move(U), {}};
    for (long long k = 0; k < n; ++k) {
        std::string x, y;
        if (!(is >> x >> y)) fail(ErrorKind::parse, "boundary sample list is truncated");
        d.boundary_samples.emplace_back(parse_double(x), parse_double(y));
    }
    return d;
}

}  // namespace mlab
