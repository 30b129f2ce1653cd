#include "mlab/universality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mlab/parallel.hpp"

namespace mlab {

namespace {

unsigned resolve_threads(unsigned requested) { return requested == 0 ? thread_count() : requested; }

// Cell centers of K with the target value at each.
struct Probe {
    std::vector<cplx> points;
    std::vector<cplx> targets;
    double cell_area = 0.0;
};

Probe make_probe(const RegionMask& K, const SampledFunction& g) {
    if (!(g.domain.grid() == K.grid())) fail(ErrorKind::precondition, "target and compact set use different grids");
    Probe p;
    p.cell_area = K.grid().cell_area();
    p.points.reserve(static_cast<std::size_t>(K.cell_count()));
    p.targets.reserve(static_cast<std::size_t>(K.cell_count()));
    K.for_each_cell([&](int r, int c, std::int64_t) {
        const auto v = g.at(r, c);
        if (!v) fail(ErrorKind::precondition, "target is undefined at cell (" + std::to_string(r) + ", " +
                                                  std::to_string(c) + ") of the compact set");
        p.points.push_back(K.grid().cell_center(r, c));
        p.targets.push_back(*v);
    });
    return p;
}

// Full sup, or the first value above `stop` when early exit is wanted.
double probe_sup(const DirichletSeriesSpec& spec, const Probe& p, double t, double eval_error,
                 double stop = std::numeric_limits<double>::infinity()) {
    double worst = 0.0;
    for (std::size_t k = 0; k < p.points.size(); ++k) {
        const cplx s = p.points[k] + cplx(0.0, t);
        worst = std::max(worst, std::abs(lfun_eval(spec, s, eval_error).value - p.targets[k]));
        if (worst > stop) break;
    }
    return worst;
}

double probe_exceedance(const DirichletSeriesSpec& spec, const Probe& p, double t, double epsilon,
                        double eval_error) {
    std::int64_t over = 0;
    for (std::size_t k = 0; k < p.points.size(); ++k) {
        const cplx s = p.points[k] + cplx(0.0, t);
        if (std::abs(lfun_eval(spec, s, eval_error).value - p.targets[k]) > epsilon) ++over;
    }
    return static_cast<double>(over) * p.cell_area;
}

void require_zero_free(const Probe& p) {
    for (const cplx& v : p.targets)
        if (v == cplx(0.0))
            fail(ErrorKind::precondition,
                 "target has zero values; disable require_zero_free for an exploratory scan");
}

// Scans the lattice, then bisects hit/miss boundaries for the refined length.
template <class Value>
DensityScan run_scan(const ScanConfig& cfg, double threshold, Value&& value_at) {
    cfg.validate();
    const std::int64_t count = cfg.sample_count();
    const unsigned threads = resolve_threads(cfg.threads);
    DensityScan out;
    out.samples = parallel_map<ScanSample>(
        static_cast<std::size_t>(count),
        [&](std::size_t i) {
            const double t = cfg.t_at(static_cast<std::int64_t>(i));
            const double v = value_at(t);
            return ScanSample{t, v, v < threshold};
        },
        threads);

    auto& e = out.estimate;
    e.epsilon = cfg.epsilon;
    e.T = cfg.t_max - cfg.t_min;
    e.step = cfg.step;
    e.samples = count;
    for (const auto& s : out.samples) e.hits += s.hit;
    e.fraction = static_cast<double>(e.hits) / static_cast<double>(count);

    if (count < 2) {
        e.refined_fraction = e.fraction;
        return out;
    }
    const auto gap_hit_length = parallel_map<double>(
        static_cast<std::size_t>(count - 1),
        [&](std::size_t i) {
            const ScanSample& a = out.samples[i];
            const ScanSample& b = out.samples[i + 1];
            if (a.hit == b.hit) return a.hit ? b.t - a.t : 0.0;
            double lo = a.t, hi = b.t;  // a.hit at lo side
            for (int d = 0; d < cfg.refine_depth; ++d) {
                const double mid = 0.5 * (lo + hi);
                if ((value_at(mid) < threshold) == a.hit) lo = mid;
                else hi = mid;
            }
            const double boundary = 0.5 * (lo + hi);
            return a.hit ? boundary - a.t : b.t - boundary;
        },
        threads);
    double hit_length = 0.0;
    for (double len : gap_hit_length) hit_length += len;
    e.refined_fraction = hit_length / (out.samples.back().t - out.samples.front().t);
    return out;
}

}  // namespace

void ScanConfig::validate() const {
    if (!(t_min < t_max)) fail(ErrorKind::precondition, "scan needs t_min < t_max");
    if (!(step > 0.0)) fail(ErrorKind::precondition, "scan step must be positive");
    if (!(epsilon > 0.0)) fail(ErrorKind::precondition, "epsilon must be positive");
    if (refine_depth < 0) fail(ErrorKind::precondition, "refine depth must be non-negative");
}

std::int64_t ScanConfig::sample_count() const {
    return static_cast<std::int64_t>(std::floor((t_max - t_min) / step + 1e-9)) + 1;
}

void require_in_strip(const DirichletSeriesSpec& spec, const RegionMask& K) {
    const StripSpec strip = strip_of(spec);
    const auto box = K.bounding_cells();
    if (!box) fail(ErrorKind::domain, "compact set is empty");
    const GridSpec& g = K.grid();
    const double lo = g.cell_center(0, box->col0).real();
    const double hi = g.cell_center(0, box->col_end() - 1).real();
    if (!(lo > strip.sigma_m) || !(hi < strip.right_edge))
        fail(ErrorKind::domain, "cell centers span Re s in [" + format_double(lo) + ", " + format_double(hi) +
                                    "], outside the strip (" + format_double(strip.sigma_m) + ", " +
                                    format_double(strip.right_edge) + ")");
}

double sup_discrepancy(const DirichletSeriesSpec& spec, const RegionMask& K, const SampledFunction& g, double t,
                       double eval_error) {
    require_in_strip(spec, K);
    return probe_sup(spec, make_probe(K, g), t, eval_error);
}

double sup_discrepancy(const DirichletSeriesSpec& spec, const PiecewiseConstantTarget& g, double t,
                       double eval_error) {
    return sup_discrepancy(spec, g.support, g.to_sampled(), t, eval_error);
}

double measure_discrepancy(const DirichletSeriesSpec& spec, const RegionMask& A, const SampledFunction& phi, double t,
                           double epsilon, double eval_error) {
    require_in_strip(spec, A);
    return probe_exceedance(spec, make_probe(A, phi), t, epsilon, eval_error);
}

DensityScan density_scan(const DirichletSeriesSpec& spec, const RegionMask& K, const SampledFunction& g,
                         const ScanConfig& config) {
    config.validate();
    require_in_strip(spec, K);
    const Probe probe = make_probe(K, g);
    if (config.require_zero_free) require_zero_free(probe);
    const double eval_error = config.epsilon / 10.0;
    return run_scan(config, config.epsilon, [&](double t) { return probe_sup(spec, probe, t, eval_error); });
}

DensityEstimate density_statistic(const DirichletSeriesSpec& spec, const RegionMask& K, const SampledFunction& g,
                                  const ScanConfig& config) {
    return density_scan(spec, K, g, config).estimate;
}

DensityScan measure_density_scan(const DirichletSeriesSpec& spec, const RegionMask& A, const SampledFunction& phi,
                                 double epsilon, const ScanConfig& config, std::optional<double> area_epsilon) {
    config.validate();
    if (!(epsilon > 0.0)) fail(ErrorKind::precondition, "epsilon must be positive");
    require_in_strip(spec, A);
    const Probe probe = make_probe(A, phi);
    const double eval_error = epsilon / 10.0;
    const double area_threshold = area_epsilon.value_or(epsilon);
    ScanConfig cfg = config;
    cfg.epsilon = epsilon;
    return run_scan(cfg, area_threshold,
                    [&](double t) { return probe_exceedance(spec, probe, t, epsilon, eval_error); });
}

DensityEstimate measure_density_statistic(const DirichletSeriesSpec& spec, const RegionMask& A,
                                          const SampledFunction& phi, double epsilon, const ScanConfig& config,
                                          std::optional<double> area_epsilon) {
    return measure_density_scan(spec, A, phi, epsilon, config, area_epsilon).estimate;
}

ShiftSequenceResult find_shift_sequence(const DirichletSeriesSpec& spec, const SampledFunction& f, int n_max,
                                        double t_max, double step, unsigned threads) {
    if (n_max < 1) fail(ErrorKind::precondition, "n_max must be at least 1");
    if (!(t_max >= 0.0) || !(step > 0.0)) fail(ErrorKind::precondition, "need T_max >= 0 and step > 0");
    require_in_strip(spec, f.domain);
    threads = resolve_threads(threads);
    const auto count = static_cast<std::int64_t>(std::floor(t_max / step + 1e-9)) + 1;
    const Probe full = make_probe(f.domain, f);

    ShiftSequenceResult out;
    for (int n = 1; n <= n_max; ++n) {
        Reduction red = [&] {
            try {
                return reduce_to_piecewise(f, n);
            } catch (const Error& e) {
                fail(e.kind(), "n = " + std::to_string(n) + ": " + e.what());
            }
        }();
        const double tol = 1.0 / n;
        const double eval_error = tol / 10.0;
        const Probe probe = make_probe(red.target.support, red.target.to_sampled());
        ShiftEntry entry;
        entry.n = n;
        entry.piece_count = red.report.piece_count;
        entry.reduction_area_lost = red.report.area_lost;
        entry.area_bound = 3.0 / n + red.report.slack;

        // ascending blocks keep the first hit independent of the thread count
        const std::int64_t block = 64 * static_cast<std::int64_t>(threads);
        std::optional<std::int64_t> hit;
        for (std::int64_t start = 0; start < count && !hit; start += block) {
            const std::int64_t len = std::min(block, count - start);
            const auto sup = parallel_map<double>(
                static_cast<std::size_t>(len),
                [&](std::size_t i) {
                    const double t = static_cast<double>(start + static_cast<std::int64_t>(i)) * step;
                    return probe_sup(spec, probe, t, eval_error, tol);
                },
                threads);
            for (std::int64_t i = 0; i < len; ++i)
                if (sup[static_cast<std::size_t>(i)] < tol) {
                    hit = start + i;
                    break;
                }
        }
        if (hit) {
            entry.found = true;
            entry.t = static_cast<double>(*hit) * step;
            entry.sup_error = probe_sup(spec, probe, entry.t, eval_error);
            entry.measure_error = probe_exceedance(spec, full, entry.t, 3.0 / n, eval_error);
            entry.verified = entry.sup_error < tol && entry.measure_error < entry.area_bound;
        }
        out.entries.push_back(entry);
    }
    return out;
}

Placement place_compact(const RegionMask& K, double sigma_star, double m) {
    if (K.empty()) fail(ErrorKind::domain, "compact set is empty");
    if (!(m > 0.0)) fail(ErrorKind::domain, "box height m must be positive");
    if (!(sigma_star < 1.0)) fail(ErrorKind::domain, "sigma_star must be below 1");
    const GridSpec& g = K.grid();
    const CellRect cells = *K.bounding_cells();
    const double side = g.cell_side();
    const double x0 = g.origin().real() + cells.col0 * side;
    const double x1 = g.origin().real() + cells.col_end() * side;
    const double y0 = g.origin().imag() + cells.row0 * side;
    const double y1 = g.origin().imag() + cells.row_end() * side;

    Placement p{1.0, 0.0, K};
    if (x0 > sigma_star && x1 < 1.0 && y0 > 0.0 && y1 < m) return p;

    const double box_w = 1.0 - sigma_star;
    p.scale = 0.5 * std::min(box_w / (x1 - x0), m / (y1 - y0));
    const cplx from(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    const cplx to(0.5 * (sigma_star + 1.0), 0.5 * m);
    p.offset = to - p.scale * from;

    const int extra = std::max(0, static_cast<int>(std::ceil(-std::log2(p.scale) - 1e-12)));
    const Rect image_box{p.map({x0, y0}).real(), p.map({x0, y0}).imag(), p.map({x1, y1}).real(),
                         p.map({x1, y1}).imag()};
    const GridSpec fine = GridSpec::covering(image_box, g.level() + extra);
    p.image = RegionMask::from_predicate(fine, [&](cplx w) {
        const CellIndex c = g.cell_of(p.inverse(w));
        return K.contains(c.row, c.col);
    });
    return p;
}

SampledFunction transport(const SampledFunction& g, const Placement& placement) {
    SampledFunction out{placement.image, {}};
    out.values.reserve(static_cast<std::size_t>(placement.image.cell_count()));
    const GridSpec& src = g.domain.grid();
    placement.image.for_each_cell([&](int r, int c, std::int64_t) {
        const CellIndex from = src.cell_of(placement.inverse(placement.image.grid().cell_center(r, c)));
        const auto v = g.at(from.row, from.col);
        if (!v) fail(ErrorKind::precondition, "target is undefined on part of the placed set");
        out.values.push_back(*v);
    });
    return out;
}

void write_scan_csv(std::ostream& os, const std::vector<ScanSample>& samples, const char* value_name) {
    os << "t," << value_name << ",hit\n";
    for (const auto& s : samples) os << format_double(s.t) << ',' << format_double(s.discrepancy) << ',' << s.hit << '\n';
}

}  // namespace mlab
