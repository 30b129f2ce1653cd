#include "mlab/polyfree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace mlab {

cplx Poly::operator()(cplx z) const {
    const cplx w = (z - center) / scale;
    cplx acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * w + *it;
    return acc;
}

int Poly::degree() const noexcept {
    for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k)
        if (coeffs[k] != cplx(0.0)) return k;
    return -1;
}

void Poly::trim() { coeffs.resize(static_cast<std::size_t>(degree() + 1)); }

std::vector<cplx> Poly::monomial_coeffs() const {
    // expand sum c_k (z - center)^k / scale^k by repeated multiplication
    std::vector<cplx> out(coeffs.size(), 0.0);
    std::vector<cplx> power{1.0};  // ((z - center) / scale)^k
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        for (std::size_t i = 0; i < power.size(); ++i) out[i] += coeffs[k] * power[i];
        std::vector<cplx> next(power.size() + 1, 0.0);
        for (std::size_t i = 0; i < power.size(); ++i) {
            next[i + 1] += power[i] / scale;
            next[i] -= power[i] * center / scale;
        }
        power = std::move(next);
    }
    return out;
}

namespace {

constexpr double kConditionLimit = 1e12;

cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm2(const std::vector<cplx>& a) {
    double acc = 0.0;
    for (const cplx& v : a) acc += std::norm(v);
    return std::sqrt(acc);
}

}  // namespace

namespace {

struct FitProblem {
    std::vector<cplx> points;
    std::vector<cplx> w;  // (points - center) / scale
    cplx center;
    double scale = 1.0;
};

FitProblem prepare(const SampledFunction& g, int degree) {
    g.validate();
    if (degree < 0) fail(ErrorKind::precondition, "degree must be non-negative");
    if (g.domain.empty()) fail(ErrorKind::precondition, "cannot fit on an empty set");
    if (!is_complement_connected(g.domain))
        fail(ErrorKind::precondition, "complement of the compact set is not connected");
    const auto m = static_cast<std::size_t>(g.domain.cell_count());
    if (static_cast<std::size_t>(degree) + 1 > m)
        fail(ErrorKind::degree_limit, "degree " + std::to_string(degree) + " exceeds the " + std::to_string(m) +
                                          " available samples");
    FitProblem fp;
    fp.points.reserve(m);
    const GridSpec& grid = g.domain.grid();
    g.domain.for_each_cell([&](int r, int c, std::int64_t) { fp.points.push_back(grid.cell_center(r, c)); });
    const CellRect box = *g.domain.bounding_cells();
    fp.center = {grid.origin().real() + (box.col0 + 0.5 * box.cols) * grid.cell_side(),
                 grid.origin().imag() + (box.row0 + 0.5 * box.rows) * grid.cell_side()};
    fp.scale = 0.0;
    for (const cplx& z : fp.points) fp.scale = std::max(fp.scale, std::abs(z - fp.center));
    if (fp.scale == 0.0) fp.scale = grid.cell_side();
    fp.w.resize(m);
    for (std::size_t i = 0; i < m; ++i) fp.w[i] = (fp.points[i] - fp.center) / fp.scale;
    return fp;
}

// Weighted least squares: minimizes sum_i weight_i |p(z_i) - value_i|^2.
std::vector<cplx> solve_weighted(const FitProblem& fp, const std::vector<cplx>& values,
                                 const std::vector<double>& weights, int degree) {
    const std::size_t m = fp.w.size();
    std::vector<double> root(m);
    for (std::size_t i = 0; i < m; ++i) root[i] = std::sqrt(weights[i]);

    // Q R = diag(root) V, V[:, k] = w^k
    const auto cols = static_cast<std::size_t>(degree) + 1;
    std::vector<std::vector<cplx>> q;
    std::vector<std::vector<cplx>> r(cols, std::vector<cplx>(cols, 0.0));
    std::vector<cplx> v(m, 1.0);
    for (std::size_t k = 0; k < cols; ++k) {
        if (k > 0)
            for (std::size_t i = 0; i < m; ++i) v[i] *= fp.w[i];
        std::vector<cplx> u(m);
        for (std::size_t i = 0; i < m; ++i) u[i] = root[i] * v[i];
        const double original = norm2(u);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < k; ++j) {
                const cplx h = dot(q[j], u);
                r[j][k] += h;
                for (std::size_t i = 0; i < m; ++i) u[i] -= h * q[j][i];
            }
        }
        const double rest = norm2(u);
        if (!(rest * kConditionLimit > original))
            fail(ErrorKind::degree_limit, "monomial basis loses conditioning at degree " + std::to_string(k) +
                                              " (residual ratio " + format_double(rest / original) + ")");
        r[k][k] = rest;
        for (cplx& x : u) x /= rest;
        q.push_back(std::move(u));
    }

    std::vector<cplx> rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = root[i] * values[i];
    std::vector<cplx> proj(cols);
    for (std::size_t k = 0; k < cols; ++k) proj[k] = dot(q[k], rhs);
    std::vector<cplx> a(cols);
    for (std::size_t k = cols; k-- > 0;) {
        cplx acc = proj[k];
        for (std::size_t j = k + 1; j < cols; ++j) acc -= r[k][j] * a[j];
        a[k] = acc / r[k][k];
    }
    return a;
}

FitResult measure(const FitProblem& fp, const std::vector<cplx>& values, std::vector<cplx> coeffs,
                  std::vector<double>* errors = nullptr) {
    FitResult out;
    out.poly = Poly{std::move(coeffs), fp.center, fp.scale};
    double sq = 0.0;
    if (errors) errors->resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double e = std::abs(out.poly(fp.points[i]) - values[i]);
        out.sup_error = std::max(out.sup_error, e);
        sq += e * e;
        if (errors) (*errors)[i] = e;
    }
    out.rms_error = std::sqrt(sq / static_cast<double>(values.size()));
    return out;
}

}  // namespace

FitResult mergelyan_fit(const SampledFunction& g, int degree) {
    const FitProblem fp = prepare(g, degree);
    const std::vector<double> uniform(fp.w.size(), 1.0);
    return measure(fp, g.values, solve_weighted(fp, g.values, uniform, degree));
}

FitResult minimax_fit(const SampledFunction& g, int degree, int iterations) {
    const FitProblem fp = prepare(g, degree);
    std::vector<double> weights(fp.w.size(), 1.0 / static_cast<double>(fp.w.size()));
    std::vector<double> errors;
    FitResult best = measure(fp, g.values, solve_weighted(fp, g.values, weights, degree), &errors);
    for (int it = 0; it < iterations; ++it) {
        // Lawson update: weight_i <- weight_i |e_i|, renormalized
        double total = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) total += (weights[i] *= errors[i]);
        if (!(total > 0.0)) break;
        for (double& w : weights) w /= total;
        FitResult next;
        try {
            next = measure(fp, g.values, solve_weighted(fp, g.values, weights, degree), &errors);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::degree_limit) throw;
            break;  // weights collapsed onto too few points
        }
        if (next.sup_error < best.sup_error) best = next;
    }
    return best;
}

ZeroFreeResult zero_free_approx_in_measure(const SampledFunction& g, double epsilon, int degree,
                                           const ZeroFreeOptions& options) {
    g.validate();
    if (!(epsilon > 0.0)) fail(ErrorKind::precondition, "epsilon must be positive");
    if (degree < 0) fail(ErrorKind::precondition, "degree must be non-negative");
    const RegionMask& K = g.domain;
    if (K.empty()) fail(ErrorKind::precondition, "compact set is empty");

    const int j0 = static_cast<int>(std::ceil(1.0 / epsilon - 1e-12));
    int j = 0;
    ZeroSplit split{K, K};
    double gap = 0.0;
    for (int cand = std::max(1, j0); cand <= std::max(1, j0) * options.max_j_factor; ++cand) {
        split = zero_split(g, cand);
        gap = K.minus(split.small).minus(split.large).area();
        if (gap < epsilon) {
            j = cand;
            break;
        }
    }
    if (j == 0)
        fail(ErrorKind::resolution, "no j in [" + std::to_string(j0) + ", " +
                                        std::to_string(j0 * options.max_j_factor) +
                                        "] keeps the gap area below epsilon at this grid level");

    ZeroFreeReport rep{K};
    rep.j = j;
    rep.gap_area = gap;
    const RegionMask kept = split.small.united(split.large);
    const int holes = hole_count(kept);
    RegionMask k_eps = kept;
    if (holes > 0) {
        const Carving carve = carve_connectors(kept, epsilon / holes);
        k_eps = carve.mask;
        rep.carve_area = carve.removed_area;
    }
    rep.K_eps = k_eps;
    rep.area_removed = K.area() - k_eps.area();
    const double plateau = 1.0 / j;

    SampledFunction g_eps{k_eps, {}};
    g_eps.values.reserve(static_cast<std::size_t>(k_eps.cell_count()));
    bool any_large = false;
    k_eps.for_each_cell([&](int r, int c, std::int64_t) {
        if (split.small.contains(r, c)) {
            g_eps.values.push_back(plateau);
        } else {
            g_eps.values.push_back(*g.at(r, c));
            any_large = true;
        }
    });

    rep.fit_tolerance = std::min(epsilon / 2.0, plateau / 2.0);
    Poly best;
    if (!any_large || k_eps.empty()) {
        best = Poly::constant(plateau);
        rep.degree = 0;
    } else {
        double best_error = std::numeric_limits<double>::infinity();
        bool ok = false;
        for (int d = degree; d <= options.max_degree; d += 2) {
            FitResult fit;
            try {
                fit = mergelyan_fit(g_eps, d);
                if (fit.sup_error >= rep.fit_tolerance) {
                    FitResult refined = minimax_fit(g_eps, d, options.lawson_iterations);
                    if (refined.sup_error < fit.sup_error) fit = std::move(refined);
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::degree_limit) throw;
                break;
            }
            if (fit.sup_error < best_error) {
                best_error = fit.sup_error;
                best = fit.poly;
                rep.degree = d;
            }
            if (fit.sup_error < rep.fit_tolerance) {
                ok = true;
                break;
            }
        }
        if (!ok)
            fail(ErrorKind::approximation_failure, "best sup error " + format_double(best_error) + " at degree " +
                                                       std::to_string(rep.degree) + " misses the tolerance " +
                                                       format_double(rep.fit_tolerance));
    }

    rep.min_modulus_on_Keps = std::numeric_limits<double>::infinity();
    rep.sup_error_on_Keps = 0.0;
    k_eps.for_each_cell([&](int r, int c, std::int64_t k) {
        const cplx v = best(k_eps.grid().cell_center(r, c));
        rep.min_modulus_on_Keps = std::min(rep.min_modulus_on_Keps, std::abs(v));
        rep.sup_error_on_Keps = std::max(rep.sup_error_on_Keps, std::abs(v - g_eps.values[static_cast<std::size_t>(k)]));
    });
    rep.min_modulus_on_K = std::numeric_limits<double>::infinity();
    K.for_each_cell([&](int r, int c, std::int64_t) {
        rep.min_modulus_on_K = std::min(rep.min_modulus_on_K, std::abs(best(K.grid().cell_center(r, c))));
    });
    return {best, rep};
}

std::string poly_to_json(const Poly& p) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const cplx& c : p.coeffs) coeffs.push_back({c.real(), c.imag()});
    nlohmann::json j;
    j["center"] = {p.center.real(), p.center.imag()};
    j["scale"] = p.scale;
    j["coefficients"] = coeffs;
    return j.dump();
}

Poly poly_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        Poly p;
        const auto& c = j.at("center");
        p.center = {c.at(0).get<double>(), c.at(1).get<double>()};
        p.scale = j.at("scale").get<double>();
        for (const auto& e : j.at("coefficients")) p.coeffs.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
        if (!(p.scale > 0.0)) fail(ErrorKind::validation, "polynomial scale must be positive");
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse, std::string("polynomial JSON: ") + e.what());
    }
}

}  // namespace mlab
