#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mlab/lfun.hpp"
#include "mlab/planar.hpp"
#include "mlab/polyfree.hpp"
#include "mlab/reduction.hpp"
#include "mlab/universality.hpp"

#ifndef MLAB_VERSION
#define MLAB_VERSION "0.0.0"
#endif

namespace mlab::cli {

namespace {

using json = nlohmann::json;
using Target = std::function<cplx(cplx)>;

json pair_of(cplx z) { return json::array({z.real(), z.imag()}); }

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_double(item));
    return out;
}

std::pair<std::string, std::string> head_tail(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) return {text, ""};
    return {text.substr(0, colon), text.substr(colon + 1)};
}

std::ifstream open_input(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::validation, "cannot open input file '" + path + "'");
    return is;
}

// ------------------------------------------------------------ shared inputs

struct FunctionArgs {
    std::string function = "zeta";
    std::string spec_file;

    DirichletSeriesSpec load() const {
        if (!spec_file.empty()) {
            auto is = open_input(spec_file);
            return read_spec(is);
        }
        return spec_from_name(function);
    }
};

void add_function_options(CLI::App* sub, FunctionArgs& f) {
    sub->add_option("--function", f.function, "zeta, dirichlet-chi4, synthetic:roots=a;b or synthetic:coeffs=c0,c1");
    sub->add_option("--spec", f.spec_file, "key/value L-function spec file (overrides --function)");
}

// const:<c>, self:<t0>, roots:<a;b>, coeffs:<c0;c1>, z, exp, step:<x0>
Target make_target(const std::string& text, const DirichletSeriesSpec& spec) {
    const auto [head, arg] = head_tail(text);
    if (head == "const") {
        const cplx c = parse_complex(arg);
        return [c](cplx) { return c; };
    }
    if (head == "self") {
        const double t0 = arg.empty() ? 0.0 : parse_double(arg);
        return [spec, t0](cplx s) { return lfun_eval(spec, s + cplx(0.0, t0), 1e-12).value; };
    }
    if (head == "roots" || head == "coeffs") {
        std::vector<cplx> list;
        for (const auto& item : split(arg, ';')) list.push_back(parse_complex(item));
        if (head == "roots")
            return [list](cplx s) {
                cplx p = 1.0;
                for (const cplx& r : list) p *= s - r;
                return p;
            };
        return [list](cplx s) {
            cplx acc = 0.0;
            for (auto it = list.rbegin(); it != list.rend(); ++it) acc = acc * s + *it;
            return acc;
        };
    }
    if (head == "z") return [](cplx s) { return s; };
    if (head == "exp") return [](cplx s) { return std::exp(s); };
    if (head == "step") {
        const double x0 = arg.empty() ? 0.5 : parse_double(arg);
        return [x0](cplx s) { return s.real() < x0 ? cplx(0.0) : cplx(1.0); };
    }
    fail(ErrorKind::parse, "unknown target '" + text + "' (const:, self:, roots:, coeffs:, z, exp, step:)");
}

struct RegionArgs {
    std::string region;
    int level = 7;

    RegionMask load() const {
        const auto [head, arg] = head_tail(region);
        if (head == "mask") {
            auto is = open_input(arg);
            return read_mask(is);
        }
        const auto v = parse_doubles(arg);
        if (head == "disk" && v.size() == 3 && v[2] > 0.0) {
            const double r = v[2];
            return disk_mask(GridSpec::covering({v[0] - r, v[1] - r, v[0] + r, v[1] + r}, level), {v[0], v[1]}, r);
        }
        if (head == "rect" && v.size() == 4) {
            const Rect box{v[0], v[1], v[2], v[3]};
            if (box.degenerate()) fail(ErrorKind::validation, "degenerate rectangle '" + region + "'");
            return rect_mask(GridSpec::covering(box, level), box);
        }
        fail(ErrorKind::parse, "region must be disk:cx,cy,r, rect:x0,y0,x1,y1 or mask:FILE, got '" + region + "'");
    }
};

void add_region_options(CLI::App* sub, RegionArgs& r, const std::string& fallback, int level) {
    r.region = fallback;
    r.level = level;
    sub->add_option("--region", r.region, "disk:cx,cy,r | rect:x0,y0,x1,y1 | mask:FILE");
    sub->add_option("--level", r.level, "grid level k (cell side 2^-k)")->check(CLI::Range(0, 14));
}

struct ScanArgs {
    double t_min = 0.0;
    double t_max = 100.0;
    double step = 0.05;
    int refine = 0;
};

void add_scan_options(CLI::App* sub, ScanArgs& s) {
    sub->add_option("--t-min", s.t_min, "first shift");
    sub->add_option("--t-max", s.t_max, "last shift");
    sub->add_option("--step", s.step, "lattice spacing")->check(CLI::PositiveNumber);
    sub->add_option("--refine", s.refine, "bisection steps at hit/miss boundaries")->check(CLI::Range(0, 40));
}

ScanConfig scan_config(const ScanArgs& s, double epsilon) {
    ScanConfig c;
    c.t_min = s.t_min;
    c.t_max = s.t_max;
    c.step = s.step;
    c.refine_depth = s.refine;
    c.epsilon = epsilon;
    c.validate();
    return c;
}

json estimate_json(const DensityEstimate& e) {
    return {{"epsilon", e.epsilon}, {"T", e.T},     {"fraction", e.fraction}, {"hits", e.hits},
            {"samples", e.samples}, {"step", e.step}, {"refined_fraction", e.refined_fraction}};
}

// --------------------------------------------------------------- sessions

struct Session {
    std::string command;
    std::filesystem::path dir;
    json inputs = json::object();
    json outputs = json::object();
    json files = json::array();
    std::ostream* out = nullptr;

    std::ofstream create(const std::string& name) {
        std::ofstream os(dir / name);
        if (!os) fail(ErrorKind::validation, "cannot write '" + (dir / name).string() + "'");
        files.push_back(name);
        return os;
    }

    void finish() {
        json summary{{"command", command},
                     {"inputs", inputs},
                     {"outputs", outputs},
                     {"files", files},
                     {"version", MLAB_VERSION}};
        auto os = create("summary.json");
        os << summary.dump(2) << '\n';
    }
};

using Handler = std::function<void(Session&)>;

struct Command {
    CLI::App* app;
    Handler handler;
};

// ------------------------------------------------------------ subcommands

Command add_zeta_eval(CLI::App& app) {
    struct P {
        FunctionArgs f;
        std::string s = "2";
        double err = 1e-12;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("zeta-eval", "evaluate L(s) with an error bound");
    add_function_options(sub, p->f);
    sub->add_option("--s", p->s, "points, ';'-separated complex literals");
    sub->add_option("--err", p->err, "target absolute error")->check(CLI::PositiveNumber);
    return {sub, [p](Session& ss) {
                const auto spec = p->f.load();
                auto csv = ss.create("data.csv");
                csv << "s,value_re,value_im,error_bound,terms\n";
                json values = json::array();
                for (const auto& item : split(p->s, ';')) {
                    const cplx s = parse_complex(item);
                    const auto r = lfun_eval(spec, s, p->err);
                    csv << format_complex(s) << ',' << format_double(r.value.real()) << ','
                        << format_double(r.value.imag()) << ',' << format_double(r.error_bound) << ','
                        << r.terms_used << '\n';
                    values.push_back({{"s", pair_of(s)},
                                      {"value", pair_of(r.value)},
                                      {"error_bound", r.error_bound},
                                      {"terms", r.terms_used}});
                    *ss.out << format_complex(r.value) << " +- " << format_double(r.error_bound) << '\n';
                }
                ss.outputs["values"] = values;
            }};
}

Command add_lfun_check(CLI::App& app) {
    struct P {
        FunctionArgs f;
        std::uint64_t euler_primes = 100'000;
        int fe_points = 10;
        std::uint64_t seed = 1;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("lfun-check", "class axioms and functional-equation residuals");
    add_function_options(sub, p->f);
    sub->add_option("--euler-primes", p->euler_primes, "primes in the Euler product")->check(CLI::Range(2, 100'000'000));
    sub->add_option("--fe-points", p->fe_points, "random strip points for the functional equation")
        ->check(CLI::Range(0, 10'000));
    sub->add_option("--seed", p->seed, "seed for the random strip points");
    return {sub, [p](Session& ss) {
                const auto spec = p->f.load();
                AxiomOptions opt;
                opt.euler_primes = p->euler_primes;
                opt.functional_points.clear();
                std::mt19937_64 rng(p->seed);
                std::uniform_real_distribution<double> sigma(0.05, 0.95), t(1.0, 50.0);
                for (int i = 0; i < p->fe_points; ++i) {
                    const double x = sigma(rng);
                    opt.functional_points.emplace_back(x, t(rng));
                }
                const auto rep = check_axioms(spec, opt);
                auto csv = ss.create("data.csv");
                csv << "sigma,t,residual\n";
                double worst = 0.0;
                for (const auto& [s, res] : rep.functional_residuals) {
                    csv << format_double(s.real()) << ',' << format_double(s.imag()) << ',' << format_double(res)
                        << '\n';
                    worst = std::max(worst, res);
                }
                json pms = json::array();
                for (const auto& [x, v] : rep.prime_mean_square) pms.push_back({x, v});
                ss.outputs = {{"continuation", rep.continuation},
                              {"sigma_L", rep.sigma_L},
                              {"growth_sigma", rep.growth_sigma},
                              {"growth_ratio", rep.growth_ratio},
                              {"euler_degree", rep.euler_degree},
                              {"euler_gap", rep.euler_gap},
                              {"prime_mean_square", pms},
                              {"ramanujan_max", rep.ramanujan_max},
                              {"theta_estimate", rep.theta_estimate},
                              {"functional_residual_max", worst},
                              {"sigma_m_bound", rep.sigma_m_bound}};
                if (rep.sigma_m_known) ss.outputs["sigma_m_known"] = *rep.sigma_m_known;
                *ss.out << ss.outputs.dump() << '\n';
            }};
}

Command add_scan(CLI::App& app) {
    struct P {
        FunctionArgs f;
        RegionArgs region;
        ScanArgs scan;
        std::string target = "const:1";
        double epsilon = 0.8;
        bool allow_zeros = false;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("scan", "sup-norm shift statistic on a compact set");
    add_function_options(sub, p->f);
    add_region_options(sub, p->region, "disk:0.75,0,0.03", 7);
    add_scan_options(sub, p->scan);
    sub->add_option("--target", p->target, "target function on K");
    sub->add_option("--epsilon", p->epsilon, "sup-norm tolerance")->check(CLI::PositiveNumber);
    sub->add_flag("--allow-zeros", p->allow_zeros, "accept targets with zeros on K");
    return {sub, [p](Session& ss) {
                const auto spec = p->f.load();
                const auto K = p->region.load();
                const auto g = SampledFunction::sample(K, make_target(p->target, spec));
                auto cfg = scan_config(p->scan, p->epsilon);
                cfg.require_zero_free = !p->allow_zeros;
                const auto scan = density_scan(spec, K, g, cfg);
                auto csv = ss.create("data.csv");
                write_scan_csv(csv, scan.samples, "sup_discrepancy");
                ss.outputs = estimate_json(scan.estimate);
                ss.outputs["K_area"] = K.area();
                ss.outputs["cell_side"] = K.grid().cell_side();
                *ss.out << ss.outputs.dump() << '\n';
            }};
}

Command add_scan_measure(CLI::App& app) {
    struct P {
        FunctionArgs f;
        RegionArgs region;
        ScanArgs scan;
        std::string target = "const:1";
        double epsilon = 0.1;
        double area_epsilon = -1.0;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("scan-measure", "measure-discrepancy shift statistic");
    add_function_options(sub, p->f);
    add_region_options(sub, p->region, "rect:0.7,0.1,0.8,0.2", 6);
    add_scan_options(sub, p->scan);
    sub->add_option("--target", p->target, "target function on A");
    sub->add_option("--epsilon", p->epsilon, "pointwise tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--area-epsilon", p->area_epsilon, "area threshold (default: epsilon)");
    return {sub, [p](Session& ss) {
                const auto spec = p->f.load();
                const auto A = p->region.load();
                const auto phi = SampledFunction::sample(A, make_target(p->target, spec));
                const auto cfg = scan_config(p->scan, p->epsilon);
                std::optional<double> area;
                if (p->area_epsilon >= 0.0) area = p->area_epsilon;
                const auto scan = measure_density_scan(spec, A, phi, p->epsilon, cfg, area);
                auto csv = ss.create("data.csv");
                write_scan_csv(csv, scan.samples, "measure_discrepancy");
                ss.outputs = estimate_json(scan.estimate);
                ss.outputs["A_area"] = A.area();
                ss.outputs["cell_side"] = A.grid().cell_side();
                *ss.out << ss.outputs.dump() << '\n';
            }};
}

Command add_sequence(CLI::App& app) {
    struct P {
        FunctionArgs f;
        RegionArgs region;
        std::string target = "const:1";
        int n_max = 2;
        double t_max = 2000.0;
        double step = 0.05;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("sequence", "shift sequence for a measurable target");
    add_function_options(sub, p->f);
    add_region_options(sub, p->region, "rect:0.7,0,0.8,0.1", 6);
    sub->add_option("--target", p->target, "target function on A");
    sub->add_option("--n-max", p->n_max, "largest n")->check(CLI::Range(1, 64));
    sub->add_option("--t-max", p->t_max, "end of the shift range")->check(CLI::PositiveNumber);
    sub->add_option("--step", p->step, "lattice spacing")->check(CLI::PositiveNumber);
    return {sub, [p](Session& ss) {
                const auto spec = p->f.load();
                const auto A = p->region.load();
                const auto f = SampledFunction::sample(A, make_target(p->target, spec));
                const auto res = find_shift_sequence(spec, f, p->n_max, p->t_max, p->step);
                auto csv = ss.create("data.csv");
                csv << "n,found,t,sup_error,measure_error,area_bound,verified,piece_count,reduction_area_lost\n";
                json entries = json::array();
                for (const auto& e : res.entries) {
                    csv << e.n << ',' << (e.found ? 1 : 0) << ',' << format_double(e.t) << ','
                        << format_double(e.sup_error) << ',' << format_double(e.measure_error) << ','
                        << format_double(e.area_bound) << ',' << (e.verified ? 1 : 0) << ',' << e.piece_count << ','
                        << format_double(e.reduction_area_lost) << '\n';
                    entries.push_back({{"n", e.n},
                                       {"found", e.found},
                                       {"t", e.t},
                                       {"sup_error", e.sup_error},
                                       {"measure_error", e.measure_error},
                                       {"area_bound", e.area_bound},
                                       {"verified", e.verified}});
                }
                ss.outputs["entries"] = entries;
                *ss.out << ss.outputs.dump() << '\n';
            }};
}

Command add_self_approx(CLI::App& app) {
    struct P {
        FunctionArgs f;
        RegionArgs region;
        ScanArgs scan;
        std::string epsilons = "0.1,0.2,0.4";
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("self-approx", "how often L(s + it) approximates L(s) on K");
    add_function_options(sub, p->f);
    add_region_options(sub, p->region, "disk:0.75,0,0.03", 7);
    p->scan.t_max = 50.0;
    add_scan_options(sub, p->scan);
    sub->add_option("--epsilons", p->epsilons, "comma-separated tolerances");
    return {sub, [p](Session& ss) {
                const auto spec = p->f.load();
                const auto K = p->region.load();
                const auto g = SampledFunction::sample(K, make_target("self:0", spec));
                auto csv = ss.create("data.csv");
                csv << "epsilon,fraction,hits,samples,refined_fraction\n";
                json rows = json::array();
                for (double eps : parse_doubles(p->epsilons)) {
                    const auto e = density_statistic(spec, K, g, scan_config(p->scan, eps));
                    csv << format_double(eps) << ',' << format_double(e.fraction) << ',' << e.hits << ','
                        << e.samples << ',' << format_double(e.refined_fraction) << '\n';
                    rows.push_back(estimate_json(e));
                }
                ss.outputs["estimates"] = rows;
                *ss.out << ss.outputs.dump() << '\n';
            }};
}

Command add_zeros_census(CLI::App& app) {
    struct P {
        FunctionArgs f;
        double sigma_star = 0.6;
        double sigma_hi = 1.2;
        double T = 100.0;
        double m = 10.0;
        int n = 0;
        double resolution = 0.1;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("zeros-census", "zero counts right of sigma* and the zero-free interval fraction");
    add_function_options(sub, p->f);
    sub->add_option("--sigma-star", p->sigma_star, "left edge of the boxes");
    sub->add_option("--sigma-hi", p->sigma_hi, "right edge of the boxes");
    sub->add_option("--T", p->T, "height of the census box")->check(CLI::PositiveNumber);
    sub->add_option("--m", p->m, "interval length")->check(CLI::PositiveNumber);
    sub->add_option("--n", p->n, "number of intervals (default T / m)")->check(CLI::NonNegativeNumber);
    sub->add_option("--resolution", p->resolution, "initial contour spacing")->check(CLI::PositiveNumber);
    return {sub, [p](Session& ss) {
                if (!(p->sigma_hi > p->sigma_star)) fail(ErrorKind::validation, "sigma-hi must exceed sigma-star");
                const auto spec = p->f.load();
                CensusOptions opt;
                opt.resolution = p->resolution;
                const auto count = zero_count_rectangle(spec, {p->sigma_star, p->sigma_hi, 0.0, p->T}, opt);
                const int n = p->n > 0 ? p->n : std::max(1, static_cast<int>(std::floor(p->T / p->m)));
                const auto nu = zero_free_interval_fraction(spec, p->sigma_star, p->m, n, p->sigma_hi, opt);
                auto csv = ss.create("data.csv");
                csv << "k,t_lo,t_hi,count\n";
                for (std::size_t k = 0; k < nu.counts.size(); ++k)
                    csv << k << ',' << format_double(k * p->m) << ',' << format_double((k + 1) * p->m) << ','
                        << nu.counts[k] << '\n';
                ss.outputs = {{"count", count.count},
                              {"contour_samples", count.samples},
                              {"min_modulus", count.min_modulus},
                              {"intervals", n},
                              {"zero_free_intervals", nu.zero_free},
                              {"fraction", nu.fraction}};
                *ss.out << ss.outputs.dump() << '\n';
            }};
}

Command add_rouche(CLI::App& app) {
    struct P {
        FunctionArgs f;
        std::string center = "0.5+14.134725141734693i";
        double radius = 0.1;
        double shift = 0.0;
        int samples = 512;
        std::string target = "roots:0.5+14.134725141734693i";
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("rouche", "compare windings of L(s + i shift) and a target on a circle");
    add_function_options(sub, p->f);
    sub->add_option("--center", p->center, "circle center");
    sub->add_option("--radius", p->radius, "circle radius")->check(CLI::PositiveNumber);
    sub->add_option("--shift", p->shift, "vertical shift of L");
    sub->add_option("--samples", p->samples, "points on the circle")->check(CLI::Range(8, 1'000'000));
    sub->add_option("--target", p->target, "comparison function g");
    return {sub, [p](Session& ss) {
                const auto spec = p->f.load();
                const auto g = make_target(p->target, spec);
                const cplx c = parse_complex(p->center);
                std::vector<cplx> fv, gv;
                auto csv = ss.create("data.csv");
                csv << "theta,f_re,f_im,g_re,g_im\n";
                for (int k = 0; k < p->samples; ++k) {
                    const double theta = 2.0 * std::numbers::pi * k / p->samples;
                    const cplx s = c + std::polar(p->radius, theta);
                    fv.push_back(lfun_eval(spec, s + cplx(0.0, p->shift), 1e-12).value);
                    gv.push_back(g(s));
                    csv << format_double(theta) << ',' << format_double(fv.back().real()) << ','
                        << format_double(fv.back().imag()) << ',' << format_double(gv.back().real()) << ','
                        << format_double(gv.back().imag()) << '\n';
                }
                const auto r = rouche_compare(fv, gv);
                ss.outputs = {{"equal", r.equal}, {"winding_f", r.winding_f}, {"winding_g", r.winding_g}};
                *ss.out << ss.outputs.dump() << '\n';
            }};
}

Command add_polyfree(CLI::App& app) {
    struct P {
        FunctionArgs f;
        RegionArgs region;
        std::string target = "z";
        double epsilon = 0.1;
        int degree = 4;
        int max_degree = 60;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("polyfree", "zero-free polynomial approximation in measure");
    add_function_options(sub, p->f);
    add_region_options(sub, p->region, "rect:0,0,1,1", 7);
    sub->add_option("--target", p->target, "function g on K");
    sub->add_option("--epsilon", p->epsilon, "measure tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--degree", p->degree, "starting degree")->check(CLI::Range(0, 200));
    sub->add_option("--max-degree", p->max_degree, "degree limit")->check(CLI::Range(0, 200));
    return {sub, [p](Session& ss) {
                const auto spec = p->f.load();
                const auto K = p->region.load();
                const auto g = SampledFunction::sample(K, make_target(p->target, spec));
                ZeroFreeOptions opt;
                opt.max_degree = p->max_degree;
                const auto res = zero_free_approx_in_measure(g, p->epsilon, p->degree, opt);
                const auto& r = res.report;
                ss.create("poly.json") << poly_to_json(res.poly) << '\n';
                {
                    auto os = ss.create("K_eps.mask");
                    write_mask(os, r.K_eps);
                }
                auto csv = ss.create("data.csv");
                csv << "x,y,p_re,p_im,g_re,g_im\n";
                const auto gk = g.restricted(r.K_eps);
                r.K_eps.for_each_cell([&](int row, int col, std::int64_t k) {
                    const cplx z = r.K_eps.grid().cell_center(row, col);
                    const cplx pz = res.poly(z);
                    const cplx gz = gk.values[static_cast<std::size_t>(k)];
                    csv << format_double(z.real()) << ',' << format_double(z.imag()) << ',' << format_double(pz.real())
                        << ',' << format_double(pz.imag()) << ',' << format_double(gz.real()) << ','
                        << format_double(gz.imag()) << '\n';
                });
                ss.outputs = {{"j", r.j},
                              {"degree", r.degree},
                              {"sup_error_on_Keps", r.sup_error_on_Keps},
                              {"min_modulus_on_Keps", r.min_modulus_on_Keps},
                              {"min_modulus_on_K", r.min_modulus_on_K},
                              {"area_removed", r.area_removed},
                              {"gap_area", r.gap_area},
                              {"carve_area", r.carve_area},
                              {"fit_tolerance", r.fit_tolerance}};
                *ss.out << ss.outputs.dump() << '\n';
            }};
}

struct DomainArgs {
    std::string domain = "disk:0,0,1";
    int level = 6;
    int samples = 64;

    DomainSpec load() const {
        const auto [head, arg] = head_tail(domain);
        if (head == "file") {
            auto is = open_input(arg);
            auto d = read_domain(is);
            d.validate();
            return d;
        }
        if (head == "mask") {
            auto is = open_input(arg);
            return DomainSpec::from_mask(read_mask(is), samples);
        }
        const auto v = parse_doubles(arg);
        if (head == "disk" && v.size() == 3 && v[2] > 0.0) {
            const double r = v[2];
            return DomainSpec::disk(GridSpec::covering({v[0] - r, v[1] - r, v[0] + r, v[1] + r}, level),
                                    {{v[0], v[1]}, r}, samples);
        }
        fail(ErrorKind::parse, "domain must be disk:cx,cy,r, mask:FILE or file:FILE, got '" + domain + "'");
    }
};

void add_domain_options(CLI::App* sub, DomainArgs& d) {
    sub->add_option("--domain", d.domain, "disk:cx,cy,r | mask:FILE | file:DOMAIN_FILE");
    sub->add_option("--level", d.level, "grid level for disk domains")->check(CLI::Range(0, 12));
    sub->add_option("--samples", d.samples, "boundary samples")->check(CLI::Range(1, 100'000));
}

Command add_dirichlet_build(CLI::App& app) {
    struct P {
        DomainArgs domain;
        int J = 6;
        std::string phi = "const:1";
        std::string radii = "0.4,0.2,0.1,0.05";
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("dirichlet-build", "disks, shells and the piecewise constant skeleton");
    add_domain_options(sub, p->domain);
    sub->add_option("--J", p->J, "number of disks")->check(CLI::Range(1, 30));
    sub->add_option("--phi", p->phi, "boundary data, real part of a target at the samples");
    sub->add_option("--radii", p->radii, "descending radii for the density check");
    return {sub, [p](Session& ss) {
                const auto U = p->domain.load();
                const auto phi_fn = make_target(p->phi, DirichletSeriesSpec::zeta());
                std::vector<double> phi;
                for (const cplx& q : U.boundary_samples) phi.push_back(phi_fn(q).real());
                const auto sk = build_dirichlet_skeleton(U, phi, p->J);
                const auto checks = skeleton_density_check(sk, U, parse_doubles(p->radii));
                {
                    auto os = ss.create("domain.txt");
                    write_domain(os, U);
                }
                {
                    auto os = ss.create("F.mask");
                    write_mask(os, sk.F);
                }
                {
                    auto os = ss.create("skeleton.piecewise");
                    write_piecewise(os, sk.g);
                }
                auto csv = ss.create("data.csv");
                csv << "p_re,p_im,r,ratio,bound,ok\n";
                bool all_ok = true;
                for (const auto& c : checks) {
                    csv << format_double(c.p.real()) << ',' << format_double(c.p.imag()) << ',' << format_double(c.r)
                        << ',' << format_double(c.ratio) << ',' << format_double(c.bound) << ',' << (c.ok ? 1 : 0)
                        << '\n';
                    all_ok = all_ok && c.ok;
                }
                json disks = json::array();
                for (std::size_t j = 0; j < sk.family.disks.size(); ++j)
                    disks.push_back({{"center", pair_of(sk.family.disks[j].center)},
                                     {"radius", sk.family.disks[j].radius},
                                     {"budget", sk.family.budgets[j]},
                                     {"margin", sk.family.margins[j]},
                                     {"shell_area", sk.family.shells[j].area()},
                                     {"shell_level", sk.family.shells[j].grid().level()}});
                ss.outputs = {{"disks", disks},
                              {"fine_level", sk.F.grid().level()},
                              {"U_area", U.U.area()},
                              {"F_area", sk.F.area()},
                              {"piece_count", sk.g.pieces.size()},
                              {"density_checks", checks.size()},
                              {"density_ok", all_ok}};
                *ss.out << "pieces " << sk.g.pieces.size() << " F_area " << format_double(sk.F.area())
                        << " density_ok " << (all_ok ? "true" : "false") << '\n';
            }};
}

Command add_density(CLI::App& app) {
    struct P {
        DomainArgs domain;
        std::string set;
        std::string point;
        std::string radii = "0.5,0.25,0.125,0.0625";
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("density", "boundary density of a set relative to U");
    add_domain_options(sub, p->domain);
    sub->add_option("--set", p->set, "mask file of the set A")->required();
    sub->add_option("--point", p->point, "boundary point (default: the first boundary sample)");
    sub->add_option("--radii", p->radii, "strictly descending radii");
    return {sub, [p](Session& ss) {
                const auto U = p->domain.load();
                auto is = open_input(p->set);
                const auto A = read_mask(is);
                if (U.boundary_samples.empty()) fail(ErrorKind::validation, "domain has no boundary samples");
                const cplx pt = p->point.empty() ? U.boundary_samples.front() : parse_complex(p->point);
                const auto ratios = boundary_density(A, U, pt, parse_doubles(p->radii));
                auto csv = ss.create("data.csv");
                csv << "r,ratio\n";
                json rows = json::array();
                for (const auto& d : ratios) {
                    csv << format_double(d.r) << ',' << (d.ratio ? format_double(*d.ratio) : "") << '\n';
                    rows.push_back({{"r", d.r}, {"ratio", d.ratio ? json(*d.ratio) : json(nullptr)}});
                }
                ss.outputs = {{"point", pair_of(pt)}, {"ratios", rows}};
                *ss.out << ss.outputs.dump() << '\n';
            }};
}

Command add_harmonic_demo(CLI::App& app) {
    struct P {
        RegionArgs region;
        std::string target = "step:0.5";
        int n_max = 4;
        int sources = 64;
        int poly_degree = 4;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("harmonic-demo", "harmonic functions converging in measure to a target");
    add_region_options(sub, p->region, "rect:0,0,1,1", 7);
    sub->add_option("--target", p->target, "real target v (real part is used)");
    sub->add_option("--n-max", p->n_max, "largest n")->check(CLI::Range(1, 32));
    sub->add_option("--sources", p->sources, "sources per unit of n")->check(CLI::Range(0, 100'000));
    sub->add_option("--poly-degree", p->poly_degree, "harmonic polynomial degree")->check(CLI::Range(0, 60));
    return {sub, [p](Session& ss) {
                const auto E = p->region.load();
                const auto v = SampledFunction::sample(E, make_target(p->target, DirichletSeriesSpec::zeta()));
                HarmonicOptions opt;
                opt.poly_degree = p->poly_degree;
                const auto steps = harmonic_measure_sequence(v, p->n_max, p->sources, opt);
                auto csv = ss.create("data.csv");
                csv << "n,pieces,sources,fit_error,exceedance,reduction_loss,fit_slack,bound\n";
                json rows = json::array();
                for (const auto& st : steps) {
                    csv << st.n << ',' << st.piece_count << ',' << st.fit.sources.size() << ','
                        << format_double(st.fit.fit_error) << ',' << format_double(st.exceedance_area) << ','
                        << format_double(st.reduction_loss) << ',' << format_double(st.fit_slack) << ','
                        << format_double(st.bound) << '\n';
                    rows.push_back({{"n", st.n},
                                    {"exceedance", st.exceedance_area},
                                    {"bound", st.bound},
                                    {"fit_error", st.fit.fit_error}});
                }
                ss.create("fit.json") << harmonic_fit_to_json(steps.back().fit) << '\n';
                ss.outputs["steps"] = rows;
                *ss.out << ss.outputs.dump() << '\n';
            }};
}

// ------------------------------------------------------------------ driver

const std::map<std::pair<std::string, std::string>, std::string>& aliases() {
    static const std::map<std::pair<std::string, std::string>, std::string> table{
        {{"zeta", "eval"}, "zeta-eval"},
        {{"lfun", "check"}, "lfun-check"},
        {{"universality", "scan"}, "scan"},
        {{"universality", "scan-measure"}, "scan-measure"},
        {{"universality", "sequence"}, "sequence"},
        {{"universality", "self-approx"}, "self-approx"},
        {{"zeros", "census"}, "zeros-census"},
        {{"zeros", "rouche"}, "rouche"},
        {{"dirichlet", "build"}, "dirichlet-build"},
        {{"boundary", "density"}, "density"},
        {{"harmonic", "demo"}, "harmonic-demo"},
    };
    return table;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Flat "key = value" lines become "--key=value" arguments placed before the
// command-line flags, so the flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty() || args.empty()) return args;
    auto is = open_input(path);
    std::vector<std::string> extra;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::parse, path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.rfind("--", 0) != 0) key = "--" + key;
        if (key == "--config") continue;
        extra.push_back(key + "=" + value);
    }
    args.insert(args.begin() + 1, extra.begin(), extra.end());
    return args;
}

void report(std::ostream& err, std::string_view kind, const std::string& message) {
    err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args = raw;
    if (args.size() >= 2) {
        const auto it = aliases().find({args[0], args[1]});
        if (it != aliases().end()) {
            args.erase(args.begin());
            args[0] = it->second;
        }
    }

    CLI::App app{"Desk-scale laboratory for universality and approximation in measure", "mlab"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", MLAB_VERSION);

    std::vector<Command> commands{add_zeta_eval(app),   add_lfun_check(app),    add_scan(app),
                                  add_scan_measure(app), add_sequence(app),     add_self_approx(app),
                                  add_zeros_census(app), add_rouche(app),       add_polyfree(app),
                                  add_dirichlet_build(app), add_density(app),   add_harmonic_demo(app)};
    auto out_dirs = std::make_shared<std::vector<std::string>>(commands.size(), "mlab-out");
    for (std::size_t i = 0; i < commands.size(); ++i) {
        commands[i].app->add_option("--out", (*out_dirs)[i], "output directory");
        commands[i].app->add_option("--config", "key = value file; command-line flags override it");
    }

    if (!args.empty() && args[0].rfind("-", 0) != 0 && app.get_subcommand_no_throw(args[0]) == nullptr) {
        report(err, "usage", "unknown command '" + args[0] + "'");
        return 2;
    }
    try {
        args = expand_config(std::move(args));
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << MLAB_VERSION << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        report(err, "usage", e.what());
        return 2;
    } catch (const Error& e) {
        report(err, to_string(e.kind()), e.what());
        return 2;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        CLI::App* sub = commands[i].app;
        if (!sub->parsed()) continue;
        Session ss;
        ss.command = sub->get_name();
        ss.dir = (*out_dirs)[i];
        ss.out = &out;
        for (const CLI::Option* opt : sub->get_options()) {
            const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
            if (name == "help" || name == "config" || name == "out") continue;
            const auto& res = opt->results();
            std::string value;
            if (opt->get_items_expected_max() == 0) {
                value = opt->as<bool>() ? "true" : "false";
            } else {
                // single-valued options keep the last occurrence
                value = res.empty() ? opt->get_default_str() : res.back();
            }
            ss.inputs[name] = value;
        }
        try {
            std::filesystem::create_directories(ss.dir);
            commands[i].handler(ss);
            ss.finish();
        } catch (const Error& e) {
            report(err, to_string(e.kind()), e.what());
            return 1;
        } catch (const std::exception& e) {
            report(err, "internal", e.what());
            return 1;
        }
        return 0;
    }
    report(err, "usage", "no subcommand given");
    return 2;
}

}  // namespace mlab::cli
