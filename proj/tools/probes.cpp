#include "probes.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "finitype/errors.hpp"
#include "finitype/frequency.hpp"
#include "finitype/geometry.hpp"
#include "finitype/maximal.hpp"
#include "finitype/oscillatory.hpp"
#include "finitype/varcoef.hpp"
#include "oracles.hpp"

namespace finitype::cli {

namespace {

using ojson = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double tol(const ExperimentConfig& c, const std::string& key) {
    const auto it = c.tolerances.find(key);
    if (it == c.tolerances.end()) throw Error(ErrorKind::ConfigInvalid, "missing tolerance '" + key + "'");
    return it->second;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::ConfigInvalid, what);
}

CutoffProfile make_cutoff(const CutoffSpec& s, const CutoffProfile& fallback) {
    if (s.kind == "default") return fallback;
    if (s.kind == "uniform") return CutoffProfile::uniform();
    require(s.radius > 0.0, "cutoff radius must be positive");
    if (s.kind == "bump") return CutoffProfile::bump(s.center, s.radius);
    if (s.kind == "plateau") return CutoffProfile::plateau(s.center, s.radius);
    throw Error(ErrorKind::ConfigInvalid, "unknown cutoff kind '" + s.kind + "'");
}

bool parse_curve(const std::string& name, int& k) {
    return std::sscanf(name.c_str(), "curve-k%d", &k) == 1 && name == "curve-k" + std::to_string(k) && k >= 1;
}

bool parse_graph(const std::string& name, int& a, int& b) {
    return std::sscanf(name.c_str(), "graph-k%d-k%d", &a, &b) == 2 &&
           name == "graph-k" + std::to_string(a) + "-k" + std::to_string(b);
}

std::string tag(const std::string& target, double p) {
    std::string s = target + "_p" + fmt(p, 6);
    std::replace(s.begin(), s.end(), '.', '_');
    return s;
}

Eigen::MatrixXd random_rotation(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
}

// ---------------------------------------------------------------------------
// decay

struct DecaySetup {
    CutoffProfile cutoff;
    Vec direction;
    double expected;
};

DecaySetup decay_setup(const std::string& name) {
    int k = 0;
    if (name == "circle") return {CutoffProfile::uniform(), {1.0, 0.0}, -0.5};
    if (name == "parabola") return {CutoffProfile::plateau({0.0}, 1.0), {0.0, 1.0}, -0.5};
    if (name == "sphere") return {CutoffProfile::bump({0.0, 0.0}, 0.7), {0.0, 0.0, 1.0}, -1.0};
    if (name == "segment") return {CutoffProfile::bump({0.0}, 0.9), {0.0, 1.0}, 0.0};
    if (parse_curve(name, k)) return {CutoffProfile::plateau({0.0}, 1.0), {0.0, 1.0}, -1.0 / k};
    throw Error(ErrorKind::ConfigInvalid, "no reference decay rate for '" + name + "'");
}

RunResult run_decay(const ExperimentConfig& c) {
    require(!c.targets.empty(), "decay needs at least one surface");
    require(c.range_lo <= c.range_hi && c.samples > 0, "bad shell range or samples per shell");
    const double slope_tol = tol(c, "slope");
    RunResult r;
    r.pass = true;
    r.summary["fits"] = ojson::array();
    ScanOptions opt;
    opt.seed = c.seed;
    for (const auto& name : c.targets) {
        const auto surface = gallery_surface(name);
        const DecaySetup setup = decay_setup(name);
        const CutoffProfile rho = make_cutoff(c.cutoff, setup.cutoff);
        const Vec dir = c.direction.empty() ? setup.direction : c.direction;
        const auto samples = decay_scan(surface, rho, dir, c.range_lo, c.range_hi, c.samples, opt);
        const auto fit = fit_decay_exponent(samples);
        const bool ok = std::abs(fit.slope - setup.expected) <= slope_tol && samples.missing_shells.empty();
        ojson f;
        f["surface"] = name;
        f["slope"] = fit.slope;
        f["expected"] = setup.expected;
        f["residual"] = fit.residual;
        f["missing_shells"] = samples.missing_shells;
        bool bessel_ok = true;
        if (name == "circle" && rho.is_uniform()) {
            // 2 pi J0(|xi|) is the exact transform of arclength on the unit circle.
            double worst = 0.0;
            for (double m : {5.0, 20.0, 100.0}) {
                const auto v = surface_measure_ft(surface, rho, {0.6 * m, 0.8 * m});
                const double exact = 2.0 * kPi * oracle::bessel_j0(m);
                worst = std::max(worst, std::abs(v - exact) / std::abs(exact));
            }
            f["bessel_max_rel_error"] = worst;
            bessel_ok = worst <= tol(c, "bessel");
            r.headline += "bessel rel err " + fmt(worst, 3) + "; ";
        }
        f["pass"] = ok && bessel_ok;
        r.pass = r.pass && ok && bessel_ok;
        r.summary["fits"].push_back(f);
        r.headline += name + " slope " + fmt(fit.slope) + " (expect " + fmt(setup.expected) + ")" + "; ";
        r.files.emplace_back("decay_" + name + ".csv", samples_to_csv(samples));
        r.files.emplace_back("fit_" + name + ".json", fit_to_json(fit));
    }
    return r;
}

// ---------------------------------------------------------------------------
// offcone

RunResult run_offcone(const ExperimentConfig& c) {
    require(c.targets.size() == 1, "offcone takes one surface");
    const auto surface = gallery_surface(c.targets[0]);
    const auto rho = make_cutoff(c.cutoff, CutoffProfile::bump({0.0}, 0.5));
    require(!c.direction.empty(), "offcone needs a direction");
    const auto cone = normal_cone(surface, rho);
    ScanOptions opt;
    opt.seed = c.seed;
    const auto fit = off_cone_check(surface, rho, c.direction, cone, c.range_lo, c.range_hi, c.samples, opt);
    RunResult r;
    r.pass = fit.slope <= tol(c, "max_slope");
    r.summary["surface"] = c.targets[0];
    r.summary["angle_to_cone"] = cone.angle_to(c.direction);
    r.summary["slope"] = fit.slope;
    r.summary["residual"] = fit.residual;
    r.headline = c.targets[0] + " off-cone slope " + fmt(fit.slope) + ", angle to cone " + fmt(cone.angle_to(c.direction));
    r.files.emplace_back("fit.json", fit_to_json(fit));
    return r;
}

// ---------------------------------------------------------------------------
// typecheck

// Order at the chart origin: -1 for exceeds-k_max.
int expected_type(const std::string& name) {
    int a = 0, b = 0;
    if (name == "circle" || name == "sphere" || name == "parabola") return 2;
    if (name == "segment") return -1;
    if (parse_curve(name, a)) return a;
    if (parse_graph(name, a, b)) return std::min(a, b);
    throw Error(ErrorKind::ConfigInvalid, "unknown surface '" + name + "'");
}

ojson type_json(const std::string& name, const TypeReport& t) {
    ojson j;
    j["surface"] = name;
    j["order"] = t.order ? ojson(*t.order) : ojson(nullptr);
    j["exceeds"] = t.exceeds();
    j["k_max"] = t.k_max;
    j["threshold"] = t.threshold_used;
    j["worst_direction"] = t.worst_direction;
    return j;
}

RunResult run_typecheck(const ExperimentConfig& c) {
    require(!c.targets.empty(), "typecheck needs at least one surface");
    RunResult r;
    r.pass = true;
    r.summary["surfaces"] = ojson::array();
    std::mt19937_64 rng(c.seed);
    std::string orders;
    int rotation_mismatches = 0;
    for (const auto& name : c.targets) {
        const int expect = expected_type(name);
        const auto s = gallery_surface(name);
        const Vec u0(static_cast<std::size_t>(s.chart_dim()), 0.0);
        const auto rep = detect_type_order(s, u0);
        const int got = rep.order ? *rep.order : -1;
        int mismatches = 0;
        for (int k = 0; k < c.samples; ++k) {
            const auto rot = detect_type_order(s.rotated(random_rotation(s.ambient_dim(), rng)), u0);
            if (rot.order != rep.order) ++mismatches;
        }
        rotation_mismatches += mismatches;
        auto j = type_json(name, rep);
        j["expected"] = expect < 0 ? ojson("exceeds") : ojson(expect);
        j["rotations"] = c.samples;
        j["rotation_mismatches"] = mismatches;
        r.summary["surfaces"].push_back(j);
        r.pass = r.pass && got == expect && mismatches == 0;
        orders += (orders.empty() ? "" : ", ") + (got < 0 ? std::string("exceeds") : std::to_string(got));
    }
    r.headline = "orders {" + orders + "}; rotation mismatches " + std::to_string(rotation_mismatches);
    return r;
}

// ---------------------------------------------------------------------------
// partition

RunResult run_partition(const ExperimentConfig& c) {
    require(c.levels >= 2 && c.samples > 0, "partition needs J >= 2 and samples > 0");
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> lg(-c.levels + 1.0, c.levels - 1.0);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
    std::vector<Vec> xs;
    for (int i = 0; i < c.samples; ++i) {
        const double m = std::exp2(lg(rng));
        const double a = ang(rng);
        xs.push_back({m * std::cos(a), m * std::sin(a)});
    }
    const double dev = partition_check(xs, c.levels);
    RunResult r;
    r.pass = dev <= tol(c, "max_deviation");
    r.summary["J"] = c.levels;
    r.summary["samples"] = c.samples;
    r.summary["max_deviation"] = dev;
    r.headline = "max deviation " + fmt(dev, 3) + " over " + std::to_string(c.samples) + " samples";
    return r;
}

// ---------------------------------------------------------------------------
// kernel-bound

GridFunction random_trig(int n, std::uint64_t seed, int max_freq) {
    GridFunction g = periodic_grid(2, n, 2.0 * kPi);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> fq(-max_freq, max_freq);
    std::normal_distribution<double> amp;
    std::vector<std::array<double, 4>> terms;
    for (int k = 0; k < 8; ++k) terms.push_back({double(fq(rng)), double(fq(rng)), amp(rng), amp(rng)});
    g.fill([&](const Vec& x) {
        double v = 0.0;
        for (const auto& t : terms) {
            const double ph = t[0] * x[0] + t[1] * x[1];
            v += t[2] * std::cos(ph) + t[3] * std::sin(ph);
        }
        return v;
    });
    return g;
}

RunResult run_kernel_bound(const ExperimentConfig& c) {
    require(c.targets.size() == 1, "kernel-bound takes one surface");
    const auto surface = gallery_surface(c.targets[0]);
    const auto rho = make_cutoff(c.cutoff, CutoffProfile::uniform());
    require(c.range_lo >= 1 && c.range_lo <= c.range_hi && !c.times.empty() && c.samples > 0,
            "kernel-bound needs a j range, times and samples");
    const double factor = tol(c, "factor");
    std::ostringstream csv;
    csv << "j,t,sample,measured_constant,reference\n";
    double worst = 0.0, reference = 0.0;
    RunResult r;
    r.summary["per_j"] = ojson::array();
    for (int j = c.range_lo; j <= c.range_hi; ++j) {
        // Nyquist 2^(j+2) on [-pi, pi); the data reach into band j.
        const int n = std::max(64, 1 << (j + 3));
        std::vector<GridFunction> fs;
        for (int s = 0; s < c.samples; ++s) fs.push_back(random_trig(n, c.seed * 1000003u + 1000u * j + s, 1 << (j + 1)));
        double worst_j = 0.0;
        for (double t : c.times) {
            const auto reps = kernel_bound_check(fs, surface, rho, j, t);
            for (std::size_t s = 0; s < reps.size(); ++s) {
                csv << j << ',' << num(t) << ',' << s << ',' << num(reps[s].measured_constant) << ','
                    << num(reps[s].reference) << '\n';
                worst_j = std::max(worst_j, reps[s].measured_constant);
                reference = reps[s].reference;
            }
        }
        r.summary["per_j"].push_back({{"j", j}, {"grid", n}, {"max_measured_constant", worst_j}});
        worst = std::max(worst, worst_j);
    }
    r.pass = worst <= reference * factor;
    r.summary["max_measured_constant"] = worst;
    r.summary["reference"] = reference;
    r.summary["allowed"] = reference * factor;
    r.headline = "max constant " + fmt(worst, 6) + " vs allowed " + fmt(reference * factor, 6);
    r.files.emplace_back("kernel_bound.csv", csv.str());
    return r;
}

RunResult run_commutation(const ExperimentConfig& c) {
    require(c.targets.size() == 1 && c.resolutions.size() == 1 && c.times.size() == 1,
            "commutation takes one surface, one resolution and one time");
    require(c.range_hi - c.range_lo >= 2 && c.levels >= 1, "commutation needs three j values and a band");
    const auto surface = gallery_surface(c.targets[0]);
    const auto rho = make_cutoff(c.cutoff, CutoffProfile::uniform());
    GridFunction f = periodic_grid(2, c.resolutions[0], 2.0 * kPi);
    f.fill([](const Vec& y) {
        return std::exp(-40.0 * ((y[0] - 0.5) * (y[0] - 0.5) + y[1] * y[1])) +
               std::exp(-60.0 * (y[0] * y[0] + (y[1] + 1.0) * (y[1] + 1.0)));
    });
    const double t = c.times[0];
    const double hl = hl_maximal(f).lp_norm(INFINITY);
    std::ostringstream csv;
    csv << "j,remainder\n";
    Vec js, logs;
    ojson rem = ojson::array();
    for (int j = c.range_lo; j <= c.range_hi; ++j) {
        const GridFunction a = dyadic_piece_apply(f, surface, rho, j, t);
        const GridFunction b = dyadic_piece_apply(lp_band(f, j - c.levels, j + c.levels), surface, rho, j, t);
        double d = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
        d /= hl;
        csv << j << ',' << num(d) << '\n';
        rem.push_back(d);
        js.push_back(j);
        logs.push_back(std::log2(d));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < js.size(); ++i) {
        mx += js[i];
        my += logs[i];
    }
    mx /= js.size();
    my /= js.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < js.size(); ++i) {
        sxx += (js[i] - mx) * (js[i] - mx);
        sxy += (js[i] - mx) * (logs[i] - my);
    }
    const double slope = sxy / sxx;
    RunResult r;
    r.pass = slope <= tol(c, "max_slope");
    r.summary["band"] = c.levels;
    r.summary["remainders"] = rem;
    r.summary["log2_slope"] = slope;
    r.headline = "remainder log2 slope " + fmt(slope) + " over j = " + std::to_string(c.range_lo) + ".." +
                 std::to_string(c.range_hi);
    r.files.emplace_back("commutation.csv", csv.str());
    return r;
}

// ---------------------------------------------------------------------------
// sup-lemma

RunResult run_sup_lemma(const ExperimentConfig& c) {
    require(c.samples > 0 && !c.p.empty(), "sup-lemma needs samples and exponents");
    constexpr int intervals = 2048;
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> amp;
    std::uniform_real_distribution<double> freq(0.0, 12.0);
    struct Poly {
        double a[4], w[4];
    };
    std::vector<Poly> polys(static_cast<std::size_t>(c.samples));
    for (auto& q : polys) {
        for (int k = 0; k < 4; ++k) {
            q.a[k] = amp(rng);
            q.w[k] = freq(rng);
        }
    }
    const double min_slack = tol(c, "min_slack");
    std::ostringstream csv;
    csv << "p,index,lhs,rhs,slack\n";
    double worst = INFINITY;
    int checked = 0;
    for (double p : c.p) {
        for (std::size_t i = 0; i < polys.size(); ++i) {
            Vec s(intervals + 1);
            for (int k = 0; k <= intervals; ++k) {
                const double t = 0.5 + 3.5 * k / intervals;
                double v = 0.0;
                for (int m = 0; m < 4; ++m) v += polys[i].a[m] * std::cos(polys[i].w[m] * t + m);
                s[k] = v;
            }
            const auto rep = sup_lemma_check(s, p);
            csv << num(p) << ',' << i << ',' << num(rep.lhs) << ',' << num(rep.rhs) << ',' << num(rep.slack) << '\n';
            worst = std::min(worst, rep.slack);
            ++checked;
        }
    }
    RunResult r;
    r.pass = worst >= min_slack;
    r.summary["checked"] = checked;
    r.summary["min_slack"] = worst;
    r.headline = "min slack " + fmt(worst, 4) + " over " + std::to_string(checked) + " cases";
    r.files.emplace_back("sup_lemma.csv", csv.str());
    return r;
}

// ---------------------------------------------------------------------------
// maximal-probe and varcoef-probe

RunResult trend_probes(const ExperimentConfig& c,
                       const std::function<ProbeReport(const std::string& target, double p, const Vec& t_grid)>& probe) {
    require(!c.p.empty() && c.targets.size() == c.p.size() && c.expect.size() == c.p.size(),
            "targets, p and expect must have equal lengths");
    require(c.resolutions.size() >= 2 && c.per_octave > 0 && c.t_octave_lo < c.t_octave_hi, "bad probe grid");
    for (const auto& e : c.expect) require(e == "plateau" || e == "growth", "expect must be plateau or growth");
    const Vec t_grid = dyadic_t_grid(c.t_octave_lo, c.t_octave_hi, c.per_octave);
    RunResult r;
    r.pass = true;
    r.summary["probes"] = ojson::array();
    for (std::size_t i = 0; i < c.p.size(); ++i) {
        const auto rep = probe(c.targets[i], c.p[i], t_grid);
        const std::string got = to_string(classify_trend(rep.trend));
        const bool ok = got == c.expect[i];
        r.pass = r.pass && ok;
        ojson j = ojson::parse(probe_to_json(rep));
        j["target"] = c.targets[i];
        j["expect"] = c.expect[i];
        j["pass"] = ok;
        r.summary["probes"].push_back(j);
        r.headline += c.targets[i] + " p=" + fmt(c.p[i]) + " trend " + fmt(rep.trend) + " " + got + " (want " +
                      c.expect[i] + "); ";
        const std::string stem = "probe_" + std::to_string(i) + "_" + tag(c.targets[i], c.p[i]);
        r.files.emplace_back(stem + ".csv", probe_to_csv(rep));
        r.files.emplace_back(stem + ".json", probe_to_json(rep));
    }
    return r;
}

RunResult run_maximal_probe(const ExperimentConfig& c) {
    require(c.direction.size() == 2, "maximal-probe needs a unit normal in the plane");
    return trend_probes(c, [&](const std::string& target, double p, const Vec& t_grid) {
        int k = 0;
        ParamSurface surface = gallery_surface("circle");
        CutoffProfile fallback = CutoffProfile::bump({kPi / 2.0}, 0.5);
        if (parse_curve(target, k)) {
            // Lifted to height 1 so the dilates do not pass through the origin.
            surface = model_curve(k, {1.0}, 1.0, 1.0);
            fallback = CutoffProfile::bump({0.0}, 0.5);
        } else if (target != "circle") {
            surface = gallery_surface(target);
            fallback = CutoffProfile::uniform();
        }
        AveragingConfig cfg;
        cfg.t_grid = t_grid;
        return ratio_probe(p, surface, make_cutoff(c.cutoff, fallback), "sharpness",
                           [&](int N) { return sharpness_family(p, c.direction, N); }, c.resolutions, cfg);
    });
}

RunResult run_varcoef_probe(const ExperimentConfig& c) {
    require(c.direction.size() == 2, "varcoef-probe needs a unit normal in the plane");
    return trend_probes(c, [&](const std::string& target, double p, const Vec& t_grid) {
        const auto dist = gallery_distribution(target);
        return ratio_probe(p, "sharpness", [&](int N) { return sharpness_family(p, c.direction, N); }, c.resolutions,
                           [&](const GridFunction& f) { return varcoef_maximal(f, dist, t_grid); });
    });
}

// ---------------------------------------------------------------------------
// local-smoothing

RunResult run_local_smoothing(const ExperimentConfig& c) {
    require(!c.targets.empty() && c.p.size() == 1 && c.resolutions.size() == 1, "local-smoothing takes one p and grid");
    require(c.range_hi - c.range_lo >= 1, "local-smoothing needs two j values");
    const double gap = tol(c, "gap");
    std::vector<int> js;
    for (int j = c.range_lo; j <= c.range_hi; ++j) js.push_back(j);
    LocalSmoothingOptions opt;
    opt.grid = c.resolutions[0];
    RunResult r;
    r.pass = true;
    r.summary["symbols"] = ojson::array();
    for (const auto& name : c.targets) {
        std::function<double(const Vec&)> q;
        if (name == "wave") {
            q = [](const Vec& xi) { return std::hypot(xi[0], xi[1]); };
        } else if (name == "translation") {
            q = [](const Vec& xi) { return 0.8 * xi[0] + 0.6 * xi[1]; };
        } else {
            throw Error(ErrorKind::ConfigInvalid, "symbol must be wave or translation");
        }
        const auto rep = local_smoothing_probe(js, c.p[0], q, opt);
        const double g = rep.a_fix - rep.a_st;
        const bool ok = name == "wave" ? g >= gap : std::abs(g) <= gap;
        r.pass = r.pass && ok;
        r.summary["symbols"].push_back(
            {{"symbol", name}, {"a_fix", rep.a_fix}, {"a_st", rep.a_st}, {"gap", g}, {"pass", ok}});
        r.headline += name + " a_fix " + fmt(rep.a_fix) + " a_st " + fmt(rep.a_st) + "; ";
        std::ostringstream csv;
        csv << "j,fixed_time,space_time\n";
        for (std::size_t i = 0; i < rep.j.size(); ++i) {
            csv << rep.j[i] << ',' << num(rep.fixed_time[i]) << ',' << num(rep.space_time[i]) << '\n';
        }
        r.files.emplace_back("local_smoothing_" + name + ".csv", csv.str());
    }
    return r;
}

// ---------------------------------------------------------------------------
// varcoef-diag

RunResult run_monge_ampere(const ExperimentConfig& c) {
    require(!c.targets.empty() && c.times.size() == 1 && c.samples >= 2, "varcoef-diag needs targets, a time, points");
    const double t = c.times[0];
    const ScanRegion region{Box{{-0.5, -0.5}, {0.5, 0.5}}, c.samples};
    double sym_dev = 0.0, fd_dev = 0.0, degenerate = 0.0, symmetry = 0.0, fd_agree = 0.0;
    bool saw_par = false, saw_lin = false;
    RunResult r;
    r.summary["distributions"] = ojson::array();
    for (const auto& name : c.targets) {
        const auto dist = gallery_distribution(name);
        auto diag = nondegeneracy_scan(dist, region, t);
        // Pointwise checks on the scan lattice.
        const int m = c.samples;
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                const Vec x{-0.5 + a / (m - 1.0), -0.5 + b / (m - 1.0)};
                const Box yb = dist.support(x, t);
                for (int k = 0; k < m; ++k) {
                    const Vec yp{yb.lo[0] + (yb.hi[0] - yb.lo[0]) * k / (m - 1.0)};
                    const Vec y = dist.surface_point(x, yp, t);
                    if (!(dist.psi(x, y, t) > 0.0)) continue;
                    const double j = monge_ampere(dist, x, y, t);
                    const double jfd = monge_ampere(dist, x, y, t, {.finite_difference = true});
                    const double jsw = monge_ampere(dist, x, y, t, {.swap_roles = true});
                    symmetry = std::max(symmetry, std::abs(jsw - j));
                    fd_agree = std::max(fd_agree, std::abs(jfd - j) / (1.0 + std::abs(j)));
                    if (name == "parabolas") {
                        saw_par = true;
                        sym_dev = std::max(sym_dev, std::abs(j - 2.0));
                        fd_dev = std::max(fd_dev, std::abs(jfd - 2.0));
                    }
                    if (name == "linear-degenerate") {
                        saw_lin = true;
                        degenerate = std::max({degenerate, std::abs(j), std::abs(jfd)});
                    }
                }
            }
        }
        ojson d = ojson::parse(diagnostics_to_json(diag));
        d["distribution"] = name;
        r.summary["distributions"].push_back(d);
        r.files.emplace_back("diag_" + name + ".json", diagnostics_to_json(diag));
        r.files.emplace_back("sigma_" + name + ".csv", sigma_to_csv(diag));
    }
    r.summary["parabola_symbolic_dev"] = sym_dev;
    r.summary["parabola_fd_dev"] = fd_dev;
    r.summary["linear_max_abs_J"] = degenerate;
    r.summary["swap_symmetry"] = symmetry;
    r.summary["fd_agreement"] = fd_agree;
    r.pass = (!saw_par || (sym_dev <= tol(c, "symbolic") && fd_dev <= tol(c, "finite_difference"))) &&
             (!saw_lin || degenerate <= tol(c, "degenerate")) && symmetry <= tol(c, "symmetry") &&
             fd_agree <= tol(c, "fd_agreement");
    r.headline = "parabola |J-2| " + fmt(sym_dev, 3) + " (fd " + fmt(fd_dev, 3) + "), linear |J| " +
                 fmt(degenerate, 3) + ", swap " + fmt(symmetry, 3) + ", fd vs jets " + fmt(fd_agree, 3);
    return r;
}

RunResult run_cone(const ExperimentConfig& c) {
    require(c.samples > 0, "cone check needs samples");
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> g;
    auto norm = [](const Vec& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    auto linear = [](const Vec& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += (1.0 + i) * v[i];
        return s;
    };
    RunResult r;
    r.pass = true;
    std::ostringstream csv;
    csv << "dim,index,corank_norm,corank_linear\n";
    for (int n : {2, 3}) {
        int good = 0, control = 0;
        for (int k = 0; k < c.samples; ++k) {
            Vec xi(static_cast<std::size_t>(n));
            for (double& v : xi) v = g(rng);
            const int a = cone_corank(norm, xi);
            const int b = cone_corank(linear, xi);
            good += a == 1;
            control += b == n;
            csv << n << ',' << k << ',' << a << ',' << b << '\n';
        }
        r.pass = r.pass && good == c.samples && control == c.samples;
        r.summary["R" + std::to_string(n)] = {{"corank_one", good}, {"linear_corank_n", control}, {"samples", c.samples}};
        r.headline += "R" + std::to_string(n) + ": corank 1 on " + std::to_string(good) + "/" +
                      std::to_string(c.samples) + ", linear corank n on " + std::to_string(control) + "; ";
    }
    r.files.emplace_back("cone.csv", csv.str());
    return r;
}

// ---------------------------------------------------------------------------
// frozen-type

RunResult run_frozen_type(const ExperimentConfig& c) {
    require(!c.targets.empty() && c.times.size() == 1, "frozen-type needs targets and one time");
    const double t = c.times[0];
    const Vec x0{0.0, 0.0};
    RunResult r;
    r.pass = true;
    r.summary["distributions"] = ojson::array();
    for (const auto& name : c.targets) {
        const auto dist = gallery_distribution(name);
        const auto type = detect_type_order(dist.frozen_curve(x0, t, 0.4), {0.0});
        ojson j;
        j["distribution"] = name;
        j["frozen_type"] = type.order ? ojson(*type.order) : ojson("exceeds");
        const SigmaSample s{x0, dist.surface_point(x0, {0.0}, t), 0.0};
        std::string line = name + ": type " + (type.order ? std::to_string(*type.order) : "exceeds");
        try {
            const auto v = vanishing_order(dist, s, {0.0, 0.0, 1.0}, t);
            const bool ok = type.order && v.order + 2 == *type.order;
            j["vanishing_order"] = v.order;
            j["slope"] = v.slope;
            j["transversality"] = v.transversality;
            j["pass"] = ok;
            r.pass = r.pass && ok;
            line += ", fold " + std::to_string(v.order);
        } catch (const Error& e) {
            // No fold through the base point; nothing to compare.
            if (e.kind() != ErrorKind::PreconditionFailed) throw;
            j["vanishing_order"] = nullptr;
            line += ", no fold";
        }
        r.summary["distributions"].push_back(j);
        r.headline += line + "; ";
    }
    return r;
}

// ---------------------------------------------------------------------------

ExperimentConfig base(const std::string& sub, const std::string& mode) {
    ExperimentConfig c;
    c.subcommand = sub;
    c.mode = mode;
    return c;
}

const std::vector<std::string> kVarcoefGallery = {"parabolas", "cubic-fold", "quartic-fold",
                                                  "circles", "linear-degenerate", "fold-k5"};

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {
        "typecheck", "decay",          "offcone",      "partition",   "kernel-bound",  "sup-lemma",
        "maximal-probe", "local-smoothing", "varcoef-diag", "frozen-type", "varcoef-probe", "all"};
    return names;
}

ExperimentConfig default_config(const std::string& sub, const std::string& mode) {
    ExperimentConfig c = base(sub, mode);
    auto bad_mode = [&] { return Error(ErrorKind::ConfigInvalid, "unknown mode '" + mode + "' for " + sub); };
    if (sub == "decay") {
        if (!mode.empty()) throw bad_mode();
        c.targets = {"circle"};
        c.range_lo = 4;
        c.range_hi = 9;
        c.samples = 128;
        c.tolerances = {{"slope", 0.03}, {"bessel", 1e-6}};
    } else if (sub == "offcone") {
        if (!mode.empty()) throw bad_mode();
        c.targets = {"parabola"};
        c.cutoff = {"bump", {0.0}, 0.5};
        c.direction = {1.0, 0.0};
        c.range_lo = 4;
        c.range_hi = 8;
        c.samples = 8;
        c.tolerances = {{"max_slope", -3.0}};
    } else if (sub == "typecheck") {
        if (!mode.empty()) throw bad_mode();
        c.targets = {"circle", "sphere", "curve-k3", "curve-k4", "curve-k6", "segment"};
        c.samples = 20;
        c.seed = 7;
    } else if (sub == "partition") {
        if (!mode.empty()) throw bad_mode();
        c.levels = 20;
        c.samples = 10000;
        c.seed = 11;
        c.tolerances = {{"max_deviation", 1e-10}};
    } else if (sub == "kernel-bound") {
        c.targets = {"circle"};
        c.cutoff = {"uniform", {}, 0.0};
        if (mode.empty() || mode == "bound") {
            c.mode = "bound";
            c.range_lo = 2;
            c.range_hi = 8;
            c.times = {1.0, 1.5, 2.0};
            c.samples = 20;
            c.seed = 3;
            c.tolerances = {{"factor", 1.05}};
        } else if (mode == "commutation") {
            c.range_lo = 3;
            c.range_hi = 7;
            c.levels = 3;
            c.resolutions = {1024};
            c.times = {1.5};
            c.tolerances = {{"max_slope", -3.0}};
        } else {
            throw bad_mode();
        }
    } else if (sub == "sup-lemma") {
        if (!mode.empty()) throw bad_mode();
        c.samples = 1000;
        c.p = {2.0, 3.0, 5.0};
        c.seed = 7;
        c.tolerances = {{"min_slack", -1e-9}};
    } else if (sub == "maximal-probe") {
        if (!mode.empty()) throw bad_mode();
        c.targets = {"circle", "circle", "curve-k3", "curve-k3"};
        c.p = {3.0, 1.5, 3.5, 2.5};
        c.expect = {"plateau", "growth", "plateau", "growth"};
        c.direction = {0.0, 1.0};
        c.resolutions = {128, 256, 512};
        c.t_octave_lo = -3;
        c.t_octave_hi = 1;
        c.per_octave = 64;
    } else if (sub == "local-smoothing") {
        if (!mode.empty()) throw bad_mode();
        c.targets = {"wave", "translation"};
        c.range_lo = 4;
        c.range_hi = 7;
        c.p = {4.0};
        c.resolutions = {512};
        c.tolerances = {{"gap", 0.005}};
    } else if (sub == "varcoef-diag") {
        if (mode.empty() || mode == "monge-ampere") {
            c.mode = "monge-ampere";
            c.targets = kVarcoefGallery;
            c.samples = 9;
            c.times = {1.0};
            c.tolerances = {{"degenerate", 1e-8},
                            {"fd_agreement", 1e-6},
                            {"finite_difference", 1e-4},
                            {"symbolic", 1e-6},
                            {"symmetry", 1e-8}};
        } else if (mode == "cone") {
            c.samples = 100;
            c.seed = 13;
        } else {
            throw bad_mode();
        }
    } else if (sub == "frozen-type") {
        if (!mode.empty()) throw bad_mode();
        c.targets = {"fold-k3", "fold-k4", "fold-k5"};
        c.times = {1.0};
    } else if (sub == "varcoef-probe") {
        if (!mode.empty()) throw bad_mode();
        c.targets = {"quartic-fold", "quartic-fold"};
        c.p = {3.5, 5.0};
        c.expect = {"growth", "plateau"};
        c.direction = {1.0, 0.0};
        c.resolutions = {128, 256, 512};
        c.t_octave_lo = -1;
        c.t_octave_hi = 1;
        c.per_octave = 64;
    } else if (sub == "all") {
        if (!mode.empty()) throw bad_mode();
    } else {
        throw Error(ErrorKind::ConfigInvalid, "unknown subcommand '" + sub + "'");
    }
    return c;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
    ojson j;
    j["subcommand"] = c.subcommand;
    j["mode"] = c.mode;
    j["targets"] = c.targets;
    j["cutoff"] = {{"kind", c.cutoff.kind}, {"center", c.cutoff.center}, {"radius", c.cutoff.radius}};
    j["direction"] = c.direction;
    j["p"] = c.p;
    j["expect"] = c.expect;
    j["range_lo"] = c.range_lo;
    j["range_hi"] = c.range_hi;
    j["samples"] = c.samples;
    j["levels"] = c.levels;
    j["resolutions"] = c.resolutions;
    j["times"] = c.times;
    j["t_octave_lo"] = c.t_octave_lo;
    j["t_octave_hi"] = c.t_octave_hi;
    j["per_octave"] = c.per_octave;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["tolerances"] = ojson::object();
    for (const auto& [k, v] : c.tolerances) j["tolerances"][k] = v;
    return j;
}

std::string dump_config(const ExperimentConfig& c) { return config_to_json(c).dump(2) + "\n"; }

ExperimentConfig config_from_json(const nlohmann::json& j) {
    require(j.is_object(), "config must be a JSON object");
    require(j.contains("subcommand") && j["subcommand"].is_string(), "config needs a subcommand");
    const std::string mode = j.contains("mode") ? j["mode"].get<std::string>() : "";
    ExperimentConfig c = default_config(j["subcommand"].get<std::string>(), mode);
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "subcommand" || key == "mode") continue;
            if (key == "targets") c.targets = v.get<std::vector<std::string>>();
            else if (key == "cutoff") {
                for (const auto& [ck, cv] : v.items()) {
                    if (ck == "kind") c.cutoff.kind = cv.get<std::string>();
                    else if (ck == "center") c.cutoff.center = cv.get<std::vector<double>>();
                    else if (ck == "radius") c.cutoff.radius = cv.get<double>();
                    else throw Error(ErrorKind::ConfigInvalid, "unknown cutoff key '" + ck + "'");
                }
            } else if (key == "direction") c.direction = v.get<std::vector<double>>();
            else if (key == "p") c.p = v.get<std::vector<double>>();
            else if (key == "expect") c.expect = v.get<std::vector<std::string>>();
            else if (key == "range_lo") c.range_lo = v.get<int>();
            else if (key == "range_hi") c.range_hi = v.get<int>();
            else if (key == "samples") c.samples = v.get<int>();
            else if (key == "levels") c.levels = v.get<int>();
            else if (key == "resolutions") c.resolutions = v.get<std::vector<int>>();
            else if (key == "times") c.times = v.get<std::vector<double>>();
            else if (key == "t_octave_lo") c.t_octave_lo = v.get<int>();
            else if (key == "t_octave_hi") c.t_octave_hi = v.get<int>();
            else if (key == "per_octave") c.per_octave = v.get<int>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "output_dir") c.output_dir = v.get<std::string>();
            else if (key == "tolerances") c.tolerances = v.get<std::map<std::string, double>>();
            else throw Error(ErrorKind::ConfigInvalid, "unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("config type error: ") + e.what());
    }
    validate(c);
    return c;
}

void validate(const ExperimentConfig& c) {
    default_config(c.subcommand, c.mode);
    require(c.range_lo <= c.range_hi, "range_lo must not exceed range_hi");
    require(c.samples >= 0 && c.levels >= 0 && c.per_octave >= 0, "counts must be nonnegative");
    for (int n : c.resolutions) require(n >= 4, "resolutions must be at least 4");
    for (double p : c.p) require(p > 1.0, "exponents must exceed 1");
    for (double t : c.times) require(t > 0.0, "times must be positive");
    require(!c.output_dir.empty(), "output_dir must be set");
}

namespace {

RunResult dispatch(const ExperimentConfig& c) {
    const std::string& s = c.subcommand;
    if (s == "decay") return run_decay(c);
    if (s == "offcone") return run_offcone(c);
    if (s == "typecheck") return run_typecheck(c);
    if (s == "partition") return run_partition(c);
    if (s == "kernel-bound") return c.mode == "commutation" ? run_commutation(c) : run_kernel_bound(c);
    if (s == "sup-lemma") return run_sup_lemma(c);
    if (s == "maximal-probe") return run_maximal_probe(c);
    if (s == "local-smoothing") return run_local_smoothing(c);
    if (s == "varcoef-diag") return c.mode == "cone" ? run_cone(c) : run_monge_ampere(c);
    if (s == "frozen-type") return run_frozen_type(c);
    if (s == "varcoef-probe") return run_varcoef_probe(c);
    throw Error(ErrorKind::ConfigInvalid, "subcommand '" + s + "' has no single probe");
}

}  // namespace

RunResult run(const ExperimentConfig& c) {
    validate(c);
    RunResult r = dispatch(c);
    while (!r.headline.empty() && (r.headline.back() == ' ' || r.headline.back() == ';')) r.headline.pop_back();
    return r;
}

void write_run(const ExperimentConfig& c, const RunResult& r, double seconds, int threads) {
    namespace fs = std::filesystem;
    const fs::path dir(c.output_dir);
    fs::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::binary);
        out << text;
        if (!out) throw Error(ErrorKind::PreconditionFailed, "cannot write " + (dir / name).string());
    };
    ojson summary = r.summary;
    summary["pass"] = r.pass;
    put("summary.json", summary.dump(2) + "\n");
    for (const auto& [name, text] : r.files) put(name, text);
    put("config.json", dump_config(c));

    ojson m;
    m["config"] = config_to_json(c);
    m["version"] = FINITYPE_VERSION;
    m["compiler"] = __VERSION__;
    m["threads"] = threads;
    m["wall_seconds"] = seconds;
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["timestamp"] = stamp;
    m["pass"] = r.pass;
    ojson files = ojson::array();
    files.push_back("summary.json");
    for (const auto& f : r.files) files.push_back(f.first);
    m["files"] = files;
    put("manifest.json", m.dump(2) + "\n");
}

}  // namespace finitype::cli
