#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <sstream>

#include "finitype/errors.hpp"
#include "finitype/parallel.hpp"

namespace finitype::cli {

namespace {

struct Outcome {
    bool pass = false;
    std::string headline;
    std::string bytes;  // summary and artifacts, for the rerun comparison
    double seconds = 0.0;
};

Outcome run_one(const Criterion& c, int threads, const std::string& output_dir) {
    set_threads(threads);
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        RunResult r = run(c.config);
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.pass = r.pass;
        o.headline = r.headline;
        o.bytes = r.summary.dump(2);
        for (const auto& [name, text] : r.files) o.bytes += "\n--- " + name + "\n" + text;
        if (!output_dir.empty()) {
            ExperimentConfig cfg = c.config;
            std::ostringstream dir;
            dir << output_dir << "/criterion-" << std::setw(2) << std::setfill('0') << c.id;
            cfg.output_dir = dir.str();
            write_run(cfg, r, o.seconds, threads);
        }
    } catch (const Error& e) {
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.pass = false;
        o.headline = std::string("error: ") + e.what();
        o.bytes = o.headline;
    }
    if (c.max_seconds > 0.0 && o.seconds >= c.max_seconds) {
        o.pass = false;
        o.headline += " runtime over " + std::to_string(static_cast<int>(c.max_seconds)) + " s";
    }
    return o;
}

void line(std::ostream& os, bool pass, int id, const std::string& title, const std::string& detail, double seconds) {
    os << (pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << id << "  " << title << ": " << detail << " ["
       << std::fixed << std::setprecision(1) << seconds << " s]" << std::defaultfloat << std::endl;
}

}  // namespace

std::vector<Criterion> acceptance_criteria() {
    std::vector<Criterion> out;
    auto add = [&](int id, std::string title, ExperimentConfig cfg, double max_seconds = 0.0) {
        out.push_back({id, std::move(title), std::move(cfg), max_seconds});
    };
    add(1, "circle decay rate and Bessel cross-check", default_config("decay"), 60.0);

    ExperimentConfig finite = default_config("decay");
    finite.targets = {"curve-k2", "curve-k3", "curve-k4", "curve-k6"};
    finite.range_lo = 6;
    finite.range_hi = 11;
    finite.samples = 16;
    finite.tolerances = {{"slope", 0.05}};
    add(2, "finite-type decay rates 1/k", finite, 300.0);

    add(3, "off-cone rapid decay", default_config("offcone"));
    add(4, "type detection gallery and rotations", default_config("typecheck"));
    add(5, "partition of unity", default_config("partition"));
    add(6, "dyadic kernel bound", default_config("kernel-bound", "bound"));
    add(7, "Littlewood-Paley commutation remainder", default_config("kernel-bound", "commutation"));
    add(8, "sup lemma slack", default_config("sup-lemma"));
    add(9, "Monge-Ampere determinant", default_config("varcoef-diag", "monge-ampere"));
    add(10, "fold order vs frozen-curve type", default_config("frozen-type"));
    add(11, "cone condition corank", default_config("varcoef-diag", "cone"));
    add(12, "maximal threshold trends", default_config("maximal-probe"), 1800.0);
    add(13, "local smoothing gap", default_config("local-smoothing"));
    add(14, "variable-coefficient threshold trends", default_config("varcoef-probe"));
    return out;
}

int run_suite(const SuiteOptions& options, std::ostream& os) {
    const auto all = acceptance_criteria();
    auto wanted = [&](int id) {
        return options.only.empty() || std::find(options.only.begin(), options.only.end(), id) != options.only.end();
    };
    const int saved_threads = threads();
    int failures = 0;
    std::vector<std::pair<const Criterion*, Outcome>> first;
    for (const auto& c : all) {
        if (!wanted(c.id)) continue;
        Outcome o = run_one(c, 1, options.output_dir);
        line(os, o.pass, c.id, c.title, o.headline, o.seconds);
        failures += !o.pass;
        first.emplace_back(&c, std::move(o));
    }
    if (options.determinism && wanted(15)) {
        double seconds = 0.0;
        std::vector<int> differing;
        for (const auto& [c, o] : first) {
            const Outcome again = run_one(*c, 4, "");
            seconds += again.seconds;
            if (again.bytes != o.bytes) differing.push_back(c->id);
        }
        std::string detail = std::to_string(first.size()) + " criteria rerun with 4 threads";
        if (differing.empty()) {
            detail += ", all byte-identical";
        } else {
            detail += ", differing:";
            for (int id : differing) detail += " " + std::to_string(id);
        }
        const bool ok = differing.empty() && !first.empty();
        line(os, ok, 15, "determinism across thread counts", detail, seconds);
        failures += !ok;
    }
    set_threads(saved_threads);
    return failures;
}

}  // namespace finitype::cli
