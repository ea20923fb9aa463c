#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "acceptance.hpp"
#include "finitype/errors.hpp"
#include "finitype/parallel.hpp"
#include "probes.hpp"

using namespace finitype;
using namespace finitype::cli;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kCheckFailed = 2;
constexpr int kConfigInvalid = 3;

struct Flags {
    std::string config_file;
    std::string save_config;
    std::string mode;
    std::vector<std::string> targets;
    std::string cutoff;
    std::vector<double> direction;
    std::vector<double> p;
    std::vector<std::string> expect;
    std::string range;
    int samples = -1;
    int levels = -1;
    std::vector<int> resolutions;
    std::vector<double> times;
    std::string t_octaves;
    int per_octave = -1;
    std::int64_t seed = -1;
    std::string out;
    std::vector<std::string> tolerances;
    std::vector<int> only;
    bool no_determinism = false;
};

std::pair<int, int> parse_range(const std::string& s) {
    const auto dots = s.find("..");
    if (dots == std::string::npos) throw Error(ErrorKind::ConfigInvalid, "range must look like A..B");
    try {
        return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
    } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigInvalid, "bad range '" + s + "'");
    }
}

// uniform | bump:c1,c2:r | plateau:c1:r
CutoffSpec parse_cutoff(const std::string& s) {
    CutoffSpec spec;
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.empty()) throw Error(ErrorKind::ConfigInvalid, "empty cutoff");
    spec.kind = parts[0];
    if (spec.kind == "uniform" || spec.kind == "default") return spec;
    if (parts.size() != 3) throw Error(ErrorKind::ConfigInvalid, "cutoff must be kind:center:radius");
    try {
        std::stringstream cs(parts[1]);
        for (std::string v; std::getline(cs, v, ',');) spec.center.push_back(std::stod(v));
        spec.radius = std::stod(parts[2]);
    } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigInvalid, "bad cutoff '" + s + "'");
    }
    return spec;
}

void add_options(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config_file, "JSON config file; flags override it");
    sub->add_option("--save-config", f.save_config, "write the effective config here and exit");
    sub->add_option("--mode", f.mode, "variant of the subcommand");
    sub->add_option("--surface,--surfaces,--distribution,--target", f.targets, "surfaces or distributions")
        ->delimiter(',');
    sub->add_option("--cutoff", f.cutoff, "uniform | bump:CENTER:RADIUS | plateau:CENTER:RADIUS");
    sub->add_option("--direction,--nu", f.direction, "direction or unit normal")->delimiter(',');
    sub->add_option("--p", f.p, "Lebesgue exponents")->delimiter(',');
    sub->add_option("--expect", f.expect, "plateau or growth, one per exponent")->delimiter(',');
    sub->add_option("--shells,--j", f.range, "shell or dyadic range A..B");
    sub->add_option("--samples,--per-shell,--rotations", f.samples, "samples, per shell or per check");
    sub->add_option("--J,--band", f.levels, "partition depth or commutation band");
    sub->add_option("--resolutions,--grid", f.resolutions, "grid sizes")->delimiter(',');
    sub->add_option("--times,--t", f.times, "dilation parameters")->delimiter(',');
    sub->add_option("--t-octaves", f.t_octaves, "t-grid octaves A..B");
    sub->add_option("--per-octave", f.per_octave, "t samples per octave");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--tol", f.tolerances, "tolerance override KEY=VALUE")->delimiter(',');
}

ExperimentConfig effective_config(const std::string& name, const Flags& f) {
    ExperimentConfig c;
    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot read " + f.config_file);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::ConfigInvalid, std::string("config is not JSON: ") + e.what());
        }
        c = config_from_json(j);
        if (c.subcommand != name) throw Error(ErrorKind::ConfigInvalid, "config is for " + c.subcommand);
        if (!f.mode.empty() && f.mode != c.mode) c = default_config(name, f.mode);
    } else {
        c = default_config(name, f.mode);
    }
    if (!f.targets.empty()) c.targets = f.targets;
    if (!f.cutoff.empty()) c.cutoff = parse_cutoff(f.cutoff);
    if (!f.direction.empty()) c.direction = f.direction;
    if (!f.p.empty()) {
        c.p = f.p;
        // A lone target or expectation applies to every exponent.
        if (c.targets.size() == 1 && c.p.size() > 1 && !c.expect.empty())
            c.targets.assign(c.p.size(), c.targets[0]);
    }
    if (!f.expect.empty()) c.expect = f.expect;
    if (!f.range.empty()) std::tie(c.range_lo, c.range_hi) = parse_range(f.range);
    if (f.samples >= 0) c.samples = f.samples;
    if (f.levels >= 0) c.levels = f.levels;
    if (!f.resolutions.empty()) c.resolutions = f.resolutions;
    if (!f.times.empty()) c.times = f.times;
    if (!f.t_octaves.empty()) std::tie(c.t_octave_lo, c.t_octave_hi) = parse_range(f.t_octaves);
    if (f.per_octave >= 0) c.per_octave = f.per_octave;
    if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
    if (!f.out.empty()) c.output_dir = f.out;
    for (const auto& kv : f.tolerances) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::ConfigInvalid, "tolerance must be KEY=VALUE");
        try {
            c.tolerances[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(ErrorKind::ConfigInvalid, "bad tolerance '" + kv + "'");
        }
    }
    validate(c);
    return c;
}

int default_threads() {
    if (const char* env = std::getenv("FINITYPE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finitype: probes for maximal averages over finite-type surfaces"};
    app.require_subcommand(1);
    int n_threads = default_threads();
    app.add_option("--threads", n_threads, "worker threads (default FINITYPE_THREADS or 1)")->check(CLI::PositiveNumber);

    Flags flags;
    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const auto& name : subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        add_options(sub, flags);
        if (name == "all") {
            sub->add_option("--only", flags.only, "criteria to run")->delimiter(',');
            sub->add_flag("--no-determinism", flags.no_determinism, "skip the rerun under 4 threads");
        }
        subs.emplace_back(name, sub);
    }
    CLI11_PARSE(app, argc, argv);
    set_threads(n_threads);

    std::string name;
    for (const auto& [n, sub] : subs) {
        if (sub->parsed()) name = n;
    }

    try {
        if (name == "all") {
            SuiteOptions opt;
            opt.only = flags.only;
            opt.determinism = !flags.no_determinism;
            opt.output_dir = flags.out.empty() ? "out" : flags.out;
            const int failures = run_suite(opt, std::cout);
            return failures == 0 ? kOk : kCheckFailed;
        }
        const ExperimentConfig c = effective_config(name, flags);
        if (!flags.save_config.empty()) {
            std::ofstream out(flags.save_config, std::ios::binary);
            out << dump_config(c);
            return out ? kOk : kError;
        }
        const auto t0 = std::chrono::steady_clock::now();
        const RunResult r = run(c);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_run(c, r, seconds, n_threads);
        std::cout << (r.pass ? "PASS " : "FAIL ") << name << ": " << r.headline << "\n";
        return r.pass ? kOk : kCheckFailed;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::ConfigInvalid ? kConfigInvalid : kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
}
