#include "doctest.h"

#include "finitype/errors.hpp"
#include "probes.hpp"

using namespace finitype;
using namespace finitype::cli;

TEST_CASE("configs round-trip to identical bytes") {
    for (const auto& name : subcommands()) {
        ExperimentConfig c = default_config(name);
        c.seed = 42;
        c.tolerances["extra"] = 0.1 + 0.2;
        const std::string first = dump_config(c);
        const std::string second = dump_config(config_from_json(nlohmann::json::parse(first)));
        CHECK(first == second);
        const std::string third = dump_config(config_from_json(nlohmann::json::parse(second)));
        CHECK(second == third);
    }
}

TEST_CASE("invalid configs are rejected") {
    auto kind = [](const char* text) {
        try {
            config_from_json(nlohmann::json::parse(text));
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::PreconditionFailed;
    };
    CHECK(kind(R"({"subcommand": "nope"})") == ErrorKind::ConfigInvalid);
    CHECK(kind(R"({"subcommand": "decay", "bogus": 1})") == ErrorKind::ConfigInvalid);
    CHECK(kind(R"({"subcommand": "decay", "range_lo": 9, "range_hi": 4})") == ErrorKind::ConfigInvalid);
    CHECK(kind(R"({"subcommand": "decay", "samples": "many"})") == ErrorKind::ConfigInvalid);
    CHECK(kind(R"({"subcommand": "kernel-bound", "mode": "sideways"})") == ErrorKind::ConfigInvalid);
    CHECK(kind(R"({"subcommand": "maximal-probe", "p": [0.5]})") == ErrorKind::ConfigInvalid);
}

TEST_CASE("small probes run and are deterministic") {
    ExperimentConfig c = default_config("partition");
    c.samples = 500;
    const auto a = run(c);
    CHECK(a.pass);
    CHECK(a.summary.dump() == run(c).summary.dump());

    ExperimentConfig t = default_config("typecheck");
    t.targets = {"curve-k4"};
    t.samples = 2;
    const auto r = run(t);
    CHECK(r.pass);
    CHECK(r.summary["surfaces"][0]["order"] == 4);
}
