#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "probes.hpp"

namespace finitype::cli {

struct Criterion {
    int id = 0;
    std::string title;
    ExperimentConfig config;
    double max_seconds = 0.0;  // 0: no runtime bound
};

// Criteria 1..14 as probe configs; 15 is the thread-count rerun of the others.
std::vector<Criterion> acceptance_criteria();

struct SuiteOptions {
    std::vector<int> only;     // empty: all
    bool determinism = true;   // rerun under 4 threads and compare bytes
    std::string output_dir;    // empty: keep artifacts in memory only
};

// Prints one PASS/FAIL line per criterion; returns the number of failures.
int run_suite(const SuiteOptions& options, std::ostream& os);

}  // namespace finitype::cli
