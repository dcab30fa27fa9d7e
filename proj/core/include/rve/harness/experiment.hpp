#pragma once

#include <filesystem>
#include <cstdint>
#include <functional>
#include <string>

#include "rve/harness/config.hpp"
#include "rve/harness/results.hpp"

namespace rve::harness {

struct RunHooks {
    // one line per finished seed run
    std::function<void(const std::string&)> progress;
    // called before each seed run starts; an exception thrown here counts
    // as that run failing
    std::function<void(const std::string& cell, std::uint64_t seed)> before_run;
};

// Runs every cell over every seed and evaluates the experiment's
// assertions. Seed runs that throw are recorded as failed and the result is
// marked partial; the assertions then see only the runs that finished.
// An invalid config throws before anything runs.
ResultSet run_experiment(const ExperimentConfig& config, const RunHooks& hooks = {});

// Worker slots actually used: 1 when `deterministic` is set.
int worker_count(const ExperimentConfig& config);

// RVE_OUT when set, the config's `out` otherwise.
std::filesystem::path output_dir(const ExperimentConfig& config);

}  // namespace rve::harness
