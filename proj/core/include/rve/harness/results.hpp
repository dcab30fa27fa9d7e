#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rve/core/types.hpp"

namespace rve::harness {

struct SeedRun {
    std::uint64_t seed = 0;
    core::RegretTrace trace;
    std::optional<int> learning_time;
    bool ok = true;
    std::string error;
};

// One configuration of the experiment (an agent, a size, a psi value ...)
// swept over the seed list.
struct Cell {
    std::string label;           // file-name safe
    nlohmann::json params = nlohmann::json::object();
    std::vector<SeedRun> runs;   // seed order
};

struct AggregateCurve {
    std::vector<double> mean_regret;
    std::vector<double> mean_cum_regret;
    std::vector<double> mean_return;
    std::vector<int> seeds;  // runs still going at each episode
};

// Mean over the runs that reached each episode. Failed runs are skipped.
AggregateCurve aggregate(const Cell& cell);

struct Assertion {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ResultSet {
    std::string experiment;
    nlohmann::json config = nlohmann::json::object();
    std::vector<Cell> cells;
    std::vector<Assertion> assertions;
    nlohmann::json statistics = nlohmann::json::object();
    // (relative path, content) written verbatim, e.g. a verifier report
    std::vector<std::pair<std::string, std::string>> extra_files;
    bool partial = false;

    const Cell* find(const std::string& label) const;
    bool all_passed() const;
};

// OLS slope of log(time) on log(n); needs >= 3 points, all positive.
double loglog_slope(const std::vector<std::pair<double, double>>& points);

double median(std::vector<double> v);

// Learning times with runs that never got there counted as budget + 1, so a
// median over them is still defined (and visibly capped).
std::vector<double> censored_learning_times(const Cell& cell, int budget);

// Final cumulative regret of every successful run.
std::vector<double> final_cum_regrets(const Cell& cell);

struct ManifestEntry {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

inline constexpr const char* kManifestFormat = "rve.manifest";
inline constexpr int kManifestVersion = 1;

// Writes per-seed CSVs, aggregate CSVs, learning_times.csv, summary.json,
// SVG plots and manifest.json. Returns the manifest entries of every file
// written except the manifest itself.
std::vector<ManifestEntry> emit_outputs(const ResultSet& result, const std::filesystem::path& dir);

// Per-seed CSV text: header "episode,regret,cum_regret,return".
std::string seed_csv(const core::RegretTrace& trace);
std::string aggregate_csv(const AggregateCurve& curve);
std::string sha256_hex(const std::string& bytes);

// Shortest text that parses back to the same double.
std::string format_double(double v);

// Reads an output directory back. Every aggregate CSV is checked against a
// recomputation from the per-seed files and the manifest hashes are verified;
// mismatches throw.
ResultSet load_outputs(const std::filesystem::path& dir);

// Regenerates the SVG plots of an output directory from its CSVs and
// rewrites the manifest.
std::vector<ManifestEntry> replot(const std::filesystem::path& dir);

}  // namespace rve::harness
