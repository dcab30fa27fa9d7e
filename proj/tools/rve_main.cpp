#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rve/harness/experiment.hpp"

using namespace rve;

namespace {

int report(const harness::ResultSet& result, const std::filesystem::path& dir) {
    auto files = harness::emit_outputs(result, dir);
    for (const auto& a : result.assertions)
        std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
    if (result.partial) std::cout << "note: partial result, some seed runs failed\n";
    std::cout << files.size() << " files written to " << dir.string() << "\n";
    return result.all_passed() ? 0 : 1;
}

std::vector<std::pair<double, double>> read_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<std::pair<double, double>> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double n, t;
        if (!(ls >> n >> t)) {
            if (pts.empty()) continue;  // header
            throw std::runtime_error(path + ": expected two numbers per line: " + line);
        }
        pts.push_back({n, t});
    }
    return pts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized value function experiments"};
    app.require_subcommand(1);

    std::string experiment, config_file, seed_list, out_dir;
    std::vector<std::string> overrides;
    long episodes = 0;
    int workers = 0;
    bool deterministic = false, realized = false, quiet = false;
    auto* run = app.add_subcommand("run", "run one experiment and check its assertions");
    run->add_option("experiment", experiment, "experiment id")->required();
    run->add_option("--config", config_file, "INI file with overrides")->check(CLI::ExistingFile);
    run->add_option("--seed-list", seed_list, "comma separated seeds, a..b ranges allowed");
    run->add_option("--episodes", episodes, "episode budget")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "output directory (takes precedence over RVE_OUT)");
    run->add_option("--workers", workers, "parallel seed workers")->check(CLI::PositiveNumber);
    run->add_option("--set", overrides, "key=value override, repeatable");
    run->add_flag("--deterministic", deterministic, "single-threaded execution");
    run->add_flag("--realized-regret", realized, "regret from realized returns");
    run->add_flag("--quiet", quiet, "no per-seed progress lines");

    std::uint64_t theory_seed = 1;
    std::string theory_out;
    auto* theory = app.add_subcommand("theory", "run the theory verifier suite");
    theory->add_option("--seed", theory_seed, "suite seed");
    theory->add_option("--out", theory_out, "output directory");

    std::string slope_csv;
    auto* slope = app.add_subcommand("slope", "log-log slope of (n, learning_time) rows");
    slope->add_option("csv", slope_csv, "CSV file")->required()->check(CLI::ExistingFile);

    std::string replot_dir;
    auto* replot = app.add_subcommand("replot", "regenerate plots of an output directory");
    replot->add_option("dir", replot_dir, "output directory")->required()->check(CLI::ExistingDirectory);

    std::string defaults_id;
    auto* defaults = app.add_subcommand("defaults", "print an experiment's default config");
    defaults->add_option("experiment", defaults_id, "experiment id")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run || *theory) {
            const auto id = *run ? harness::parse_experiment_id(experiment) : harness::ExperimentId::theory_suite;
            auto cfg = harness::ExperimentConfig::defaults(id);
            if (*run) {
                if (!config_file.empty()) cfg.apply_ini_file(config_file);
                for (const auto& kv : overrides) {
                    const auto eq = kv.find('=');
                    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
                    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
                }
                if (!seed_list.empty()) cfg.set("seeds", seed_list);
                if (episodes > 0) cfg.set("episodes", std::to_string(episodes));
                if (workers > 0) cfg.set("workers", std::to_string(workers));
                if (deterministic) cfg.set("deterministic", "true");
                if (realized) cfg.set("realized_regret", "true");
            } else {
                cfg.set("seeds", std::to_string(theory_seed));
            }
            const std::string& explicit_out = *run ? out_dir : theory_out;
            if (!explicit_out.empty()) cfg.set("out", explicit_out);
            const auto dir = explicit_out.empty() ? harness::output_dir(cfg) : std::filesystem::path(explicit_out);
            std::cout << cfg.echo() << std::flush;
            harness::RunHooks hooks;
            if (!quiet) hooks.progress = [](const std::string& line) { std::cerr << line << std::endl; };
            return report(harness::run_experiment(cfg, hooks), dir);
        }
        if (*slope) {
            std::cout << harness::format_double(harness::loglog_slope(read_points(slope_csv))) << "\n";
            return 0;
        }
        if (*replot) {
            auto files = harness::replot(replot_dir);
            std::cout << files.size() << " files in manifest\n";
            return 0;
        }
        if (*defaults) {
            std::cout << harness::ExperimentConfig::defaults(harness::parse_experiment_id(defaults_id)).echo();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
