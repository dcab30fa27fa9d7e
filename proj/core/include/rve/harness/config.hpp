#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rve::harness {

enum class ExperimentId {
    tabular_compare,
    linear_scaling,
    feature_scaling,
    misspecification,
    param_sweep,
    bootstrap_vs_gaussian,
    ensemble_size,
    representation_scaling,
    cartpole,
    dirichlet_regret,
    theory_suite,
};

ExperimentId parse_experiment_id(const std::string& s);
std::string to_string(ExperimentId id);
const std::vector<ExperimentId>& all_experiments();

enum class ValueType { integer, real, boolean, text, int_list, real_list, text_list };

// Flat key/value configuration with the defaults of one experiment preloaded.
// Keys outside the experiment's table are rejected; values are type-checked
// when set, so a bad config fails before anything runs.
class ExperimentConfig {
public:
    static ExperimentConfig defaults(ExperimentId id);

    ExperimentId id() const { return id_; }

    void set(const std::string& key, const std::string& value);
    // INI text. Keys may sit at top level or in a section named after the
    // experiment; any other section is an error.
    void apply_ini(std::istream& in);
    void apply_ini_file(const std::string& path);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<long> get_ints(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key) const;
    std::vector<std::uint64_t> seeds() const;

    // "key = value" lines in declaration order
    std::string echo() const;
    nlohmann::json to_json() const;

    struct Entry {
        std::string key;
        std::string value;
        ValueType type;
        std::string help;
    };
    const std::vector<Entry>& entries() const { return entries_; }

private:
    ExperimentId id_ = ExperimentId::theory_suite;
    std::vector<Entry> entries_;

    void add(const std::string& key, const std::string& value, ValueType type, const std::string& help);
    const Entry& find(const std::string& key) const;
};

std::vector<std::string> split_list(const std::string& s);

}  // namespace rve::harness
