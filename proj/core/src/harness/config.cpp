#include "rve/harness/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rve::harness {

namespace {

const std::vector<std::pair<ExperimentId, std::string>>& names() {
    static const std::vector<std::pair<ExperimentId, std::string>> n = {
        {ExperimentId::tabular_compare, "tabular_compare"},
        {ExperimentId::linear_scaling, "linear_scaling"},
        {ExperimentId::feature_scaling, "feature_scaling"},
        {ExperimentId::misspecification, "misspecification"},
        {ExperimentId::param_sweep, "param_sweep"},
        {ExperimentId::bootstrap_vs_gaussian, "bootstrap_vs_gaussian"},
        {ExperimentId::ensemble_size, "ensemble_size"},
        {ExperimentId::representation_scaling, "representation_scaling"},
        {ExperimentId::cartpole, "cartpole"},
        {ExperimentId::dirichlet_regret, "dirichlet_regret"},
        {ExperimentId::theory_suite, "theory_suite"},
    };
    return n;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

long parse_long(const std::string& s) {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("not an integer");
    return v;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("not a number");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("not a boolean");
}

// "a..b" expands to a, a+1, ..., b
std::vector<long> parse_ints(const std::string& s) {
    std::vector<long> out;
    for (const auto& item : split_list(s)) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_long(item));
            continue;
        }
        const long lo = parse_long(item.substr(0, dots)), hi = parse_long(item.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("empty range");
        for (long v = lo; v <= hi; ++v) out.push_back(v);
    }
    return out;
}

void check_value(ValueType type, const std::string& v) {
    switch (type) {
        case ValueType::integer: parse_long(v); break;
        case ValueType::real: parse_double(v); break;
        case ValueType::boolean: parse_bool(v); break;
        case ValueType::text: break;
        case ValueType::int_list: parse_ints(v); break;
        case ValueType::real_list:
            for (const auto& item : split_list(v)) parse_double(item);
            break;
        case ValueType::text_list: break;
    }
}

}  // namespace

ExperimentId parse_experiment_id(const std::string& s) {
    for (const auto& [id, name] : names())
        if (name == s) return id;
    throw std::invalid_argument("unknown experiment '" + s + "'");
}

std::string to_string(ExperimentId id) {
    for (const auto& [i, name] : names())
        if (i == id) return name;
    return "?";
}

const std::vector<ExperimentId>& all_experiments() {
    static const std::vector<ExperimentId> all = [] {
        std::vector<ExperimentId> v;
        for (const auto& [id, name] : names()) v.push_back(id);
        return v;
    }();
    return all;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void ExperimentConfig::add(const std::string& key, const std::string& value, ValueType type, const std::string& help) {
    check_value(type, value);
    entries_.push_back({key, value, type, help});
}

ExperimentConfig ExperimentConfig::defaults(ExperimentId id) {
    using T = ValueType;
    ExperimentConfig c;
    c.id_ = id;
    const std::string name = to_string(id);
    c.add("out", "results/" + name, T::text, "output directory (RVE_OUT overrides)");
    c.add("workers", "1", T::integer, "parallel seed workers");
    c.add("deterministic", "false", T::boolean, "force single-threaded execution");
    c.add("realized_regret", "false", T::boolean, "regret from realized returns instead of exact policy values");

    auto deep = [&c](const std::string& sgd_steps, const std::string& prior_scale) {
        c.add("hidden", "50,50", T::int_list, "MLP hidden layer widths");
        c.add("gamma", "0.99", T::real, "TD discount");
        c.add("learning_rate", "0.001", T::real, "step size");
        c.add("optimizer", "adam", T::text, "sgd or adam");
        c.add("mean_loss", "true", T::boolean, "average the TD loss over the minibatch");
        c.add("minibatch", "128", T::integer, "minibatch size");
        c.add("sgd_steps_per_learn", sgd_steps, T::integer, "SGD steps per member per episode; 0 means one per step of the horizon");
        c.add("capacity", "100000", T::integer, "transitions kept per member");
        c.add("prior_scale", prior_scale, T::real, "multiplier on the frozen prior network");
        c.add("update", "bootstrap", T::text, "ensemble data perturbation: bootstrap, gaussian or none");
        c.add("update_noise_var", "1", T::real, "noise variance for the gaussian update");
    };

    switch (id) {
        case ExperimentId::tabular_compare:
            c.add("seeds", "0..9", T::int_list, "run seeds");
            c.add("bomb_seeds", "5..9", T::int_list, "seeds whose instance holds a bomb");
            c.add("episodes", "5000", T::integer, "episodes per run");
            c.add("size_n", "10", T::integer, "deep-sea size N");
            c.add("agents", "rlsvi,psrl,ucrl2,boltzmann,egreedy", T::text_list, "agents to compare");
            c.add("rlsvi_noise_var_over_h2", "0.04", T::real, "RLSVI v / H^2");
            c.add("rlsvi_prior_var_over_noise", "1", T::real, "RLSVI lambda / v");
            c.add("psrl_multiplier", "10", T::real, "PSRL count multiplier");
            c.add("ucrl2_multiplier", "10", T::real, "UCRL2 count multiplier");
            c.add("ucrl2_confidence_scale", "0.1", T::real, "UCRL2 width multiplier");
            c.add("ucrl2_delta", "0.05", T::real, "UCRL2 confidence parameter");
            c.add("epsilon", "0.1", T::real, "epsilon-greedy LSVI exploration rate");
            c.add("boltzmann_etas", "0.01,0.1,1", T::real_list, "Boltzmann LSVI temperatures tried");
            c.add("ordering_margin", "0.1", T::real, "allowed relative crossover in the regret ordering");
            break;
        case ExperimentId::linear_scaling:
            c.add("seeds", "0..4", T::int_list, "run seeds (treasure instances)");
            c.add("episodes", "5000", T::integer, "episode cap per run");
            c.add("sizes", "10,20,30,40,50", T::int_list, "deep-sea sizes N");
            c.add("features_per_row", "10", T::integer, "features per row M");
            c.add("prior_var", "100", T::real, "lambda");
            c.add("noise_var", "0.01", T::real, "v");
            c.add("stop_at_learning_time", "true", T::boolean, "end a run once its learning time is known");
            c.add("slope_min", "1.5", T::real, "lowest accepted log-log slope");
            c.add("slope_max", "2.8", T::real, "highest accepted log-log slope");
            c.add("max_time_over_dithering", "0.01", T::real, "learning times must stay below this fraction of 2^N");
            break;
        case ExperimentId::feature_scaling:
            c.add("seeds", "0..4", T::int_list, "run seeds (treasure instances)");
            c.add("episodes", "5000", T::integer, "episode cap per run");
            c.add("size_n", "20", T::integer, "deep-sea size N");
            c.add("features", "10,20,40,60,80", T::int_list, "features per row M");
            c.add("prior_var", "100", T::real, "lambda");
            c.add("noise_var", "0.01", T::real, "v");
            c.add("stop_at_learning_time", "true", T::boolean, "end a run once its learning time is known");
            break;
        case ExperimentId::misspecification:
            c.add("seeds", "0..19", T::int_list, "run seeds (treasure instances)");
            c.add("episodes", "5000", T::integer, "episodes per run");
            c.add("size_n", "20", T::integer, "deep-sea size N");
            c.add("features_per_row", "40", T::integer, "features per row M");
            c.add("psis", "0,0.01,1", T::real_list, "feature noise variances psi");
            c.add("prior_var", "100", T::real, "lambda");
            c.add("noise_var", "0.01", T::real, "v");
            c.add("max_ratio", "2.0", T::real, "largest accepted regret ratio between the extreme psi cells");
            break;
        case ExperimentId::param_sweep:
            c.add("seeds", "0..9", T::int_list, "run seeds (treasure instances)");
            c.add("episodes", "5000", T::integer, "episodes per run");
            c.add("size_n", "20", T::integer, "deep-sea size N");
            c.add("features_per_row", "10", T::integer, "features per row M");
            c.add("reward_noise_sd", "1", T::real, "observation noise on rewards");
            c.add("prior_vars", "100", T::real_list, "lambda values");
            c.add("noise_vars", "0.0001,0.01,1", T::real_list, "v values");
            c.add("bootstrap", "true", T::boolean, "add a bootstrap cell per lambda");
            c.add("bootstrap_noise_var", "0.01", T::real, "v of the bootstrap cell (ridge weight only)");
            c.add("linear_fraction", "0.4", T::real, "fraction of the always-left regret that counts as linear regret");
            c.add("bootstrap_ratio", "1.5", T::real, "bootstrap regret must be within this factor of the best v");
            break;
        case ExperimentId::bootstrap_vs_gaussian:
            c.add("seeds", "0..4", T::int_list, "run seeds (treasure instances)");
            c.add("episodes", "5000", T::integer, "episode cap per run");
            c.add("sizes", "10,20,30", T::int_list, "deep-sea sizes N");
            c.add("features_per_row", "10", T::integer, "features per row M");
            c.add("prior_var", "100", T::real, "lambda");
            c.add("noise_var", "0.01", T::real, "v for the gaussian cells");
            c.add("stop_at_learning_time", "true", T::boolean, "end a run once its learning time is known");
            c.add("max_slope_difference", "1.0", T::real, "largest accepted gap between the two log-log slopes");
            break;
        case ExperimentId::ensemble_size:
            c.add("seeds", "0..19", T::int_list, "run seeds (treasure instances)");
            c.add("episodes", "1000", T::integer, "episodes per run");
            c.add("size_n", "10", T::integer, "deep-sea size N");
            c.add("ensemble_sizes", "1,5,20", T::int_list, "ensemble sizes K");
            deep("0", "3");
            break;
        case ExperimentId::representation_scaling:
            c.add("seeds", "0..4", T::int_list, "run seeds (treasure instances)");
            c.add("episodes", "3000", T::integer, "episode cap per run");
            c.add("size_n", "20", T::integer, "deep-sea size N");
            c.add("representations", "pixel,linear,always_right", T::text_list, "input representations");
            c.add("features_per_row", "10", T::integer, "features per row M of the linear input");
            c.add("ensemble_size", "20", T::integer, "ensemble size K");
            c.add("stop_at_learning_time", "true", T::boolean, "end a run once its learning time is known");
            c.add("always_right_max", "50", T::integer, "largest accepted always-right learning time");
            deep("0", "3");
            break;
        case ExperimentId::cartpole:
            c.add("seeds", "0..4", T::int_list, "run seeds");
            c.add("episodes", "2000", T::integer, "episodes per run");
            c.add("ensemble_size", "20", T::integer, "ensemble size K");
            c.add("baseline", "true", T::boolean, "also run epsilon-greedy single-network TD");
            c.add("baseline_epsilon", "0.1", T::real, "epsilon of the baseline");
            c.add("tail_fraction", "0.1", T::real, "final fraction of episodes scored");
            c.add("min_passing_seeds", "3", T::integer, "seeds that must end with positive reward");
            deep("32", "3");
            break;
        case ExperimentId::dirichlet_regret:
            c.add("seeds", "0..199", T::int_list, "one sampled MDP per seed");
            c.add("episodes", "8000", T::integer, "episodes per run (2L)");
            c.add("horizon", "3", T::integer, "H");
            c.add("num_states", "3", T::integer, "|X|");
            c.add("num_actions", "2", T::integer, "|A|");
            c.add("beta", "2", T::real, "Dirichlet pseudocount");
            c.add("noise_var_over_h2", "1", T::real, "v / H^2");
            c.add("prior_mean_over_h", "1", T::real, "prior mean / H");
            c.add("noise_over_prior", "2", T::real, "v / lambda");
            c.add("max_ratio", "1.9", T::real, "largest accepted Regret(2L) / Regret(L)");
            c.add("min_episode_regret", "-1e-9", T::real, "smallest accepted per-episode regret");
            break;
        case ExperimentId::theory_suite:
            c.add("seeds", "1", T::int_list, "suite seed");
            c.add("episodes", "0", T::integer, "unused");
            break;
    }
    return c;
}

const ExperimentConfig::Entry& ExperimentConfig::find(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.key == key) return e;
    throw std::invalid_argument("unknown key '" + key + "' for experiment " + to_string(id_));
}

bool ExperimentConfig::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    auto& e = const_cast<Entry&>(find(key));
    const std::string v = trim(value);
    try {
        check_value(e.type, v);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value '" + v + "' for key '" + key + "'");
    }
    e.value = v;
}

void ExperimentConfig::apply_ini(std::istream& in) {
    boost::property_tree::ptree tree;
    boost::property_tree::ini_parser::read_ini(in, tree);
    for (const auto& [key, node] : tree) {
        if (node.empty()) {
            set(key, node.get_value<std::string>());
            continue;
        }
        if (key != to_string(id_)) throw std::invalid_argument("config section [" + key + "] does not match experiment " + to_string(id_));
        for (const auto& [k, v] : node) {
            if (!v.empty()) throw std::invalid_argument("nested sections are not supported");
            set(k, v.get_value<std::string>());
        }
    }
}

void ExperimentConfig::apply_ini_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file " + path);
    try {
        apply_ini(f);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

const std::string& ExperimentConfig::get(const std::string& key) const { return find(key).value; }
long ExperimentConfig::get_int(const std::string& key) const { return parse_long(get(key)); }
double ExperimentConfig::get_double(const std::string& key) const { return parse_double(get(key)); }
bool ExperimentConfig::get_bool(const std::string& key) const { return parse_bool(get(key)); }
std::vector<long> ExperimentConfig::get_ints(const std::string& key) const { return parse_ints(get(key)); }

std::vector<double> ExperimentConfig::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(get(key))) out.push_back(parse_double(item));
    return out;
}

std::vector<std::string> ExperimentConfig::get_strings(const std::string& key) const { return split_list(get(key)); }

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
    std::vector<std::uint64_t> out;
    for (long s : get_ints("seeds")) {
        if (s < 0) throw std::invalid_argument("seeds must be non-negative");
        out.push_back(std::uint64_t(s));
    }
    return out;
}

std::string ExperimentConfig::echo() const {
    std::ostringstream os;
    os << "[" << to_string(id_) << "]\n";
    for (const auto& e : entries_) os << e.key << " = " << e.value << "\n";
    return os.str();
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["experiment"] = to_string(id_);
    nlohmann::json values = nlohmann::json::object();
    for (const auto& e : entries_) values[e.key] = e.value;
    j["values"] = values;
    return j;
}

}  // namespace rve::harness
