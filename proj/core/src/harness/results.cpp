#include "rve/harness/results.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rve/core/live.hpp"
#include "svg.hpp"

namespace rve::harness {

namespace fs = std::filesystem;

AggregateCurve aggregate(const Cell& cell) {
    AggregateCurve out;
    std::size_t len = 0;
    for (const auto& r : cell.runs)
        if (r.ok) len = std::max(len, r.trace.size());
    out.mean_regret.assign(len, 0.0);
    out.mean_cum_regret.assign(len, 0.0);
    out.mean_return.assign(len, 0.0);
    out.seeds.assign(len, 0);
    for (const auto& r : cell.runs) {
        if (!r.ok) continue;
        const auto cum = r.trace.cumulative_regret();
        for (std::size_t i = 0; i < r.trace.size(); ++i) {
            out.mean_regret[i] += r.trace.per_episode_regret[i];
            out.mean_cum_regret[i] += cum[i];
            out.mean_return[i] += r.trace.per_episode_return[i];
            ++out.seeds[i];
        }
    }
    for (std::size_t i = 0; i < len; ++i) {
        out.mean_regret[i] /= out.seeds[i];
        out.mean_cum_regret[i] /= out.seeds[i];
        out.mean_return[i] /= out.seeds[i];
    }
    return out;
}

const Cell* ResultSet::find(const std::string& label) const {
    for (const auto& c : cells)
        if (c.label == label) return &c;
    return nullptr;
}

bool ResultSet::all_passed() const {
    return !assertions.empty() &&
           std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("loglog_slope needs at least 3 points");
    double mx = 0, my = 0;
    for (auto [n, t] : points) {
        if (!(n > 0) || !(t > 0) || !std::isfinite(n) || !std::isfinite(t))
            throw std::invalid_argument("loglog_slope needs positive finite values");
        mx += std::log(n);
        my += std::log(t);
    }
    mx /= double(points.size());
    my /= double(points.size());
    double sxy = 0, sxx = 0;
    for (auto [n, t] : points) {
        const double dx = std::log(n) - mx;
        sxy += dx * (std::log(t) - my);
        sxx += dx * dx;
    }
    if (sxx <= 0) throw std::invalid_argument("loglog_slope needs at least two distinct n");
    return sxy / sxx;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of an empty list");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> censored_learning_times(const Cell& cell, int budget) {
    std::vector<double> out;
    for (const auto& r : cell.runs)
        if (r.ok) out.push_back(r.learning_time ? double(*r.learning_time) : double(budget) + 1);
    return out;
}

std::vector<double> final_cum_regrets(const Cell& cell) {
    std::vector<double> out;
    for (const auto& r : cell.runs)
        if (r.ok && r.trace.size() > 0) out.push_back(r.trace.cumulative_regret().back());
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_number(const std::string& s, const std::string& where) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error(where + ": bad number '" + s + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + p.parent_path().string() + ": " + ec.message());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
    f.close();
    if (!f) throw std::runtime_error("write failed for " + p.string());
}

fs::path seed_path(const std::string& label, std::uint64_t seed) {
    return fs::path("seeds") / label / ("seed_" + std::to_string(seed) + ".csv");
}

fs::path aggregate_path(const std::string& label) { return fs::path("aggregate") / (label + ".csv"); }

bool has_regret(const AggregateCurve& c) {
    return std::any_of(c.mean_regret.begin(), c.mean_regret.end(), [](double v) { return !std::isnan(v); });
}

int cell_budget(const Cell& c) {
    if (c.params.contains("budget")) return c.params["budget"].get<int>();
    std::size_t len = 0;
    for (const auto& r : c.runs) len = std::max(len, r.trace.size());
    return int(len);
}

// plot file -> svg text
std::map<std::string, std::string> make_plots(const ResultSet& result) {
    std::map<std::string, std::string> out;
    if (result.cells.empty()) return out;

    std::vector<PlotSeries> regret, returns;
    for (const auto& c : result.cells) {
        const auto agg = aggregate(c);
        // at most ~1000 points per line
        const std::size_t stride = std::max<std::size_t>(1, agg.mean_cum_regret.size() / 1000);
        PlotSeries s{c.label, {}, {}}, r{c.label, {}, {}};
        for (std::size_t i = 0; i < agg.mean_cum_regret.size(); i += stride) {
            s.x.push_back(double(i + 1));
            s.y.push_back(agg.mean_cum_regret[i]);
            r.x.push_back(double(i + 1));
            r.y.push_back(agg.mean_return[i]);
        }
        if (has_regret(agg))
            regret.push_back(std::move(s));
        else
            returns.push_back(std::move(r));
    }
    if (!regret.empty())
        out["plots/regret.svg"] =
            svg_line_plot({result.experiment + ": mean cumulative regret", "episode", "cumulative regret"}, regret);
    if (!returns.empty())
        out["plots/return.svg"] =
            svg_line_plot({result.experiment + ": mean episodic return", "episode", "return"}, returns);

    // learning time against the cell's x parameter, one line per series
    std::map<std::string, PlotSeries> lt;
    for (const auto& c : result.cells) {
        if (!c.params.contains("x")) continue;
        const auto times = censored_learning_times(c, cell_budget(c));
        if (times.empty()) continue;
        const std::string name = c.params.value("series", std::string("median"));
        auto& s = lt[name];
        s.label = name;
        s.x.push_back(c.params["x"].get<double>());
        s.y.push_back(median(times));
    }
    if (!lt.empty()) {
        std::vector<PlotSeries> series;
        for (auto& [k, s] : lt) series.push_back(std::move(s));
        const std::string xl = result.cells.front().params.value("x_label", std::string("N"));
        out["plots/learning_time.svg"] =
            svg_line_plot({result.experiment + ": median learning time", xl, "learning time", true, true}, series);
    }
    return out;
}

nlohmann::json summary_json(const ResultSet& result) {
    nlohmann::json j;
    j["format"] = "rve.summary";
    j["version"] = 1;
    j["experiment"] = result.experiment;
    j["config"] = result.config;
    j["partial"] = result.partial;
    j["all_passed"] = result.all_passed();
    j["assertions"] = nlohmann::json::array();
    for (const auto& a : result.assertions)
        j["assertions"].push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
    j["statistics"] = result.statistics;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : result.cells) {
        nlohmann::json cj{{"label", c.label}, {"params", c.params}, {"runs", nlohmann::json::array()}};
        for (const auto& r : c.runs) {
            nlohmann::json rj{{"seed", r.seed}, {"ok", r.ok}, {"episodes", r.trace.size()}};
            rj["learning_time"] = r.learning_time ? nlohmann::json(*r.learning_time) : nlohmann::json(nullptr);
            if (!r.ok) rj["error"] = r.error;
            cj["runs"].push_back(rj);
        }
        j["cells"].push_back(cj);
    }
    return j;
}

std::vector<ManifestEntry> write_manifest(const fs::path& dir, const std::string& experiment,
                                          std::map<std::string, std::string> files) {
    std::vector<ManifestEntry> entries;
    nlohmann::json m;
    m["format"] = kManifestFormat;
    m["version"] = kManifestVersion;
    m["experiment"] = experiment;
    m["files"] = nlohmann::json::array();
    for (const auto& [path, content] : files) {
        ManifestEntry e{path, sha256_hex(content), content.size()};
        m["files"].push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
        entries.push_back(std::move(e));
    }
    write_file(dir / "manifest.json", m.dump(2) + "\n");
    return entries;
}

}  // namespace

std::string seed_csv(const core::RegretTrace& trace) {
    std::string out = "episode,regret,cum_regret,return\n";
    const auto cum = trace.cumulative_regret();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',' + format_double(trace.per_episode_regret[i]);
        out += ',' + format_double(cum[i]);
        out += ',' + format_double(trace.per_episode_return[i]);
        out += '\n';
    }
    return out;
}

std::string aggregate_csv(const AggregateCurve& c) {
    std::string out = "episode,mean_regret,mean_cum_regret,mean_return,seeds\n";
    for (std::size_t i = 0; i < c.mean_regret.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',' + format_double(c.mean_regret[i]);
        out += ',' + format_double(c.mean_cum_regret[i]);
        out += ',' + format_double(c.mean_return[i]);
        out += ',' + std::to_string(c.seeds[i]);
        out += '\n';
    }
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::vector<ManifestEntry> emit_outputs(const ResultSet& result, const fs::path& dir) {
    std::map<std::string, std::string> files;
    const bool empty = result.experiment.empty() && result.cells.empty() && result.assertions.empty() &&
                       result.extra_files.empty();
    if (!empty) {
        files["summary.json"] = summary_json(result).dump(2) + "\n";
        std::string lt = "cell,seed,learning_time\n";
        for (const auto& c : result.cells) {
            for (const auto& r : c.runs) {
                lt += c.label + ',' + std::to_string(r.seed) + ',' +
                      (r.learning_time ? std::to_string(*r.learning_time) : std::string()) + '\n';
                if (r.ok) files[seed_path(c.label, r.seed).generic_string()] = seed_csv(r.trace);
            }
            files[aggregate_path(c.label).generic_string()] = aggregate_csv(aggregate(c));
        }
        if (!result.cells.empty()) files["learning_times.csv"] = lt;
        for (auto& [path, svg] : make_plots(result)) files[path] = svg;
        for (const auto& [path, content] : result.extra_files) files[path] = content;
    }
    for (const auto& [path, content] : files) write_file(dir / path, content);
    return write_manifest(dir, result.experiment, files);
}

ResultSet load_outputs(const fs::path& dir) {
    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    if (manifest.value("format", "") != kManifestFormat || manifest.value("version", 0) != kManifestVersion)
        throw std::runtime_error(dir.string() + ": unsupported manifest");
    for (const auto& f : manifest["files"]) {
        const auto path = f["path"].get<std::string>();
        if (sha256_hex(read_file(dir / path)) != f["sha256"].get<std::string>())
            throw std::runtime_error((dir / path).string() + ": content hash does not match the manifest");
    }
    ResultSet result;
    if (!fs::exists(dir / "summary.json")) return result;
    const auto s = nlohmann::json::parse(read_file(dir / "summary.json"));
    result.experiment = s["experiment"].get<std::string>();
    result.config = s["config"];
    result.partial = s["partial"].get<bool>();
    result.statistics = s["statistics"];
    for (const auto& a : s["assertions"])
        result.assertions.push_back({a["name"].get<std::string>(), a["passed"].get<bool>(), a["detail"].get<std::string>()});
    for (const auto& cj : s["cells"]) {
        Cell c;
        c.label = cj["label"].get<std::string>();
        c.params = cj["params"];
        for (const auto& rj : cj["runs"]) {
            SeedRun r;
            r.seed = rj["seed"].get<std::uint64_t>();
            r.ok = rj["ok"].get<bool>();
            if (!r.ok) {
                r.error = rj.value("error", std::string());
                c.runs.push_back(std::move(r));
                continue;
            }
            const fs::path p = dir / seed_path(c.label, r.seed);
            std::istringstream in(read_file(p));
            std::string line;
            std::getline(in, line);
            if (line != "episode,regret,cum_regret,return") throw std::runtime_error(p.string() + ": bad header");
            std::vector<std::string> cum_text;
            while (std::getline(in, line)) {
                const auto cols = split_csv_line(line);
                if (cols.size() != 4) throw std::runtime_error(p.string() + ": expected 4 columns");
                r.trace.per_episode_regret.push_back(parse_number(cols[1], p.string()));
                r.trace.per_episode_return.push_back(parse_number(cols[3], p.string()));
                cum_text.push_back(cols[2]);
            }
            const auto cum = r.trace.cumulative_regret();
            for (std::size_t i = 0; i < cum.size(); ++i)
                if (format_double(cum[i]) != cum_text[i])
                    throw std::runtime_error(p.string() + ": cum_regret column disagrees with the regret column");
            r.trace.seed = r.seed;
            r.learning_time = core::learning_time(r.trace);
            const auto& lt = rj["learning_time"];
            if (lt.is_null() != !r.learning_time || (r.learning_time && lt.get<int>() != *r.learning_time))
                throw std::runtime_error(p.string() + ": learning time disagrees with the summary");
            c.runs.push_back(std::move(r));
        }
        const fs::path ap = dir / aggregate_path(c.label);
        if (read_file(ap) != aggregate_csv(aggregate(c)))
            throw std::runtime_error(ap.string() + ": aggregate does not match the per-seed files");
        result.cells.push_back(std::move(c));
    }
    return result;
}

std::vector<ManifestEntry> replot(const fs::path& dir) {
    const auto result = load_outputs(dir);
    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    std::map<std::string, std::string> files;
    for (const auto& f : manifest["files"]) {
        const auto path = f["path"].get<std::string>();
        if (path.rfind("plots/", 0) == 0) continue;
        files[path] = read_file(dir / path);
    }
    for (auto& [path, svg] : make_plots(result)) {
        write_file(dir / path, svg);
        files[path] = svg;
    }
    return write_manifest(dir, result.experiment, files);
}

}  // namespace rve::harness
