#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "hstokes/error.hpp"

namespace hstokes {

/// Parsed key/value text: "[section]" headers, "key = value" lines, '#' comments.
class KeyValueText {
public:
    static KeyValueText parse(std::istream& in, const std::string& origin = "config") {
        KeyValueText kv;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            line = strip(strip_comment(line));
            if (line.empty()) continue;
            const std::string where = origin + ":" + std::to_string(lineno);
            if (line.front() == '[') {
                if (line.back() != ']') throw ValidationError(where + ": malformed section header");
                section = strip(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ValidationError(where + ": expected key = value");
            const std::string key = strip(line.substr(0, eq));
            std::string value = strip(line.substr(eq + 1));
            if (key.empty()) throw ValidationError(where + ": empty key");
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                value = value.substr(1, value.size() - 2);
            const std::string full = section.empty() ? key : section + "." + key;
            if (kv.values_.contains(full)) throw ValidationError(where + ": duplicate key " + full);
            kv.values_[full] = value;
        }
        return kv;
    }

    static KeyValueText load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("config: cannot open " + path);
        return parse(in, path);
    }

    bool has(const std::string& key) const { return values_.contains(key); }

    std::string get(const std::string& key, const std::string& fallback) {
        used_.insert(key);
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get(const std::string& key, double fallback) {
        used_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(it->second, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != it->second.size()) throw ValidationError("config: " + key + " is not a number: " + it->second);
        return v;
    }

    long long get_int(const std::string& key, long long fallback) {
        const double v = get(key, double(fallback));
        if (v != std::floor(v)) throw ValidationError("config: " + key + " must be an integer");
        return (long long)v;
    }

    bool get_bool(const std::string& key, bool fallback) {
        const std::string v = get(key, std::string(fallback ? "true" : "false"));
        if (v == "true") return true;
        if (v == "false") return false;
        throw ValidationError("config: " + key + " must be true or false");
    }

    /// Throws on keys that no getter asked for (typos).
    void reject_unknown() const {
        for (const auto& [k, v] : values_)
            if (!used_.contains(k)) throw ValidationError("config: unknown key " + k);
    }

private:
    static std::string strip(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }
    static std::string strip_comment(const std::string& s) {
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') quoted = !quoted;
            if (s[i] == '#' && !quoted) return s.substr(0, i);
        }
        return s;
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

struct RunConfig {
    std::string kind;  ///< stokes | navier-stokes | demo-rayleigh | verify | norms | oracle-compare; empty: from case
    std::string case_name = "rayleigh-ramp";
    double amplitude = std::nan("");
    double alpha = 0.5;
    std::uint64_t seed = 20240917;
    std::string out = "out";
    int threads = 0;

    int dim = 2;
    double L = 2 * std::numbers::pi;
    double H = 14;
    int n_tangential = 16;
    int n_normal = 257;
    double T = std::nan("");  ///< NaN: case default
    int n_time = 65;

    std::string h_file, g_file, F_file;

    int m_max = 30;
    double theta = 0.9;
    double stop_tol = 1e-6;
    double t_shrink = 0.5;
    int max_halvings = 6;
    long long norm_pairs = 200'000;

    int space_refine = 2;
    int time_refine = 2;
    double oracle_tol = 0.05;

    std::string norms_field;
    std::string norms_mode = "sampled";
    long long norms_pairs = 1'000'000;

    int test_fields = 8;
};

inline RunConfig parse_config(KeyValueText kv) {
    RunConfig c;
    c.kind = kv.get("run.kind", c.kind);
    c.case_name = kv.get("run.case", c.case_name);
    c.amplitude = kv.get("run.amplitude", c.amplitude);
    c.alpha = kv.get("run.alpha", c.alpha);
    c.seed = std::uint64_t(kv.get_int("run.seed", (long long)c.seed));
    c.out = kv.get("run.out", c.out);
    c.threads = int(kv.get_int("run.threads", c.threads));

    c.dim = int(kv.get_int("grid.dim", c.dim));
    c.L = kv.get("grid.L", c.L);
    c.H = kv.get("grid.H", c.H);
    c.n_tangential = int(kv.get_int("grid.n_tangential", c.n_tangential));
    c.n_normal = int(kv.get_int("grid.n_normal", c.n_normal));
    c.T = kv.get("grid.T", c.T);
    c.n_time = int(kv.get_int("grid.n_time", c.n_time));

    c.h_file = kv.get("data.h", c.h_file);
    c.g_file = kv.get("data.g", c.g_file);
    c.F_file = kv.get("data.F", c.F_file);

    c.m_max = int(kv.get_int("iteration.m_max", c.m_max));
    c.theta = kv.get("iteration.theta", c.theta);
    c.stop_tol = kv.get("iteration.stop_tol", c.stop_tol);
    c.t_shrink = kv.get("iteration.t_shrink", c.t_shrink);
    c.max_halvings = int(kv.get_int("iteration.max_halvings", c.max_halvings));
    c.norm_pairs = kv.get_int("iteration.norm_pairs", c.norm_pairs);

    c.space_refine = int(kv.get_int("oracle.space_refine", c.space_refine));
    c.time_refine = int(kv.get_int("oracle.time_refine", c.time_refine));
    c.oracle_tol = kv.get("oracle.tolerance", c.oracle_tol);

    c.norms_field = kv.get("norms.field", c.norms_field);
    c.norms_mode = kv.get("norms.mode", c.norms_mode);
    c.norms_pairs = kv.get_int("norms.pairs", c.norms_pairs);

    c.test_fields = int(kv.get_int("verify.test_fields", c.test_fields));
    kv.reject_unknown();
    return c;
}

inline RunConfig load_config(const std::string& path) { return parse_config(KeyValueText::load(path)); }

/// Every recognised key with its default, in the config file syntax.
inline std::string reference_config_text() {
    const RunConfig c;
    std::ostringstream o;
    auto str = [](const std::string& s) { return "\"" + s + "\""; };
    o << "[run]\n"
      << "kind = \"\"            # stokes | navier-stokes | verify | norms | oracle-compare | demo-rayleigh; empty: from case\n"
      << "case = " << str(c.case_name)
      << "  # zero | rayleigh-ramp | tangential-mode | normal-mode | mixed | small-ns | large-ns\n"
      << "amplitude = nan       # nan: case default\n"
      << "alpha = " << c.alpha << "\n"
      << "seed = " << c.seed << "\n"
      << "out = " << str(c.out) << "\n"
      << "threads = " << c.threads << "           # 0: HSTOKES_THREADS or runtime default\n\n"
      << "[grid]\n"
      << "dim = " << c.dim << "\n"
      << "L = " << std::setprecision(17) << c.L << std::setprecision(6) << "\n"
      << "H = " << c.H << "\n"
      << "n_tangential = " << c.n_tangential << "\n"
      << "n_normal = " << c.n_normal << "\n"
      << "T = nan               # nan: case default\n"
      << "n_time = " << c.n_time << "\n\n"
      << "[data]                # optional field stems overriding the case data\n"
      << "h = \"\"\n"
      << "g = \"\"\n"
      << "F = \"\"\n\n"
      << "[iteration]\n"
      << "m_max = " << c.m_max << "\n"
      << "theta = " << c.theta << "\n"
      << "stop_tol = " << c.stop_tol << "\n"
      << "t_shrink = " << c.t_shrink << "\n"
      << "max_halvings = " << c.max_halvings << "\n"
      << "norm_pairs = " << c.norm_pairs << "\n\n"
      << "[oracle]\n"
      << "space_refine = " << c.space_refine << "\n"
      << "time_refine = " << c.time_refine << "\n"
      << "tolerance = " << c.oracle_tol << "\n\n"
      << "[norms]\n"
      << "field = \"\"            # stem of a space-time field; empty: solve the configured case\n"
      << "mode = " << str(c.norms_mode) << "     # exact | sampled\n"
      << "pairs = " << c.norms_pairs << "\n\n"
      << "[verify]\n"
      << "test_fields = " << c.test_fields << "\n";
    return o.str();
}

}  // namespace hstokes
