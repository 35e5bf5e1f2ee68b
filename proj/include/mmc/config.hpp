// Plain-text key = value run configuration with the experiment defaults.
#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmc/scheme.hpp"
#include "mmc/solver.hpp"

namespace mmc {

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RunMode { simulate, refine, compare };
enum class InitialKind { cosine, random, file };

struct RunConfig {
    RunMode mode = RunMode::simulate;
    double domain_l = 64.0;
    int grid_n = 256;
    double dt = 1e-3;
    double t_final = 25.0;

    double chi = 2.37;
    double n1 = 5.12;
    double n2 = 0.16;
    std::optional<double> a_reg;    // empty: A = chi^2 rho^2
    bool a_policy_explicit = false; // set via a_policy = explicit; requires a_reg

    SchemeVariant variant = SchemeVariant::bdf2_regularized;

    InitialKind initial = InitialKind::cosine;
    double initial_mean = 0.6;
    double amplitude = 0.15;
    std::uint64_t seed = 1234;
    std::string initial_file;

    std::string out_dir = ".";
    std::string series_file = "series.csv";
    int snapshot_every = 0;  // 0 disables snapshots

    SolverConfig solver;

    std::vector<int> refine_grids = {16, 32, 64, 128, 256};
    double refine_c = 0.0002;  // dt = refine_c * h
    double refine_t = 0.128;

    std::vector<SchemeVariant> compare_variants = {
        SchemeVariant::cs1, SchemeVariant::bdf2_plain, SchemeVariant::bdf2_regularized,
        SchemeVariant::bdf2_full_implicit};
    SchemeVariant reference_variant = SchemeVariant::bdf2_full_implicit;
    int reference_dt_divisor = 16;

    ModelParams params() const { return derive_params(chi, n1, n2, a_reg); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                          "' has unparsable numeric value '" + v + "'");
    }
}

inline long long parse_int(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                          "' has unparsable integer value '" + v + "'");
    }
}

inline SchemeVariant parse_variant(const std::string& v, const std::string& key, int line) {
    if (v == "bdf2_regularized") return SchemeVariant::bdf2_regularized;
    if (v == "bdf2_plain") return SchemeVariant::bdf2_plain;
    if (v == "cs1") return SchemeVariant::cs1;
    if (v == "bdf2_full_implicit") return SchemeVariant::bdf2_full_implicit;
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' has unknown variant '" + v + "'");
}

inline bool is_pow2_int(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace detail

/// Applies one key = value assignment; shared by file parsing and the
/// command line --override flags. `line` is used in error messages only.
inline void apply_config_entry(RunConfig& c, const std::string& key, const std::string& value,
                               int line = 0) {
    using detail::parse_double;
    using detail::parse_int;
    if (key == "mode") {
        if (value == "simulate") c.mode = RunMode::simulate;
        else if (value == "refine") c.mode = RunMode::refine;
        else if (value == "compare") c.mode = RunMode::compare;
        else
            throw ConfigError("config line " + std::to_string(line) + ": unknown mode '" +
                              value + "'");
    } else if (key == "domain_l") c.domain_l = parse_double(value, key, line);
    else if (key == "grid_n") c.grid_n = static_cast<int>(parse_int(value, key, line));
    else if (key == "dt") c.dt = parse_double(value, key, line);
    else if (key == "t_final") c.t_final = parse_double(value, key, line);
    else if (key == "chi") c.chi = parse_double(value, key, line);
    else if (key == "n1") c.n1 = parse_double(value, key, line);
    else if (key == "n2") c.n2 = parse_double(value, key, line);
    else if (key == "a_policy") {
        if (value == "chi2rho2") {
            c.a_reg.reset();
            c.a_policy_explicit = false;
        } else if (value == "explicit") {
            c.a_policy_explicit = true;
        } else
            throw ConfigError("config line " + std::to_string(line) +
                              ": a_policy must be 'chi2rho2' or 'explicit'");
    } else if (key == "a_reg") {
        c.a_reg = parse_double(value, key, line);
        c.a_policy_explicit = true;
    } else if (key == "variant") c.variant = detail::parse_variant(value, key, line);
    else if (key == "initial") {
        if (value == "cosine") c.initial = InitialKind::cosine;
        else if (value == "random") c.initial = InitialKind::random;
        else if (value == "file") c.initial = InitialKind::file;
        else
            throw ConfigError("config line " + std::to_string(line) + ": unknown initial '" +
                              value + "'");
    } else if (key == "initial_mean") c.initial_mean = parse_double(value, key, line);
    else if (key == "amplitude") c.amplitude = parse_double(value, key, line);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(value, key, line));
    else if (key == "initial_file") c.initial_file = value;
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "series_file") c.series_file = value;
    else if (key == "snapshot_every") c.snapshot_every = static_cast<int>(parse_int(value, key, line));
    else if (key == "solver_tol") c.solver.tol = parse_double(value, key, line);
    else if (key == "max_cycles") c.solver.max_cycles = static_cast<int>(parse_int(value, key, line));
    else if (key == "pre_sweeps") c.solver.pre_sweeps = static_cast<int>(parse_int(value, key, line));
    else if (key == "post_sweeps") c.solver.post_sweeps = static_cast<int>(parse_int(value, key, line));
    else if (key == "min_level_n") c.solver.min_level_n = static_cast<int>(parse_int(value, key, line));
    else if (key == "coarse_sweeps") c.solver.coarse_sweeps = static_cast<int>(parse_int(value, key, line));
    else if (key == "interior_eps") c.solver.interior_eps = parse_double(value, key, line);
    else if (key == "cycle") {
        if (value == "v" || value == "V") c.solver.cycle = SolverConfig::Cycle::V;
        else if (value == "w" || value == "W") c.solver.cycle = SolverConfig::Cycle::W;
        else
            throw ConfigError("config line " + std::to_string(line) + ": cycle must be v or w");
    } else if (key == "refine_grids") {
        std::vector<int> grids;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (!item.empty()) grids.push_back(static_cast<int>(parse_int(item, key, line)));
        }
        if (grids.empty())
            throw ConfigError("config line " + std::to_string(line) + ": refine_grids is empty");
        c.refine_grids = grids;
    } else if (key == "refine_c") c.refine_c = parse_double(value, key, line);
    else if (key == "refine_t") c.refine_t = parse_double(value, key, line);
    else if (key == "compare_variants") {
        std::vector<SchemeVariant> vs;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (!item.empty()) vs.push_back(detail::parse_variant(item, key, line));
        }
        if (vs.empty())
            throw ConfigError("config line " + std::to_string(line) +
                              ": compare_variants is empty");
        c.compare_variants = vs;
    } else if (key == "reference_variant") c.reference_variant = detail::parse_variant(value, key, line);
    else if (key == "reference_dt_divisor")
        c.reference_dt_divisor = static_cast<int>(parse_int(value, key, line));
    else
        throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key + "'");
}

/// Validates cross-field invariants; throws ConfigError naming the field.
inline void validate_config(const RunConfig& c) {
    auto positive = [](double x, const char* name) {
        if (!(x > 0.0)) throw ConfigError(std::string("config: '") + name + "' must be positive");
    };
    positive(c.domain_l, "domain_l");
    positive(c.dt, "dt");
    positive(c.t_final, "t_final");
    positive(c.chi, "chi");
    positive(c.n1, "n1");
    positive(c.n2, "n2");
    positive(c.solver.tol, "solver_tol");
    positive(c.solver.interior_eps, "interior_eps");
    positive(c.refine_c, "refine_c");
    positive(c.refine_t, "refine_t");
    if (c.grid_n < 2) throw ConfigError("config: 'grid_n' must be >= 2");
    if (c.snapshot_every < 0) throw ConfigError("config: 'snapshot_every' must be >= 0");
    if (c.solver.max_cycles < 1) throw ConfigError("config: 'max_cycles' must be >= 1");
    if (c.solver.min_level_n < 2) throw ConfigError("config: 'min_level_n' must be >= 2");
    if (c.reference_dt_divisor < 1)
        throw ConfigError("config: 'reference_dt_divisor' must be >= 1");
    if (c.a_reg && *c.a_reg < 0.0) throw ConfigError("config: 'a_reg' must be >= 0");
    if (c.a_policy_explicit && !c.a_reg)
        throw ConfigError("config: a_policy = explicit requires 'a_reg'");
    const bool multigrid = c.grid_n > c.solver.min_level_n;
    if (multigrid && !detail::is_pow2_int(c.grid_n))
        throw ConfigError("config: 'grid_n' must be a power of two when the multigrid"
                          " hierarchy is deeper than one level");
    for (int n : c.refine_grids)
        if (n < 2 || (n > c.solver.min_level_n && !detail::is_pow2_int(n)))
            throw ConfigError("config: 'refine_grids' entries must be powers of two");
    if (c.initial == InitialKind::file && c.initial_file.empty())
        throw ConfigError("config: 'initial_file' is required when initial = file");
}

/// Parses a key = value document ('#' starts a comment). Omitted keys keep
/// the experiment defaults; an empty document is the default setup.
inline RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = detail::trim(raw);
        if (s.empty()) continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line) +
                              ": expected 'key = value', got '" + s + "'");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string value = detail::trim(s.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line) + ": empty key");
        apply_config_entry(c, key, value, line);
    }
    validate_config(c);
    return c;
}

} // namespace mmc
