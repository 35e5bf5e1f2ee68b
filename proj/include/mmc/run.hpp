// Run orchestration for the simulate / refine / compare modes and the
// plain-text output formats (series CSV, snapshots, result tables).
#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "mmc/config.hpp"
#include "mmc/diagnostics.hpp"

namespace mmc {

/// Exit codes of run(): 0 success, 2 config error, 3 solver failure,
/// 4 assertion failure.
enum ExitCode : int {
    exit_ok = 0,
    exit_config_error = 2,
    exit_solver_failure = 3,
    exit_assertion_failure = 4,
};

/// Builds the initial field from the config: the three-period cosine
/// profile, seeded uniform noise in [-amplitude, amplitude], or a snapshot
/// file.
inline CellField make_initial_field(const RunConfig& c, const GridSpec& g);

namespace detail {

inline CellField load_snapshot(const std::string& path, const GridSpec& g) {
    std::ifstream in(path);
    if (!in) throw ConfigError("initial_file: cannot open '" + path + "'");
    int n = 0;
    double h = 0.0, t = 0.0;
    if (!(in >> n >> h >> t)) throw ConfigError("initial_file: malformed header in '" + path + "'");
    if (n != g.n)
        throw ConfigError("initial_file: grid size " + std::to_string(n) +
                          " does not match grid_n " + std::to_string(g.n));
    CellField out(g);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (!(in >> out(i, j)))
                throw ConfigError("initial_file: truncated data in '" + path + "'");
    return out;
}

inline void write_snapshot(const std::string& path, const CellField& f, double t) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open snapshot file '" + path + "'");
    std::fprintf(fp, "%d %.17g %.17g\n", f.grid().n, f.grid().h, t);
    for (int j = 0; j < f.grid().n; ++j) {
        for (int i = 0; i < f.grid().n; ++i)
            std::fprintf(fp, "%.17g%c", f(i, j), i + 1 == f.grid().n ? '\n' : ' ');
    }
    std::fclose(fp);
}

/// Series CSV writer: '#' config echo lines, mandatory header row, one
/// flushed row per record so a killed run leaves valid partial output.
class SeriesWriter {
public:
    SeriesWriter(const std::string& path, const RunConfig& c) {
        fp_ = std::fopen(path.c_str(), "w");
        if (!fp_) throw std::runtime_error("cannot open series file '" + path + "'");
        std::fprintf(fp_, "# mode = simulate\n");
        std::fprintf(fp_, "# grid_n = %d\n", c.grid_n);
        std::fprintf(fp_, "# domain_l = %.17g\n", c.domain_l);
        std::fprintf(fp_, "# dt = %.17g\n", c.dt);
        std::fprintf(fp_, "# variant = %s\n", variant_name(c.variant));
        if (c.initial == InitialKind::random)
            std::fprintf(fp_, "# seed = %" PRIu64 "\n", static_cast<std::uint64_t>(c.seed));
        std::fprintf(fp_, "step,t,energy,modified_energy,mass_error,min_phi,max_phi,cycles,residual\n");
        std::fflush(fp_);
    }
    ~SeriesWriter() {
        if (fp_) std::fclose(fp_);
    }
    SeriesWriter(const SeriesWriter&) = delete;
    SeriesWriter& operator=(const SeriesWriter&) = delete;

    void write(const DiagnosticsRecord& r) {
        std::fprintf(fp_, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", r.step, r.t,
                     r.energy, r.modified_energy, r.mass_error, r.min_phi, r.max_phi, r.cycles,
                     r.residual);
        std::fflush(fp_);
    }

private:
    std::FILE* fp_ = nullptr;
};

inline std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

inline int run_simulate(const RunConfig& c) {
    const GridSpec g(c.domain_l, c.grid_n);
    const ModelParams p = c.params();
    const CellField phi0 = make_initial_field(c, g);

    std::filesystem::create_directories(c.out_dir);
    SeriesWriter series(join_path(c.out_dir, c.series_file), c);

    const long long n_steps = std::llround(c.t_final / c.dt);
    if (n_steps < 1 || std::fabs(n_steps * c.dt - c.t_final) > 1e-6 * c.t_final)
        throw ConfigError("config: 't_final' must be a positive multiple of dt");

    SchemeState st = init_state(phi0, c.dt, c.variant, p);
    // The initialization copies phi^0, so its rows carry the same values.
    if (st.step > 0) {
        DiagnosticsRecord r0 = record_state(st);
        r0.step = 0;
        r0.t = 0.0;
        series.write(r0);
    }
    series.write(record_state(st));
    if (c.snapshot_every > 0)
        write_snapshot(join_path(c.out_dir, "snapshot_000000.txt"), st.phi_n, 0.0);

    while (st.step < n_steps) {
        auto [next, rep] = advance(st, c.solver, p);
        const DiagnosticsRecord r = record_step(st, next, rep, p);
        series.write(r);
        st = std::move(next);
        if (c.snapshot_every > 0 && st.step % c.snapshot_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshot_%06ld.txt", st.step);
            write_snapshot(join_path(c.out_dir, name), st.phi_n, st.time());
        }
    }
    std::printf("simulate: %lld steps to t = %.17g, final energy %.17g\n",
                n_steps, st.time(), st.energy);
    return exit_ok;
}

inline int run_refine(const RunConfig& c) {
    const ModelParams p = c.params();
    if (c.initial == InitialKind::file)
        throw ConfigError("config: refine mode requires an analytic initial condition");
    const RunConfig* cc = &c;
    InitialCondition init;
    if (c.initial == InitialKind::cosine) {
        init = [cc](double x, double y) {
            const double k = 6.0 * M_PI / cc->domain_l;
            return cc->initial_mean + cc->amplitude * std::cos(k * x) * std::cos(k * y);
        };
    } else {
        throw ConfigError("config: refine mode requires initial = cosine");
    }

    const RefinementResult res =
        refinement_study(init, c.domain_l, c.refine_grids, c.refine_c, c.refine_t, p, c.solver,
                         c.variant, [](int n, double dt) {
                             std::printf("refine: grid %4d^2 done (dt = %.6g)\n", n, dt);
                             std::fflush(stdout);
                         });

    std::filesystem::create_directories(c.out_dir);
    std::FILE* fp = std::fopen(join_path(c.out_dir, "refine.csv").c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open refine.csv");
    std::fprintf(fp, "n_coarse,n_fine,cauchy_l2,rate\n");
    std::printf("%8s %8s %14s %8s\n", "coarse", "fine", "cauchy_l2", "rate");
    for (std::size_t k = 0; k < res.cauchy_errors.size(); ++k) {
        const double rate = k > 0 ? res.rates[k - 1] : 0.0;
        if (k > 0) {
            std::fprintf(fp, "%d,%d,%.17g,%.4f\n", res.grid_sizes[k], res.grid_sizes[k + 1],
                         res.cauchy_errors[k], rate);
            std::printf("%8d %8d %14.6e %8.4f\n", res.grid_sizes[k], res.grid_sizes[k + 1],
                        res.cauchy_errors[k], rate);
        } else {
            std::fprintf(fp, "%d,%d,%.17g,\n", res.grid_sizes[k], res.grid_sizes[k + 1],
                         res.cauchy_errors[k]);
            std::printf("%8d %8d %14.6e %8s\n", res.grid_sizes[k], res.grid_sizes[k + 1],
                        res.cauchy_errors[k], "-");
        }
    }
    std::fclose(fp);
    return exit_ok;
}

inline int run_compare(const RunConfig& c) {
    const GridSpec g(c.domain_l, c.grid_n);
    const ModelParams p = c.params();
    const CellField phi0 = make_initial_field(c, g);
    const double ref_dt = c.dt / c.reference_dt_divisor;

    const std::vector<ComparisonRow> rows = scheme_comparison(
        c.compare_variants, c.reference_variant, ref_dt, phi0, c.dt, c.t_final, p, c.solver);

    std::filesystem::create_directories(c.out_dir);
    std::FILE* fp = std::fopen(join_path(c.out_dir, "compare.csv").c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open compare.csv");
    std::fprintf(fp, "variant,max_err,l2_err,cpu_seconds\n");
    std::printf("%-20s %14s %14s %10s\n", "variant", "max_err", "l2_err", "cpu_s");
    for (const ComparisonRow& r : rows) {
        std::fprintf(fp, "%s,%.17g,%.17g,%.4f\n", variant_name(r.variant), r.max_err, r.l2_err,
                     r.cpu_seconds);
        std::printf("%-20s %14.6e %14.6e %10.3f\n", variant_name(r.variant), r.max_err, r.l2_err,
                    r.cpu_seconds);
    }
    std::fclose(fp);
    return exit_ok;
}

} // namespace detail

inline CellField make_initial_field(const RunConfig& c, const GridSpec& g) {
    switch (c.initial) {
        case InitialKind::cosine: {
            const double k = 6.0 * M_PI / g.length;
            CellField out(g);
            for (int j = 0; j < g.n; ++j)
                for (int i = 0; i < g.n; ++i)
                    out(i, j) = c.initial_mean +
                                c.amplitude * std::cos(k * g.center(i)) * std::cos(k * g.center(j));
            return out;
        }
        case InitialKind::random: {
            std::mt19937_64 rng(c.seed);
            std::uniform_real_distribution<double> dist(-c.amplitude, c.amplitude);
            CellField out(g);
            for (int j = 0; j < g.n; ++j)
                for (int i = 0; i < g.n; ++i) out(i, j) = c.initial_mean + dist(rng);
            return out;
        }
        case InitialKind::file: return detail::load_snapshot(c.initial_file, g);
    }
    throw ConfigError("config: unknown initial kind");
}

/// Executes the configured mode; returns the process exit status.
inline int run(const RunConfig& c) {
    try {
        validate_config(c);
        switch (c.mode) {
            case RunMode::simulate: return detail::run_simulate(c);
            case RunMode::refine: return detail::run_refine(c);
            case RunMode::compare: return detail::run_compare(c);
        }
        return exit_config_error;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config_error;
    } catch (const SolveFailure& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return exit_solver_failure;
    } catch (const AssertionFailure& e) {
        std::fprintf(stderr, "assertion failure: %s\n", e.what());
        return exit_assertion_failure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_config_error;
    }
}

} // namespace mmc
