// Nonlinear FAS multigrid for the per-step systems N(u) = S, with
// Red-Black Gauss-Seidel smoothing: each point update Newton-linearizes the
// logarithmic term, freezes the kappa coefficients at the latest available
// neighbor values, and resolves the local 2x2 system by Cramer's rule.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mmc/grid.hpp"
#include "mmc/scheme.hpp"

namespace mmc {

struct SolverConfig {
    double tol = 1e-9;        // combined l2 norm of both residual components
    int max_cycles = 100;
    int pre_sweeps = 2;
    int post_sweeps = 2;
    int min_level_n = 4;      // coarsest grid size
    int coarse_sweeps = 50;   // smoothing iterations at the coarsest level
    double interior_eps = 1e-9;
    enum class Cycle { V, W } cycle = Cycle::V;
};

struct SolveReport {
    int cycles = 0;
    std::vector<double> residual_history;  // [0] is the initial residual
    bool converged = false;
    long clamp_activations_last_cycle = 0;
};

/// Thrown when the nonlinear solve does not reach tolerance; carries the
/// residual history for diagnosis.
class SolveFailure : public std::runtime_error {
public:
    SolveFailure(const std::string& msg, SolveReport rep)
        : std::runtime_error(msg), report(std::move(rep)) {}
    SolveReport report;
};

/// Thrown when a theorem-backed runtime assertion fails (positivity, mass
/// conservation, energy decay); indicates a solver or scheme bug.
class AssertionFailure : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full-weighting restriction: each coarse cell is the mean of its 2x2
/// fine children. Requires even N.
inline CellField mg_restrict(const CellField& fine) {
    const GridSpec& gf = fine.grid();
    if (gf.n % 2 != 0) throw std::invalid_argument("mg_restrict: fine N must be even");
    GridSpec gc(gf.length, gf.n / 2);
    CellField coarse(gc);
    for (int J = 0; J < gc.n; ++J)
        for (int I = 0; I < gc.n; ++I)
            coarse(I, J) = 0.25 * (fine(2 * I, 2 * J) + fine(2 * I + 1, 2 * J) +
                                   fine(2 * I, 2 * J + 1) + fine(2 * I + 1, 2 * J + 1));
    return coarse;
}

/// Bilinear prolongation for cell-centered periodic grids; each fine cell
/// is the 9/16-3/16-3/16-1/16 combination of its four nearest coarse cells.
inline CellField mg_prolong(const CellField& coarse) {
    const GridSpec& gc = coarse.grid();
    GridSpec gf(gc.length, gc.n * 2);
    CellField fine(gf);
    const int nc = gc.n;
    for (int J = 0; J < nc; ++J) {
        const int Jm = J == 0 ? nc - 1 : J - 1;
        const int Jp = J + 1 == nc ? 0 : J + 1;
        for (int I = 0; I < nc; ++I) {
            const int Im = I == 0 ? nc - 1 : I - 1;
            const int Ip = I + 1 == nc ? 0 : I + 1;
            const double c = coarse(I, J);
            fine(2 * I, 2 * J) =
                (9.0 * c + 3.0 * coarse(Im, J) + 3.0 * coarse(I, Jm) + coarse(Im, Jm)) / 16.0;
            fine(2 * I + 1, 2 * J) =
                (9.0 * c + 3.0 * coarse(Ip, J) + 3.0 * coarse(I, Jm) + coarse(Ip, Jm)) / 16.0;
            fine(2 * I, 2 * J + 1) =
                (9.0 * c + 3.0 * coarse(Im, J) + 3.0 * coarse(I, Jp) + coarse(Im, Jp)) / 16.0;
            fine(2 * I + 1, 2 * J + 1) =
                (9.0 * c + 3.0 * coarse(Ip, J) + 3.0 * coarse(I, Jp) + coarse(Ip, Jp)) / 16.0;
        }
    }
    return fine;
}

namespace detail {

/// Variant-resolved constants of one time step, shared by all levels.
struct StepSystem {
    double dt = 0.0;
    double phi_coeff = 3.0;     // c0 in N^(1) = c0 phi - c_mu dt lap(mu)
    double mu_lap_steps = 2.0;  // c_mu
    double a_eff = 0.0;
    bool implicit_h = false;
    double two_chi_rho = 0.0;
    double log_coeff = 0.0;
    double rho = 0.0;
    double clamp_lo = 0.0;
    double clamp_hi = 0.0;
};

inline StepSystem make_system(const SchemeState& st, const ModelParams& p,
                              const SolverConfig& cfg) {
    const VariantTraits tr = variant_traits(st.variant);
    if (!(cfg.interior_eps > 0.0) || !(cfg.interior_eps < 0.5 / p.rho))
        throw std::invalid_argument("solver: interior_eps must lie in (0, 1/(2 rho))");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver: tol must be positive");
    if (cfg.min_level_n < 2) throw std::invalid_argument("solver: min_level_n must be >= 2");
    StepSystem s;
    s.dt = st.dt;
    s.phi_coeff = tr.phi_coeff;
    s.mu_lap_steps = tr.mu_lap_steps;
    s.a_eff = effective_a(st.variant, p);
    s.implicit_h = tr.implicit_h;
    s.two_chi_rho = 2.0 * p.chi * p.rho;
    s.log_coeff = p.log_coeff();
    s.rho = p.rho;
    s.clamp_lo = cfg.interior_eps;
    s.clamp_hi = 1.0 / p.rho - cfg.interior_eps;
    return s;
}

/// Work arrays of one grid level. s1/s2 hold the scheme source on the
/// finest level and the FAS-corrected right-hand side on coarse levels.
struct Level {
    int n = 0;
    double h = 0.0;
    std::vector<double> phi, mu, kappa;
    std::vector<double> s1, s2;
    std::vector<double> r1, r2;
    std::vector<double> phi_save, mu_save;

    explicit Level(int N, double L) : n(N), h(L / N) {
        const std::size_t m = static_cast<std::size_t>(N) * N;
        phi.assign(m, 0.0);
        mu.assign(m, 0.0);
        kappa.assign(m, 0.0);
        s1.assign(m, 0.0);
        s2.assign(m, 0.0);
        r1.assign(m, 0.0);
        r2.assign(m, 0.0);
        phi_save.assign(m, 0.0);
        mu_save.assign(m, 0.0);
    }
};

inline void refresh_kappa(Level& L) {
    const std::size_t m = L.phi.size();
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < static_cast<long long>(m); ++k)
        L.kappa[k] = de_gennes_kappa(L.phi[k]);
}

inline void clamp_phi(Level& L, const StepSystem& sys) {
    for (double& x : L.phi) {
        if (x < sys.clamp_lo) x = sys.clamp_lo;
        else if (x > sys.clamp_hi) x = sys.clamp_hi;
    }
}

/// N(u) into L.r1, L.r2. Mirrors scheme_residual cell by cell.
inline void apply_operator(Level& L, const StepSystem& sys) {
    const int n = L.n;
    const double inv_h2 = 1.0 / (L.h * L.h);
    const double cdt = sys.mu_lap_steps * sys.dt;
    const double adt = sys.a_eff * sys.dt;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        const int jp = j + 1 == n ? 0 : j + 1;
        const int jm = j == 0 ? n - 1 : j - 1;
        const std::size_t row = static_cast<std::size_t>(j) * n;
        const std::size_t rowp = static_cast<std::size_t>(jp) * n;
        const std::size_t rowm = static_cast<std::size_t>(jm) * n;
        for (int i = 0; i < n; ++i) {
            const int ip = i + 1 == n ? 0 : i + 1;
            const int im = i == 0 ? n - 1 : i - 1;
            const std::size_t c = row + i;
            const double pc = L.phi[c];
            const double pe = L.phi[row + ip], pw = L.phi[row + im];
            const double pn = L.phi[rowp + i], ps = L.phi[rowm + i];
            const double mc = L.mu[c];
            const double lap_mu = (L.mu[row + ip] + L.mu[row + im] + L.mu[rowp + i] +
                                   L.mu[rowm + i] - 4.0 * mc) * inv_h2;
            L.r1[c] = sys.phi_coeff * pc - cdt * lap_mu;

            const double kc = L.kappa[c];
            const double ke = L.kappa[row + ip], kw = L.kappa[row + im];
            const double kn = L.kappa[rowp + i], ks = L.kappa[rowm + i];
            const double dxp = pe - pc, dxm = pc - pw, dyp = pn - pc, dym = pc - ps;
            const double gsq = (dxp * dxp + dxm * dxm + dyp * dyp + dym * dym) * 0.5 * inv_h2;
            const double flux2 = ((ke + kc) * dxp - (kw + kc) * dxm +
                                  (kn + kc) * dyp - (ks + kc) * dym) * inv_h2;
            const double one_m_rp = 1.0 - sys.rho * pc;
            const double s1_pot = sys.log_coeff * std::log(pc) - sys.rho * std::log(one_m_rp);
            double n2 = mc - de_gennes_kappa_prime(pc) * gsq + flux2 +
                        adt * (dxp - dxm + dyp - dym) * inv_h2 - s1_pot;
            if (sys.implicit_h) n2 += sys.two_chi_rho * pc;
            L.r2[c] = n2;
        }
    }
}

/// Defect (S - N(u)) into L.r1, L.r2.
inline void compute_defect(Level& L, const StepSystem& sys) {
    apply_operator(L, sys);
    const std::size_t m = L.r1.size();
    for (std::size_t k = 0; k < m; ++k) {
        L.r1[k] = L.s1[k] - L.r1[k];
        L.r2[k] = L.s2[k] - L.r2[k];
    }
}

inline long long smooth_color(Level& L, const StepSystem& sys, int color) {
    const int n = L.n;
    const double inv_h2 = 1.0 / (L.h * L.h);
    const double cdt = sys.mu_lap_steps * sys.dt;
    const double b12 = 4.0 * cdt * inv_h2;   // mu coefficient in equation 1
    const double adt = sys.a_eff * sys.dt;
    long long clamped = 0;
    long long singular = 0;
#pragma omp parallel for schedule(static) reduction(+ : clamped, singular)
    for (int j = 0; j < n; ++j) {
        const int jp = j + 1 == n ? 0 : j + 1;
        const int jm = j == 0 ? n - 1 : j - 1;
        const std::size_t row = static_cast<std::size_t>(j) * n;
        const std::size_t rowp = static_cast<std::size_t>(jp) * n;
        const std::size_t rowm = static_cast<std::size_t>(jm) * n;
        for (int i = (color + j) & 1; i < n; i += 2) {
            const int ip = i + 1 == n ? 0 : i + 1;
            const int im = i == 0 ? n - 1 : i - 1;
            const std::size_t c = row + i;
            const double pc = L.phi[c];
            const double pe = L.phi[row + ip], pw = L.phi[row + im];
            const double pn = L.phi[rowp + i], ps = L.phi[rowm + i];
            const double sum_phi = pe + pw + pn + ps;
            const double sum_mu = L.mu[row + ip] + L.mu[row + im] + L.mu[rowp + i] +
                                  L.mu[rowm + i];
            const double kc = L.kappa[c];
            const double ke = L.kappa[row + ip], kw = L.kappa[row + im];
            const double kn = L.kappa[rowp + i], ks = L.kappa[rowm + i];
            const double sum_k = ke + kw + kn + ks;
            const double sum_k_phi = ke * pe + kw * pw + kn * pn + ks * ps;

            const double dxp = pe - pc, dxm = pc - pw, dyp = pn - pc, dym = pc - ps;
            const double gsq = (dxp * dxp + dxm * dxm + dyp * dyp + dym * dym) * 0.5 * inv_h2;

            const double one_m_rp = 1.0 - sys.rho * pc;
            const double s1_pot = sys.log_coeff * std::log(pc) - sys.rho * std::log(one_m_rp);
            const double s2_pot = sys.log_coeff / pc + sys.rho * sys.rho / one_m_rp;

            // Equation 2 row: a21 * phi + mu = rhs2. The kappa' and
            // kappa-sum terms carry the 1/phi^k ratio linearization so the
            // fixed point satisfies N(u) = S exactly.
            double a21 = -(de_gennes_kappa_prime(pc) / pc) * gsq -
                         (sum_k + 4.0 * kc) * inv_h2 +
                         (kc / pc) * sum_phi * inv_h2 - 4.0 * adt * inv_h2 - s2_pot;
            if (sys.implicit_h) a21 += sys.two_chi_rho;

            const double rhs1 = L.s1[c] + cdt * inv_h2 * sum_mu;
            const double rhs2 = L.s2[c] + s1_pot - s2_pot * pc - sum_k_phi * inv_h2 -
                                adt * inv_h2 * sum_phi;

            const double det = sys.phi_coeff - b12 * a21;
            const double scale = std::fabs(sys.phi_coeff) + std::fabs(b12 * a21);
            if (!(std::fabs(det) > 1e-300 * scale)) {
                ++singular;
                continue;
            }
            double phi_new = (rhs1 - b12 * rhs2) / det;
            const double mu_new = (sys.phi_coeff * rhs2 - a21 * rhs1) / det;
            if (phi_new < sys.clamp_lo) {
                phi_new = sys.clamp_lo;
                ++clamped;
            } else if (phi_new > sys.clamp_hi) {
                phi_new = sys.clamp_hi;
                ++clamped;
            }
            L.phi[c] = phi_new;
            L.mu[c] = mu_new;
            L.kappa[c] = de_gennes_kappa(phi_new);
        }
    }
    if (singular > 0)
        throw std::runtime_error("smooth_rb: singular 2x2 point system");
    return clamped;
}

/// One full red-then-black sweep; returns clamp activations.
inline long long smooth_sweep(Level& L, const StepSystem& sys) {
    long long clamps = smooth_color(L, sys, 0);
    clamps += smooth_color(L, sys, 1);
    return clamps;
}

inline void restrict_into(const std::vector<double>& fine, int nf, std::vector<double>& coarse) {
    const int nc = nf / 2;
    for (int J = 0; J < nc; ++J) {
        const std::size_t rf0 = static_cast<std::size_t>(2 * J) * nf;
        const std::size_t rf1 = static_cast<std::size_t>(2 * J + 1) * nf;
        const std::size_t rc = static_cast<std::size_t>(J) * nc;
        for (int I = 0; I < nc; ++I)
            coarse[rc + I] = 0.25 * (fine[rf0 + 2 * I] + fine[rf0 + 2 * I + 1] +
                                     fine[rf1 + 2 * I] + fine[rf1 + 2 * I + 1]);
    }
}

/// fine += prolong(coarse), bilinear cell-centered weights.
inline void prolong_add(const std::vector<double>& coarse, int nc, std::vector<double>& fine) {
    const int nf = nc * 2;
    for (int J = 0; J < nc; ++J) {
        const int Jm = J == 0 ? nc - 1 : J - 1;
        const int Jp = J + 1 == nc ? 0 : J + 1;
        const std::size_t rc = static_cast<std::size_t>(J) * nc;
        const std::size_t rcm = static_cast<std::size_t>(Jm) * nc;
        const std::size_t rcp = static_cast<std::size_t>(Jp) * nc;
        const std::size_t rf0 = static_cast<std::size_t>(2 * J) * nf;
        const std::size_t rf1 = static_cast<std::size_t>(2 * J + 1) * nf;
        for (int I = 0; I < nc; ++I) {
            const int Im = I == 0 ? nc - 1 : I - 1;
            const int Ip = I + 1 == nc ? 0 : I + 1;
            const double c = coarse[rc + I];
            fine[rf0 + 2 * I] += (9.0 * c + 3.0 * coarse[rc + Im] + 3.0 * coarse[rcm + I] +
                                  coarse[rcm + Im]) / 16.0;
            fine[rf0 + 2 * I + 1] += (9.0 * c + 3.0 * coarse[rc + Ip] + 3.0 * coarse[rcm + I] +
                                      coarse[rcm + Ip]) / 16.0;
            fine[rf1 + 2 * I] += (9.0 * c + 3.0 * coarse[rc + Im] + 3.0 * coarse[rcp + I] +
                                  coarse[rcp + Im]) / 16.0;
            fine[rf1 + 2 * I + 1] += (9.0 * c + 3.0 * coarse[rc + Ip] + 3.0 * coarse[rcp + I] +
                                      coarse[rcp + Ip]) / 16.0;
        }
    }
}

inline double grid_l2(const std::vector<double>& v, double h) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(h * h * s);
}

struct Hierarchy {
    std::vector<Level> levels;
    long long clamp_count = 0;

    Hierarchy(const GridSpec& g, const SolverConfig& cfg) {
        int n = g.n;
        levels.emplace_back(n, g.length);
        while (n % 2 == 0 && n / 2 >= cfg.min_level_n) {
            n /= 2;
            levels.emplace_back(n, g.length);
        }
    }
};

inline void fas_recurse(Hierarchy& hy, std::size_t lvl, const StepSystem& sys,
                        const SolverConfig& cfg) {
    Level& L = hy.levels[lvl];
    if (lvl + 1 == hy.levels.size()) {
        for (int s = 0; s < cfg.coarse_sweeps; ++s) hy.clamp_count += smooth_sweep(L, sys);
        return;
    }
    for (int s = 0; s < cfg.pre_sweeps; ++s) hy.clamp_count += smooth_sweep(L, sys);

    compute_defect(L, sys);
    Level& C = hy.levels[lvl + 1];
    restrict_into(L.phi, L.n, C.phi);
    restrict_into(L.mu, L.n, C.mu);
    refresh_kappa(C);
    C.phi_save = C.phi;
    C.mu_save = C.mu;

    // FAS right-hand side: N_c(R u) + R(S - N(u)).
    restrict_into(L.r1, L.n, C.s1);
    restrict_into(L.r2, L.n, C.s2);
    apply_operator(C, sys);
    for (std::size_t k = 0; k < C.s1.size(); ++k) {
        C.s1[k] += C.r1[k];
        C.s2[k] += C.r2[k];
    }

    const int passes = cfg.cycle == SolverConfig::Cycle::W ? 2 : 1;
    for (int q = 0; q < passes; ++q) fas_recurse(hy, lvl + 1, sys, cfg);

    for (std::size_t k = 0; k < C.phi.size(); ++k) {
        C.r1[k] = C.phi[k] - C.phi_save[k];
        C.r2[k] = C.mu[k] - C.mu_save[k];
    }
    prolong_add(C.r1, C.n, L.phi);
    prolong_add(C.r2, C.n, L.mu);
    clamp_phi(L, sys);
    refresh_kappa(L);

    for (int s = 0; s < cfg.post_sweeps; ++s) hy.clamp_count += smooth_sweep(L, sys);
}

} // namespace detail

/// Converged step solution.
struct StepSolution {
    CellField phi;
    CellField mu;
};

/// Initial chemical potential consistent with the variant's mu equation,
/// evaluated at the (clamped) initial guess. Makes the second residual
/// component vanish identically at the start of the solve.
inline CellField initial_mu(const CellField& phi_guess, const SchemeState& st,
                            const ModelParams& p) {
    ModelParams pe = p;
    pe.a_reg = effective_a(st.variant, p);
    const VariantTraits tr = variant_traits(st.variant);
    const CellField& ext = tr.implicit_h ? phi_guess : explicit_argument(st);
    if (tr.implicit_h)
        return chemical_potential(phi_guess, phi_guess, st.phi_n, st.dt, pe);
    return chemical_potential(phi_guess, ext, st.phi_n, st.dt, pe);
}

/// Solves the step system from a caller-provided initial guess for phi.
inline std::pair<StepSolution, SolveReport> solve_with_guess(const SchemeState& st,
                                                             const ModelParams& p,
                                                             const SolverConfig& cfg,
                                                             const CellField& phi_guess) {
    const GridSpec& g = st.phi_n.grid();
    detail::require_same_grid(phi_guess.grid(), g, "solve_with_guess");
    const detail::StepSystem sys = detail::make_system(st, p, cfg);
    detail::Hierarchy hy(g, cfg);
    detail::Level& fine = hy.levels.front();

    fine.phi = phi_guess.values();
    detail::clamp_phi(fine, sys);
    CellField phi0(g);
    phi0.values() = fine.phi;
    fine.mu = initial_mu(phi0, st, p).values();
    detail::refresh_kappa(fine);
    {
        auto [s1, s2] = scheme_sources(st, p);
        fine.s1 = s1.values();
        fine.s2 = s2.values();
    }

    SolveReport rep;
    detail::compute_defect(fine, sys);
    double res = std::sqrt(std::pow(detail::grid_l2(fine.r1, fine.h), 2) +
                           std::pow(detail::grid_l2(fine.r2, fine.h), 2));
    rep.residual_history.push_back(res);
    rep.converged = res <= cfg.tol;

    while (!rep.converged && rep.cycles < cfg.max_cycles) {
        hy.clamp_count = 0;
        detail::fas_recurse(hy, 0, sys, cfg);
        ++rep.cycles;
        detail::compute_defect(fine, sys);
        res = std::sqrt(std::pow(detail::grid_l2(fine.r1, fine.h), 2) +
                        std::pow(detail::grid_l2(fine.r2, fine.h), 2));
        if (!std::isfinite(res))
            throw SolveFailure("solve: residual is not finite", rep);
        rep.residual_history.push_back(res);
        rep.clamp_activations_last_cycle = hy.clamp_count;
        rep.converged = res <= cfg.tol;
    }
    if (!rep.converged)
        throw SolveFailure("solve: no convergence in " + std::to_string(cfg.max_cycles) +
                               " cycles, residual " + std::to_string(res),
                           rep);

    StepSolution sol{CellField(g), CellField(g)};
    sol.phi.values() = fine.phi;
    sol.mu.values() = fine.mu;

    // The interior minimizer leaves the safeguard inactive: the converged
    // iterate must sit strictly inside the clamp interval.
    if (!(sol.phi.min() > sys.clamp_lo) || !(sol.phi.max() < sys.clamp_hi))
        throw AssertionFailure("solve: converged iterate touches the interior safeguard");

    // Discrete conservation structure: sum(lap mu) telescopes to zero, so the
    // first equation pins the mean; verify both at rounding scale.
    {
        const CellField lap_mu = laplacian(sol.mu);
        const double sum_lap = lap_mu.sum();
        const double bound = 64.0 * static_cast<double>(g.cell_count()) *
                             norm_linf(sol.mu) / (g.h * g.h) * 1e-16 + 1e-30;
        if (std::fabs(sum_lap) > bound)
            throw AssertionFailure("solve: sum(lap mu) = " + std::to_string(sum_lap) +
                                   " exceeds rounding bound");
    }
    // Mean drift measured from componentwise differences: the subtractions
    // of nearby values are exact, so the drift is accurate to ~1e-18 where
    // a difference of naively summed means would carry ~1e-15 noise.
    double drift_sum = 0.0;
    for (std::size_t k = 0; k < sol.phi.size(); ++k)
        drift_sum += sol.phi.values()[k] - st.phi_n.values()[k];
    const double drift = drift_sum / static_cast<double>(sol.phi.size());
    if (std::fabs(drift) > 1e-10 * std::fabs(st.initial_mean))
        throw AssertionFailure("solve: mean drift " + std::to_string(drift));
    // Restore the conserved mean exactly (shift is within solver tolerance).
    for (double& x : sol.phi.values()) x -= drift;
    return {std::move(sol), std::move(rep)};
}

/// Solves the step system with the second-order extrapolant initial guess.
inline std::pair<StepSolution, SolveReport> solve(const SchemeState& st, const ModelParams& p,
                                                  const SolverConfig& cfg) {
    return solve_with_guess(st, p, cfg, explicit_argument(st));
}

/// Red-Black smoother on the finest level only; test-facing wrapper.
inline std::pair<CellField, CellField> smooth_rb(const CellField& phi, const CellField& mu,
                                                 const SchemeState& st, const ModelParams& p,
                                                 int sweeps, const SolverConfig& cfg = {}) {
    const GridSpec& g = st.phi_n.grid();
    const detail::StepSystem sys = detail::make_system(st, p, cfg);
    detail::Level L(g.n, g.length);
    L.phi = phi.values();
    L.mu = mu.values();
    detail::clamp_phi(L, sys);
    detail::refresh_kappa(L);
    {
        auto [s1, s2] = scheme_sources(st, p);
        L.s1 = s1.values();
        L.s2 = s2.values();
    }
    for (int s = 0; s < sweeps; ++s) detail::smooth_sweep(L, sys);
    for (double x : L.phi)
        if (!std::isfinite(x)) throw std::runtime_error("smooth_rb: non-finite phi");
    for (double x : L.mu)
        if (!std::isfinite(x)) throw std::runtime_error("smooth_rb: non-finite mu");
    std::pair<CellField, CellField> out{CellField(g), CellField(g)};
    out.first.values() = L.phi;
    out.second.values() = L.mu;
    return out;
}

/// Single red (color 0) or black (color 1) half-sweep; test-facing wrapper.
inline std::pair<CellField, CellField> smooth_rb_half(const CellField& phi, const CellField& mu,
                                                      const SchemeState& st, const ModelParams& p,
                                                      int color, const SolverConfig& cfg = {}) {
    const GridSpec& g = st.phi_n.grid();
    const detail::StepSystem sys = detail::make_system(st, p, cfg);
    detail::Level L(g.n, g.length);
    L.phi = phi.values();
    L.mu = mu.values();
    detail::clamp_phi(L, sys);
    detail::refresh_kappa(L);
    {
        auto [s1, s2] = scheme_sources(st, p);
        L.s1 = s1.values();
        L.s2 = s2.values();
    }
    detail::smooth_color(L, sys, color);
    std::pair<CellField, CellField> out{CellField(g), CellField(g)};
    out.first.values() = L.phi;
    out.second.values() = L.mu;
    return out;
}

/// One FAS cycle on the full hierarchy; test-facing wrapper.
inline std::pair<CellField, CellField> fas_cycle(const CellField& phi, const CellField& mu,
                                                 const SchemeState& st, const ModelParams& p,
                                                 const SolverConfig& cfg = {}) {
    const GridSpec& g = st.phi_n.grid();
    const detail::StepSystem sys = detail::make_system(st, p, cfg);
    detail::Hierarchy hy(g, cfg);
    detail::Level& fine = hy.levels.front();
    fine.phi = phi.values();
    fine.mu = mu.values();
    detail::clamp_phi(fine, sys);
    detail::refresh_kappa(fine);
    {
        auto [s1, s2] = scheme_sources(st, p);
        fine.s1 = s1.values();
        fine.s2 = s2.values();
    }
    detail::fas_recurse(hy, 0, sys, cfg);
    std::pair<CellField, CellField> out{CellField(g), CellField(g)};
    out.first.values() = fine.phi;
    out.second.values() = fine.mu;
    return out;
}

/// Advances one time step: solves the variant's system, shifts the window,
/// and enforces the mass, positivity, and (for the regularized scheme with
/// A >= chi^2 rho^2) energy-decay assertions.
inline std::pair<SchemeState, SolveReport> advance(const SchemeState& st, const SolverConfig& cfg,
                                                   const ModelParams& p) {
    auto [sol, rep] = solve(st, p, cfg);

    const double lo = sol.phi.min();
    const double hi = sol.phi.max();
    if (!(lo > 0.0) || !(hi < p.phi_max()))
        throw AssertionFailure("advance: positivity violated, range [" + std::to_string(lo) +
                               ", " + std::to_string(hi) + "]");

    SchemeState next;
    next.phi_nm1 = st.phi_n;
    next.phi_n = std::move(sol.phi);
    next.dt = st.dt;
    next.step = st.step + 1;
    next.variant = st.variant;
    next.initial_mean = st.initial_mean;
    next.energy = discrete_energy(next.phi_n, p).total;
    next.modified_energy = modified_energy(next.phi_n, next.phi_nm1, st.dt, p);

    if (std::fabs(next.phi_n.mean() - st.initial_mean) > 1e-10 * std::fabs(st.initial_mean))
        throw AssertionFailure("advance: mass conservation violated");

    if (st.variant == SchemeVariant::bdf2_regularized &&
        p.a_reg >= p.chi * p.chi * p.rho * p.rho * (1.0 - 1e-12)) {
        const double slack = 1e-8 * std::fabs(st.modified_energy);
        if (next.modified_energy > st.modified_energy + slack)
            throw AssertionFailure("advance: modified energy increased by " +
                                   std::to_string(next.modified_energy - st.modified_energy));
    }
    return {std::move(next), std::move(rep)};
}

} // namespace mmc
