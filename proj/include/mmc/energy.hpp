// Model parameters, the logarithmic mixing potential and concentration-
// dependent gradient coefficient, the discrete energy with its convex
// splitting, and the chemical potential assembly.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "mmc/grid.hpp"

namespace mmc {

/// Physical constants chi, N1, N2 and the derived alpha, beta, tau, rho, A.
struct ModelParams {
    double chi = 0.0;
    double n1 = 0.0;
    double n2 = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double tau = 0.0;
    double rho = 0.0;
    double a_reg = 0.0;

    /// Upper end of the admissible concentration interval (0, 1/rho).
    double phi_max() const { return 1.0 / rho; }
    /// 1/tau + 1/N1, the coefficient of ln(phi) in S'.
    double log_coeff() const { return 1.0 / tau + 1.0 / n1; }
};

/// Derives alpha, beta, tau, rho from (chi, N1, N2). Without an explicit
/// value the regularization constant defaults to A = chi^2 rho^2, the
/// smallest choice for which the modified energy is provably nonincreasing.
inline ModelParams derive_params(double chi, double n1, double n2,
                                 std::optional<double> a_reg = std::nullopt) {
    if (!(chi > 0.0) || !(n1 > 0.0) || !(n2 > 0.0))
        throw std::invalid_argument("derive_params: chi, n1, n2 must be positive");
    ModelParams p;
    p.chi = chi;
    p.n1 = n1;
    p.n2 = n2;
    p.tau = std::sqrt(M_PI * n2) * n1;
    p.rho = 1.0 + n2 / p.tau;
    p.alpha = M_PI * std::pow(std::sqrt(n2 / M_PI) + n1 / 2.0, 2);
    p.beta = p.alpha / std::sqrt(M_PI * n2);
    p.a_reg = a_reg ? *a_reg : chi * chi * p.rho * p.rho;
    if (a_reg && !(*a_reg >= 0.0))
        throw std::invalid_argument("derive_params: a_reg must be nonnegative");
    return p;
}

/// deGennes gradient coefficient, defined on (0,1).
inline double de_gennes_kappa(double phi) {
    return 1.0 / (36.0 * phi * (1.0 - phi));
}

inline double de_gennes_kappa_prime(double phi) {
    const double w = phi * (1.0 - phi);
    return (2.0 * phi - 1.0) / (36.0 * w * w);
}

struct PotentialValues {
    double s = 0.0;       // S(phi)
    double s1 = 0.0;      // S'(phi), additive constant dropped
    double s2 = 0.0;      // S''(phi)
    double h = 0.0;       // H(phi)
    double h1 = 0.0;      // H'(phi), additive constant dropped
    double kappa = 0.0;   // kappa(phi)
    double kappa1 = 0.0;  // kappa'(phi)
};

inline void require_interior(double phi, const ModelParams& p, const char* where) {
    if (!(phi > 0.0) || !(phi < p.phi_max()))
        throw std::domain_error(std::string(where) +
                                ": phi outside (0, 1/rho), value " + std::to_string(phi));
}

/// All pointwise potential quantities at one concentration value.
/// S' and H' omit their additive constants; they are annihilated by the
/// Laplacian and by mean-zero test directions.
inline PotentialValues potential_values(double phi, const ModelParams& p) {
    require_interior(phi, p, "potential_values");
    PotentialValues v;
    const double one_m_rp = 1.0 - p.rho * phi;
    v.s = phi / p.tau * std::log(p.alpha * phi / p.tau) +
          phi / p.n1 * std::log(p.beta * phi / p.tau) + one_m_rp * std::log(one_m_rp);
    v.s1 = p.log_coeff() * std::log(phi) - p.rho * std::log(one_m_rp);
    v.s2 = p.log_coeff() / phi + p.rho * p.rho / one_m_rp;
    v.h = p.chi * phi * one_m_rp;
    v.h1 = -2.0 * p.chi * p.rho * phi;
    v.kappa = de_gennes_kappa(phi);
    v.kappa1 = de_gennes_kappa_prime(phi);
    return v;
}

/// F decomposed into the convex splitting F = F_S + F_K1 + F_K2 - F_H.
struct EnergyBreakdown {
    double total = 0.0;
    double f_s = 0.0;   // <S(phi), 1>
    double f_h = 0.0;   // <-H(phi), 1>, the concave part (stored convex)
    double f_k1 = 0.0;  // <(kappa(phi) - 1/36) G(phi), 1>
    double f_k2 = 0.0;  // (1/36) |grad phi|_2^2
};

namespace detail {

/// G_ij = a_x((D_x phi)^2) + a_y((D_y phi)^2), the edge-averaged squared
/// gradient that multiplies kappa in the energy and chemical potential.
inline CellField gradient_square_avg(const CellField& phi) {
    const GridSpec& g = phi.grid();
    CellField out(g);
    const double inv_2h2 = 0.5 / (g.h * g.h);
    for (int j = 0; j < g.n; ++j) {
        const int jp = j + 1 == g.n ? 0 : j + 1;
        const int jm = j == 0 ? g.n - 1 : j - 1;
        for (int i = 0; i < g.n; ++i) {
            const int ip = i + 1 == g.n ? 0 : i + 1;
            const int im = i == 0 ? g.n - 1 : i - 1;
            const double c = phi(i, j);
            const double dxp = phi(ip, j) - c;
            const double dxm = c - phi(im, j);
            const double dyp = phi(i, jp) - c;
            const double dym = c - phi(i, jm);
            out(i, j) = (dxp * dxp + dxm * dxm + dyp * dyp + dym * dym) * inv_2h2;
        }
    }
    return out;
}

} // namespace detail

/// Discrete energy F(phi) = <S + H + kappa(phi) G(phi), 1> with its
/// convex-splitting components.
inline EnergyBreakdown discrete_energy(const CellField& phi, const ModelParams& p) {
    const GridSpec& g = phi.grid();
    const CellField gsq = detail::gradient_square_avg(phi);
    double s_sum = 0.0, h_sum = 0.0, k1_sum = 0.0, k2_sum = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const PotentialValues v = potential_values(phi(i, j), p);
            const double gq = gsq(i, j);
            s_sum += v.s;
            h_sum += v.h;
            k1_sum += (v.kappa - 1.0 / 36.0) * gq;
            k2_sum += (1.0 / 36.0) * gq;
        }
    }
    const double w = g.cell_area();
    EnergyBreakdown e;
    e.f_s = w * s_sum;
    e.f_h = -w * h_sum;
    e.f_k1 = w * k1_sum;
    e.f_k2 = w * k2_sum;
    e.total = w * (s_sum + h_sum) + e.f_k1 + e.f_k2;
    return e;
}

/// Modified discrete energy
/// E_h = F(phi^{n+1}) + (1/(4 dt)) |phi^{n+1}-phi^n|_{-1,h}^2
///     + chi rho |phi^{n+1}-phi^n|_2^2.
inline double modified_energy(const CellField& phi_new, const CellField& phi_old, double dt,
                              const ModelParams& p) {
    detail::require_same_grid(phi_new.grid(), phi_old.grid(), "modified_energy");
    if (!(dt > 0.0)) throw std::invalid_argument("modified_energy: dt must be positive");
    CellField diff(phi_new.grid());
    for (std::size_t k = 0; k < diff.size(); ++k)
        diff.values()[k] = phi_new.values()[k] - phi_old.values()[k];
    // The means agree to solver tolerance; remove the rounding-level
    // remainder so the H^-1 norm is well defined.
    const double dm = diff.mean();
    if (std::fabs(dm) > 1e-12 * std::max(1.0, std::fabs(phi_new.mean())))
        throw std::invalid_argument("modified_energy: arguments have different means");
    for (double& x : diff.values()) x -= dm;
    const double hm1 = h_minus1_norm(diff);
    const double l2 = norm_l2(diff);
    return discrete_energy(phi_new, p).total + hm1 * hm1 / (4.0 * dt) +
           p.chi * p.rho * l2 * l2;
}

/// Chemical potential of the time-discrete scheme:
///   mu = S'(phi) + kappa'(phi) G(phi) - 2 div(Avg(kappa(phi)) grad phi)
///      + H'(phi_explicit) - A dt lap(phi - phi_prev_for_reg).
/// phi_explicit is typically the extrapolant 2 phi^n - phi^{n-1} and may
/// leave the admissible interval; only phi itself is range-checked.
inline CellField chemical_potential(const CellField& phi, const CellField& phi_explicit,
                                    const CellField& phi_prev_for_reg, double dt,
                                    const ModelParams& p) {
    detail::require_same_grid(phi.grid(), phi_explicit.grid(), "chemical_potential");
    detail::require_same_grid(phi.grid(), phi_prev_for_reg.grid(), "chemical_potential");
    if (!(dt > 0.0)) throw std::invalid_argument("chemical_potential: dt must be positive");
    const GridSpec& g = phi.grid();

    CellField kappa_cells(g);
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double ph = phi.values()[k];
        require_interior(ph, p, "chemical_potential");
        kappa_cells.values()[k] = de_gennes_kappa(ph);
    }
    const EdgeField kappa_edges = avg_to_edges(kappa_cells);
    const CellField flux_div = var_laplacian(kappa_edges, phi);
    const CellField gsq = detail::gradient_square_avg(phi);

    CellField reg_arg(g);
    for (std::size_t k = 0; k < phi.size(); ++k)
        reg_arg.values()[k] = phi.values()[k] - phi_prev_for_reg.values()[k];
    const CellField reg_lap = laplacian(reg_arg);

    CellField mu(g);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double ph = phi(i, j);
            const double one_m_rp = 1.0 - p.rho * ph;
            const double s1 = p.log_coeff() * std::log(ph) - p.rho * std::log(one_m_rp);
            mu(i, j) = s1 + de_gennes_kappa_prime(ph) * gsq(i, j) - 2.0 * flux_div(i, j) -
                       2.0 * p.chi * p.rho * phi_explicit(i, j) -
                       p.a_reg * dt * reg_lap(i, j);
        }
    }
    return mu;
}

} // namespace mmc
