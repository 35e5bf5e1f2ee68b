// Time-stepping state and the per-step nonlinear systems N(u) = S for the
// BDF2 convex-splitting scheme and its comparison variants.
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mmc/energy.hpp"
#include "mmc/grid.hpp"

namespace mmc {

enum class SchemeVariant {
    bdf2_regularized,   // BDF2, extrapolated H', Douglas-Dupont term A dt lap(phi^{n+1}-phi^n)
    bdf2_plain,         // same with A = 0
    cs1,                // first-order Eyre convex splitting (backward Euler)
    bdf2_full_implicit, // BDF2 with H' taken at phi^{n+1}, A = 0
};

inline const char* variant_name(SchemeVariant v) {
    switch (v) {
        case SchemeVariant::bdf2_regularized: return "bdf2_regularized";
        case SchemeVariant::bdf2_plain: return "bdf2_plain";
        case SchemeVariant::cs1: return "cs1";
        case SchemeVariant::bdf2_full_implicit: return "bdf2_full_implicit";
    }
    return "?";
}

/// Coefficients that distinguish the variants in N(u) = S.
/// N^(1) = phi_coeff * phi - mu_lap_steps * dt * lap(mu).
struct VariantTraits {
    double phi_coeff;
    double mu_lap_steps;
    bool implicit_h;  // H' evaluated at the unknown rather than explicitly
    bool single_step; // needs no phi^{n-1} history
    bool regularized; // carries the A dt lap(...) term
};

inline constexpr VariantTraits variant_traits(SchemeVariant v) {
    switch (v) {
        case SchemeVariant::bdf2_regularized: return {3.0, 2.0, false, false, true};
        case SchemeVariant::bdf2_plain: return {3.0, 2.0, false, false, false};
        case SchemeVariant::cs1: return {1.0, 1.0, false, true, false};
        case SchemeVariant::bdf2_full_implicit: return {3.0, 2.0, true, false, false};
    }
    return {3.0, 2.0, false, false, true};
}

/// Effective Douglas-Dupont constant: A for the regularized scheme, 0 otherwise.
inline double effective_a(SchemeVariant v, const ModelParams& p) {
    return variant_traits(v).regularized ? p.a_reg : 0.0;
}

/// Two consecutive time levels plus cached energies of the current window.
struct SchemeState {
    CellField phi_n;
    CellField phi_nm1;
    double dt = 0.0;
    long step = 0;
    SchemeVariant variant = SchemeVariant::bdf2_regularized;
    double initial_mean = 0.0;      // mean(phi^0), the conserved quantity
    double energy = 0.0;            // F(phi_n)
    double modified_energy = 0.0;   // E_h(phi_n, phi_nm1)

    double time() const { return static_cast<double>(step) * dt; }
};

/// Builds the starting state. BDF2 variants use the initialization
/// phi^1 := phi^0 (state begins at step 1); CS1 starts at step 0.
inline SchemeState init_state(const CellField& phi0, double dt, SchemeVariant variant,
                              const ModelParams& p) {
    if (!(dt > 0.0)) throw std::invalid_argument("init_state: dt must be positive");
    for (double x : phi0.values()) require_interior(x, p, "init_state");
    SchemeState st;
    st.phi_n = phi0;
    st.phi_nm1 = phi0;
    st.dt = dt;
    st.step = variant_traits(variant).single_step ? 0 : 1;
    st.variant = variant;
    st.initial_mean = phi0.mean();
    st.energy = discrete_energy(phi0, p).total;
    // Both increments vanish at start, so E_h reduces to F(phi0).
    st.modified_energy = st.energy;
    return st;
}

/// Argument of the explicit H' term: the extrapolant 2 phi^n - phi^{n-1}
/// for the BDF2 family, phi^n for CS1.
inline CellField explicit_argument(const SchemeState& st) {
    if (variant_traits(st.variant).single_step) return st.phi_n;
    CellField out(st.phi_n.grid());
    for (std::size_t k = 0; k < out.size(); ++k)
        out.values()[k] = 2.0 * st.phi_n.values()[k] - st.phi_nm1.values()[k];
    return out;
}

/// Source terms S^(1), S^(2) of the variant's system. For the regularized
/// scheme S^(2) = H'(2 phi^n - phi^{n-1}) + A dt lap(phi^n).
inline std::pair<CellField, CellField> scheme_sources(const SchemeState& st,
                                                      const ModelParams& p) {
    const VariantTraits tr = variant_traits(st.variant);
    const GridSpec& g = st.phi_n.grid();
    CellField s1(g), s2(g);

    if (tr.single_step) {
        s1 = st.phi_n;
    } else {
        for (std::size_t k = 0; k < s1.size(); ++k)
            s1.values()[k] = 4.0 * st.phi_n.values()[k] - st.phi_nm1.values()[k];
    }

    if (!tr.implicit_h) {
        const CellField ext = explicit_argument(st);
        for (std::size_t k = 0; k < s2.size(); ++k)
            s2.values()[k] = -2.0 * p.chi * p.rho * ext.values()[k];
    }
    const double a = effective_a(st.variant, p);
    if (a != 0.0) {
        const CellField lap_n = laplacian(st.phi_n);
        for (std::size_t k = 0; k < s2.size(); ++k)
            s2.values()[k] += a * st.dt * lap_n.values()[k];
    }
    return {std::move(s1), std::move(s2)};
}

/// Residual (N^(1)(u) - S^(1), N^(2)(u) - S^(2)) of the variant's system at
/// the candidate solution u = (phi, mu).
inline std::pair<CellField, CellField> scheme_residual(const CellField& phi,
                                                       const CellField& mu,
                                                       const SchemeState& st,
                                                       const ModelParams& p) {
    detail::require_same_grid(phi.grid(), st.phi_n.grid(), "scheme_residual");
    detail::require_same_grid(mu.grid(), st.phi_n.grid(), "scheme_residual");
    const VariantTraits tr = variant_traits(st.variant);
    const GridSpec& g = phi.grid();
    const double a = effective_a(st.variant, p);

    auto [s1, s2] = scheme_sources(st, p);

    const CellField lap_mu = laplacian(mu);
    CellField r1(g);
    for (std::size_t k = 0; k < r1.size(); ++k)
        r1.values()[k] = tr.phi_coeff * phi.values()[k] -
                         tr.mu_lap_steps * st.dt * lap_mu.values()[k] - s1.values()[k];

    CellField kappa_cells(g);
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double ph = phi.values()[k];
        require_interior(ph, p, "scheme_residual");
        kappa_cells.values()[k] = de_gennes_kappa(ph);
    }
    const CellField flux_div = var_laplacian(avg_to_edges(kappa_cells), phi);
    const CellField gsq = detail::gradient_square_avg(phi);
    const CellField lap_phi = (a != 0.0) ? laplacian(phi) : CellField(g);

    CellField r2(g);
    for (std::size_t k = 0; k < r2.size(); ++k) {
        const double ph = phi.values()[k];
        const double s1_pot = p.log_coeff() * std::log(ph) -
                              p.rho * std::log(1.0 - p.rho * ph);
        double n2 = mu.values()[k] - de_gennes_kappa_prime(ph) * gsq.values()[k] +
                    2.0 * flux_div.values()[k] + a * st.dt * lap_phi.values()[k] - s1_pot;
        if (tr.implicit_h) n2 += 2.0 * p.chi * p.rho * ph;  // -H'(phi)
        r2.values()[k] = n2 - s2.values()[k];
    }
    return {std::move(r1), std::move(r2)};
}

/// Combined residual norm sqrt(|r1|_2^2 + |r2|_2^2).
inline double combined_residual_norm(const CellField& r1, const CellField& r2) {
    const double a = norm_l2(r1);
    const double b = norm_l2(r2);
    return std::sqrt(a * a + b * b);
}

} // namespace mmc
