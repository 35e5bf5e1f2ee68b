#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mmc/grid.hpp"
#include "test_support.hpp"

using namespace mmc;
using namespace mmc::test;

TEST_CASE("GridSpec stores L, N and h = L/N") {
    GridSpec g(64.0, 16);
    CHECK(g.h == 4.0);
    CHECK(g.cell_count() == 256);
    CHECK_THROWS_AS(GridSpec(1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(-1.0, 8), std::invalid_argument);
}

TEST_CASE("CellField periodic indexing wraps both axes") {
    GridSpec g(4.0, 4);
    CellField f(g);
    f(1, 2) = 7.0;
    CHECK(f.at(1 + 4, 2) == 7.0);
    CHECK(f.at(1, 2 - 4) == 7.0);
    CHECK(f.at(1 - 8, 2 + 8) == 7.0);
}

TEST_CASE("diff_to_edges examples") {
    GridSpec g(4.0, 4);  // h = 1

    SECTION("constant field has zero gradient") {
        CellField c(g, 3.25);
        EdgeField f = diff_to_edges(c);
        CHECK(max_abs_diff(f, EdgeField(g, 0.0)) == 0.0);
    }
    SECTION("ramp nu = i differences to 1 except the wrap column") {
        CellField nu(g);
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) nu(i, j) = i;
        EdgeField f = diff_to_edges(nu);
        for (int j = 0; j < 4; ++j) {
            CHECK(f.x(0, j) == 1.0);
            CHECK(f.x(1, j) == 1.0);
            CHECK(f.x(2, j) == 1.0);
            CHECK(f.x(3, j) == -3.0);  // (nu(0)-nu(3))/h
            for (int i = 0; i < 4; ++i) CHECK(f.y(i, j) == 0.0);
        }
    }
    SECTION("indicator of cell (0,0)") {
        CellField nu(g);
        nu(0, 0) = 1.0;
        EdgeField f = diff_to_edges(nu);
        CHECK(f.x(0, 0) == -1.0);        // edge (1/2, 0)
        CHECK(f.x(3, 0) == 1.0);         // edge (-1/2, 0) by periodicity
        CHECK(f.x(1, 0) == 0.0);
        CHECK(f.x(2, 0) == 0.0);
    }
}

TEST_CASE("avg_to_edges examples") {
    GridSpec g(4.0, 4);
    SECTION("constant averages to the same constant") {
        EdgeField f = avg_to_edges(CellField(g, 1.5));
        CHECK(max_abs_diff(f, EdgeField(g, 1.5)) == 0.0);
    }
    SECTION("ramp nu = i averages to i + 1/2 with wrap value 1.5") {
        CellField nu(g);
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) nu(i, j) = i;
        EdgeField f = avg_to_edges(nu);
        for (int j = 0; j < 4; ++j) {
            CHECK(f.x(0, j) == 0.5);
            CHECK(f.x(1, j) == 1.5);
            CHECK(f.x(2, j) == 2.5);
            CHECK(f.x(3, j) == 1.5);
        }
    }
    SECTION("linearity on random fields") {
        std::mt19937_64 rng(11);
        GridSpec g8(2.0, 8);
        CellField a = random_cell_field(g8, rng), b = random_cell_field(g8, rng);
        EdgeField lhs = avg_to_edges(axpy(2.5, a, -1.25, b));
        EdgeField fa = avg_to_edges(a), fb = avg_to_edges(b);
        EdgeField rhs(g8);
        for (std::size_t k = 0; k < rhs.x_values().size(); ++k) {
            rhs.x_values()[k] = 2.5 * fa.x_values()[k] - 1.25 * fb.x_values()[k];
            rhs.y_values()[k] = 2.5 * fa.y_values()[k] - 1.25 * fb.y_values()[k];
        }
        CHECK(max_abs_diff(lhs, rhs) < 1e-14);
    }
}

TEST_CASE("div_from_edges examples") {
    std::mt19937_64 rng(12);
    GridSpec g(2.0, 8);
    SECTION("zero edge field maps to zero") {
        CellField out = div_from_edges(EdgeField(g, 0.0));
        CHECK(max_abs_diff(out, CellField(g, 0.0)) == 0.0);
    }
    SECTION("div(grad nu) equals the five-point Laplacian") {
        CellField nu = random_cell_field(g, rng);
        CHECK(max_abs_diff(div_from_edges(diff_to_edges(nu)), laplacian(nu)) < 1e-12);
    }
    SECTION("global sum telescopes to zero") {
        EdgeField f = random_edge_field(g, rng);
        const double total = g.cell_area() * div_from_edges(f).sum();
        CHECK(std::fabs(total) < 1e-13);
    }
}

TEST_CASE("avg_from_edges examples") {
    GridSpec g(4.0, 4);
    SECTION("constant edges average to constant cells") {
        auto [ax, ay] = avg_from_edges(EdgeField(g, 2.0));
        CHECK(max_abs_diff(ax, CellField(g, 2.0)) == 0.0);
        CHECK(max_abs_diff(ay, CellField(g, 2.0)) == 0.0);
    }
    SECTION("indicator of edge (1/2, 0) spreads half to each flanking cell") {
        EdgeField f(g);
        f.x(0, 0) = 1.0;
        auto [ax, ay] = avg_from_edges(f);
        CHECK(ax(0, 0) == 0.5);
        CHECK(ax(1, 0) == 0.5);
        CHECK(ax(2, 0) == 0.0);
        CHECK(ax(3, 0) == 0.0);
        CHECK(max_abs_diff(ay, CellField(g, 0.0)) == 0.0);
    }
}

TEST_CASE("laplacian examples") {
    SECTION("constants are in the null space") {
        GridSpec g(2.0, 8);
        CHECK(max_abs_diff(laplacian(CellField(g, 4.2)), CellField(g, 0.0)) == 0.0);
    }
    SECTION("unit spike stencil") {
        GridSpec g(4.0, 4);
        CellField nu(g);
        nu(0, 0) = 1.0;
        CellField lap = laplacian(nu);
        CHECK(lap(0, 0) == -4.0);
        CHECK(lap(1, 0) == 1.0);
        CHECK(lap(3, 0) == 1.0);
        CHECK(lap(0, 1) == 1.0);
        CHECK(lap(0, 3) == 1.0);
        CHECK(lap(1, 1) == 0.0);
    }
    SECTION("cosine mode is an eigenvector with the stencil symbol") {
        GridSpec g(64.0, 16);
        CellField nu(g);
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                nu(i, j) = std::cos(2.0 * M_PI * g.center(i) / g.length);
        const double s = std::sin(M_PI * g.h / g.length);
        const double lambda = 4.0 / (g.h * g.h) * s * s;
        CellField lap = laplacian(nu);
        for (std::size_t k = 0; k < nu.size(); ++k)
            CHECK(lap.values()[k] == Catch::Approx(-lambda * nu.values()[k]).margin(1e-12));
    }
}

TEST_CASE("var_laplacian examples") {
    std::mt19937_64 rng(13);
    GridSpec g(2.0, 8);
    SECTION("unit coefficient reduces to the Laplacian") {
        CellField nu = random_cell_field(g, rng);
        CHECK(max_abs_diff(var_laplacian(EdgeField(g, 1.0), nu), laplacian(nu)) < 1e-12);
    }
    SECTION("constant field maps to zero for any coefficient") {
        EdgeField D = random_edge_field(g, rng, 0.5, 2.0);
        CHECK(max_abs_diff(var_laplacian(D, CellField(g, 0.7)), CellField(g, 0.0)) == 0.0);
    }
    SECTION("symmetry in the cell inner product") {
        for (int rep = 0; rep < 20; ++rep) {
            EdgeField D = random_edge_field(g, rng, 0.1, 3.0);
            CellField psi = random_cell_field(g, rng), nu = random_cell_field(g, rng);
            const double a = cell_inner(psi, var_laplacian(D, nu));
            const double b = cell_inner(nu, var_laplacian(D, psi));
            CHECK(a == Catch::Approx(b).margin(1e-11));
        }
    }
}

TEST_CASE("cell_inner examples") {
    SECTION("<1,1> measures the domain") {
        GridSpec g(64.0, 16);
        CHECK(cell_inner(CellField(g, 1.0), CellField(g, 1.0)) == Catch::Approx(64.0 * 64.0));
    }
    SECTION("N=2, h=1, all ones") {
        GridSpec g(2.0, 2);
        CHECK(cell_inner(CellField(g, 1.0), CellField(g, 1.0)) == 4.0);
    }
    SECTION("symmetry and grid mismatch") {
        std::mt19937_64 rng(14);
        GridSpec g(2.0, 8);
        CellField a = random_cell_field(g, rng), b = random_cell_field(g, rng);
        CHECK(cell_inner(a, b) == cell_inner(b, a));
        GridSpec g2(2.0, 4);
        CHECK_THROWS_AS(cell_inner(a, CellField(g2, 0.0)), std::invalid_argument);
    }
}

TEST_CASE("edge_inner examples and summation by parts") {
    std::mt19937_64 rng(15);
    SECTION("zero field against anything") {
        GridSpec g(2.0, 8);
        EdgeField f = random_edge_field(g, rng);
        CHECK(edge_inner(EdgeField(g, 0.0), f) == 0.0);
    }
    SECTION("positivity") {
        GridSpec g(2.0, 8);
        EdgeField f = random_edge_field(g, rng);
        CHECK(edge_inner(f, f) > 0.0);
        CHECK(edge_inner(EdgeField(g, 0.0), EdgeField(g, 0.0)) == 0.0);
    }
    SECTION("summation by parts over 1000 random pairs, N in {8,16,32}") {
        for (int n : {8, 16, 32}) {
            GridSpec g(2.0, n);
            for (int rep = 0; rep < 334; ++rep) {
                CellField psi = random_cell_field(g, rng);
                EdgeField f = random_edge_field(g, rng);
                const double lhs = cell_inner(psi, div_from_edges(f));
                const double rhs = -edge_inner(diff_to_edges(psi), f);
                const double scale =
                    std::max(1.0, std::fabs(lhs) + norm_l2(psi) * std::sqrt(edge_inner(f, f)));
                CHECK(std::fabs(lhs - rhs) <= 1e-12 * scale);
            }
        }
    }
    SECTION("second form with a positive variable coefficient") {
        for (int n : {8, 16}) {
            GridSpec g(2.0, n);
            for (int rep = 0; rep < 50; ++rep) {
                CellField psi = random_cell_field(g, rng);
                CellField nu = random_cell_field(g, rng);
                EdgeField D = random_edge_field(g, rng, 0.1, 2.0);
                const double lhs = cell_inner(psi, var_laplacian(D, nu));
                EdgeField Dgrad = diff_to_edges(nu);
                for (std::size_t k = 0; k < Dgrad.x_values().size(); ++k) {
                    Dgrad.x_values()[k] *= D.x_values()[k];
                    Dgrad.y_values()[k] *= D.y_values()[k];
                }
                const double rhs = -edge_inner(diff_to_edges(psi), Dgrad);
                const double scale = std::max(1.0, std::fabs(lhs));
                CHECK(std::fabs(lhs - rhs) <= 1e-12 * scale);
            }
        }
    }
}

TEST_CASE("laplacian is symmetric negative semidefinite with constant null space") {
    std::mt19937_64 rng(16);
    GridSpec g(2.0, 8);
    for (int rep = 0; rep < 30; ++rep) {
        CellField a = random_cell_field(g, rng), b = random_cell_field(g, rng);
        CHECK(cell_inner(a, laplacian(b)) == Catch::Approx(cell_inner(b, laplacian(a))).margin(1e-11));
        CHECK(cell_inner(a, laplacian(a)) <= 1e-13);
    }
    // Null space is exactly the constants: a nonconstant field has <v, lap v> < 0.
    CellField nu = mean_zero(random_cell_field(g, rng));
    CHECK(cell_inner(nu, laplacian(nu)) < -1e-10);
    CHECK(max_abs_diff(laplacian(CellField(g, 2.0)), CellField(g, 0.0)) == 0.0);
}

TEST_CASE("norms examples") {
    SECTION("constant on L = 64") {
        GridSpec g(64.0, 16);
        NormSet n = norms(CellField(g, -0.5));
        CHECK(n.l2 == Catch::Approx(64.0 * 0.5));
        CHECK(n.grad_l2 == 0.0);
        CHECK(n.linf == 0.5);
        CHECK(n.h1 == Catch::Approx(n.l2));
    }
    SECTION("l2 <= linf * L") {
        std::mt19937_64 rng(17);
        GridSpec g(8.0, 16);
        for (int rep = 0; rep < 20; ++rep) {
            CellField f = random_cell_field(g, rng);
            NormSet n = norms(f);
            CHECK(n.l2 <= n.linf * g.length + 1e-12);
        }
    }
    SECTION("unit spike with h = 1") {
        GridSpec g(4.0, 4);
        CellField f(g);
        f(2, 1) = 1.0;
        NormSet n = norms(f);
        CHECK(n.l2 == 1.0);
        CHECK(n.linf == 1.0);
    }
    SECTION("invalid p") {
        GridSpec g(4.0, 4);
        CHECK_THROWS_AS(norms(CellField(g, 1.0), 0.5), std::invalid_argument);
    }
}

TEST_CASE("inv_laplacian examples") {
    SECTION("constant input gives zero") {
        GridSpec g(2.0, 8);
        CellField out = inv_laplacian(CellField(g, 3.0));
        CHECK(norm_linf(out) < 1e-14);
    }
    SECTION("round trip recovers the mean-free part") {
        std::mt19937_64 rng(18);
        for (int n : {8, 12, 16}) {  // includes a non power of two
            GridSpec g(2.0, n);
            CellField phi = random_cell_field(g, rng);
            CellField psi = inv_laplacian(phi);
            CellField back = laplacian(psi);
            const double mean = phi.mean();
            for (std::size_t k = 0; k < phi.size(); ++k) {
                const double expect = phi.values()[k] - mean;
                CHECK(-back.values()[k] == Catch::Approx(expect).margin(1e-10));
            }
            CHECK(std::fabs(psi.mean()) <= 1e-13 * std::max(1.0, norm_l2(psi)));
        }
    }
    SECTION("single cosine mode divides by the stencil eigenvalue") {
        GridSpec g(64.0, 16);
        CellField phi(g);
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                phi(i, j) = std::cos(2.0 * M_PI * g.center(i) / g.length);
        const double s = std::sin(M_PI * g.h / g.length);
        const double lambda = 4.0 / (g.h * g.h) * s * s;
        CellField psi = inv_laplacian(phi);
        for (std::size_t k = 0; k < phi.size(); ++k)
            CHECK(psi.values()[k] == Catch::Approx(phi.values()[k] / lambda).margin(1e-12));
    }
}

TEST_CASE("h_minus1_norm examples") {
    SECTION("zero field") {
        GridSpec g(2.0, 8);
        CHECK(h_minus1_norm(CellField(g, 0.0)) == 0.0);
    }
    SECTION("rejects non-mean-zero input") {
        GridSpec g(2.0, 8);
        CHECK_THROWS_AS(h_minus1_norm(CellField(g, 1.0)), std::invalid_argument);
    }
    SECTION("single Fourier mode: |phi|_{-1} = |phi|_2 / sqrt(lambda_1)") {
        GridSpec g(64.0, 16);
        CellField phi(g);
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                phi(i, j) = std::cos(2.0 * M_PI * g.center(i) / g.length);
        const double s = std::sin(M_PI * g.h / g.length);
        const double lambda = 4.0 / (g.h * g.h) * s * s;
        CHECK(h_minus1_norm(phi) == Catch::Approx(norm_l2(phi) / std::sqrt(lambda)).epsilon(1e-12));
    }
    SECTION("spectral bound |phi|_{-1} <= |phi|_2 / sqrt(lambda_1)") {
        std::mt19937_64 rng(19);
        GridSpec g(8.0, 16);
        const double s = std::sin(M_PI * g.h / g.length);
        const double lambda1 = 4.0 / (g.h * g.h) * s * s;
        for (int rep = 0; rep < 20; ++rep) {
            CellField phi = mean_zero(random_cell_field(g, rng));
            CHECK(h_minus1_norm(phi) <= norm_l2(phi) / std::sqrt(lambda1) * (1.0 + 1e-12));
        }
    }
    SECTION("dual evaluations agree: [grad psi, grad psi] vs <phi, psi>") {
        std::mt19937_64 rng(20);
        for (int n : {8, 16, 32}) {
            GridSpec g(4.0, n);
            for (int rep = 0; rep < 20; ++rep) {
                CellField phi = mean_zero(random_cell_field(g, rng));
                const double a = h_minus1_norm(phi);
                const double b = std::sqrt(cell_inner(phi, inv_laplacian(phi)));
                CHECK(a == Catch::Approx(b).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("grid operators are linear") {
    std::mt19937_64 rng(21);
    GridSpec g(2.0, 8);
    CellField a = random_cell_field(g, rng), b = random_cell_field(g, rng);
    const CellField combo = axpy(1.7, a, -0.3, b);

    SECTION("laplacian") {
        CellField lhs = laplacian(combo);
        CellField rhs = axpy(1.7, laplacian(a), -0.3, laplacian(b));
        CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    }
    SECTION("diff_to_edges / div_from_edges / inv_laplacian") {
        EdgeField dl = diff_to_edges(combo);
        EdgeField da = diff_to_edges(a), db = diff_to_edges(b);
        for (std::size_t k = 0; k < dl.x_values().size(); ++k) {
            CHECK(dl.x_values()[k] ==
                  Catch::Approx(1.7 * da.x_values()[k] - 0.3 * db.x_values()[k]).margin(1e-12));
        }
        CellField il = inv_laplacian(combo);
        CellField ir = axpy(1.7, inv_laplacian(a), -0.3, inv_laplacian(b));
        CHECK(max_abs_diff(il, ir) < 1e-11);
    }
}
