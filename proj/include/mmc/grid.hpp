// Periodic cell/edge grid containers and discrete calculus for uniform
// square grids: difference/average operators, inner products, norms, and
// the spectral inverse Laplacian behind the discrete H^-1 norm.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mmc {

/// Uniform N x N periodic grid on [0,L]^2 with spacing h = L/N.
struct GridSpec {
    double length = 0.0;
    int n = 0;
    double h = 0.0;

    GridSpec() = default;
    GridSpec(double L, int N) : length(L), n(N), h(L / N) {
        if (N < 2) throw std::invalid_argument("GridSpec: N must be >= 2");
        if (!(L > 0.0)) throw std::invalid_argument("GridSpec: L must be positive");
    }

    /// Cell-center coordinate of index i (0-based), p = (i + 1/2) h.
    double center(int i) const { return (i + 0.5) * h; }

    int cell_count() const { return n * n; }
    double cell_area() const { return h * h; }
    double domain_area() const { return length * length; }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.length == b.length && a.n == b.n;
    }
};

namespace detail {
inline int wrap(int i, int n) {
    int r = i % n;
    return r < 0 ? r + n : r;
}
inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
    if (!(a == b))
        throw std::invalid_argument(std::string(where) + ": grid mismatch");
}
} // namespace detail

/// Scalar field on cell centers, periodically indexed. Storage is row-major:
/// entry (i,j) lives at j*N + i, so a fixed j is contiguous in i.
class CellField {
public:
    CellField() = default;
    explicit CellField(const GridSpec& g, double fill = 0.0)
        : grid_(g), v_(static_cast<std::size_t>(g.n) * g.n, fill) {}

    const GridSpec& grid() const { return grid_; }
    int n() const { return grid_.n; }

    /// Unchecked access, 0 <= i,j < N.
    double& operator()(int i, int j) { return v_[static_cast<std::size_t>(j) * grid_.n + i]; }
    double operator()(int i, int j) const { return v_[static_cast<std::size_t>(j) * grid_.n + i]; }

    /// Periodic access for any integer index.
    double at(int i, int j) const {
        return (*this)(detail::wrap(i, grid_.n), detail::wrap(j, grid_.n));
    }

    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::size_t size() const { return v_.size(); }

    double sum() const {
        double s = 0.0;
        for (double x : v_) s += x;
        return s;
    }
    double mean() const { return sum() / static_cast<double>(v_.size()); }
    double min() const {
        double m = v_.front();
        for (double x : v_) m = x < m ? x : m;
        return m;
    }
    double max() const {
        double m = v_.front();
        for (double x : v_) m = x > m ? x : m;
        return m;
    }

private:
    GridSpec grid_;
    std::vector<double> v_;
};

/// Vector field on cell edges: x(i,j) sits at (i+1/2, j), y(i,j) at (i, j+1/2).
/// Periodic identification stores exactly N x N entries per direction
/// (edge N-1/2 coincides with edge -1/2).
class EdgeField {
public:
    EdgeField() = default;
    explicit EdgeField(const GridSpec& g, double fill = 0.0)
        : grid_(g),
          x_(static_cast<std::size_t>(g.n) * g.n, fill),
          y_(static_cast<std::size_t>(g.n) * g.n, fill) {}

    const GridSpec& grid() const { return grid_; }
    int n() const { return grid_.n; }

    double& x(int i, int j) { return x_[static_cast<std::size_t>(j) * grid_.n + i]; }
    double x(int i, int j) const { return x_[static_cast<std::size_t>(j) * grid_.n + i]; }
    double& y(int i, int j) { return y_[static_cast<std::size_t>(j) * grid_.n + i]; }
    double y(int i, int j) const { return y_[static_cast<std::size_t>(j) * grid_.n + i]; }

    double x_at(int i, int j) const {
        return x(detail::wrap(i, grid_.n), detail::wrap(j, grid_.n));
    }
    double y_at(int i, int j) const {
        return y(detail::wrap(i, grid_.n), detail::wrap(j, grid_.n));
    }

    std::vector<double>& x_values() { return x_; }
    const std::vector<double>& x_values() const { return x_; }
    std::vector<double>& y_values() { return y_; }
    const std::vector<double>& y_values() const { return y_; }

private:
    GridSpec grid_;
    std::vector<double> x_, y_;
};

/// Discrete gradient: forward differences onto edges,
/// x(i,j) = (nu(i+1,j) - nu(i,j))/h, y analogous.
inline EdgeField diff_to_edges(const CellField& nu) {
    const GridSpec& g = nu.grid();
    EdgeField f(g);
    const double inv_h = 1.0 / g.h;
    for (int j = 0; j < g.n; ++j) {
        const int jp = j + 1 == g.n ? 0 : j + 1;
        for (int i = 0; i < g.n; ++i) {
            const int ip = i + 1 == g.n ? 0 : i + 1;
            f.x(i, j) = (nu(ip, j) - nu(i, j)) * inv_h;
            f.y(i, j) = (nu(i, jp) - nu(i, j)) * inv_h;
        }
    }
    return f;
}

/// Cell-to-edge averages A_x, A_y.
inline EdgeField avg_to_edges(const CellField& nu) {
    const GridSpec& g = nu.grid();
    EdgeField f(g);
    for (int j = 0; j < g.n; ++j) {
        const int jp = j + 1 == g.n ? 0 : j + 1;
        for (int i = 0; i < g.n; ++i) {
            const int ip = i + 1 == g.n ? 0 : i + 1;
            f.x(i, j) = 0.5 * (nu(ip, j) + nu(i, j));
            f.y(i, j) = 0.5 * (nu(i, jp) + nu(i, j));
        }
    }
    return f;
}

/// Discrete divergence of an edge field back to cell centers.
inline CellField div_from_edges(const EdgeField& f) {
    const GridSpec& g = f.grid();
    CellField out(g);
    const double inv_h = 1.0 / g.h;
    for (int j = 0; j < g.n; ++j) {
        const int jm = j == 0 ? g.n - 1 : j - 1;
        for (int i = 0; i < g.n; ++i) {
            const int im = i == 0 ? g.n - 1 : i - 1;
            out(i, j) = (f.x(i, j) - f.x(im, j) + f.y(i, j) - f.y(i, jm)) * inv_h;
        }
    }
    return out;
}

/// Edge-to-cell averages a_x, a_y, applied componentwise.
inline std::pair<CellField, CellField> avg_from_edges(const EdgeField& f) {
    const GridSpec& g = f.grid();
    CellField ax(g), ay(g);
    for (int j = 0; j < g.n; ++j) {
        const int jm = j == 0 ? g.n - 1 : j - 1;
        for (int i = 0; i < g.n; ++i) {
            const int im = i == 0 ? g.n - 1 : i - 1;
            ax(i, j) = 0.5 * (f.x(i, j) + f.x(im, j));
            ay(i, j) = 0.5 * (f.y(i, j) + f.y(i, jm));
        }
    }
    return {std::move(ax), std::move(ay)};
}

/// Standard five-point Laplacian.
inline CellField laplacian(const CellField& nu) {
    const GridSpec& g = nu.grid();
    CellField out(g);
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (int j = 0; j < g.n; ++j) {
        const int jp = j + 1 == g.n ? 0 : j + 1;
        const int jm = j == 0 ? g.n - 1 : j - 1;
        for (int i = 0; i < g.n; ++i) {
            const int ip = i + 1 == g.n ? 0 : i + 1;
            const int im = i == 0 ? g.n - 1 : i - 1;
            out(i, j) = (nu(ip, j) + nu(im, j) + nu(i, jp) + nu(i, jm) - 4.0 * nu(i, j)) * inv_h2;
        }
    }
    return out;
}

/// Variable-coefficient Laplacian div(D grad nu) with D given on edges.
inline CellField var_laplacian(const EdgeField& D, const CellField& nu) {
    detail::require_same_grid(D.grid(), nu.grid(), "var_laplacian");
    const GridSpec& g = nu.grid();
    CellField out(g);
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (int j = 0; j < g.n; ++j) {
        const int jp = j + 1 == g.n ? 0 : j + 1;
        const int jm = j == 0 ? g.n - 1 : j - 1;
        for (int i = 0; i < g.n; ++i) {
            const int ip = i + 1 == g.n ? 0 : i + 1;
            const int im = i == 0 ? g.n - 1 : i - 1;
            const double fx_p = D.x(i, j) * (nu(ip, j) - nu(i, j));
            const double fx_m = D.x(im, j) * (nu(i, j) - nu(im, j));
            const double fy_p = D.y(i, j) * (nu(i, jp) - nu(i, j));
            const double fy_m = D.y(i, jm) * (nu(i, j) - nu(i, jm));
            out(i, j) = (fx_p - fx_m + fy_p - fy_m) * inv_h2;
        }
    }
    return out;
}

/// <nu, xi> = h^2 sum nu_ij xi_ij.
inline double cell_inner(const CellField& nu, const CellField& xi) {
    detail::require_same_grid(nu.grid(), xi.grid(), "cell_inner");
    double s = 0.0;
    const std::size_t m = nu.size();
    const double* a = nu.data();
    const double* b = xi.data();
    for (std::size_t k = 0; k < m; ++k) s += a[k] * b[k];
    return nu.grid().cell_area() * s;
}

/// [f, g] edge inner product. For periodic fields the paper's cell-averaged
/// form <a_x(f g), 1> collapses to the plain h^2 edge sum used here.
inline double edge_inner(const EdgeField& f, const EdgeField& g) {
    detail::require_same_grid(f.grid(), g.grid(), "edge_inner");
    double s = 0.0;
    const std::size_t m = f.x_values().size();
    for (std::size_t k = 0; k < m; ++k) {
        s += f.x_values()[k] * g.x_values()[k];
        s += f.y_values()[k] * g.y_values()[k];
    }
    return f.grid().cell_area() * s;
}

struct NormSet {
    double l2 = 0.0;
    double lp = 0.0;
    double linf = 0.0;
    double grad_l2 = 0.0;
    double h1 = 0.0;
};

/// l2, lp, linf, |grad|_2 and H1 norms of a cell field.
inline NormSet norms(const CellField& nu, double p = 2.0) {
    if (!(p >= 1.0) || !std::isfinite(p))
        throw std::invalid_argument("norms: p must satisfy 1 <= p < inf");
    NormSet out;
    double s2 = 0.0, sp = 0.0, mx = 0.0;
    for (double x : nu.values()) {
        const double a = std::fabs(x);
        s2 += x * x;
        sp += std::pow(a, p);
        mx = a > mx ? a : mx;
    }
    const double w = nu.grid().cell_area();
    out.l2 = std::sqrt(w * s2);
    out.lp = std::pow(w * sp, 1.0 / p);
    out.linf = mx;
    const EdgeField grad = diff_to_edges(nu);
    out.grad_l2 = std::sqrt(edge_inner(grad, grad));
    out.h1 = std::sqrt(out.l2 * out.l2 + out.grad_l2 * out.grad_l2);
    return out;
}

inline double norm_l2(const CellField& nu) {
    double s2 = 0.0;
    for (double x : nu.values()) s2 += x * x;
    return std::sqrt(nu.grid().cell_area() * s2);
}

inline double norm_linf(const CellField& nu) {
    double mx = 0.0;
    for (double x : nu.values()) {
        const double a = std::fabs(x);
        mx = a > mx ? a : mx;
    }
    return mx;
}

namespace detail {

// Iterative radix-2 complex FFT, in place. Forward for sign = -1.
inline void fft_pow2(std::vector<std::complex<double>>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Direct O(n^2) transform for grids that are not a power of two.
inline void dft_direct(std::vector<std::complex<double>>& a, int sign) {
    const std::size_t n = a.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> s(0.0, 0.0);
        for (std::size_t m = 0; m < n; ++m) {
            const double ang = sign * 2.0 * M_PI * static_cast<double>(k * m % n) / static_cast<double>(n);
            s += a[m] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = s;
    }
    a = std::move(out);
}

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline void dft_1d(std::vector<std::complex<double>>& a, int sign) {
    if (is_pow2(static_cast<int>(a.size())))
        fft_pow2(a, sign);
    else
        dft_direct(a, sign);
}

// 2-D transform over rows then columns of an N x N complex array.
inline void dft_2d(std::vector<std::complex<double>>& a, int n, int sign) {
    std::vector<std::complex<double>> line(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) line[i] = a[static_cast<std::size_t>(j) * n + i];
        dft_1d(line, sign);
        for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(j) * n + i] = line[i];
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) line[j] = a[static_cast<std::size_t>(j) * n + i];
        dft_1d(line, sign);
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(j) * n + i] = line[j];
    }
}

} // namespace detail

/// Solves -lap(psi) = phi - mean(phi) for the unique mean-zero psi by
/// diagonalizing the five-point stencil in the discrete Fourier basis.
/// The zero mode is set to exactly zero.
inline CellField inv_laplacian(const CellField& phi) {
    const GridSpec& g = phi.grid();
    const int n = g.n;
    const double mean = phi.mean();

    std::vector<std::complex<double>> a(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) a[k] = phi.values()[k] - mean;
    detail::dft_2d(a, n, -1);

    // -lap eigenvalue of mode (k,l): (4/h^2)(sin^2(pi k/N) + sin^2(pi l/N)).
    const double c = 4.0 / (g.h * g.h);
    std::vector<double> s2(n);
    for (int k = 0; k < n; ++k) {
        const double s = std::sin(M_PI * k / n);
        s2[k] = s * s;
    }
    for (int l = 0; l < n; ++l) {
        for (int k = 0; k < n; ++k) {
            if (k == 0 && l == 0) {
                a[0] = 0.0;
                continue;
            }
            a[static_cast<std::size_t>(l) * n + k] /= c * (s2[k] + s2[l]);
        }
    }

    detail::dft_2d(a, n, +1);
    CellField psi(g);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (std::size_t k = 0; k < psi.size(); ++k) psi.values()[k] = a[k].real() * scale;

    // Pin the mean-zero representative exactly.
    const double m = psi.mean();
    for (double& x : psi.values()) x -= m;
    return psi;
}

/// Discrete H^-1 norm of a mean-zero field: sqrt([grad psi, grad psi]) with
/// -lap psi = phi. Throws when phi is not mean-zero to 1e-12 * |phi|_2.
inline double h_minus1_norm(const CellField& phi) {
    const double l2 = norm_l2(phi);
    const double mean_scale = std::fabs(phi.mean()) * phi.grid().length;
    if (mean_scale > 1e-12 * l2 && l2 > 0.0)
        throw std::invalid_argument("h_minus1_norm: input is not mean-zero");
    const CellField psi = inv_laplacian(phi);
    const EdgeField grad = diff_to_edges(psi);
    return std::sqrt(edge_inner(grad, grad));
}

} // namespace mmc
