#pragma once

// Elastic deformation kernel: exact cell-integrated coefficients, tables of
// offsets per grid level, direct O(n^2)-per-point film thickness, and the
// local kernel windows used inside line relaxations.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ehl/grid.hpp"

namespace ehl {

namespace detail {
// |u| * asinh(v/u) with the continuous limit 0 at u = 0.
inline double asinh_term(double u, double v) {
    if (u == 0.0) return 0.0;
    return std::fabs(u) * std::asinh(v / u);
}
} // namespace detail

// Cell integral of 1/r over the h-cell centered at offset (dx, dy) from the
// target, times 2/pi^2. Finite for every offset including zero.
inline double kernel_coeff(double dx, double dy, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("kernel_coeff: h must be positive");
    const double xp = dx + 0.5 * h, xm = dx - 0.5 * h;
    const double yp = dy + 0.5 * h, ym = dy - 0.5 * h;
    using detail::asinh_term;
    double s = asinh_term(xp, yp) + asinh_term(yp, xp)
             - asinh_term(xm, yp) - asinh_term(yp, xm)
             - asinh_term(xp, ym) - asinh_term(ym, xp)
             + asinh_term(xm, ym) + asinh_term(ym, xm);
    return 2.0 / (std::numbers::pi * std::numbers::pi) * s;
}

// Table of G_{|di|,|dj|} for all offsets reachable on one level.
struct KernelTable {
    int ndi = 0, ndj = 0;      // table extents: di in [0, ndi), dj in [0, ndj)
    double h = 0;
    std::vector<double> g;     // g[dj * ndi + di]

    double at(int di, int dj) const {
        di = di < 0 ? -di : di;
        dj = dj < 0 ? -dj : dj;
        return g[static_cast<size_t>(dj) * ndi + di];
    }
};

inline KernelTable build_kernel_table(const GridLevel& level) {
    if (std::fabs(level.hx - level.hy) > 1e-14 * level.hx)
        throw std::invalid_argument("build_kernel_table: requires square cells (hx == hy)");
    KernelTable t;
    t.ndi = level.nx;
    t.ndj = level.ny;
    t.h = level.hx;
    t.g.resize(static_cast<size_t>(t.ndi) * t.ndj);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int dj = 0; dj < t.ndj; ++dj)
        for (int di = 0; di < t.ndi; ++di)
            t.g[static_cast<size_t>(dj) * t.ndi + di] =
                kernel_coeff(di * t.h, dj * t.h, t.h);
    return t;
}

// Subsampled table for the next coarser level: G^{HH}_{I,J} = G^{hh}_{2I,2J}.
inline KernelTable inject_kernel(const KernelTable& fine) {
    KernelTable c;
    c.ndi = (fine.ndi - 1) / 2 + 1;
    c.ndj = (fine.ndj - 1) / 2 + 1;
    c.h = 2.0 * fine.h;
    c.g.resize(static_cast<size_t>(c.ndi) * c.ndj);
    for (int dj = 0; dj < c.ndj; ++dj)
        for (int di = 0; di < c.ndi; ++di)
            c.g[static_cast<size_t>(dj) * c.ndi + di] = fine.at(2 * di, 2 * dj);
    return c;
}

// Full double-sum deformation: W_{ij} = sum_{i'j'} G_{|i-i'|,|j-j'|} u_{i'j'}.
// Exact (to round-off) reference path; cost O(n^2) per target point.
inline Field deformation_direct(const Field& u, const KernelTable& table) {
    const int nx = u.nx(), ny = u.ny();
    Field w(u.level, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double s = 0;
            for (int jp = 0; jp < ny; ++jp) {
                const double* row = &table.g[static_cast<size_t>(std::abs(j - jp)) * table.ndi];
                const double* urow = &u.v[static_cast<size_t>(jp) * nx];
                for (int ip = 0; ip < nx; ++ip)
                    s += row[std::abs(i - ip)] * urow[ip];
            }
            w(i, j) = s;
        }
    }
    return w;
}

// H_{ij} = H00 + x^2/2 + y^2/2 + deformation.
inline Field film_thickness_direct(const Field& u, double h00, const KernelTable& table) {
    Field H = deformation_direct(u, table);
    for (int j = 0; j < u.ny(); ++j) {
        double yy = u.level.y(j);
        for (int i = 0; i < u.nx(); ++i) {
            double xx = u.level.x(i);
            H(i, j) += h00 + 0.5 * xx * xx + 0.5 * yy * yy;
        }
    }
    return H;
}

// Local kernel window along a line plus the distributed coefficients
// sigmaG(i,k) = G_{i,k} - (G_{i,k-1} + G_{i,k+1} + G_{i,k,j,j-1} + G_{i,k,j,j+1}).
// Out-of-range k are dropped: their sigma is pinned to zero by the Dirichlet
// boundary.
struct KernelWindow {
    int k_begin = 0;                 // first in-range k
    std::vector<double> g;           // G_{i,k,j,j} for k in [k_begin, k_begin+len)
    std::vector<double> sigma_g;     // distributed coefficients, same k range
};

inline KernelWindow sigma_kernel_window(const KernelTable& table, int i, int j, int radius) {
    (void)j;  // kernel depends on offsets only
    if (radius < 1) throw std::invalid_argument("sigma_kernel_window: radius must be >= 1");
    KernelWindow w;
    int lo = std::max(0, i - radius);
    int hi = std::min(table.ndi - 1, i + radius);
    w.k_begin = lo;
    for (int k = lo; k <= hi; ++k) {
        int d = std::abs(i - k);
        w.g.push_back(table.at(d, 0));
        w.sigma_g.push_back(table.at(d, 0)
                            - (table.at(d + 1, 0) + table.at(std::abs(d - 1), 0)
                               + 2.0 * table.at(d, 1)));
    }
    return w;
}

} // namespace ehl
