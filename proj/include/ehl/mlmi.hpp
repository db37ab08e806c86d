#pragma once

// Multilevel multi-integration: O(n log n) evaluation of the dense
// deformation sum. The kernel is coarsened by injection, the density by the
// adjoint of high-order interpolation, and the mismatch near the singularity
// is repaired by local correction windows at every level transition.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ehl/grid.hpp"
#include "ehl/kernel.hpp"

namespace ehl {

namespace mlmi_detail {

// 1-D order-2p interpolation from a coarse array (nc points) to the fine
// array (2*nc-1 points). Even fine points coincide with coarse nodes; odd
// points use a 2p-point Lagrange stencil, shifted one-sided near the edges.
struct Interp1D {
    int nf = 0, nc = 0, p2 = 0;
    std::vector<int> start;        // per odd fine index: first coarse node
    std::vector<double> wts;       // per odd fine index: p2 weights
    std::vector<char> center;      // per odd fine index: stencil is centered

    const double* weights(int i) const { return &wts[static_cast<size_t>(i) * p2]; }
};

inline Interp1D make_interp(int nc, int order) {
    Interp1D t;
    t.nc = nc;
    t.nf = 2 * nc - 1;
    t.p2 = order;
    t.start.assign(static_cast<size_t>(t.nf), 0);
    t.wts.assign(static_cast<size_t>(t.nf) * order, 0.0);
    t.center.assign(static_cast<size_t>(t.nf), 0);
    const int p = order / 2;
    for (int i = 1; i < t.nf; i += 2) {
        int ideal = (i - 1) / 2 - (p - 1);
        int s = std::min(std::max(ideal, 0), nc - order);
        t.start[static_cast<size_t>(i)] = s;
        t.center[static_cast<size_t>(i)] = (s == ideal) ? 1 : 0;
        double x = 0.5 * i;   // target in coarse coordinates
        for (int k = 0; k < order; ++k) {
            double w = 1.0;
            for (int mth = 0; mth < order; ++mth) {
                if (mth == k) continue;
                w *= (x - (s + mth)) / double(k - mth);
            }
            t.wts[static_cast<size_t>(i) * order + k] = w;
        }
    }
    return t;
}

// y := I x along one axis (x-axis variant: rows are contiguous).
inline void interp_rows(const Interp1D& t, const std::vector<double>& c, int rows,
                        std::vector<double>& f) {
    for (int r = 0; r < rows; ++r) {
        const double* src = &c[static_cast<size_t>(r) * t.nc];
        double* dst = &f[static_cast<size_t>(r) * t.nf];
        for (int i = 0; i < t.nf; i += 2) dst[i] = src[i / 2];
        for (int i = 1; i < t.nf; i += 2) {
            const double* w = t.weights(i);
            const double* s = src + t.start[static_cast<size_t>(i)];
            double acc = 0;
            for (int k = 0; k < t.p2; ++k) acc += w[k] * s[k];
            dst[i] = acc;
        }
    }
}

// y := I^T x along one axis.
inline void adjoint_rows(const Interp1D& t, const std::vector<double>& f, int rows,
                         std::vector<double>& c) {
    std::fill(c.begin(), c.end(), 0.0);
    for (int r = 0; r < rows; ++r) {
        const double* src = &f[static_cast<size_t>(r) * t.nf];
        double* dst = &c[static_cast<size_t>(r) * t.nc];
        for (int i = 0; i < t.nf; i += 2) dst[i / 2] += src[i];
        for (int i = 1; i < t.nf; i += 2) {
            const double* w = t.weights(i);
            double* d = dst + t.start[static_cast<size_t>(i)];
            double s = src[i];
            for (int k = 0; k < t.p2; ++k) d[k] += w[k] * s;
        }
    }
}

// Transpose-free 2-D helpers working on row-major (i fastest) data.
inline std::vector<double> transpose(const std::vector<double>& a, int nx, int ny) {
    std::vector<double> b(a.size());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            b[static_cast<size_t>(i) * ny + j] = a[static_cast<size_t>(j) * nx + i];
    return b;
}

} // namespace mlmi_detail

struct MlmiPlan {
    int order = 6;                 // interpolation order 2p, even
    int m = 4;                     // correction radius in coarse cells around
                                   // the interpolation-stencil span
    std::vector<GridLevel> grids;              // [0] finest
    std::vector<KernelTable> tables;           // per level
    std::vector<mlmi_detail::Interp1D> interp; // [l]: grids[l] <-> grids[l+1]
    // interior correction tables: per level transition and parity
    // (1 = x odd, 2 = y odd, 3 = both odd); halfwidth mt = 2m + order - 1,
    // value at (dy+mt)*(2mt+1)+(dx+mt)
    std::vector<std::array<std::vector<double>, 4>> corr;

    int level_count() const { return static_cast<int>(grids.size()); }
    int fine_radius() const { return 2 * m; }
    // pair window halfwidth: centered stencils reach order-1 cells out
    int pair_halfwidth() const { return 2 * m + order - 1; }
};

namespace mlmi_detail {

// Interpolation of the subsampled kernel in one source/target variable,
// evaluated per pair with the actual (possibly one-sided) stencils.
inline double gtilde_pair(const KernelTable& g, const Interp1D& tx, const Interp1D& ty,
                          int ix, int iy, int jx, int jy) {
    const bool ox = (jx % 2) != 0, oy = (jy % 2) != 0;
    if (!ox && !oy) return g.at(ix - jx, iy - jy);
    if (ox && !oy) {
        const double* w = tx.weights(jx);
        int s = tx.start[static_cast<size_t>(jx)];
        double acc = 0;
        for (int k = 0; k < tx.p2; ++k) acc += w[k] * g.at(ix - 2 * (s + k), iy - jy);
        return acc;
    }
    if (!ox && oy) {
        const double* w = ty.weights(jy);
        int s = ty.start[static_cast<size_t>(jy)];
        double acc = 0;
        for (int k = 0; k < ty.p2; ++k) acc += w[k] * g.at(ix - jx, iy - 2 * (s + k));
        return acc;
    }
    const double* wx = tx.weights(jx);
    const double* wy = ty.weights(jy);
    int sx = tx.start[static_cast<size_t>(jx)];
    int sy = ty.start[static_cast<size_t>(jy)];
    double acc = 0;
    for (int ky = 0; ky < ty.p2; ++ky) {
        double a = 0;
        for (int kx = 0; kx < tx.p2; ++kx)
            a += wx[kx] * g.at(ix - 2 * (sx + kx), iy - 2 * (sy + ky));
        acc += wy[ky] * a;
    }
    return acc;
}

} // namespace mlmi_detail

inline MlmiPlan make_mlmi_plan(const GridLevel& finest, const KernelTable& finest_table,
                               int order = 6, int m = 4, int max_levels = 32) {
    if (order < 4 || order % 2 != 0)
        throw std::invalid_argument("make_mlmi_plan: order must be even and >= 4");
    if (m < order / 2)
        throw std::invalid_argument("make_mlmi_plan: m must be >= order/2");
    MlmiPlan plan;
    plan.order = order;
    plan.m = m;
    plan.grids.push_back(finest);
    plan.tables.push_back(finest_table);
    while (plan.level_count() < max_levels) {
        const GridLevel& g = plan.grids.back();
        if ((g.nx - 1) % 2 != 0 || (g.ny - 1) % 2 != 0) break;
        int ncx = (g.nx - 1) / 2 + 1, ncy = (g.ny - 1) / 2 + 1;
        if (ncx < order + 3 || ncy < order + 3) break;
        if (g.nx - 1 < 2 * m + 2 * order - 2 || g.ny - 1 < 2 * m + 2 * order - 2) break;
        plan.grids.push_back(coarsen(g));
        plan.tables.push_back(inject_kernel(plan.tables.back()));
    }

    using namespace mlmi_detail;
    const int L = plan.level_count();
    const int p = order / 2;
    const int mt = 2 * m + order - 1;
    const int wlen = 2 * mt + 1;
    for (int l = 0; l + 1 < L; ++l) {
        plan.interp.push_back(make_interp(plan.grids[static_cast<size_t>(l) + 1].nx, order));
        // interior (centered-stencil) correction tables; identical for the
        // source and target variants by symmetry of the kernel and weights
        std::array<std::vector<double>, 4> c;
        const KernelTable& g = plan.tables[static_cast<size_t>(l)];
        std::vector<double> w(static_cast<size_t>(order));
        {   // centered midpoint weights
            Interp1D t = make_interp(order + 2, order);
            int mid = order + 1;  // some interior odd index
            for (int k = 0; k < order; ++k) w[static_cast<size_t>(k)] = t.weights(mid)[k];
        }
        for (int par = 1; par <= 3; ++par) {
            c[static_cast<size_t>(par)].assign(static_cast<size_t>(wlen) * wlen, 0.0);
            for (int dy = -mt; dy <= mt; ++dy) {
                for (int dx = -mt; dx <= mt; ++dx) {
                    double gt = 0;
                    if (par == 1) {
                        for (int k = 0; k < order; ++k) {
                            int off = 1 - 2 * (k - (p - 1));   // i - 2K = dx + 1 - 2t
                            gt += w[static_cast<size_t>(k)] * g.at(dx + off, dy);
                        }
                    } else if (par == 2) {
                        for (int k = 0; k < order; ++k) {
                            int off = 1 - 2 * (k - (p - 1));
                            gt += w[static_cast<size_t>(k)] * g.at(dx, dy + off);
                        }
                    } else {
                        for (int ky = 0; ky < order; ++ky) {
                            int offy = 1 - 2 * (ky - (p - 1));
                            double a = 0;
                            for (int kx = 0; kx < order; ++kx) {
                                int offx = 1 - 2 * (kx - (p - 1));
                                a += w[static_cast<size_t>(kx)] * g.at(dx + offx, dy + offy);
                            }
                            gt += w[static_cast<size_t>(ky)] * a;
                        }
                    }
                    c[static_cast<size_t>(par)][static_cast<size_t>(dy + mt) * wlen + (dx + mt)] =
                        g.at(dx, dy) - gt;
                }
            }
        }
        plan.corr.push_back(std::move(c));
    }
    return plan;
}

// Adjoint coarsening of the density scaled by 2^{-d}; sums are conserved:
// sum_fine h^2 u = sum_coarse H^2 u*.
inline Field coarsen_density(const Field& fine, const MlmiPlan& plan, int level = 0) {
    using namespace mlmi_detail;
    if (level + 1 >= plan.level_count())
        throw std::invalid_argument("coarsen_density: no coarser level in plan");
    const Interp1D& t = plan.interp[static_cast<size_t>(level)];
    const GridLevel& fg = plan.grids[static_cast<size_t>(level)];
    const GridLevel& cg = plan.grids[static_cast<size_t>(level) + 1];
    // adjoint along x, then along y (via transposes)
    std::vector<double> ax(static_cast<size_t>(cg.nx) * fg.ny);
    adjoint_rows(t, fine.v, fg.ny, ax);
    std::vector<double> axt = transpose(ax, cg.nx, fg.ny);
    std::vector<double> ac(static_cast<size_t>(cg.ny) * cg.nx);
    adjoint_rows(t, axt, cg.nx, ac);
    Field out(cg);
    out.v = transpose(ac, cg.ny, cg.nx);
    for (double& a : out.v) a *= 0.25;
    return out;
}

namespace mlmi_detail {

inline void interpolate_2d(const MlmiPlan& plan, int level, const std::vector<double>& coarse,
                           std::vector<double>& fine) {
    const Interp1D& t = plan.interp[static_cast<size_t>(level)];
    const GridLevel& fg = plan.grids[static_cast<size_t>(level)];
    const GridLevel& cg = plan.grids[static_cast<size_t>(level) + 1];
    // interpolate along y first (transpose in), then along x
    std::vector<double> ct = transpose(coarse, cg.nx, cg.ny);
    std::vector<double> fy(static_cast<size_t>(cg.nx) * fg.ny);
    interp_rows(t, ct, cg.nx, fy);
    std::vector<double> fyt = transpose(fy, fg.ny, cg.nx);
    fine.assign(static_cast<size_t>(fg.nx) * fg.ny, 0.0);
    interp_rows(t, fyt, fg.ny, fine);
}

inline void dense_sum(const KernelTable& g, const GridLevel& gl,
                      const std::vector<double>& s, std::vector<double>& w) {
    const int nx = gl.nx, ny = gl.ny;
    w.assign(static_cast<size_t>(nx) * ny, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double acc = 0;
            for (int jp = 0; jp < ny; ++jp) {
                const double* row = &g.g[static_cast<size_t>(std::abs(j - jp)) * g.ndi];
                const double* srow = &s[static_cast<size_t>(jp) * nx];
                for (int ip = 0; ip < nx; ++ip) acc += row[std::abs(i - ip)] * srow[ip];
            }
            w[static_cast<size_t>(j) * nx + i] = acc;
        }
}

inline std::vector<double> mlmi_recurse(const MlmiPlan& plan, int level,
                                        const std::vector<double>& s) {
    const GridLevel& fg = plan.grids[static_cast<size_t>(level)];
    const KernelTable& g = plan.tables[static_cast<size_t>(level)];
    if (level + 1 >= plan.level_count()) {
        std::vector<double> w;
        dense_sum(g, fg, s, w);
        return w;
    }
    const Interp1D& t = plan.interp[static_cast<size_t>(level)];
    const GridLevel& cg = plan.grids[static_cast<size_t>(level) + 1];
    const int nx = fg.nx, ny = fg.ny, ncx = cg.nx, ncy = cg.ny;
    const int m = plan.fine_radius();
    const int mt = plan.pair_halfwidth();
    const int wlen = 2 * mt + 1;
    const auto& corr = plan.corr[static_cast<size_t>(level)];

    // source coarsening: s' = I^T s (unscaled adjoint)
    std::vector<double> ax(static_cast<size_t>(ncx) * ny);
    adjoint_rows(t, s, ny, ax);
    std::vector<double> axt = transpose(ax, ncx, ny);
    std::vector<double> act(static_cast<size_t>(ncy) * ncx);
    adjoint_rows(t, axt, ncx, act);
    std::vector<double> sprime = transpose(act, ncy, ncx);

    // coarse sums at coarse targets, then back up
    std::vector<double> wH = mlmi_recurse(plan, level + 1, sprime);
    std::vector<double> v;
    interpolate_2d(plan, level, wH, v);

    auto centered = [&](int q) { return q % 2 == 0 || t.center[static_cast<size_t>(q)] != 0; };
    // stencil node span per fine 1-D index, in fine units; a correction pair
    // matters when the companion point comes within the window width of the
    // span. One-sided stencils interpolate with a larger error constant, so
    // their window widens with the shift.
    std::vector<int> span_lo(static_cast<size_t>(nx)), span_hi(static_cast<size_t>(nx));
    std::vector<int> width(static_cast<size_t>(nx), m);
    const int p = plan.order / 2;
    for (int q = 0; q < nx; ++q) {
        if (q % 2 == 0) {
            span_lo[static_cast<size_t>(q)] = span_hi[static_cast<size_t>(q)] = q;
        } else {
            int s0 = t.start[static_cast<size_t>(q)];
            span_lo[static_cast<size_t>(q)] = 2 * s0;
            span_hi[static_cast<size_t>(q)] = 2 * (s0 + t.p2 - 1);
            int ideal = (q - 1) / 2 - (p - 1);
            width[static_cast<size_t>(q)] = m + 4 * std::abs(s0 - ideal);
        }
    }
    auto outside = [&](int a, int q) {
        int lo = span_lo[static_cast<size_t>(q)], hi = span_hi[static_cast<size_t>(q)];
        int w = width[static_cast<size_t>(q)];
        return a < lo - w || a > hi + w;
    };

    // target corrections: fine targets with an odd coordinate, sources 2J
    // within reach of the target's interpolation stencil
    auto ceil_half = [](int a) { return a >= 0 ? (a + 1) / 2 : a / 2; };
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            if (ix % 2 == 0 && iy % 2 == 0) continue;
            const bool fast_i = centered(ix) && centered(iy);
            const int par = ((ix % 2) ? 1 : 0) | ((iy % 2) ? 2 : 0);
            double acc = 0;
            int wy = width[static_cast<size_t>(iy)], wx = width[static_cast<size_t>(ix)];
            int Jy_lo = std::max(0, ceil_half(span_lo[static_cast<size_t>(iy)] - wy));
            int Jy_hi = std::min(ncy - 1, (span_hi[static_cast<size_t>(iy)] + wy) / 2);
            int Jx_lo = std::max(0, ceil_half(span_lo[static_cast<size_t>(ix)] - wx));
            int Jx_hi = std::min(ncx - 1, (span_hi[static_cast<size_t>(ix)] + wx) / 2);
            for (int Jy = Jy_lo; Jy <= Jy_hi; ++Jy) {
                int dy = iy - 2 * Jy;
                for (int Jx = Jx_lo; Jx <= Jx_hi; ++Jx) {
                    double sval = sprime[static_cast<size_t>(Jy) * ncx + Jx];
                    if (sval == 0.0) continue;
                    int dx = ix - 2 * Jx;
                    double cval;
                    if (fast_i && std::abs(dx) <= mt && std::abs(dy) <= mt) {
                        cval = corr[static_cast<size_t>(par)]
                                   [static_cast<size_t>(dy + mt) * wlen + (dx + mt)];
                    } else {
                        cval = g.at(dx, dy) - gtilde_pair(g, t, t, 2 * Jx, 2 * Jy, ix, iy);
                    }
                    acc += cval * sval;
                }
            }
            v[static_cast<size_t>(iy) * nx + ix] += acc;
        }
    }

    // source corrections: all fine targets, odd-coordinate sources whose
    // stencil span reaches the target. The candidate range must cover
    // boundary stencils that extend far inward of their own index.
    const int reach = m + 2 * (plan.order - 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            double acc = 0;
            int jy_lo = std::max(0, iy - reach), jy_hi = std::min(ny - 1, iy + reach);
            int jx_lo = std::max(0, ix - reach), jx_hi = std::min(nx - 1, ix + reach);
            for (int jy = jy_lo; jy <= jy_hi; ++jy) {
                int dy = iy - jy;
                bool oy = (jy % 2) != 0;
                if (outside(iy, jy)) continue;
                for (int jx = jx_lo; jx <= jx_hi; ++jx) {
                    bool oxx = (jx % 2) != 0;
                    if (!oxx && !oy) continue;
                    double sval = s[static_cast<size_t>(jy) * nx + jx];
                    if (sval == 0.0) continue;
                    if (outside(ix, jx)) continue;
                    int par = (oxx ? 1 : 0) | (oy ? 2 : 0);
                    double cval;
                    if (centered(jx) && centered(jy)) {
                        cval = corr[static_cast<size_t>(par)]
                                   [static_cast<size_t>(dy + mt) * wlen + ((ix - jx) + mt)];
                    } else {
                        cval = g.at(ix - jx, dy) - gtilde_pair(g, t, t, ix, iy, jx, jy);
                    }
                    acc += cval * sval;
                }
            }
            v[static_cast<size_t>(iy) * nx + ix] += acc;
        }
    }
    return v;
}

} // namespace mlmi_detail

// Deformation sum via MLMI; agrees with deformation_direct to the plan's
// truncation accuracy.
inline Field mlmi_deformation(const Field& u, const MlmiPlan& plan) {
    if (u.level.nx != plan.grids[0].nx || u.level.ny != plan.grids[0].ny)
        throw std::invalid_argument("mlmi_deformation: field does not match plan");
    Field out(plan.grids[0]);
    out.v = mlmi_detail::mlmi_recurse(plan, 0, u.v);
    return out;
}

} // namespace ehl
