#pragma once

// Uniform vertex-centered grid hierarchy, grid functions, inter-grid
// transfer operators, discretization-error norms and convergence orders.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace ehl {

struct GridLevel {
    int nx = 0, ny = 0;          // point counts per axis, boundary included
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double hx = 0, hy = 0;

    double x(int i) const { return x0 + i * hx; }
    double y(int j) const { return y0 + j * hy; }
    bool interior(int i, int j) const {
        return i > 0 && i < nx - 1 && j > 0 && j < ny - 1;
    }
};

inline GridLevel make_level(double x0, double y0, double x1, double y1, int nx, int ny) {
    if (nx < 3 || ny < 3)
        throw std::invalid_argument("make_level: need at least 3 points per axis");
    if (!(x1 > x0) || !(y1 > y0))
        throw std::invalid_argument("make_level: degenerate bounds");
    GridLevel g;
    g.nx = nx; g.ny = ny;
    g.x0 = x0; g.y0 = y0; g.x1 = x1; g.y1 = y1;
    g.hx = (x1 - x0) / (nx - 1);
    g.hy = (y1 - y0) / (ny - 1);
    return g;
}

// Coarse partner of a level: halves the interval count per axis.
inline GridLevel coarsen(const GridLevel& fine) {
    if ((fine.nx - 1) % 2 != 0 || (fine.ny - 1) % 2 != 0 || fine.nx < 5 || fine.ny < 5)
        throw std::invalid_argument("coarsen: level cannot be coarsened");
    return make_level(fine.x0, fine.y0, fine.x1, fine.y1,
                      (fine.nx - 1) / 2 + 1, (fine.ny - 1) / 2 + 1);
}

inline GridLevel refine(const GridLevel& coarse) {
    return make_level(coarse.x0, coarse.y0, coarse.x1, coarse.y1,
                      2 * (coarse.nx - 1) + 1, 2 * (coarse.ny - 1) + 1);
}

struct GridHierarchy {
    std::vector<GridLevel> levels;   // coarsest first

    const GridLevel& coarsest() const { return levels.front(); }
    const GridLevel& finest() const { return levels.back(); }
    int count() const { return static_cast<int>(levels.size()); }
};

inline GridHierarchy make_hierarchy(double x0, double y0, double x1, double y1,
                                    int coarsest_n, int levels) {
    if (coarsest_n < 3)
        throw std::invalid_argument("make_hierarchy: coarsest_n must be >= 3");
    if (levels < 1)
        throw std::invalid_argument("make_hierarchy: levels must be >= 1");
    GridHierarchy h;
    h.levels.push_back(make_level(x0, y0, x1, y1, coarsest_n, coarsest_n));
    for (int l = 1; l < levels; ++l)
        h.levels.push_back(refine(h.levels.back()));
    return h;
}

// Scalar grid function; row-major, i (x-index) fastest.
struct Field {
    GridLevel level;
    std::vector<double> v;

    Field() = default;
    explicit Field(const GridLevel& g, double init = 0.0)
        : level(g), v(static_cast<size_t>(g.nx) * g.ny, init) {}

    double& operator()(int i, int j) { return v[static_cast<size_t>(j) * level.nx + i]; }
    double operator()(int i, int j) const { return v[static_cast<size_t>(j) * level.nx + i]; }

    int nx() const { return level.nx; }
    int ny() const { return level.ny; }

    double max_abs() const {
        double m = 0;
        for (double a : v) m = std::max(m, std::fabs(a));
        return m;
    }
    double min_value() const {
        double m = v.empty() ? 0.0 : v[0];
        for (double a : v) m = std::min(m, a);
        return m;
    }
};

inline bool same_shape(const Field& a, const Field& b) {
    return a.level.nx == b.level.nx && a.level.ny == b.level.ny;
}

// 9-point full weighting at coincident coarse points; boundary by injection.
inline Field restrict_full_weighting(const Field& fine) {
    GridLevel cg = coarsen(fine.level);
    Field c(cg);
    for (int J = 0; J < cg.ny; ++J) {
        for (int I = 0; I < cg.nx; ++I) {
            int i = 2 * I, j = 2 * J;
            if (I == 0 || I == cg.nx - 1 || J == 0 || J == cg.ny - 1) {
                c(I, J) = fine(i, j);
                continue;
            }
            c(I, J) = 0.25 * fine(i, j)
                    + 0.125 * (fine(i - 1, j) + fine(i + 1, j) + fine(i, j - 1) + fine(i, j + 1))
                    + 0.0625 * (fine(i - 1, j - 1) + fine(i + 1, j - 1)
                                + fine(i - 1, j + 1) + fine(i + 1, j + 1));
        }
    }
    return c;
}

inline Field restrict_injection(const Field& fine) {
    GridLevel cg = coarsen(fine.level);
    Field c(cg);
    for (int J = 0; J < cg.ny; ++J)
        for (int I = 0; I < cg.nx; ++I)
            c(I, J) = fine(2 * I, 2 * J);
    return c;
}

// Bilinear interpolation of a coarse correction. The mask lives on the fine
// grid: entries > 0.5 mark inactive points that receive the correction,
// everything else gets zero.
inline Field prolong_bilinear(const Field& coarse, const Field* mask = nullptr) {
    GridLevel fg = refine(coarse.level);
    if (mask && (mask->level.nx != fg.nx || mask->level.ny != fg.ny))
        throw std::invalid_argument("prolong_bilinear: mask/grid size mismatch");
    Field f(fg);
    for (int j = 0; j < fg.ny; ++j) {
        int J = j / 2;
        bool jodd = (j % 2) != 0;
        for (int i = 0; i < fg.nx; ++i) {
            int I = i / 2;
            bool iodd = (i % 2) != 0;
            double val;
            if (!iodd && !jodd) val = coarse(I, J);
            else if (iodd && !jodd) val = 0.5 * (coarse(I, J) + coarse(I + 1, J));
            else if (!iodd && jodd) val = 0.5 * (coarse(I, J) + coarse(I, J + 1));
            else val = 0.25 * (coarse(I, J) + coarse(I + 1, J)
                               + coarse(I, J + 1) + coarse(I + 1, J + 1));
            if (mask && (*mask)(i, j) <= 0.5) val = 0.0;
            f(i, j) = val;
        }
    }
    return f;
}

struct ErrorNorms {
    double l1 = 0, l2 = 0, linf = 0;
};

// Difference between a converged coarse solution and the injected fine one,
// measured over coarse interior points with the coarse mesh as measure.
inline ErrorNorms error_norms(const Field& coarse_solution, const Field& fine_solution) {
    if (fine_solution.level.nx != 2 * (coarse_solution.level.nx - 1) + 1 ||
        fine_solution.level.ny != 2 * (coarse_solution.level.ny - 1) + 1)
        throw std::invalid_argument("error_norms: fine is not the refined child of coarse");
    const GridLevel& cg = coarse_solution.level;
    double meas = cg.hx * cg.hy;
    ErrorNorms n;
    double s1 = 0, s2 = 0, si = 0;
    for (int J = 1; J < cg.ny - 1; ++J) {
        for (int I = 1; I < cg.nx - 1; ++I) {
            double d = coarse_solution(I, J) - fine_solution(2 * I, 2 * J);
            s1 += std::fabs(d);
            s2 += d * d;
            si = std::max(si, std::fabs(d));
        }
    }
    n.l1 = meas * s1;
    n.l2 = std::sqrt(meas * s2);
    n.linf = si;
    return n;
}

// p = (log e_prev - log e_next) / log 2; NaN when either error is not positive.
inline double convergence_order(double err_prev, double err_next) {
    if (!(err_prev > 0.0) || !(err_next > 0.0))
        return std::nan("");
    return (std::log(err_prev) - std::log(err_next)) / std::log(2.0);
}

} // namespace ehl
