#pragma once

// Linear convection-diffusion calibration problem:
//   (a u)_x - eps * Lap(u) = f   on [-1,1]^2, Dirichlet boundary,
// discretized with the kappa-family upwind-biased scheme and solved by
// line splittings Ls0..Ls3, classical defect correction, and a linear
// correction-scheme multigrid driver. Manufactured solution u = x^4 + y^4.

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehl/banded.hpp"
#include "ehl/grid.hpp"

namespace ehl {

enum class SplittingKind { ls0, ls1, ls2, ls3, defect_correction };

inline SplittingKind parse_splitting(const std::string& s) {
    if (s == "ls0") return SplittingKind::ls0;
    if (s == "ls1") return SplittingKind::ls1;
    if (s == "ls2") return SplittingKind::ls2;
    if (s == "ls3") return SplittingKind::ls3;
    if (s == "defect_correction") return SplittingKind::defect_correction;
    throw std::invalid_argument("parse_splitting: unknown splitting '" + s + "'");
}

// Convective stencil weights of the kappa scheme, to be scaled by a/h:
// offsets (i-2, i-1, i, i+1).
struct KappaConvCoeffs {
    double m2, m1, c0, p1;
};

inline KappaConvCoeffs kappa_conv_coeffs(double kappa, bool first_order = false) {
    if (first_order) return {0.0, -1.0, 1.0, 0.0};
    return {(1.0 - kappa) / 4.0, (3.0 * kappa - 5.0) / 4.0,
            (3.0 - 3.0 * kappa) / 4.0, (1.0 + kappa) / 4.0};
}

// In-line (tridiagonal) part of the splitting operator L0, scaled values.
struct LineCoeffs {
    double sub, diag, super;
};

inline LineCoeffs splitting_line_coeffs(SplittingKind k, double ah, double eh2, double kappa) {
    switch (k) {
        case SplittingKind::ls0: {
            double c = (5.0 - 3.0 * kappa) / 4.0;
            return {-(eh2 + ah * c), ah * c + 4.0 * eh2, -eh2};
        }
        case SplittingKind::ls1: {
            double c = (2.0 - kappa) / 2.0;
            return {-(eh2 + ah * c), ah * c + 4.0 * eh2, -eh2};
        }
        case SplittingKind::ls2:
            return {-(eh2 + ah), ah + 4.0 * eh2, -eh2};
        default:
            throw std::invalid_argument("splitting_line_coeffs: not a tridiagonal splitting");
    }
}

// One level of the discretized problem. Boundary values live in the solution
// field; the ghost column holds the Dirichlet extension at x = x0 - h used by
// the i-2 leg of the upwind stencil next to the inflow boundary.
struct CdLevel {
    GridLevel grid;
    double a = 1.0, eps = 1e-6, kappa = 1.0 / 3.0;
    bool first_order = false;      // low-order operator (defect correction)
    Field f;                       // right-hand side at interior points
    std::vector<double> ghost_w;   // ghost values per row j

    double ah() const { return a / grid.hx; }
    double eh2() const { return eps / (grid.hx * grid.hx); }

    double west2(const Field& u, int i, int j) const {
        return i >= 2 ? u(i - 2, j) : ghost_w[static_cast<size_t>(j)];
    }

    double apply(const Field& u, int i, int j) const {
        KappaConvCoeffs c = kappa_conv_coeffs(kappa, first_order);
        double conv = ah() * (c.m2 * west2(u, i, j) + c.m1 * u(i - 1, j)
                              + c.c0 * u(i, j) + c.p1 * u(i + 1, j));
        double diff = eh2() * (4.0 * u(i, j) - u(i - 1, j) - u(i + 1, j)
                               - u(i, j - 1) - u(i, j + 1));
        return conv + diff;
    }

    Field residual(const Field& u) const {
        Field r(grid, 0.0);
        for (int j = 1; j < grid.ny - 1; ++j)
            for (int i = 1; i < grid.nx - 1; ++i)
                r(i, j) = f(i, j) - apply(u, i, j);
        return r;
    }

    double residual_inf(const Field& u) const {
        double m = 0;
        for (int j = 1; j < grid.ny - 1; ++j)
            for (int i = 1; i < grid.nx - 1; ++i)
                m = std::max(m, std::fabs(f(i, j) - apply(u, i, j)));
        return m;
    }
};

struct CdProblem {
    double a = 1.0;
    double eps = 1e-6;
    double kappa = 1.0 / 3.0;
    GridHierarchy hierarchy;

    static double exact(double x, double y) { return x * x * x * x + y * y * y * y; }
    double forcing(double x, double y) const {
        return a * 4.0 * x * x * x - eps * (12.0 * x * x + 12.0 * y * y);
    }
};

inline CdProblem make_cd_problem(double eps, double kappa, int coarsest_n, int levels,
                                 double a = 1.0) {
    if (!(eps > 0)) throw std::invalid_argument("make_cd_problem: eps must be positive");
    if (a < 0) throw std::invalid_argument("make_cd_problem: a must be >= 0");
    CdProblem p;
    p.a = a;
    p.eps = eps;
    p.kappa = kappa;
    p.hierarchy = make_hierarchy(-1.0, -1.0, 1.0, 1.0, coarsest_n, levels);
    return p;
}

// Discretization level with manufactured forcing and Dirichlet data.
inline CdLevel make_cd_level(const CdProblem& p, const GridLevel& g, bool first_order = false) {
    CdLevel lv;
    lv.grid = g;
    lv.a = p.a;
    lv.eps = p.eps;
    lv.kappa = p.kappa;
    lv.first_order = first_order;
    lv.f = Field(g, 0.0);
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i)
            lv.f(i, j) = p.forcing(g.x(i), g.y(j));
    lv.ghost_w.assign(static_cast<size_t>(g.ny), 0.0);
    for (int j = 0; j < g.ny; ++j)
        lv.ghost_w[static_cast<size_t>(j)] = CdProblem::exact(g.x0 - g.hx, g.y(j));
    return lv;
}

// Homogeneous correction level (zero boundary and ghost) with rhs r.
inline CdLevel make_correction_level(const CdLevel& fine_lv, Field rhs) {
    CdLevel lv;
    lv.grid = rhs.level;
    lv.a = fine_lv.a;
    lv.eps = fine_lv.eps;
    lv.kappa = fine_lv.kappa;
    lv.first_order = fine_lv.first_order;
    lv.f = std::move(rhs);
    lv.ghost_w.assign(static_cast<size_t>(lv.grid.ny), 0.0);
    return lv;
}

inline void set_dirichlet(Field& u, const GridLevel& g) {
    for (int i = 0; i < g.nx; ++i) {
        u(i, 0) = CdProblem::exact(g.x(i), g.y(0));
        u(i, g.ny - 1) = CdProblem::exact(g.x(i), g.y(g.ny - 1));
    }
    for (int j = 0; j < g.ny; ++j) {
        u(0, j) = CdProblem::exact(g.x(0), g.y(j));
        u(g.nx - 1, j) = CdProblem::exact(g.x(g.nx - 1), g.y(j));
    }
}

// One full forward-lexicographic sweep; returns the max change |sigma|.
inline double sweep(const CdLevel& lv, SplittingKind kind, Field& u, double omega = 1.0) {
    const GridLevel& g = lv.grid;
    const int ni = g.nx - 2;   // interior unknowns per line
    double change = 0;

    if (kind == SplittingKind::ls0 || kind == SplittingKind::ls1 || kind == SplittingKind::ls2) {
        LineCoeffs lc = splitting_line_coeffs(kind, lv.ah(), lv.eh2(), lv.kappa);
        LineSystem sys(ni);
        for (int j = 1; j < g.ny - 1; ++j) {
            sys.resize(ni);
            for (int i = 1; i < g.nx - 1; ++i) {
                int row = i - 1;
                if (row > 0) sys.at(row, -1) = lc.sub;
                sys.at(row, 0) = lc.diag;
                if (row < ni - 1) sys.at(row, 1) = lc.super;
                sys.rhs[static_cast<size_t>(row)] = lv.f(i, j) - lv.apply(u, i, j);
            }
            std::vector<double> sigma = solve_banded(sys);
            for (int i = 1; i < g.nx - 1; ++i) {
                double s = omega * sigma[static_cast<size_t>(i - 1)];
                u(i, j) += s;
                change = std::max(change, std::fabs(sigma[static_cast<size_t>(i - 1)]));
            }
        }
        return change;
    }

    if (kind == SplittingKind::ls3) {
        // kappa-distributive line relaxation; all lines use the pre-sweep
        // state, changes applied through the dipole pattern at sweep end.
        double eh2 = lv.eh2();
        double cc = lv.ah() * (2.0 - lv.kappa) / 2.0;
        Field sig(g, 0.0);
        LineSystem sys(ni);
        for (int j = 1; j < g.ny - 1; ++j) {
            sys.resize(ni);
            for (int i = 1; i < g.nx - 1; ++i) {
                int row = i - 1;
                if (row > 1) sys.at(row, -2) = 0.25 * eh2 + 0.25 * cc;
                if (row > 0) sys.at(row, -1) = -2.0 * eh2 - 1.25 * cc;
                sys.at(row, 0) = 5.0 * eh2 + 1.25 * cc;
                if (row < ni - 1) sys.at(row, 1) = -2.0 * eh2 - 0.25 * cc;
                if (row < ni - 2) sys.at(row, 2) = 0.25 * eh2;
                sys.rhs[static_cast<size_t>(row)] = lv.f(i, j) - lv.apply(u, i, j);
            }
            std::vector<double> sigma = solve_banded(sys);
            for (int i = 1; i < g.nx - 1; ++i)
                sig(i, j) = sigma[static_cast<size_t>(i - 1)];
        }
        for (int j = 1; j < g.ny - 1; ++j)
            for (int i = 1; i < g.nx - 1; ++i) {
                double d = sig(i, j) - 0.25 * (sig(i + 1, j) + sig(i - 1, j)
                                               + sig(i, j + 1) + sig(i, j - 1));
                u(i, j) += omega * d;
                change = std::max(change, std::fabs(sig(i, j)));
            }
        return change;
    }

    throw std::invalid_argument("sweep: defect_correction is driven by dc_cycle");
}

struct CycleSpec {
    int nu1 = 2, nu2 = 1;
    char cycle = 'V';        // 'V' or 'W'
    int max_cycles = 30;
    double tol = 1e-11;
    double omega = 1.0;      // for ls3 the driver substitutes its own default
    int coarsest_sweeps = 200;
};

namespace cd_detail {

inline void solve_coarsest(const CdLevel& lv, SplittingKind kind, Field& u,
                           const CycleSpec& spec) {
    for (int s = 0; s < spec.coarsest_sweeps; ++s) {
        double c = sweep(lv, kind, u, spec.omega);
        if (c < 1e-15) break;
    }
}

// Correction-scheme cycle; depth = number of coarsenings still available.
inline void cycle(const CdLevel& lv, int depth, SplittingKind kind, Field& u,
                  const CycleSpec& spec) {
    if (depth == 0) {
        solve_coarsest(lv, kind, u, spec);
        return;
    }
    for (int s = 0; s < spec.nu1; ++s) sweep(lv, kind, u, spec.omega);
    Field r = lv.residual(u);
    Field rc = restrict_full_weighting(r);
    for (int i = 0; i < rc.nx(); ++i) { rc(i, 0) = 0; rc(i, rc.ny() - 1) = 0; }
    for (int j = 0; j < rc.ny(); ++j) { rc(0, j) = 0; rc(rc.nx() - 1, j) = 0; }
    CdLevel clv = make_correction_level(lv, std::move(rc));
    Field e(clv.grid, 0.0);
    int passes = (spec.cycle == 'W' && depth > 1) ? 2 : 1;
    for (int t = 0; t < passes; ++t)
        cycle(clv, depth - 1, kind, e, spec);
    Field corr = prolong_bilinear(e);
    for (int j = 1; j < lv.grid.ny - 1; ++j)
        for (int i = 1; i < lv.grid.nx - 1; ++i)
            u(i, j) += corr(i, j);
    for (int s = 0; s < spec.nu2; ++s) sweep(lv, kind, u, spec.omega);
}

} // namespace cd_detail

// One classical defect-correction outer iteration: solve the first-order
// operator against the high-order defect with a single V-cycle.
inline void defect_correction_cycle(const CdLevel& low, const CdLevel& high, int depth,
                                    Field& u, const CycleSpec& spec) {
    Field rhs(high.grid, 0.0);
    for (int j = 1; j < high.grid.ny - 1; ++j)
        for (int i = 1; i < high.grid.nx - 1; ++i)
            rhs(i, j) = high.f(i, j) - (high.apply(u, i, j) - low.apply(u, i, j));
    CdLevel lv = low;
    lv.f = std::move(rhs);
    cd_detail::cycle(lv, depth, SplittingKind::ls2, u, spec);
}

struct CdReport {
    std::vector<int> level_points;                     // points per axis, per solved level
    std::vector<ErrorNorms> norms;                     // between successive solutions
    std::vector<double> p1, p2, pinf;                  // orders, aligned with norms[1..]
    std::vector<std::vector<double>> residual_history; // per solved level
    std::vector<double> wall_ms;
    bool diverged = false;
    std::string message;

    double final_p2() const { return p2.empty() ? std::nan("") : p2.back(); }
};

// Nested-iteration driver: solve every level of the hierarchy, record
// residual histories, inter-level error norms and observed orders.
inline CdReport mg_solve(const CdProblem& problem, SplittingKind kind, CycleSpec spec) {
    if (kind == SplittingKind::ls3 && spec.omega == 1.0) spec.omega = 0.7;

    CdReport rep;
    std::vector<CdLevel> levels;
    for (const GridLevel& g : problem.hierarchy.levels)
        levels.push_back(make_cd_level(problem, g));
    std::vector<CdLevel> low_levels;
    if (kind == SplittingKind::defect_correction)
        for (const GridLevel& g : problem.hierarchy.levels)
            low_levels.push_back(make_cd_level(problem, g, true));

    std::vector<Field> solutions;
    const int L = problem.hierarchy.count();
    for (int k = 0; k < L; ++k) {
        auto t0 = std::chrono::steady_clock::now();
        const CdLevel& lv = levels[static_cast<size_t>(k)];
        Field u(lv.grid, 0.0);
        set_dirichlet(u, lv.grid);
        if (k > 0) {
            Field up = prolong_bilinear(solutions.back());
            for (int j = 1; j < lv.grid.ny - 1; ++j)
                for (int i = 1; i < lv.grid.nx - 1; ++i)
                    u(i, j) = up(i, j);
        }

        std::vector<double> hist;
        double r0 = lv.residual_inf(u);
        hist.push_back(r0);
        for (int c = 0; c < spec.max_cycles; ++c) {
            if (kind == SplittingKind::defect_correction)
                defect_correction_cycle(low_levels[static_cast<size_t>(k)], lv, k, u, spec);
            else
                cd_detail::cycle(lv, k, kind, u, spec);
            double r = lv.residual_inf(u);
            hist.push_back(r);
            if (r < spec.tol) break;
            if (!(r < 10.0 * std::max(r0, 1e-280)) || !std::isfinite(r)) {
                rep.diverged = true;
                rep.message = "residual grew by 10x on level with " +
                              std::to_string(lv.grid.nx) + " points";
                break;
            }
        }
        auto t1 = std::chrono::steady_clock::now();
        rep.wall_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        rep.residual_history.push_back(std::move(hist));
        rep.level_points.push_back(lv.grid.nx);
        solutions.push_back(std::move(u));
        if (rep.diverged) break;
    }

    for (size_t k = 1; k < solutions.size(); ++k) {
        ErrorNorms n = error_norms(solutions[k - 1], solutions[k]);
        if (!rep.norms.empty()) {
            rep.p1.push_back(convergence_order(rep.norms.back().l1, n.l1));
            rep.p2.push_back(convergence_order(rep.norms.back().l2, n.l2));
            rep.pinf.push_back(convergence_order(rep.norms.back().linf, n.linf));
        }
        rep.norms.push_back(n);
    }
    return rep;
}

} // namespace ehl
