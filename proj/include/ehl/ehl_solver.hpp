#pragma once

// EHL circular point-contact solve: the Reynolds LCP with limiter-based
// hybrid line relaxation (Gauss-Seidel lines where diffusion dominates,
// distributed Jacobi lines in the contact zone), projected FAS multigrid
// over the hierarchy, MLMI-backed film thickness, and force-balance closure
// through the central offset H00.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehl/banded.hpp"
#include "ehl/grid.hpp"
#include "ehl/kernel.hpp"
#include "ehl/limiter.hpp"
#include "ehl/mlmi.hpp"
#include "ehl/physics.hpp"

namespace ehl {

enum class HybridKind { hs1, hs2 };
enum class LineMode { gauss_seidel, jacobi_distributed };
enum class LineStat { minimum, mean };

inline HybridKind parse_hybrid(const std::string& s) {
    if (s == "hs1") return HybridKind::hs1;
    if (s == "hs2") return HybridKind::hs2;
    throw std::invalid_argument("parse_hybrid: unknown hybrid kind '" + s + "'");
}

struct EhlConfig {
    PhysicsParams physics;
    GridHierarchy hierarchy;
    LimiterSpec limiter =LimiterSpec{LimiterKind::kappa_fixed, 0.0};
    HybridKind hybrid = HybridKind::hs1;
    double switch_threshold = 0.6;
    double omega_gs = 0.6;
    double omega_jac = 0.3;
    double c_h00 = 0.05;
    int nu1 = 2, nu2 = 2;
    char cycle = 'V';
    int max_stage_cycles = 40;      // projected FAS cycles per stage
    int max_stage_sweeps = 4000;    // relaxation budget that finishes a stage
    int window_radius = 1;
    int mlmi_order = 6;
    int mlmi_m = 4;
    bool use_direct_film = false;       // verification mode, small grids only
    LineStat line_stat = LineStat::minimum;
    double tol_pde = 1e-6;              // finest-stage LCP residual stop
    double tol_pde_mid = 1e-4;          // tolerance for intermediate stages
    double tol_force = 1e-4;            // relative force-balance stop
    int coarse_stage_sweeps = 1200;     // relaxation budget on the first stage
    int coarsest_sweeps = 30;           // inner sweeps at the cycle's bottom
    double h00_init = -0.5;
    double sigma_cap = 0.1;             // trust region on per-sweep changes
    double h00_step_cap = 0.02;         // trust region on the H00 update
    double phi_relax = 0.25;            // limiter-field under-relaxation

    void validate() const {
        if (!(switch_threshold > 0))
            throw std::invalid_argument("EhlConfig: switch_threshold must be > 0");
        if (c_h00 < 0.005 || c_h00 > 0.2)
            throw std::invalid_argument("EhlConfig: c_h00 outside [0.005, 0.2]");
        if (window_radius < 1)
            throw std::invalid_argument("EhlConfig: window_radius must be >= 1");
        if (hierarchy.count() < 1)
            throw std::invalid_argument("EhlConfig: empty hierarchy");
    }
};

struct LcpLevelState {
    GridLevel grid;
    KernelTable table;
    MlmiPlan plan;
    Field u;            // pressure iterate, kept >= 0 by projection
    Field H;            // film thickness
    Field rho, eta, eps;
    Field phi_x;        // limiter value at face (i -> i+1, j), stored at i;
                        // under-relaxed across sweeps to damp limiter cycles
    bool phi_ready = false;
    bool phi_frozen = false;   // correction levels keep the restriction-time
                               // limiter so the FAS right side stays consistent
    Field f1;           // FAS right side of the Reynolds LCP (0 on finest)
    Field film_fas;     // FAS right side of the film equation (0 on finest)
    Field u_injected;   // injected fine solution, for the coarse correction
};

struct EhlState {
    Field u;
    Field H;
    double h00 = 0;
    GridLevel level;
};

// The rho*H product limited face flux uses old-iterate (frozen) values; the
// ratio at the inflow-adjacent face falls back to first order.
inline double face_phi(const LimiterSpec& spec, const std::vector<double>& q, int f) {
    // face between f and f+1 along x; the ratio needs q_{f-1}
    if (f < 1) return 0.0;
    double r = regularized_ratio(q[static_cast<size_t>(f + 1)] - q[static_cast<size_t>(f)],
                                 q[static_cast<size_t>(f)] - q[static_cast<size_t>(f - 1)]);
    return limiter_phi(spec, r);
}

namespace ehl_detail {

// general small-bandwidth banded system (row-major bands, offset range +-bw)
struct BandMatrix {
    int n = 0, bw = 2;
    std::vector<double> a;      // (2bw+1) * n
    std::vector<double> rhs;

    BandMatrix(int n_, int bw_) : n(n_), bw(bw_) {
        a.assign(static_cast<size_t>(2 * bw + 1) * n, 0.0);
        rhs.assign(static_cast<size_t>(n), 0.0);
    }
    double& at(int row, int off) { return a[static_cast<size_t>(row) * (2 * bw + 1) + off + bw]; }
    double at(int row, int off) const { return a[static_cast<size_t>(row) * (2 * bw + 1) + off + bw]; }

    std::vector<double> solve() {
        for (int i = 0; i < n; ++i) {
            double piv = at(i, 0);
            if (std::fabs(piv) < 1e-300)
                throw singular_line_error("ehl line solve: zero pivot");
            for (int r = 1; r <= bw && i + r < n; ++r) {
                double m = at(i + r, -r) / piv;
                if (m == 0.0) continue;
                at(i + r, -r) = 0.0;
                for (int c = 1; c <= bw; ++c) {
                    if (i + c >= n) break;
                    at(i + r, c - r) -= m * at(i, c);
                }
                rhs[static_cast<size_t>(i + r)] -= m * rhs[static_cast<size_t>(i)];
            }
        }
        std::vector<double> x(static_cast<size_t>(n));
        for (int i = n - 1; i >= 0; --i) {
            double s = rhs[static_cast<size_t>(i)];
            for (int c = 1; c <= bw && i + c < n; ++c)
                s -= at(i, c) * x[static_cast<size_t>(i + c)];
            x[static_cast<size_t>(i)] = s / at(i, 0);
        }
        return x;
    }
};

// distributed kernel coefficient consistent with the quarter-weight dipole
// update: sigmaG(d) = g(d,0) - (g(|d-1|,0) + g(d+1,0) + 2 g(d,1))/4
inline double sigma_g(const KernelTable& t, int d) {
    d = std::abs(d);
    return t.at(d, 0) - 0.25 * (t.at(std::abs(d - 1), 0) + t.at(d + 1, 0) + 2.0 * t.at(d, 1));
}

} // namespace ehl_detail

inline LineMode select_splitting(double eps_point, double hx, double hy, double threshold) {
    double s = std::min(eps_point / hx, eps_point / hy);
    return s > threshold ? LineMode::gauss_seidel : LineMode::jacobi_distributed;
}

inline LineMode line_mode(const LcpLevelState& st, const EhlConfig& cfg, int j) {
    const GridLevel& g = st.grid;
    double stat;
    if (cfg.line_stat == LineStat::minimum) {
        stat = std::numeric_limits<double>::max();
        for (int i = 1; i < g.nx - 1; ++i) stat = std::min(stat, st.eps(i, j));
    } else {
        stat = 0;
        for (int i = 1; i < g.nx - 1; ++i) stat += st.eps(i, j);
        stat /= (g.nx - 2);
    }
    return select_splitting(stat, g.hx, g.hy, cfg.switch_threshold);
}

// Film thickness refresh: H = H00 + parabolic gap + deformation + FAS shift.
inline void refresh_film(LcpLevelState& st, const EhlConfig& cfg, double h00) {
    Field def = cfg.use_direct_film ? deformation_direct(st.u, st.table)
                                    : mlmi_deformation(st.u, st.plan);
    const GridLevel& g = st.grid;
    for (int j = 0; j < g.ny; ++j) {
        double yy = g.y(j);
        for (int i = 0; i < g.nx; ++i) {
            double xx = g.x(i);
            st.H(i, j) = h00 + 0.5 * xx * xx + 0.5 * yy * yy + def(i, j) + st.film_fas(i, j);
        }
    }
}

inline void refresh_coeffs(LcpLevelState& st, const EhlConfig& cfg) {
    const GridLevel& g = st.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double uu = st.u(i, j);
            st.rho(i, j) = density(uu, cfg.physics);
            st.eta(i, j) = viscosity(uu, cfg.physics);
            double Hij = st.H(i, j);
            if (!(Hij > 0.0))
                throw invalid_state_error(
                    "refresh_coeffs: non-positive film at (" + std::to_string(i) + "," +
                    std::to_string(j) + ") on " + std::to_string(g.nx) + "-grid");
            st.eps(i, j) = st.rho(i, j) * Hij * Hij * Hij / (st.eta(i, j) * cfg.physics.lambda);
        }
    // limiter face field: under-relaxed toward the value the current state
    // implies; the fixed point carries the exact limited flux
    if (st.phi_frozen && st.phi_ready) return;
    double beta = st.phi_ready ? cfg.phi_relax : 1.0;
    std::vector<double> q(static_cast<size_t>(g.nx));
    for (int j = 1; j < g.ny - 1; ++j) {
        for (int i = 0; i < g.nx; ++i) q[static_cast<size_t>(i)] = st.rho(i, j) * st.H(i, j);
        for (int f = 0; f < g.nx - 1; ++f) {
            double pn = face_phi(cfg.limiter, q, f);
            st.phi_x(f, j) = (1.0 - beta) * st.phi_x(f, j) + beta * pn;
        }
    }
    st.phi_ready = true;
}

// Eq.-62-form line equation value for a given in-line change vector sigma
// (frozen coefficients, live u). sigma has nx entries, zero at the ends.
// The per-point modes select the change pattern each unknown represents: a
// plain pressure change (Gauss-Seidel) or a dipole-distributed ghost change
// that also spreads to the y-neighbors and couples the film through the
// distributed kernel.
inline std::vector<double> ehl_line_equation(const LcpLevelState& st, const EhlConfig& cfg,
                                             int j, const std::vector<double>& sigma,
                                             const std::vector<LineMode>& modes) {
    const GridLevel& g = st.grid;
    const int nx = g.nx;
    const double hx = g.hx, hy = g.hy;
    const int rad = cfg.window_radius;

    auto sig = [&](int i) { return (i >= 1 && i <= nx - 2) ? sigma[static_cast<size_t>(i)] : 0.0; };
    auto is_dipole = [&](int i) {
        return i >= 1 && i <= nx - 2 && modes[static_cast<size_t>(i)] == LineMode::jacobi_distributed;
    };
    // pressure change at (q, j) induced by the line unknowns: each unknown
    // contributes its own value; dipole neighbors spill -1/4 of theirs
    auto du_line = [&](int q) {
        double v = sig(q);
        if (is_dipole(q - 1)) v -= 0.25 * sig(q - 1);
        if (is_dipole(q + 1)) v -= 0.25 * sig(q + 1);
        return v;
    };
    // pressure change at (q, j +- 1) induced by the line unknowns
    auto du_off = [&](int q) { return is_dipole(q) ? -0.25 * sig(q) : 0.0; };

    // H-bar along the line under the change pattern
    std::vector<double> hbar(static_cast<size_t>(nx));
    for (int i = 0; i < nx; ++i) {
        double s = 0;
        for (int k = i - rad; k <= i + rad; ++k) {
            if (k < 1 || k > nx - 2) continue;
            double gk = is_dipole(k) ? ehl_detail::sigma_g(st.table, i - k)
                                     : st.table.at(i - k, 0);
            s += gk * sig(k);
        }
        hbar[static_cast<size_t>(i)] = st.H(i, j) + s;
    }
    std::vector<double> q(static_cast<size_t>(nx));
    for (int i = 0; i < nx; ++i) q[static_cast<size_t>(i)] = st.rho(i, j) * hbar[static_cast<size_t>(i)];

    // frozen (under-relaxed) limiter values from the state
    std::vector<double> out(static_cast<size_t>(nx), 0.0);
    std::vector<double> phi_face(static_cast<size_t>(nx), 0.0);
    for (int f = 0; f < nx - 1; ++f)
        phi_face[static_cast<size_t>(f)] = st.phi_x(f, j);

    // limited upwind face flux: F_{f+1/2} = q_f + phi/2 (q_f - q_{f-1}),
    // with the ratio of downwind to upwind jump frozen in phi_x. The
    // upwind-jump increment vanishes continuously at extrema, which keeps
    // the steady iteration free of flux jumps at the pressure spike.
    auto face_flux = [&](int f) {
        double base = q[static_cast<size_t>(f)];
        if (f < 1) return base;
        return base + 0.5 * phi_face[static_cast<size_t>(f)]
                          * (q[static_cast<size_t>(f)] - q[static_cast<size_t>(f - 1)]);
    };

    for (int i = 1; i < nx - 1; ++i) {
        double epsE = face_epsilon(st.eps(i, j), st.eps(i + 1, j));
        double epsW = face_epsilon(st.eps(i - 1, j), st.eps(i, j));
        double epsN = face_epsilon(st.eps(i, j), st.eps(i, j + 1));
        double epsS = face_epsilon(st.eps(i, j), st.eps(i, j - 1));

        double diff = (hy / hx) * (epsE * (st.u(i + 1, j) + du_line(i + 1) - st.u(i, j) - du_line(i))
                                   + epsW * (st.u(i - 1, j) + du_line(i - 1) - st.u(i, j) - du_line(i)))
                    + (hx / hy) * (epsN * (st.u(i, j + 1) + du_off(i) - st.u(i, j) - du_line(i))
                                   + epsS * (st.u(i, j - 1) + du_off(i) - st.u(i, j) - du_line(i)));

        out[static_cast<size_t>(i)] = diff - hy * (face_flux(i) - face_flux(i - 1)) - st.f1(i, j);
    }
    return out;
}

inline std::vector<double> ehl_line_equation(const LcpLevelState& st, const EhlConfig& cfg,
                                             int j, const std::vector<double>& sigma,
                                             LineMode mode) {
    std::vector<LineMode> modes(static_cast<size_t>(st.grid.nx), mode);
    return ehl_line_equation(st, cfg, j, sigma, modes);
}

// The LCP residual with the active-set sign convention: r = L(u) - f1, so a
// converged state has r = 0 where u > 0 and r <= 0 where u = 0.
inline Field ehl_residual(const LcpLevelState& st, const EhlConfig& cfg) {
    const GridLevel& g = st.grid;
    Field r(g, 0.0);
    std::vector<double> zero(static_cast<size_t>(g.nx), 0.0);
    for (int j = 1; j < g.ny - 1; ++j) {
        std::vector<double> row = ehl_line_equation(st, cfg, j, zero, LineMode::gauss_seidel);
        for (int i = 1; i < g.nx - 1; ++i) r(i, j) = row[static_cast<size_t>(i)];
    }
    return r;
}

struct LcpErr {
    double lcp = 0;        // max(|r| on u>0, max(r,0) on u=0), PDE scale
    double rmax = 0;       // plain |r|_inf, PDE scale
    double comp = 0;       // |u r|_inf, PDE scale
};

inline LcpErr lcp_error(const LcpLevelState& st, const Field& r) {
    const GridLevel& g = st.grid;
    double meas = g.hx * g.hy;
    LcpErr e;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            double rp = r(i, j) / meas;
            e.rmax = std::max(e.rmax, std::fabs(rp));
            e.comp = std::max(e.comp, std::fabs(st.u(i, j) * rp));
            if (st.u(i, j) > 0.0)
                e.lcp = std::max(e.lcp, std::fabs(rp));
            else
                e.lcp = std::max(e.lcp, std::max(rp, 0.0));
        }
    return e;
}

namespace ehl_detail {

// Analytic line matrix (Jacobian of ehl_line_equation in sigma) with
// per-point change modes. hs2 carries the limiter factors into the film
// couplings, hs1 keeps the first-order couplings only; the right side is
// the shared full residual, so both share the fixed point.
inline BandMatrix assemble_line(const LcpLevelState& st, const EhlConfig& cfg, int j,
                                const std::vector<LineMode>& modes) {
    const GridLevel& g = st.grid;
    const int nx = g.nx;
    const int ni = nx - 2;
    const double hx = g.hx, hy = g.hy;
    const int rad = cfg.window_radius;
    const bool full_phi = (cfg.hybrid == HybridKind::hs2);
    const int bw = 2 + rad;

    BandMatrix A(ni, bw);

    std::vector<double> phi_face(static_cast<size_t>(nx), 0.0);
    for (int f = 0; f < nx - 1; ++f)
        phi_face[static_cast<size_t>(f)] = st.phi_x(f, j);

    auto dip = [&](int k) {
        return modes[static_cast<size_t>(k)] == LineMode::jacobi_distributed;
    };
    // film response at target (t, j) per unit change of unknown k
    auto kernel = [&](int t, int k) -> double {
        if (std::abs(t - k) > rad || k < 1 || k > nx - 2) return 0.0;
        return dip(k) ? sigma_g(st.table, t - k) : st.table.at(t - k, 0);
    };

    for (int i = 1; i < nx - 1; ++i) {
        int row = i - 1;
        double epsE = face_epsilon(st.eps(i, j), st.eps(i + 1, j));
        double epsW = face_epsilon(st.eps(i - 1, j), st.eps(i, j));
        double epsN = face_epsilon(st.eps(i, j), st.eps(i, j + 1));
        double epsS = face_epsilon(st.eps(i, j), st.eps(i, j - 1));
        double dxe = hy / hx * epsE, dxw = hy / hx * epsW;
        double dyn = hx / hy * epsN, dys = hx / hy * epsS;
        double dsum = dxe + dxw + dyn + dys;

        auto add = [&](int k, double v) {
            if (k < 1 || k > nx - 2) return;
            int off = k - i;
            if (off < -bw || off > bw) return;
            A.at(row, off) += v;
        };

        // diffusion: d(eq_i)/du at (i,j), (i+-1,j), (i,j+-1) composed with
        // each unknown's change pattern
        for (int k = i - 2; k <= i + 2; ++k) {
            if (k < 1 || k > nx - 2) continue;
            double v = 0;
            auto p_line = [&](int q) {   // du(q, j)/d sigma_k
                double w = (q == k) ? 1.0 : 0.0;
                if (dip(k) && std::abs(q - k) == 1) w -= 0.25;
                return w;
            };
            v += dxe * p_line(i + 1);
            v += dxw * p_line(i - 1);
            v -= dsum * p_line(i);
            if (dip(k) && k == i) v += (dyn + dys) * (-0.25);   // du(i, j+-1)
            add(k, v);
        }

        // convection: -hy d[F_E - F_W]/d sigma_k for the upwind-increment
        // limited flux F_{f+1/2} = q_f + phi/2 (q_f - q_{f-1}); the hs2
        // variant carries the (1 + phi/2) factors, hs1 keeps first order
        double phiE = phi_face[static_cast<size_t>(i)];
        double phiW = phi_face[static_cast<size_t>(i - 1)];
        double wE_i = full_phi ? (1.0 + 0.5 * phiE) : 1.0;
        double wE_im = full_phi ? -0.5 * phiE : 0.0;
        double wW_im = full_phi ? (1.0 + 0.5 * phiW) : 1.0;
        double wW_im2 = full_phi ? -0.5 * phiW : 0.0;
        for (int k = i - 2 - rad; k <= i + 1 + rad; ++k) {
            if (k < 1 || k > nx - 2) continue;
            double dE = wE_i * st.rho(i, j) * kernel(i, k)
                      + wE_im * st.rho(i - 1, j) * kernel(i - 1, k);
            double dW = wW_im * st.rho(i - 1, j) * kernel(i - 1, k)
                      + ((i >= 2) ? wW_im2 * st.rho(i - 2, j) * kernel(i - 2, k) : 0.0);
            add(k, -hy * (dE - dW));
        }
    }

    std::vector<double> zero(static_cast<size_t>(nx), 0.0);
    std::vector<double> r0 = ehl_line_equation(st, cfg, j, zero, modes);
    for (int i = 1; i < nx - 1; ++i)
        A.rhs[static_cast<size_t>(i - 1)] = -r0[static_cast<size_t>(i)];

    // projected (active-set) line solve: cavitated points whose constraint
    // is satisfied (u = 0, residual <= 0) leave the system, so they cannot
    // drag their pressurized neighbors; points demanding lift-off stay in.
    for (int i = 1; i < nx - 1; ++i) {
        if (st.u(i, j) == 0.0 && r0[static_cast<size_t>(i)] <= 0.0) {
            int row = i - 1;
            for (int off = -bw; off <= bw; ++off) A.at(row, off) = 0.0;
            A.at(row, 0) = 1.0;
            A.rhs[static_cast<size_t>(row)] = 0.0;
        }
    }
    return A;
}

inline BandMatrix assemble_line(const LcpLevelState& st, const EhlConfig& cfg, int j,
                                LineMode mode) {
    std::vector<LineMode> modes(static_cast<size_t>(st.grid.nx), mode);
    return assemble_line(st, cfg, j, modes);
}

} // namespace ehl_detail

// Solve the Gauss-Seidel limited line system for line j; returns sigma
// (nx entries, zero at the ends). The caller applies the projected update.
inline std::vector<double> line_gs_limited(const LcpLevelState& st, const EhlConfig& cfg, int j) {
    ehl_detail::BandMatrix A = ehl_detail::assemble_line(st, cfg, j, LineMode::gauss_seidel);
    std::vector<double> s = A.solve();
    std::vector<double> sigma(static_cast<size_t>(st.grid.nx), 0.0);
    for (int i = 1; i < st.grid.nx - 1; ++i) sigma[static_cast<size_t>(i)] = s[static_cast<size_t>(i - 1)];
    return sigma;
}

inline std::vector<double> line_jacobi_distributed_line(const LcpLevelState& st,
                                                        const EhlConfig& cfg, int j) {
    ehl_detail::BandMatrix A = ehl_detail::assemble_line(st, cfg, j, LineMode::jacobi_distributed);
    std::vector<double> s = A.solve();
    std::vector<double> sigma(static_cast<size_t>(st.grid.nx), 0.0);
    for (int i = 1; i < st.grid.nx - 1; ++i) sigma[static_cast<size_t>(i)] = s[static_cast<size_t>(i - 1)];
    return sigma;
}

// Per-point change modes along a line, from the switching predicate on the
// frozen diffusivity. The statistic is the stiffest face value around the
// point: at the contact rim the diffusivity jumps by orders of magnitude
// within one cell, and a point coupled to a stiff face needs the direct
// row even when its own eps is tiny.
inline std::vector<LineMode> line_modes(const LcpLevelState& st, const EhlConfig& cfg, int j) {
    const GridLevel& g = st.grid;
    std::vector<LineMode> modes(static_cast<size_t>(g.nx), LineMode::gauss_seidel);
    for (int i = 1; i < g.nx - 1; ++i) {
        double f = std::max(std::max(face_epsilon(st.eps(i, j), st.eps(i + 1, j)),
                                     face_epsilon(st.eps(i - 1, j), st.eps(i, j))),
                            std::max(face_epsilon(st.eps(i, j), st.eps(i, j + 1)),
                                     face_epsilon(st.eps(i, j), st.eps(i, j - 1))));
        modes[static_cast<size_t>(i)] = select_splitting(f, g.hx, g.hy, cfg.switch_threshold);
    }
    return modes;
}

// One hybrid relaxation sweep over x-lines in forward lexicographic order.
// Direct (Gauss-Seidel) unknowns update immediately with projection;
// dipole-distributed ghost changes are collected and spread after the pass,
// as the distributive scheme requires. Ends with a film and coefficient
// refresh.
inline double hybrid_sweep(LcpLevelState& st, const EhlConfig& cfg, double h00) {
    const GridLevel& g = st.grid;
    double change = 0;
    Field ghost(g, 0.0);
    bool any_ghost = false;

    auto clamp = [&](double s) {
        return std::max(-cfg.sigma_cap, std::min(cfg.sigma_cap, s));
    };
    for (int j = 1; j < g.ny - 1; ++j) {
        std::vector<LineMode> modes = line_modes(st, cfg, j);
        ehl_detail::BandMatrix A = ehl_detail::assemble_line(st, cfg, j, modes);
        std::vector<double> sigma = A.solve();
        for (int i = 1; i < g.nx - 1; ++i) {
            double s = sigma[static_cast<size_t>(i - 1)];
            change = std::max(change, std::fabs(s));
            if (modes[static_cast<size_t>(i)] == LineMode::gauss_seidel) {
                st.u(i, j) = std::max(0.0, st.u(i, j) + cfg.omega_gs * clamp(s));
            } else {
                ghost(i, j) = clamp(s);
                any_ghost = true;
            }
        }
    }

    if (any_ghost) {
        for (int j = 1; j < g.ny - 1; ++j)
            for (int i = 1; i < g.nx - 1; ++i) {
                double d = ghost(i, j) - 0.25 * (ghost(i + 1, j) + ghost(i - 1, j)
                                                 + ghost(i, j + 1) + ghost(i, j - 1));
                if (d != 0.0)
                    st.u(i, j) = std::max(0.0, st.u(i, j) + cfg.omega_jac * d);
            }
    }

    refresh_film(st, cfg, h00);
    refresh_coeffs(st, cfg);
    return change;
}

// H00 <- H00 - c (2 pi / 3 - hx hy sum u), step-limited
inline double update_h00(const LcpLevelState& st, const EhlConfig& cfg, double h00) {
    double s = 0;
    for (double v : st.u.v) s += v;
    s *= st.grid.hx * st.grid.hy;
    double step = cfg.c_h00 * (2.0 * std::numbers::pi / 3.0 - s);
    step = std::max(-cfg.h00_step_cap, std::min(cfg.h00_step_cap, step));
    return h00 - step;
}

inline double force_balance_error(const LcpLevelState& st) {
    double s = 0;
    for (double v : st.u.v) s += v;
    s *= st.grid.hx * st.grid.hy;
    double target = 2.0 * std::numbers::pi / 3.0;
    return std::fabs(target - s) / target;
}

// Shift H00 by delta without re-evaluating the deformation.
inline void shift_h00(LcpLevelState& st, const EhlConfig& cfg, double delta) {
    for (double& v : st.H.v) v += delta;
    refresh_coeffs(st, cfg);
}

// Projected FAS cycle over levels[0..l]; levels[l] is the current finest.
inline void pfas_cycle(std::vector<LcpLevelState>& levels, const EhlConfig& cfg,
                       int l, double h00) {
    LcpLevelState& st = levels[static_cast<size_t>(l)];
    if (l == 0) {
        for (int s = 0; s < cfg.coarsest_sweeps; ++s) {
            double c = hybrid_sweep(st, cfg, h00);
            if (c < 1e-12) break;
        }
        return;
    }
    for (int s = 0; s < cfg.nu1; ++s) hybrid_sweep(st, cfg, h00);

    LcpLevelState& cs = levels[static_cast<size_t>(l) - 1];
    const GridLevel& cg = cs.grid;

    // FAS restriction: residual by full weighting, solution by injection.
    // r = L(u) - f1, so the transferred defect f1 - L(u) is -r. Residuals at
    // active (cavitated) points are truncated: they express the satisfied
    // inequality, not an error the coarse grid should chase.
    Field resid = ehl_residual(st, cfg);
    for (int j = 1; j < st.grid.ny - 1; ++j)
        for (int i = 1; i < st.grid.nx - 1; ++i)
            resid(i, j) = (st.u(i, j) == 0.0) ? 0.0 : -resid(i, j);
    Field rc = restrict_full_weighting(resid);
    Field uin = restrict_injection(st.u);
    for (double& v : uin.v) v = std::max(0.0, v);

    cs.u = uin;
    cs.u_injected = uin;

    // film FAS shift: coarse film of the injected solution must reproduce
    // the injected fine film
    Field hfine_inj = restrict_injection(st.H);
    cs.film_fas = Field(cg, 0.0);
    refresh_film(cs, cfg, h00);   // raw coarse film of injected u
    for (size_t k = 0; k < cs.film_fas.v.size(); ++k)
        cs.film_fas.v[k] = hfine_inj.v[k] - cs.H.v[k];
    refresh_film(cs, cfg, h00);
    // the coarse limiter is pinned at its restriction-time value so the FAS
    // right side and the coarse operator share one fixed point
    cs.phi_frozen = false;
    cs.phi_ready = false;
    refresh_coeffs(cs, cfg);
    cs.phi_frozen = true;

    // Reynolds FAS right side: f1_c = L_c(injected u) + restricted residual
    Field rcoarse = ehl_residual(cs, cfg);   // = L_c(uin) - f1_old
    for (int j = 1; j < cg.ny - 1; ++j)
        for (int i = 1; i < cg.nx - 1; ++i)
            cs.f1(i, j) = (rcoarse(i, j) + cs.f1(i, j)) + rc(i, j);

    int passes = (cfg.cycle == 'W' && l > 1) ? 2 : 1;
    for (int t = 0; t < passes; ++t)
        pfas_cycle(levels, cfg, l - 1, h00);

    // coarse correction, interpolated only onto inactive fine points; the
    // inactive set is eroded so the coarse grid never pushes the cells that
    // pin the free boundary
    Field e(cg, 0.0);
    for (size_t k = 0; k < e.v.size(); ++k) e.v[k] = cs.u.v[k] - cs.u_injected.v[k];
    Field mask(st.grid, 0.0);
    for (int j = 1; j < st.grid.ny - 1; ++j)
        for (int i = 1; i < st.grid.nx - 1; ++i)
            mask(i, j) = st.u(i, j) > 0.0 ? 1.0 : 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        Field m2 = mask;
        for (int j = 1; j < st.grid.ny - 1; ++j)
            for (int i = 1; i < st.grid.nx - 1; ++i)
                m2(i, j) = (mask(i, j) > 0.5 && mask(i - 1, j) > 0.5 && mask(i + 1, j) > 0.5
                            && mask(i, j - 1) > 0.5 && mask(i, j + 1) > 0.5) ? 1.0 : 0.0;
        mask = m2;
    }
    Field corr = prolong_bilinear(e, &mask);
    for (int j = 1; j < st.grid.ny - 1; ++j)
        for (int i = 1; i < st.grid.nx - 1; ++i)
            st.u(i, j) = std::max(0.0, st.u(i, j) + corr(i, j));

    refresh_film(st, cfg, h00);
    refresh_coeffs(st, cfg);
    for (int s = 0; s < cfg.nu2; ++s) hybrid_sweep(st, cfg, h00);
}

struct EhlLevelRow {
    int points = 0;
    double h_min = 0, h_center = 0;
    double force_err = 0;
    double lcp_err = 0;
    int cycles = 0;
};

struct EhlReport {
    std::vector<EhlLevelRow> levels;
    std::vector<ErrorNorms> norms;
    std::vector<double> p1, p2, pinf;
    std::vector<std::vector<double>> residual_history;
    std::vector<double> h00_trace;
    std::vector<double> wall_ms;
    bool diverged = false;
    std::string message;
};

inline LcpLevelState make_level_state(const GridLevel& g, const EhlConfig& cfg) {
    LcpLevelState st;
    st.grid = g;
    st.table = build_kernel_table(g);
    st.plan = make_mlmi_plan(g, st.table, cfg.mlmi_order, cfg.mlmi_m);
    st.u = Field(g, 0.0);
    st.H = Field(g, 1.0);
    st.rho = Field(g, 1.0);
    st.eta = Field(g, 1.0);
    st.eps = Field(g, 0.0);
    st.phi_x = Field(g, 0.0);
    st.f1 = Field(g, 0.0);
    st.film_fas = Field(g, 0.0);
    st.u_injected = Field(g, 0.0);
    return st;
}

inline void hertz_initial_guess(LcpLevelState& st) {
    const GridLevel& g = st.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double rr = g.x(i) * g.x(i) + g.y(j) * g.y(j);
            st.u(i, j) = rr < 1.0 ? std::sqrt(1.0 - rr) : 0.0;
        }
}

// Full nested-iteration solve over the hierarchy.
inline std::pair<EhlState, EhlReport> solve_ehl(const EhlConfig& cfg) {
    cfg.validate();
    EhlReport rep;
    std::vector<LcpLevelState> levels;
    for (const GridLevel& g : cfg.hierarchy.levels)
        levels.push_back(make_level_state(g, cfg));

    double h00 = cfg.h00_init;
    std::vector<Field> stage_solutions;

    try {
        for (int s = 0; s < cfg.hierarchy.count(); ++s) {
            auto t0 = std::chrono::steady_clock::now();
            LcpLevelState& st = levels[static_cast<size_t>(s)];
            st.f1 = Field(st.grid, 0.0);
            st.film_fas = Field(st.grid, 0.0);
            if (s == 0) {
                hertz_initial_guess(st);
            } else {
                Field up = prolong_bilinear(levels[static_cast<size_t>(s) - 1].u);
                for (int j = 1; j < st.grid.ny - 1; ++j)
                    for (int i = 1; i < st.grid.nx - 1; ++i)
                        st.u(i, j) = std::max(0.0, up(i, j));
            }
            refresh_film(st, cfg, h00);
            refresh_coeffs(st, cfg);

            // phase A: projected FAS cycles while they keep paying off;
            // phase B: hybrid relaxation sweeps drive the free boundary and
            // the force balance to tolerance
            std::vector<double> hist;
            double err0 = 0;
            int cycles_done = 0;
            bool done = false;
            auto measure = [&](double& lcp, double& ferr) {
                Field r = ehl_residual(st, cfg);
                LcpErr e = lcp_error(st, r);
                lcp = e.lcp;
                ferr = force_balance_error(st);
            };
            const double tol = (s == cfg.hierarchy.count() - 1) ? cfg.tol_pde : cfg.tol_pde_mid;
            double best = std::numeric_limits<double>::max();
            int stale = 0;
            for (int c = 0; s > 0 && c < cfg.max_stage_cycles; ++c) {
                pfas_cycle(levels, cfg, s, h00);
                double h00_next = update_h00(st, cfg, h00);
                shift_h00(st, cfg, h00_next - h00);
                h00 = h00_next;
                rep.h00_trace.push_back(h00);
                double lcp, ferr;
                measure(lcp, ferr);
                hist.push_back(lcp);
                ++cycles_done;
                if (c == 0) err0 = std::max(lcp, 1e-30);
                if (lcp > 1e4 * err0 || !std::isfinite(lcp)) {
                    rep.diverged = true;
                    rep.message = "residual grew on stage " + std::to_string(s + 1);
                    break;
                }
                if (lcp <= tol && ferr <= cfg.tol_force) { done = true; break; }
                if (lcp > 0.8 * best) {
                    if (++stale >= 3) break;   // cycles stopped paying
                } else {
                    stale = 0;
                }
                best = std::min(best, lcp);
            }
            int budget = (s == 0) ? cfg.coarse_stage_sweeps : cfg.max_stage_sweeps;
            for (int b = 0; !done && !rep.diverged && b < budget; b += 5) {
                for (int q = 0; q < 5; ++q) {
                    hybrid_sweep(st, cfg, h00);
                    double h00_next = update_h00(st, cfg, h00);
                    shift_h00(st, cfg, h00_next - h00);
                    h00 = h00_next;
                }
                rep.h00_trace.push_back(h00);
                double lcp, ferr;
                measure(lcp, ferr);
                hist.push_back(lcp);
                if (err0 == 0) err0 = std::max(lcp, 1e-30);
                if (lcp > 1e4 * std::max(err0, 1e-30) || !std::isfinite(lcp)) {
                    rep.diverged = true;
                    rep.message = "residual grew on stage " + std::to_string(s + 1);
                    break;
                }
                if (lcp <= tol && ferr <= cfg.tol_force) { done = true; break; }
            }

            Field r = ehl_residual(st, cfg);
            LcpErr e = lcp_error(st, r);
            EhlLevelRow row;
            row.points = st.grid.nx;
            row.h_min = *std::min_element(st.H.v.begin(), st.H.v.end());
            row.h_center = st.H((st.grid.nx - 1) / 2, (st.grid.ny - 1) / 2);
            row.force_err = force_balance_error(st);
            row.lcp_err = e.lcp;
            row.cycles = cycles_done;
            rep.levels.push_back(row);
            rep.residual_history.push_back(std::move(hist));
            auto t1 = std::chrono::steady_clock::now();
            rep.wall_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
            stage_solutions.push_back(st.u);
            if (rep.diverged) break;
        }
    } catch (const invalid_state_error& ex) {
        rep.diverged = true;
        rep.message = ex.what();
    } catch (const singular_line_error& ex) {
        rep.diverged = true;
        rep.message = ex.what();
    }

    for (size_t k = 1; k < stage_solutions.size(); ++k) {
        ErrorNorms n = error_norms(stage_solutions[k - 1], stage_solutions[k]);
        if (!rep.norms.empty()) {
            rep.p1.push_back(convergence_order(rep.norms.back().l1, n.l1));
            rep.p2.push_back(convergence_order(rep.norms.back().l2, n.l2));
            rep.pinf.push_back(convergence_order(rep.norms.back().linf, n.linf));
        }
        rep.norms.push_back(n);
    }

    EhlState out;
    if (!levels.empty()) {
        const LcpLevelState& fin = levels[stage_solutions.empty() ? 0 : stage_solutions.size() - 1];
        out.u = fin.u;
        out.H = fin.H;
        out.h00 = h00;
        out.level = fin.grid;
    }
    return {out, rep};
}

} // namespace ehl
