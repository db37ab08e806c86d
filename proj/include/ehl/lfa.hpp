#pragma once

// Local Fourier analysis of the kappa-family line splittings: smoothing
// factors from the relaxation symbol, two-grid spectral radii from the
// 4x4 harmonic block, and an empirical one-sweep contraction probe.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "ehl/cd.hpp"

namespace ehl {

using cplx = std::complex<double>;

struct StencilSymbol {
    std::vector<std::tuple<int, int, double>> entries;   // (dx, dy, coeff)

    void add(int dx, int dy, double c) {
        if (c != 0.0) entries.emplace_back(dx, dy, c);
    }
    cplx eval(double t1, double t2) const {
        cplx s(0, 0);
        for (const auto& [dx, dy, c] : entries)
            s += c * std::exp(cplx(0.0, dx * t1 + dy * t2));
        return s;
    }
};

// L = L0 + L+ + L-: the in-line solve, the already-updated part, and the
// lagged rest. L- is the entrywise remainder of the full kappa operator.
struct SplitStencils {
    StencilSymbol l0, lplus, lminus, lk;
};

inline StencilSymbol kappa_operator_stencil(double ah, double eh2, double kappa,
                                            bool first_order = false) {
    KappaConvCoeffs c = kappa_conv_coeffs(kappa, first_order);
    StencilSymbol s;
    s.add(-2, 0, ah * c.m2);
    s.add(-1, 0, ah * c.m1 - eh2);
    s.add(0, 0, ah * c.c0 + 4.0 * eh2);
    s.add(1, 0, ah * c.p1 - eh2);
    s.add(0, -1, -eh2);
    s.add(0, 1, -eh2);
    return s;
}

inline SplitStencils splitting_stencils(SplittingKind kind, double ah, double eh2,
                                        double kappa) {
    SplitStencils st;
    st.lk = kappa_operator_stencil(ah, eh2, kappa);
    LineCoeffs lc = splitting_line_coeffs(kind, ah, eh2, kappa);
    st.l0.add(-1, 0, lc.sub);
    st.l0.add(0, 0, lc.diag);
    st.l0.add(1, 0, lc.super);
    st.lplus.add(0, -1, -eh2);
    // remainder by offset bookkeeping
    auto coeff_of = [](const StencilSymbol& s, int dx, int dy) {
        double v = 0;
        for (const auto& [ex, ey, c] : s.entries)
            if (ex == dx && ey == dy) v += c;
        return v;
    };
    for (int dx = -2; dx <= 2; ++dx)
        for (int dy = -2; dy <= 2; ++dy) {
            double rem = coeff_of(st.lk, dx, dy) - coeff_of(st.l0, dx, dy)
                         - coeff_of(st.lplus, dx, dy);
            st.lminus.add(dx, dy, rem);
        }
    return st;
}

// Amplification symbol of the under-relaxed line sweep:
//   S = ((1-w) L0 - w L-) / (L0 + w L+).
inline cplx smoother_symbol(const SplitStencils& st, double omega, double t1, double t2) {
    cplx l0 = st.l0.eval(t1, t2);
    cplx lp = st.lplus.eval(t1, t2);
    cplx lm = st.lminus.eval(t1, t2);
    return ((1.0 - omega) * l0 - omega * lm) / (l0 + omega * lp);
}

// Closed-form kappa-splitting symbol with alpha1 = eps/h^2 and beta = a/h,
// derived from the Ls0 error equation (updated terms left, lagged right).
inline cplx kappa_symbol_closed(double alpha1, double beta, double kappa,
                                double t1, double t2) {
    const cplx I(0, 1);
    double c = (5.0 - 3.0 * kappa) / 4.0;
    cplx num = alpha1 * std::exp(I * t2)
             - 0.25 * beta * (1.0 + kappa) * (std::exp(I * t1) - 1.0)
             + 0.25 * beta * (1.0 - kappa) * (1.0 - std::exp(-2.0 * I * t1));
    cplx den = -(alpha1 + beta * c) * std::exp(-I * t1)
             + 4.0 * alpha1 + beta * c
             - alpha1 * (std::exp(I * t1) + std::exp(-I * t2));
    return num / den;
}

// The symbol with the convective numerator signs exactly as printed in the
// paper; reported alongside the stencil-consistent form.
inline cplx kappa_symbol_printed(double alpha1, double beta, double kappa,
                                 double t1, double t2) {
    const cplx I(0, 1);
    double c = (5.0 - 3.0 * kappa) / 4.0;
    cplx num = alpha1 * std::exp(I * t2)
             + 0.25 * beta * (1.0 + kappa) * (std::exp(I * t1) - 1.0)
             - 0.25 * beta * (1.0 - kappa) * (1.0 - std::exp(-2.0 * I * t1));
    cplx den = -(alpha1 + beta * c) * std::exp(-I * t1)
             + 4.0 * alpha1 + beta * c
             - alpha1 * (std::exp(I * t1) + std::exp(-I * t2));
    return num / den;
}

struct SymbolReport {
    double mu = 0;
    double rho_2g = 0;
    double argmax_t1 = 0, argmax_t2 = 0;
    int skipped = 0;
    std::vector<std::array<double, 3>> surface;   // (theta1, theta2, value)
};

// Smoothing factor: max |S| over the high-frequency set
// (-pi,pi]^2 \ (-pi/2,pi/2]^2, sampled with n per half-axis including the
// boundary rays theta = pi.
inline SymbolReport smoothing_factor_kappa(double alpha1, double beta, double kappa,
                                           int n_samples = 64, bool keep_surface = false) {
    if (!(alpha1 > 0) && !(beta > 0))
        throw std::invalid_argument("smoothing_factor_kappa: need alpha1 > 0 or beta > 0");
    const double pi = std::numbers::pi;
    SymbolReport rep;
    int n2 = 2 * n_samples;
    for (int a = 1; a <= n2; ++a) {
        double t1 = -pi + a * pi / n_samples;
        for (int b = 1; b <= n2; ++b) {
            double t2 = -pi + b * pi / n_samples;
            // low set is (-pi/2, pi/2]^2: open at -pi/2, closed at +pi/2
            bool low = (t1 > -pi / 2 + 1e-12 && t1 <= pi / 2 + 1e-12)
                    && (t2 > -pi / 2 + 1e-12 && t2 <= pi / 2 + 1e-12);
            if (low) continue;
            double c = (5.0 - 3.0 * kappa) / 4.0;
            cplx den = -(alpha1 + beta * c) * std::exp(cplx(0, -t1))
                     + 4.0 * alpha1 + beta * c
                     - alpha1 * (std::exp(cplx(0, t1)) + std::exp(cplx(0, -t2)));
            if (std::abs(den) < 1e-14 * (alpha1 + beta)) {
                ++rep.skipped;
                continue;
            }
            double v = std::abs(kappa_symbol_closed(alpha1, beta, kappa, t1, t2));
            if (keep_surface) rep.surface.push_back({t1, t2, v});
            if (v > rep.mu) {
                rep.mu = v;
                rep.argmax_t1 = t1;
                rep.argmax_t2 = t2;
            }
        }
    }
    return rep;
}

namespace lfa_detail {

// roots of a degree-4 complex polynomial sum_k c[k] z^k by Durand-Kerner
inline std::array<cplx, 4> quartic_roots(const std::array<cplx, 5>& c) {
    std::array<cplx, 4> r;
    cplx lead = c[4];
    std::array<cplx, 5> p = c;
    if (std::abs(lead) < 1e-300) lead = 1e-300;
    for (auto& v : p) v /= lead;
    r[0] = cplx(0.4, 0.9);
    for (int k = 1; k < 4; ++k) r[static_cast<size_t>(k)] = r[static_cast<size_t>(k - 1)] * cplx(0.4, 0.9);
    auto eval = [&](cplx z) {
        cplx s = p[4];
        for (int k = 3; k >= 0; --k) s = s * z + p[static_cast<size_t>(k)];
        return s;
    };
    for (int it = 0; it < 200; ++it) {
        double move = 0;
        for (int k = 0; k < 4; ++k) {
            cplx denom(1, 0);
            for (int m = 0; m < 4; ++m)
                if (m != k) denom *= (r[static_cast<size_t>(k)] - r[static_cast<size_t>(m)]);
            cplx d = eval(r[static_cast<size_t>(k)]) / denom;
            r[static_cast<size_t>(k)] -= d;
            move = std::max(move, std::abs(d));
        }
        if (move < 1e-14) break;
    }
    return r;
}

// spectral radius of D - a b^T (diagonal minus rank one), exact via the
// characteristic polynomial
inline double rho_diag_minus_rank1(const std::array<cplx, 4>& d,
                                   const std::array<cplx, 4>& a,
                                   const std::array<cplx, 4>& b) {
    // det(D - a b^T - z I) = prod(d_k - z) - sum_k a_k b_k prod_{m != k}(d_m - z)
    auto mul = [](std::array<cplx, 5> poly, cplx root) {
        // multiply polynomial by (root - z)
        std::array<cplx, 5> out{};
        for (int k = 0; k < 4; ++k) out[static_cast<size_t>(k + 1)] -= poly[static_cast<size_t>(k)];
        for (int k = 0; k < 5; ++k) out[static_cast<size_t>(k)] += root * poly[static_cast<size_t>(k)];
        return out;
    };
    std::array<cplx, 5> full{};
    full[0] = 1.0;
    for (int k = 0; k < 4; ++k) full = mul(full, d[static_cast<size_t>(k)]);
    for (int k = 0; k < 4; ++k) {
        std::array<cplx, 5> part{};
        part[0] = 1.0;
        for (int m = 0; m < 4; ++m)
            if (m != k) part = mul(part, d[static_cast<size_t>(m)]);
        cplx w = a[static_cast<size_t>(k)] * b[static_cast<size_t>(k)];
        for (int t = 0; t < 5; ++t) full[static_cast<size_t>(t)] -= w * part[static_cast<size_t>(t)];
    }
    auto roots = quartic_roots(full);
    double rho = 0;
    for (const cplx& z : roots) rho = std::max(rho, std::abs(z));
    return rho;
}

// power iteration on an explicit 4x4; returns -1 when it fails to settle
inline double rho_power_iteration(const std::array<std::array<cplx, 4>, 4>& M) {
    std::array<cplx, 4> x{cplx(1, 0.3), cplx(-0.7, 0.2), cplx(0.4, -0.9), cplx(0.1, 1.0)};
    double prev = -1;
    for (int it = 0; it < 300; ++it) {
        std::array<cplx, 4> y{};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                y[static_cast<size_t>(r)] += M[static_cast<size_t>(r)][static_cast<size_t>(c)] * x[static_cast<size_t>(c)];
        double norm = 0;
        for (const cplx& v : y) norm = std::max(norm, std::abs(v));
        if (norm == 0.0) return 0.0;
        for (cplx& v : y) v /= norm;
        x = y;
        if (it > 20 && std::fabs(norm - prev) < 1e-10 * std::max(1.0, norm))
            return norm;
        prev = norm;
    }
    return -1.0;
}

} // namespace lfa_detail

// Two-grid spectral radius over the 4x4 harmonic blocks with full-weighting
// restriction and bilinear prolongation; L2h is the re-discretized coarse
// operator (evaluated at 2 theta).
inline SymbolReport two_grid_radius(const StencilSymbol& lh, const StencilSymbol& l2h,
                                    const SplitStencils& split, double omega,
                                    int nu1, int nu2, int n_samples = 32) {
    const double pi = std::numbers::pi;
    SymbolReport rep;
    for (int a = 1; a <= n_samples; ++a) {
        double t1 = -pi / 2 + a * pi / n_samples;
        for (int b = 1; b <= n_samples; ++b) {
            double t2 = -pi / 2 + b * pi / n_samples;
            // four harmonics of (t1, t2)
            auto shift = [pi](double t) { return t - (t >= 0 ? pi : -pi); };
            std::array<std::array<double, 2>, 4> th{{{t1, t2},
                                                     {shift(t1), t2},
                                                     {t1, shift(t2)},
                                                     {shift(t1), shift(t2)}}};
            cplx l2 = l2h.eval(2.0 * t1, 2.0 * t2);
            double scale = 0;
            for (const auto& [dx, dy, c] : l2h.entries) scale += std::fabs(c);
            if (std::abs(l2) < 1e-12 * scale) {
                ++rep.skipped;
                continue;
            }
            std::array<cplx, 4> S{}, L{}, R{}, P{};
            bool bad = false;
            for (int k = 0; k < 4; ++k) {
                double u1 = th[static_cast<size_t>(k)][0], u2 = th[static_cast<size_t>(k)][1];
                cplx l0 = split.l0.eval(u1, u2);
                cplx lp = split.lplus.eval(u1, u2);
                if (std::abs(l0 + omega * lp) < 1e-13 * scale) { bad = true; break; }
                S[static_cast<size_t>(k)] = smoother_symbol(split, omega, u1, u2);
                L[static_cast<size_t>(k)] = lh.eval(u1, u2);
                double rr = 0.25 * (1.0 + std::cos(u1)) * (1.0 + std::cos(u2));
                R[static_cast<size_t>(k)] = rr;
                P[static_cast<size_t>(k)] = rr;
            }
            if (bad) {
                ++rep.skipped;
                continue;
            }
            // M = S^{nu2} (I - P L2h^{-1} R L) S^{nu1} = D - a b^T with
            // D = S^{nu1+nu2}, a_k = S_k^{nu2} P_k / L2h, b_k = S_k^{nu1} R_k L_k
            std::array<cplx, 4> D{}, av{}, bv{};
            for (int k = 0; k < 4; ++k) {
                cplx s1 = std::pow(S[static_cast<size_t>(k)], nu1);
                cplx s2 = std::pow(S[static_cast<size_t>(k)], nu2);
                D[static_cast<size_t>(k)] = s1 * s2;
                av[static_cast<size_t>(k)] = s2 * P[static_cast<size_t>(k)] / l2;
                bv[static_cast<size_t>(k)] = s1 * R[static_cast<size_t>(k)] * L[static_cast<size_t>(k)];
            }
            std::array<std::array<cplx, 4>, 4> M{};
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c)
                    M[static_cast<size_t>(r)][static_cast<size_t>(c)] =
                        (r == c ? D[static_cast<size_t>(r)] : cplx(0, 0))
                        - av[static_cast<size_t>(r)] * bv[static_cast<size_t>(c)];
            double rho = lfa_detail::rho_power_iteration(M);
            if (rho < 0)
                rho = lfa_detail::rho_diag_minus_rank1(D, av, bv);
            if (rho > rep.rho_2g) {
                rep.rho_2g = rho;
                rep.argmax_t1 = t1;
                rep.argmax_t2 = t2;
            }
        }
    }
    return rep;
}

// Least-squares amplitude of the (t1, t2) cosine/sine pair over a centered
// interior window.
inline double mode_amplitude(const Field& e, double t1, double t2, int margin) {
    double pc = 0, ps = 0, cc = 0, ss = 0, cs = 0;
    const GridLevel& g = e.level;
    for (int j = margin; j < g.ny - margin; ++j)
        for (int i = margin; i < g.nx - margin; ++i) {
            double ph = t1 * i + t2 * j;
            double c = std::cos(ph), s = std::sin(ph);
            pc += e(i, j) * c;
            ps += e(i, j) * s;
            cc += c * c;
            ss += s * s;
            cs += c * s;
        }
    double det = cc * ss - cs * cs;
    if (std::fabs(det) < 1e-9 * std::max(1.0, cc * ss)) {
        double A = cc > 0 ? pc / cc : 0.0;
        double B = ss > 0 ? ps / ss : 0.0;
        return std::sqrt(A * A + B * B);
    }
    double A = (pc * ss - ps * cs) / det;
    double B = (ps * cc - pc * cs) / det;
    return std::sqrt(A * A + B * B);
}

// Seed a high-frequency error mode on a homogeneous problem, run one sweep,
// and return the measured amplitude contraction.
inline double measured_smoothing(const CdLevel& lv, SplittingKind kind,
                                 double t1, double t2, double omega = 1.0) {
    const GridLevel& g = lv.grid;
    Field u(g, 0.0);
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i)
            u(i, j) = std::cos(t1 * i + t2 * j);
    int margin = std::max(4, g.nx / 4);
    double before = mode_amplitude(u, t1, t2, margin);
    Field usw = u;
    sweep(lv, kind, usw, omega);
    double after = mode_amplitude(usw, t1, t2, margin);
    return before > 0 ? after / before : 0.0;
}

} // namespace ehl
