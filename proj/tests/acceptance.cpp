// Acceptance suite: one pass/fail line per criterion. Set EHL_LONG_TESTS=1
// to include the 1025^2 film-thickness reproduction.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ehl/cd.hpp"
#include "ehl/ehl_solver.hpp"
#include "ehl/kernel.hpp"
#include "ehl/lfa.hpp"
#include "ehl/limiter.hpp"
#include "ehl/mlmi.hpp"

using namespace ehl;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", num,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch()).count();
}

// ---------------------------------------------------------------- linear CD

void criterion_1() {
    double t0 = now_s();
    CdProblem p = make_cd_problem(1e-6, 1.0 / 3.0, 9, 6);   // 9^2 .. 257^2
    CycleSpec spec;
    CdReport rep = mg_solve(p, SplittingKind::ls0, spec);
    double dt = now_s() - t0;

    bool pass = !rep.diverged && rep.p2.size() >= 2;
    double p2 = pass ? rep.p2.back() : 0.0;
    pass = pass && p2 >= 2.75 && p2 <= 3.15 && dt < 60.0;

    // absolute L2 errors within x3 of the published rows (a == 1 assumption)
    const double table5_l2[] = {2.72048e-03, 3.43166e-04, 4.37263e-05, 5.51381e-06};
    // rows for N = 32, 64, 128, 256 <-> norms[1..4]
    std::string detail = "p2 = " + std::to_string(p2) + ", " + std::to_string(dt) + " s";
    if (pass) {
        for (int k = 0; k < 4; ++k) {
            double ours = rep.norms[static_cast<size_t>(k) + 1].l2;
            double ratio = ours / table5_l2[k];
            if (ratio < 1.0 / 3.0 || ratio > 3.0) {
                pass = false;
                detail += ", L2 row N=" + std::to_string(32 << k) + " off by x" +
                          std::to_string(ratio);
            }
        }
    }
    report(1, "linear CD order, Ls0 kappa=1/3 (Table 5)", pass, detail);
}

void criterion_2() {
    struct Case { SplittingKind kind; double kappa; const char* name; };
    const Case cases[] = {{SplittingKind::ls1, 0.0, "Ls1 k=0"},
                          {SplittingKind::ls1, -1.0, "Ls1 k=-1"},
                          {SplittingKind::ls0, 0.0, "Ls0 k=0"},
                          {SplittingKind::ls0, -1.0, "Ls0 k=-1"}};
    bool pass = true;
    std::string detail;
    for (const Case& c : cases) {
        CdProblem p = make_cd_problem(1e-6, c.kappa, 9, 6);
        CdReport rep = mg_solve(p, c.kind, CycleSpec{});
        double p2 = rep.p2.empty() ? 0.0 : rep.p2.back();
        bool ok = !rep.diverged && p2 >= 1.7 && p2 <= 2.1;
        pass = pass && ok;
        detail += std::string(c.name) + ": p2=" + std::to_string(p2) + (ok ? " " : "(!) ");
    }
    report(2, "linear CD order, kappa = 0 and -1 (Tables 2,3,4,6)", pass, detail);
}

// monotone residual decay over 10 V(2,1) cycles with >= 10x total reduction
bool converges_monotone(SplittingKind kind, double kappa, std::string& info) {
    CdProblem p = make_cd_problem(1e-6, kappa, 9, 5);   // to 129^2
    CycleSpec spec;
    spec.max_cycles = 10;
    spec.tol = 0.0;
    CdReport rep = mg_solve(p, kind, spec);
    if (rep.diverged) {
        info = "diverged";
        return false;
    }
    const std::vector<double>& h = rep.residual_history.back();
    bool monotone = true;
    for (size_t c = 1; c < h.size(); ++c)
        if (!(h[c] < h[c - 1] * 1.001)) monotone = false;
    bool reduced = h.back() < 0.1 * h.front();
    info = "reduction x" + std::to_string(h.front() / std::max(h.back(), 1e-300));
    return monotone && reduced;
}

void criterion_3() {
    std::string i1, i2, i3, i4;
    bool ls0_ok = converges_monotone(SplittingKind::ls0, 0.9, i1);
    bool ls0_bad = !converges_monotone(SplittingKind::ls0, 0.95, i2);
    bool ls1_ok = converges_monotone(SplittingKind::ls1, 0.8, i3);
    bool ls1_bad = !converges_monotone(SplittingKind::ls1, 0.85, i4);
    bool pass = ls0_ok && ls0_bad && ls1_ok && ls1_bad;
    report(3, "robustness windows: Ls0 to 0.9, Ls1 to 0.8", pass,
           "Ls0@0.9 " + std::string(ls0_ok ? "conv" : "FAIL") +
           ", Ls0@0.95 " + std::string(ls0_bad ? "not-conv" : "FAIL(converged)") +
           ", Ls1@0.8 " + std::string(ls1_ok ? "conv" : "FAIL") +
           ", Ls1@0.85 " + std::string(ls1_bad ? "not-conv" : "FAIL(converged)"));
}

int cycles_to_tol(SplittingKind kind, double tol) {
    CdProblem p = make_cd_problem(1e-6, 0.0, 9, 5);   // 129^2 finest
    CycleSpec spec;
    spec.max_cycles = 80;
    spec.tol = tol;
    CdReport rep = mg_solve(p, kind, spec);
    const std::vector<double>& h = rep.residual_history.back();
    for (size_t c = 0; c < h.size(); ++c)
        if (h[c] < tol) return static_cast<int>(c);
    return 10000;
}

void criterion_4() {
    int c_ls1 = cycles_to_tol(SplittingKind::ls1, 1e-8);
    int c_ls0 = cycles_to_tol(SplittingKind::ls0, 1e-8);
    int c_dc = cycles_to_tol(SplittingKind::defect_correction, 1e-8);
    bool pass = c_ls1 <= c_ls0 && c_ls0 <= c_dc && c_dc < 10000;
    report(4, "residual-decay ranking Ls1 <= Ls0 <= defect correction",
           pass, "cycles to 1e-8: Ls1=" + std::to_string(c_ls1) + " Ls0=" +
           std::to_string(c_ls0) + " DC=" + std::to_string(c_dc));
}

// ----------------------------------------------------------------- EHL runs

EhlConfig ehl_case(double m, double l, int coarsest, int levels) {
    EhlConfig cfg;
    cfg.physics = resolve_moes(m, l, 1.7e-8);
    cfg.hierarchy = make_hierarchy(-2.5, -2.5, 2.5, 2.5, coarsest, levels);
    return cfg;
}

void criterion_5() {
    double t0 = now_s();
    EhlConfig cfg = ehl_case(20, 10, 33, 4);   // 33^2 .. 257^2
    auto [state, rep] = solve_ehl(cfg);
    double dt = now_s() - t0;
    bool pass = !rep.diverged && rep.levels.size() == 4;
    double hc = pass ? rep.levels.back().h_center : 0.0;
    double hm = pass ? rep.levels.back().h_min : 0.0;
    pass = pass && std::fabs(hc - 3.95428e-01) <= 0.02 * 3.95428e-01
                && std::fabs(hm - 2.75320e-01) <= 0.02 * 2.75320e-01
                && dt < 600.0;
    report(5, "EHL M=20 L=10 film thickness at 257^2 (Table 7)", pass,
           "H_c = " + std::to_string(hc) + " (ref 0.395428), H_m = " + std::to_string(hm) +
           " (ref 0.275320), " + std::to_string(dt) + " s" +
           (rep.diverged ? ", diverged: " + rep.message : ""));

    if (std::getenv("EHL_LONG_TESTS")) {
        EhlConfig lcfg = ehl_case(20, 10, 33, 6);   // to 1025^2
        auto [ls, lrep] = solve_ehl(lcfg);
        bool lpass = !lrep.diverged
                  && std::fabs(lrep.levels.back().h_center - 3.95962e-01) <= 0.02 * 3.95962e-01
                  && std::fabs(lrep.levels.back().h_min - 2.75586e-01) <= 0.02 * 2.75586e-01;
        report(5, "EHL M=20 L=10 film thickness at 1025^2 (long)", lpass,
               "H_c = " + std::to_string(lrep.levels.back().h_center) +
               ", H_m = " + std::to_string(lrep.levels.back().h_min));
    }
}

void criterion_6() {
    EhlConfig cfg = ehl_case(20, 10, 33, 4);
    cfg.hybrid = HybridKind::hs1;
    cfg.limiter = make_limiter(LimiterKind::kappa_fixed, 1.0 / 3.0);
    auto [state, rep] = solve_ehl(cfg);
    bool pass = !rep.diverged && !rep.p2.empty();
    std::string detail = "p2:";
    if (pass) {
        for (double v : rep.p2) detail += " " + std::to_string(v);
        pass = rep.p2.back() >= 1.4 && rep.p2.back() >= rep.p2.front() - 0.1;
    } else {
        detail = rep.message;
    }
    report(6, "EHL order trend, L_hs1 kappa=1/3 (Tables 11-13)", pass, detail);
}

void criterion_7() {
    bool pass = true;
    std::string detail;
    for (double m : {20.0, 50.0, 100.0}) {
        EhlConfig cfg = ehl_case(m, 10, 33, 3);   // to 129^2
        auto [state, rep] = solve_ehl(cfg);
        bool ok = !rep.diverged;
        double comp_rel = 1.0, force = 1.0;
        bool nonneg = false;
        if (ok) {
            LcpLevelState st = make_level_state(cfg.hierarchy.finest(), cfg);
            st.u = state.u;
            refresh_film(st, cfg, state.h00);
            refresh_coeffs(st, cfg);
            Field r = ehl_residual(st, cfg);
            LcpErr e = lcp_error(st, r);
            comp_rel = e.comp / std::max(e.rmax, 1e-300);
            force = force_balance_error(st);
            nonneg = state.u.min_value() == 0.0;
            ok = nonneg && comp_rel <= 1e-6 && force <= 1e-3;
        }
        pass = pass && ok;
        detail += "M=" + std::to_string(static_cast<int>(m)) +
                  (ok ? " ok " : " FAIL ");
        if (!ok && !rep.diverged)
            detail += "(comp=" + std::to_string(comp_rel) + ", force=" +
                      std::to_string(force) + ", min0=" + std::to_string(nonneg) + ") ";
        if (rep.diverged) detail += "(diverged: " + rep.message + ") ";
    }
    {
        EhlConfig cfg = ehl_case(1000, 10, 65, 3);   // high load, to 257^2
        auto [state, rep] = solve_ehl(cfg);
        bool ok = !rep.diverged && rep.levels.size() == 3;
        pass = pass && ok;
        detail += "M=1000 " + std::string(ok ? "completed" : ("FAIL: " + rep.message));
    }
    report(7, "LCP invariant suite M in {20,50,100} + M=1000 robustness", pass, detail);
}

void criterion_8() {
    // accuracy at 65^2
    GridLevel g = make_level(-2.5, -2.5, 2.5, 2.5, 65, 65);
    KernelTable t = build_kernel_table(g);
    MlmiPlan plan = make_mlmi_plan(g, t, 6, 4);
    Field u(g);
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (double& v : u.v) v = dist(rng);
    Field fast = mlmi_deformation(u, plan);
    Field ref = deformation_direct(u, t);
    double scale = 0, dev = 0;
    for (size_t k = 0; k < ref.v.size(); ++k) scale = std::max(scale, std::fabs(ref.v[k]));
    for (size_t k = 0; k < ref.v.size(); ++k)
        dev = std::max(dev, std::fabs(fast.v[k] - ref.v[k]));
    double rel = dev / scale;
    bool acc_ok = rel <= 1e-5;

    // timing exponents over 33^2 .. 257^2
    std::vector<double> npts, t_fast, t_dir;
    for (int n : {33, 65, 129, 257}) {
        GridLevel gl = make_level(-2.5, -2.5, 2.5, 2.5, n, n);
        KernelTable tt = build_kernel_table(gl);
        MlmiPlan pl = make_mlmi_plan(gl, tt, 6, 4);
        Field uu(gl);
        for (double& v : uu.v) v = dist(rng);
        double best_f = 1e300, best_d = 1e300;
        int reps = n <= 65 ? 3 : 1;
        for (int rrep = 0; rrep < reps; ++rrep) {
            double a = now_s();
            Field w1 = mlmi_deformation(uu, pl);
            double b = now_s();
            best_f = std::min(best_f, b - a);
        }
        for (int rrep = 0; rrep < (n <= 65 ? 2 : 1); ++rrep) {
            double a = now_s();
            Field w2 = deformation_direct(uu, tt);
            double b = now_s();
            best_d = std::min(best_d, b - a);
        }
        npts.push_back(std::log(static_cast<double>(n) * n));
        t_fast.push_back(std::log(std::max(best_f, 1e-7)));
        t_dir.push_back(std::log(std::max(best_d, 1e-7)));
    }
    auto slope = [&](const std::vector<double>& y) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = static_cast<int>(npts.size());
        for (int k = 0; k < n; ++k) {
            sx += npts[static_cast<size_t>(k)];
            sy += y[static_cast<size_t>(k)];
            sxx += npts[static_cast<size_t>(k)] * npts[static_cast<size_t>(k)];
            sxy += npts[static_cast<size_t>(k)] * y[static_cast<size_t>(k)];
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    double beta_fast = slope(t_fast), beta_dir = slope(t_dir);
    bool pass = acc_ok && beta_fast <= 1.35 && beta_dir >= 1.8;
    report(8, "MLMI oracle equivalence and complexity", pass,
           "max rel dev = " + std::to_string(rel) + ", beta_mlmi = " +
           std::to_string(beta_fast) + ", beta_direct = " + std::to_string(beta_dir));
}

void criterion_9() {
    const LimiterKind kinds[] = {LimiterKind::kappa_fixed, LimiterKind::minmod,
                                 LimiterKind::vanleer, LimiterKind::vanalbada,
                                 LimiterKind::superbee, LimiterKind::koren};
    bool pass = true;
    std::string detail;
    for (LimiterKind k : kinds) {
        LimiterSpec s = make_limiter(k, 1.0 / 3.0);
        std::vector<double> u(256, 0.0);   // wide domain: profile never wraps
        for (int i = 32; i < 64; ++i) u[static_cast<size_t>(i)] = 1.0;
        double tv = total_variation(u);
        bool ok = true;
        for (int n = 0; n < 100; ++n) {
            u = advect_step_periodic(u, 0.5, s);
            double tvn = total_variation(u);
            if (tvn > tv + 1e-12) ok = false;
            tv = tvn;
        }
        pass = pass && ok;
        detail += std::string(limiter_name(k)) + (ok ? " ok " : " FAIL ");
    }
    // negative control: raw kappa = 1/3 produces wiggles
    {
        LimiterSpec s = make_limiter(LimiterKind::kappa_fixed, 1.0 / 3.0);
        std::vector<double> u(256, 0.0);
        for (int i = 32; i < 64; ++i) u[static_cast<size_t>(i)] = 1.0;
        double tv0 = total_variation(u);
        bool grew = false;
        for (int n = 0; n < 100; ++n) {
            u = advect_step_periodic(u, 0.5, s, /*clipped=*/false);
            if (total_variation(u) > tv0 + 1e-9) { grew = true; break; }
        }
        pass = pass && grew;
        detail += grew ? "negative-control ok" : "negative-control FAIL";
    }
    report(9, "TVD property suite, six limiter kinds + negative control", pass, detail);
}

void criterion_10() {
    // symbol vs stencil at 1000 random theta
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> par(0.01, 30.0);
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
        double alpha1 = par(rng), beta = par(rng), kappa = -1.0 + 2.0 * (k % 9) / 8.0;
        SplitStencils st = splitting_stencils(SplittingKind::ls0, beta, alpha1, kappa);
        double t1 = ang(rng), t2 = ang(rng);
        cplx closed = kappa_symbol_closed(alpha1, beta, kappa, t1, t2);
        cplx sten = smoother_symbol(st, 1.0, t1, t2);
        worst = std::max(worst, std::abs(closed - sten) / std::max(1.0, std::abs(closed)));
    }
    bool sym_ok = worst <= 1e-12;

    // measured one-sweep contraction for Ls2 within 25% of mu
    CdProblem p = make_cd_problem(1.0 / 64.0, 0.0, 129, 1);
    CdLevel lv = make_cd_level(p, p.hierarchy.finest());
    lv.f = Field(lv.grid, 0.0);
    lv.ghost_w.assign(static_cast<size_t>(lv.grid.ny), 0.0);
    SplitStencils split = splitting_stencils(SplittingKind::ls2, lv.ah(), lv.eh2(), 0.0);
    // mu for this splitting over the sampled high set
    double mu = 0;
    double arg1 = 0, arg2 = 0;
    const double pi = std::numbers::pi;
    for (int a = 1; a <= 128; ++a)
        for (int b = 1; b <= 128; ++b) {
            double t1 = -pi + a * pi / 64, t2 = -pi + b * pi / 64;
            bool low = (t1 > -pi / 2 - 1e-12 && t1 <= pi / 2 + 1e-12)
                    && (t2 > -pi / 2 - 1e-12 && t2 <= pi / 2 + 1e-12);
            if (low) continue;
            double v = std::abs(smoother_symbol(split, 1.0, t1, t2));
            if (v > mu) { mu = v; arg1 = t1; arg2 = t2; }
        }
    double measured = measured_smoothing(lv, SplittingKind::ls2, arg1, arg2);
    bool meas_ok = std::fabs(measured - mu) <= 0.25 * mu;

    // figure-4 surface: max on the boundary of the high-frequency set
    double h = 1.0 / 64.0;
    SymbolReport fig = smoothing_factor_kappa(1e-6 / (h * h), 1.0 / h, 1.0 / 3.0, 64);
    double step = pi / 64;
    double a1 = std::fabs(fig.argmax_t1), a2 = std::fabs(fig.argmax_t2);
    bool on_outer = std::fabs(a1 - pi) <= step + 1e-12 || std::fabs(a2 - pi) <= step + 1e-12;
    bool on_inner = std::max(a1, a2) <= pi / 2 + step + 1e-12;
    bool shape_ok = (on_outer || on_inner) && fig.mu < 1.0;

    report(10, "LFA consistency: symbol vs stencil, measured mu, surface shape",
           sym_ok && meas_ok && shape_ok,
           "max symbol dev = " + std::to_string(worst) + ", mu = " + std::to_string(mu) +
           " measured " + std::to_string(measured) + ", argmax (" +
           std::to_string(fig.argmax_t1) + "," + std::to_string(fig.argmax_t2) + ")");
}

// adaptive Simpson quadrature oracle (same construction as the unit tests)
double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1)
         + simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate_1d(const std::function<double(double)>& f, double a, double b, double tol) {
    double m = 0.5 * (a + b);
    return simpson(f, a, b, f(a), f(m), f(b), tol, 48);
}

double quad_kernel(double dx, double dy, double h) {
    const double pref = 2.0 / (std::numbers::pi * std::numbers::pi);
    if (dx == 0.0 && dy == 0.0) {
        auto f = [h](double t) { return 0.5 * h / std::cos(t); };
        return pref * 8.0 * integrate_1d(f, 0.0, std::atan(1.0), 1e-14);
    }
    auto inner = [&](double yq) {
        auto fx = [&](double xq) {
            double rx = dx + xq, ry = dy + yq;
            return 1.0 / std::sqrt(rx * rx + ry * ry);
        };
        return integrate_1d(fx, -0.5 * h, 0.5 * h, 1e-13);
    };
    return pref * integrate_1d(inner, -0.5 * h, 0.5 * h, 1e-13);
}

void criterion_11() {
    double h = 0.15625;
    double worst = 0;
    for (int di = 0; di <= 16; ++di)
        for (int dj = 0; dj <= 16; ++dj) {
            double q = quad_kernel(di * h, dj * h, h);
            double k = kernel_coeff(di * h, dj * h, h);
            worst = std::max(worst, std::fabs(k - q) / std::fabs(q));
        }
    double g00 = kernel_coeff(0, 0, 1.0);
    bool pass = worst <= 1e-9 && std::fabs(g00 - 0.7144150) <= 1e-6;
    report(11, "kernel exactness vs quadrature, G00 closed form", pass,
           "max rel dev = " + std::to_string(worst) + ", G00 = " + std::to_string(g00));
}

} // namespace

int main() {
    std::printf("acceptance suite (EHL_LONG_TESTS=%s)\n",
                std::getenv("EHL_LONG_TESTS") ? "on" : "off");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
